#include "vss/jordan.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "vss/structure.hpp"

namespace vss::jordan {

namespace {

const cplx I1(0.0, 1.0);

double factorial(int s) {
  double f = 1.0;
  for (int k = 2; k <= s; ++k) f *= k;
  return f;
}

// Greedy nearest matching of each predicted value to a distinct candidate.
std::vector<cplx> match(const std::vector<cplx>& predicted, std::vector<cplx> candidates) {
  std::vector<cplx> out;
  for (const cplx& p : predicted) {
    auto it = std::min_element(candidates.begin(), candidates.end(),
                               [&](const cplx& a, const cplx& b) { return std::abs(a - p) < std::abs(b - p); });
    out.push_back(*it);
    candidates.erase(it);
  }
  return out;
}

void fit_and_signs(JordanPrediction& jp) {
  std::vector<double> lx, ly;
  double worst = 0.0, scale = 0.0;
  jp.split_ok = true;
  jp.theta = std::numeric_limits<double>::infinity();
  for (auto& smp : jp.samples) {
    smp.remainder = 0.0;
    int up_pred = 0, up_meas = 0;
    for (size_t k = 0; k < smp.predicted.size(); ++k) {
      const cplx pi = smp.predicted[k] - jp.alpha0, mu = smp.measured[k] - jp.alpha0;
      smp.remainder = std::max(smp.remainder, std::abs(smp.measured[k] - smp.predicted[k]));
      scale = std::max(scale, std::abs(pi));
      up_pred += pi.real() > 0;
      up_meas += mu.real() > 0;
      if (std::abs(pi.real()) > 1e-12 * std::abs(pi)) jp.theta = std::min(jp.theta, std::abs(mu.real() / pi.real()));
    }
    if (up_pred != up_meas) jp.split_ok = false;
    worst = std::max(worst, smp.remainder);
    lx.push_back(std::log(std::abs(smp.sigma) + smp.rho));
    ly.push_back(std::log(std::max(smp.remainder, 1e-300)));
  }
  if (!std::isfinite(jp.theta)) jp.theta = 0.0;
  jp.split_ok = jp.split_ok && jp.theta > 0.0;
  if (worst <= 1e-12 * std::max(scale, 1e-300)) {
    jp.exponent = std::numeric_limits<double>::infinity();
    jp.note = "remainder at rounding level";
  } else {
    const double n = static_cast<double>(lx.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < lx.size(); ++i) sx += lx[i], sy += ly[i], sxx += lx[i] * lx[i], sxy += lx[i] * ly[i];
    jp.exponent = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  }
  jp.exponent_ok = jp.exponent >= 1.0 / jp.s + 0.2;
  if (!jp.exponent_ok) jp.note = "prediction failure: remainder exponent " + std::to_string(jp.exponent);
}

}  // namespace

std::vector<cplx> predicted_roots(int s, double p, const Vec& q, double sigma, double rho, cplx c) {
  std::vector<cplx> out;
  for (int k = 0; k < q.size(); ++k) {
    const cplx x = c * (p * sigma - I1 * q(k) * rho);
    const cplx root = std::pow(x, 1.0 / s);
    for (int j = 0; j < s; ++j) out.push_back(root * std::polar(1.0, 2.0 * M_PI * j / s));
  }
  return out;
}

JordanPrediction canonical_block_check(int s, double p, double q, const std::vector<double>& rho,
                                       const std::vector<double>& sigma) {
  JordanPrediction jp;
  jp.s = s;
  jp.m = 1;
  jp.p = jp.p_alt = p;
  jp.b = Vec::Constant(1, q / p);
  jp.Q_alt = Mat::Constant(1, 1, q);
  jp.sign_margin = (p > 0 ? 1.0 : -1.0) * q;
  jp.sign_ok = jp.sign_margin > 0.0;
  const Vec qv = Vec::Constant(1, q);
  for (double r : rho)
    for (double sg : sigma) {
      CMat J = CMat::Zero(s, s);
      for (int i = 0; i + 1 < s; ++i) J(i, i + 1) = 1.0;
      J(s - 1, 0) = p * sg - I1 * q * r;
      J *= I1;
      Eigen::ComplexEigenSolver<CMat> es(J);
      Sample smp;
      smp.rho = r;
      smp.sigma = sg;
      smp.predicted = predicted_roots(s, p, qv, sg, r, std::pow(I1, s));
      smp.measured = match(smp.predicted, {es.eigenvalues().data(), es.eigenvalues().data() + s});
      jp.samples.push_back(smp);
    }
  fit_and_signs(jp);
  return jp;
}

JordanPrediction jordan_bifurcation_check(const ShockData& sd, inviscid::Side side, const inviscid::GlancingPoint& g,
                                          const std::vector<double>& rho, const std::vector<double>& sigma) {
  const Model& m = sd.frame;
  const int n = m.n;
  const Vec& U = side == inviscid::Side::Minus ? sd.Um : sd.Up;
  const auto sf = structure::symmetric_form(m, U);
  if (!sf.defined) throw NumericalFailure("model", "no symmetric form at the endstate: " + sf.note);
  const Mat Si = linalg::inv_sqrtm_spd(sf.A0);
  Vec xi(m.d);
  xi(0) = g.xi1;
  for (int j = 1; j < m.d; ++j) xi(j) = g.xi_t(j - 1);
  auto a_hat = [&](double x1) {
    Vec x = xi;
    x(0) = x1;
    return Mat(Si * sf.A_xi(x) * Si);
  };

  JordanPrediction jp;
  jp.s = g.order;
  jp.alpha0 = -I1 * g.xi1;
  Eigen::SelfAdjointEigenSolver<Mat> es0(linalg::sym(a_hat(g.xi1)));
  const double amax = es0.eigenvalues().cwiseAbs().maxCoeff();
  std::vector<int> cluster;
  for (int i = 0; i < n; ++i)
    if (std::abs(es0.eigenvalues()(i) + g.tau) <= 1e-7 * std::max(1.0, amax)) cluster.push_back(i);
  if (cluster.empty()) throw NumericalFailure("glancing", "tau is not a characteristic speed at xi0");
  jp.m = static_cast<int>(cluster.size());
  Mat R(n, jp.m);
  for (int k = 0; k < jp.m; ++k) R.col(k) = es0.eigenvectors().col(cluster[k]);

  // Taylor coefficient a_s of the cluster mean a(xi1) by a least-squares polynomial fit.
  const int s = jp.s, K = s + 3, deg = s + 4;
  const double h = 0.02 * (xi.norm() + 1e-3);
  Mat V(2 * K + 1, deg + 1);
  Vec y(2 * K + 1);
  for (int k = -K; k <= K; ++k) {
    Eigen::SelfAdjointEigenSolver<Mat> es(linalg::sym(a_hat(g.xi1 + k * h)));
    std::vector<double> ev(es.eigenvalues().data(), es.eigenvalues().data() + n);
    std::sort(ev.begin(), ev.end(), [&](double a, double b) { return std::abs(a + g.tau) < std::abs(b + g.tau); });
    double mean = 0.0;
    for (int i = 0; i < jp.m; ++i) mean += ev[i];
    y(k + K) = mean / jp.m;
    for (int e = 0; e <= deg; ++e) V(k + K, e) = std::pow(static_cast<double>(k), e);
  }
  const Vec c = V.colPivHouseholderQr().solve(y);
  const double a_s = c(s) / std::pow(h, s);
  jp.d_s_a = a_s * factorial(s);
  if (std::abs(a_s) <= 1e-10 * std::max(1.0, amax) / std::pow(xi.norm() + 1e-3, s))
    throw NumericalFailure("glancing", "d^s a vanishes at the given order");
  jp.p_alt = 1.0 / (factorial(s) * jp.d_s_a);
  jp.p = 1.0 / a_s;

  const Mat Bh = Si * sf.B_xi(xi) * Si;
  const Mat RBR = linalg::sym(R.transpose() * Bh * R);
  jp.b = Eigen::SelfAdjointEigenSolver<Mat>(RBR).eigenvalues();
  jp.Q_alt = jp.p_alt * RBR;
  jp.sign_margin = linalg::min_eig_sym((jp.p_alt > 0 ? 1.0 : -1.0) * jp.Q_alt);
  jp.sign_ok = jp.sign_margin > 0.0;

  // Reduced problem: a(xi1) - i rho b_k + tau0 + sigma = 0 with alpha = -i xi1, so that
  // pi^s = -(-i)^s (p sigma - i p b_k rho).
  const Vec q = jp.p * jp.b;
  const cplx cs = -std::pow(-I1, s);
  // Slow roots mu = -rho alpha of det P(mu) = 0, P(mu) = mu^2 B^{11} + mu (-A^1 + i rho C) - (lambda A0 + i rho A^xi~ + rho^2 B^{xi~xi~}),
  // with C = sum_k xi~_k (B^{1k} + B^{k1}). The pencil mu E - F is shift-inverted at mu0 so that the
  // infinite eigenvalues of a singular B^{11} go to zero.
  const Mat& A1 = sf.A[0];
  const Mat& B11 = sf.B[0][0];
  Mat C = Mat::Zero(n, n), At = Mat::Zero(n, n), Bt = Mat::Zero(n, n);
  for (int j = 1; j < m.d; ++j) {
    C += g.xi_t(j - 1) * (sf.B[0][j] + sf.B[j][0]);
    At += g.xi_t(j - 1) * sf.A[j];
    for (int k = 1; k < m.d; ++k) Bt += g.xi_t(j - 1) * g.xi_t(k - 1) * sf.B[j][k];
  }
  CMat E = CMat::Zero(2 * n, 2 * n);
  E.topLeftCorner(n, n).setIdentity();
  E.bottomRightCorner(n, n) = B11.cast<cplx>();
  const cplx mu0 = std::polar(0.5 * (1.0 + amax), 0.3);
  for (double r : rho)
    for (double sg : sigma) {
      const cplx lambda = I1 * r * (g.tau + sg);
      const CMat K1 = -A1.cast<cplx>() + I1 * r * C.cast<cplx>();
      const CMat K0 = -(lambda * sf.A0.cast<cplx>() + I1 * r * At.cast<cplx>() + r * r * Bt.cast<cplx>());
      CMat F = CMat::Zero(2 * n, 2 * n);
      F.topRightCorner(n, n).setIdentity();
      F.bottomLeftCorner(n, n) = -K0;
      F.bottomRightCorner(n, n) = -K1;
      const CMat T = (F - mu0 * E).partialPivLu().solve(E);
      Eigen::ComplexEigenSolver<CMat> es(T);
      std::vector<cplx> alpha;
      for (int i = 0; i < T.rows(); ++i) {
        const cplx nu = es.eigenvalues()(i);
        if (std::abs(nu) <= 1e-12 / std::abs(mu0)) continue;
        alpha.push_back(-(mu0 + 1.0 / nu) / r);
      }
      Sample smp;
      smp.rho = r;
      smp.sigma = sg;
      for (const cplx& pi : predicted_roots(s, jp.p, q, sg, r, cs)) smp.predicted.push_back(jp.alpha0 + pi);
      smp.measured = match(smp.predicted, alpha);
      jp.samples.push_back(smp);
    }
  fit_and_signs(jp);
  if (!jp.sign_ok) jp.note = "sgn(p) Q is not positive definite: genuine coupling fails";
  return jp;
}

}  // namespace vss::jordan
