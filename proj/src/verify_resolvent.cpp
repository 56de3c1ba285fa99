#include <cmath>
#include <map>
#include <random>

#include <Eigen/SparseLU>

#include "vss/verify.hpp"

namespace vss::verify {

namespace {

const cplx I1(0.0, 1.0);

struct Coeffs {
  Mat A1, Aplus, Aminus;
  std::vector<std::vector<Mat>> B;
  std::vector<Mat> dB1;  // V -> (dB^{j0}(U) V) U' for each j
  std::vector<Mat> A;
};

Coeffs coeffs_at(const Model& m, const profile::Profile& p, double x) {
  const int n = m.n, d = m.d;
  Vec U, dU;
  p.eval_u(x, U, &dU);
  Coeffs c;
  c.A.resize(d);
  for (int j = 0; j < d; ++j) c.A[j] = model::flux_jacobian(m, U, j);
  c.A1 = c.A[0];
  Eigen::EigenSolver<Mat> es(c.A1);
  const CMat V = es.eigenvectors(), Vi = V.inverse();
  CVec lp = es.eigenvalues(), lm = es.eigenvalues();
  for (int i = 0; i < n; ++i) {
    if (lp(i).real() > 0) lm(i) = 0.0;
    else lp(i) = 0.0;
  }
  c.Aplus = (V * lp.asDiagonal() * Vi).real();
  c.Aminus = (V * lm.asDiagonal() * Vi).real();
  c.B.assign(d, std::vector<Mat>(d));
  for (int j = 0; j < d; ++j)
    for (int k = 0; k < d; ++k) c.B[j][k] = m.viscosity(j, k, U);
  c.dB1.assign(d, Mat::Zero(n, n));
  const double h = 1e-6 * std::max(1.0, U.norm());
  for (int col = 0; col < n; ++col) {
    Vec up = U, um = U;
    up(col) += h;
    um(col) -= h;
    for (int j = 0; j < d; ++j) c.dB1[j].col(col) = (m.viscosity(j, 0, up) - m.viscosity(j, 0, um)) * dU / (2 * h);
  }
  return c;
}

}  // namespace

SpMat discretize(const profile::Profile& p, const Vec& xi_t, int N, double L) {
  const Model& m = p.shock.frame;
  const int n = m.n, d = m.d;
  const double dx = 2.0 * L / (N + 1);
  auto xi = [&](int j) { return xi_t(j - 1); };
  // Row-block i, column-block j -> accumulated n x n coefficient.
  std::map<std::pair<int, int>, CMat> blocks;
  auto add = [&](int i, int j, const CMat& M) {
    if (i < 0 || i >= N || j < 0 || j >= N) return;  // ghost values are zero
    auto it = blocks.find({i, j});
    if (it == blocks.end()) blocks.emplace(std::make_pair(i, j), M);
    else it->second += M;
  };
  auto valid = [&](int j) { return j >= -1 && j <= N; };

  // Fluxes at the half points between node i and i + 1, i = -1 .. N - 1.
  for (int i = -1; i < N; ++i) {
    const Coeffs c = coeffs_at(m, p, -L + (i + 1.5) * dx);
    CMat Qc = c.dB1[0].cast<cplx>();
    for (int k = 1; k < d; ++k) Qc += I1 * xi(k) * c.B[0][k].cast<cplx>();
    std::vector<std::pair<int, CMat>> flux;
    flux.push_back({i + 1, c.B[0][0].cast<cplx>() / dx + 0.5 * Qc});
    flux.push_back({i, -c.B[0][0].cast<cplx>() / dx + 0.5 * Qc});
    // Upwind-biased convection: second-order reconstruction away from the ends.
    if (valid(i - 1)) {
      flux.push_back({i, -1.5 * c.Aplus.cast<cplx>()});
      flux.push_back({i - 1, 0.5 * c.Aplus.cast<cplx>()});
    } else {
      flux.push_back({i, -c.Aplus.cast<cplx>()});
    }
    if (valid(i + 2)) {
      flux.push_back({i + 1, -1.5 * c.Aminus.cast<cplx>()});
      flux.push_back({i + 2, 0.5 * c.Aminus.cast<cplx>()});
    } else {
      flux.push_back({i + 1, -c.Aminus.cast<cplx>()});
    }
    for (const auto& [j, M] : flux) {
      add(i, j, M / dx);       // + F_{i+1/2} / dx in row i
      add(i + 1, j, -M / dx);  // - F_{i+1/2} / dx in row i + 1
    }
  }
  for (int i = 0; i < N; ++i) {
    const Coeffs c = coeffs_at(m, p, -L + (i + 1) * dx);
    CMat R = CMat::Zero(n, n), S = CMat::Zero(n, n);
    for (int j = 1; j < d; ++j) {
      R += I1 * xi(j) * c.B[j][0].cast<cplx>();
      S += I1 * xi(j) * c.dB1[j].cast<cplx>() - I1 * xi(j) * c.A[j].cast<cplx>();
      for (int k = 1; k < d; ++k) S -= xi(j) * xi(k) * c.B[j][k].cast<cplx>();
    }
    add(i, i + 1, R / (2 * dx));
    add(i, i - 1, -R / (2 * dx));
    add(i, i, S);
  }
  std::vector<Eigen::Triplet<cplx>> trip;
  for (const auto& [ij, M] : blocks)
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        if (M(a, b) != 0.0) trip.emplace_back(ij.first * n + a, ij.second * n + b, M(a, b));
  SpMat Lm(N * n, N * n);
  Lm.setFromTriplets(trip.begin(), trip.end());
  return Lm;
}

ResolventTable resolvent_scan(const profile::Profile& p, const Vec& xi_t, const std::vector<cplx>& lambdas,
                              const ResolventOptions& opt) {
  const int n = p.shock.frame.n, N = opt.N;
  ResolventTable tab;
  tab.xi_t = xi_t;
  tab.N = N;
  tab.L = opt.L > 0 ? opt.L : std::min(p.L, 20.0);
  const double dx = 2.0 * tab.L / (N + 1);
  const SpMat Lm = discretize(p, xi_t, N, tab.L);

  // Weight (1 + |d/dx| + |xi~|) in the discrete sine basis of the Dirichlet Laplacian.
  Mat V(N, N);
  Vec w(N);
  const double xn = xi_t.size() ? xi_t.norm() : 0.0;
  for (int k = 0; k < N; ++k) {
    w(k) = 1.0 + 2.0 / dx * std::sin(M_PI * (k + 1) / (2.0 * (N + 1))) + xn;
    for (int i = 0; i < N; ++i) V(i, k) = std::sqrt(2.0 / (N + 1)) * std::sin(M_PI * (i + 1) * (k + 1) / (N + 1));
  }
  auto weight = [&](const CVec& x, bool inverse) {
    Eigen::Map<const CMat> X(x.data(), n, N);  // column i = node i
    const CMat Y = X * V.cast<cplx>();          // coefficients per mode
    CMat Z = Y;
    for (int k = 0; k < N; ++k) Z.col(k) *= inverse ? 1.0 / w(k) : w(k);
    const CMat out = Z * V.transpose().cast<cplx>();
    return CVec(Eigen::Map<const CVec>(out.data(), n * N));
  };

  SpMat Id(N * n, N * n);
  Id.setIdentity();
  std::mt19937 gen(opt.seed);
  std::normal_distribution<double> g;
  for (const cplx& lam : lambdas) {
    ResolventSample s;
    s.lambda = lam;
    SpMat T = lam * Id - Lm;
    T.makeCompressed();
    SpMat Th = T.adjoint();
    Th.makeCompressed();
    Eigen::SparseLU<SpMat> lu, luh;
    lu.compute(T);
    luh.compute(Th);
    if (lu.info() != Eigen::Success || luh.info() != Eigen::Success) {
      s.near_spectrum = true;
      s.norm = std::numeric_limits<double>::infinity();
      tab.samples.push_back(s);
      tab.any_near_spectrum = true;
      continue;
    }
    CVec x(N * n);
    for (int i = 0; i < x.size(); ++i) x(i) = cplx(g(gen), g(gen));
    x.normalize();
    double sigma = 0.0;
    for (int it = 0; it < opt.power_iters; ++it) {
      const CVec y = weight(lu.solve(weight(x, true)), false);
      const double ns = y.norm();
      const CVec z = weight(luh.solve(weight(y, false)), true);
      x = z / z.norm();
      s.iterations = it + 1;
      if (std::abs(ns - sigma) <= opt.tol * ns) {
        sigma = ns;
        break;
      }
      sigma = ns;
    }
    s.norm = sigma;
    s.near_spectrum = !(sigma < opt.near_spectrum);
    tab.any_near_spectrum = tab.any_near_spectrum || s.near_spectrum;
    if (!s.near_spectrum) tab.sup = std::max(tab.sup, sigma);
    tab.samples.push_back(s);
  }
  return tab;
}

std::vector<cplx> high_frequency_shell(double R, double theta, int count) {
  std::vector<cplx> out;
  const int line = count / 2, arc = count - line;
  for (int k = 0; k < line / 2; ++k) {
    const double y = R * std::pow(4.0, static_cast<double>(k) / std::max(1, line / 2 - 1));
    out.push_back(cplx(-theta, y));
    out.push_back(cplx(-theta, -y));
  }
  const double phimax = M_PI / 2 + std::asin(std::min(1.0, theta / R));
  for (int k = 0; k < arc; ++k) out.push_back(std::polar(R, -phimax + 2 * phimax * k / std::max(1, arc - 1)));
  return out;
}

double tail_exponent(const ResolventTable& t) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0, c = 0;
  for (const auto& s : t.samples) {
    if (s.near_spectrum) continue;
    const double x = std::log(std::abs(s.lambda)), y = std::log(s.norm);
    sx += x, sy += y, sxx += x * x, sxy += x * y, c += 1;
  }
  return (c * sxy - sx * sy) / (c * sxx - sx * sx);
}

}  // namespace vss::verify
