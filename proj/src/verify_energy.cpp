#include <cmath>
#include <random>

#include "vss/structure.hpp"
#include "vss/verify.hpp"

namespace vss::verify {

namespace {

const cplx I1(0.0, 1.0);

struct Pieces {
  Mat A0, At, Bt, A, A0inv;
};

// Hermitian energy matrix of one Fourier mode and d/dt of the mode energy by the dissipation identity.
CMat energy_matrix(const Pieces& p, const Mat& K, double C, double xi) {
  return C * (1.0 + xi * xi) * p.A0.cast<cplx>() + I1 * xi * K.cast<cplx>();
}

double dissipation(const Pieces& p, const Mat& K, double C, double xi, const CVec& w) {
  const CVec wx = I1 * xi * w, wxx = -xi * xi * w;
  const Mat S = linalg::sym(C * p.Bt - K * p.A);
  const double t1 = -(wx.adjoint() * S.cast<cplx>() * wx)(0).real();
  const double t2 = (K.cast<cplx>() * wx).dot((p.A0inv * p.Bt).cast<cplx>() * wxx).real();
  const double t3 = -C * (wxx.adjoint() * p.Bt.cast<cplx>() * wxx)(0).real();
  return t1 + t2 + t3;
}

}  // namespace

EnergyTrace kawashima_energy_trace(const Model& m, const Vec& U, const EnergyOptions& opt) {
  const auto sf = structure::symmetric_form(m, U);
  if (!sf.defined) throw NumericalFailure("model", "no symmetric form: " + sf.note);
  const int n = m.n, N = opt.N;
  Pieces p;
  p.A0 = sf.A0;
  p.At = sf.A[0];
  p.Bt = sf.B[0][0];
  p.A0inv = p.A0.inverse();
  p.A = p.A0inv * p.At;

  EnergyTrace tr;
  tr.K = Mat::Zero(n, n);
  double C = 1.0;
  if (p.Bt.norm() > 1e-14) {
    auto comp = structure::compensating_matrix(p.A0, p.A, p.Bt);
    if (comp.ok) {
      tr.K = comp.K;
      C = comp.C;
      tr.compensator = true;
    } else {
      tr.log.push_back("no compensator: " + comp.note);
    }
  } else {
    tr.log.push_back("B = 0: K = 0");
  }

  std::vector<double> xi(N);
  for (int i = 0; i < N; ++i) xi[i] = 2.0 * M_PI * (i <= N / 2 ? i : i - N) / opt.length;
  std::vector<double> probe = structure::log_grid(1e-3, 1e3, 61);
  for (double x : xi) probe.push_back(std::abs(x));

  // E must be a norm, and its derivative negative for xi != 0 (when there is dissipation).
  auto admissible = [&](double c) {
    for (double x : probe) {
      Eigen::SelfAdjointEigenSolver<CMat> e(energy_matrix(p, tr.K, c, x));
      if (e.eigenvalues()(0) <= 0.0) return false;
      if (!tr.compensator || x == 0.0) continue;
      const CMat Mx = (p.A0inv * (-I1 * x * p.At - x * x * p.Bt).cast<cplx>()).eval();
      const CMat E = energy_matrix(p, tr.K, c, x);
      const CMat D = E * Mx + Mx.adjoint() * E;
      Eigen::SelfAdjointEigenSolver<CMat> ed(0.5 * (D + D.adjoint()));
      if (ed.eigenvalues()(n - 1) >= 0.0) return false;
    }
    return true;
  };
  if (opt.C > 0) {
    C = opt.C;
    tr.norm_equivalent = admissible(C);
  } else {
    for (int k = 0; k < 60 && !(tr.norm_equivalent = admissible(C)); ++k) C *= 2.0;
  }
  tr.C = C;
  if (!tr.norm_equivalent) tr.log.push_back("E is not a dissipated norm at C = " + std::to_string(C));

  // Random real data with smooth spectrum.
  std::mt19937 gen(opt.seed);
  std::normal_distribution<double> g;
  std::vector<CVec> w(N, CVec::Zero(n));
  for (int i = 1; i < N / 2; ++i) {
    const double damp = std::exp(-std::pow(xi[i] / 4.0, 2));
    for (int c = 0; c < n; ++c) w[i](c) = damp * cplx(g(gen), g(gen));
    w[N - i] = w[i].conjugate();
  }
  for (int c = 0; c < n; ++c) w[0](c) = g(gen);

  std::vector<CMat> M(N), E(N);
  for (int i = 0; i < N; ++i) {
    M[i] = p.A0inv.cast<cplx>() * (-I1 * xi[i] * p.At.cast<cplx>() - xi[i] * xi[i] * p.Bt.cast<cplx>());
    E[i] = energy_matrix(p, tr.K, C, xi[i]);
  }
  const int r = m.r;
  auto record = [&](double t, double& rate) {
    double e = 0.0, pl = 0.0, dx = 0.0, dxii = 0.0;
    rate = 0.0;
    for (int i = 0; i < N; ++i) {
      e += 0.5 * (w[i].adjoint() * E[i] * w[i])(0).real();
      pl += 0.5 * (1.0 + xi[i] * xi[i]) * w[i].squaredNorm();
      dx += xi[i] * xi[i] * w[i].squaredNorm();
      dxii += xi[i] * xi[i] * w[i].tail(r).squaredNorm();
      rate += dissipation(p, tr.K, C, xi[i], w[i]);
    }
    tr.t.push_back(t);
    tr.E.push_back(e);
    tr.plain.push_back(pl);
    tr.dx_norm.push_back(std::sqrt(dx));
    tr.dxII_norm.push_back(std::sqrt(dxii));
  };

  double rate0 = 0.0, rate1 = 0.0, rate_max = 0.0, id_max = 0.0;
  record(0.0, rate0);
  rate_max = std::abs(rate0);
  const double h = opt.dt;
  for (int s = 0; s < opt.steps; ++s) {
    for (int i = 0; i < N; ++i) {
      const CVec k1 = M[i] * w[i];
      const CVec k2 = M[i] * (w[i] + 0.5 * h * k1);
      const CVec k3 = M[i] * (w[i] + 0.5 * h * k2);
      const CVec k4 = M[i] * (w[i] + h * k3);
      w[i] += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    record((s + 1) * h, rate1);
    const double dE = tr.E[s + 1] - tr.E[s];
    if (dE / tr.E[0] > tr.max_violation) {
      tr.max_violation = dE / tr.E[0];
      tr.violation_step = s;
    }
    tr.plain_max_increase = std::max(tr.plain_max_increase, (tr.plain[s + 1] - tr.plain[s]) / tr.plain[0]);
    id_max = std::max(id_max, std::abs(dE / h - 0.5 * (rate0 + rate1)));
    rate_max = std::max(rate_max, std::abs(rate1));
    rate0 = rate1;
  }
  tr.identity_residual = rate_max > 0 ? id_max / rate_max : id_max;
  tr.drift = std::abs(tr.E.back() - tr.E[0]) / tr.E[0];
  if (tr.max_violation > 1e-10)
    tr.log.push_back("E increased by " + std::to_string(tr.max_violation) + " at step " + std::to_string(tr.violation_step));
  return tr;
}

GoodmanWeight goodman_weight(double K, double rate_minus, double rate_plus, double C_star, double theta, double X,
                             int points) {
  GoodmanWeight w;
  w.C_star = C_star;
  w.theta = theta;
  w.K = K;
  w.rate_minus = rate_minus;
  w.rate_plus = rate_plus;
  const double dx = 2.0 * X / (points - 1);
  for (int i = 0; i < points; ++i) {
    const double x = -X + i * dx;
    w.x.push_back(x);
    w.Theta.push_back(K * std::exp(-(x < 0 ? rate_minus : rate_plus) * std::abs(x)));
  }
  // alpha(x) = exp(-(2 C*/theta) int_0^x Theta), trapezoid from the grid point nearest 0.
  const int i0 = (points - 1) / 2;
  std::vector<double> I(points, 0.0);
  for (int i = i0 + 1; i < points; ++i) I[i] = I[i - 1] + 0.5 * dx * (w.Theta[i] + w.Theta[i - 1]);
  for (int i = i0 - 1; i >= 0; --i) I[i] = I[i + 1] - 0.5 * dx * (w.Theta[i] + w.Theta[i + 1]);
  double lo = 1e300, hi = 0.0;
  for (int i = 0; i < points; ++i) {
    w.alpha.push_back(std::exp(-2.0 * C_star / theta * I[i]));
    lo = std::min(lo, w.alpha.back());
    hi = std::max(hi, w.alpha.back());
  }
  w.ratio = hi / lo;
  w.integral = K == 0.0 ? 0.0 : K * (1.0 / rate_minus + 1.0 / rate_plus);
  w.ratio_closed = std::exp(2.0 * C_star * w.integral / theta);
  return w;
}

GoodmanWeight goodman_weight(const profile::Profile& p, double C_star, double theta, double X, int points) {
  if (!p.minus.ok || !p.plus.ok || p.minus.theta <= 0 || p.plus.theta <= 0)
    throw NumericalFailure("decay", "profile decay certificate missing: int Theta may diverge");
  // Only the resolvable part of the tail: below 1e-9 of the peak, e^{rate |x|} amplifies rounding noise.
  double peak = 0.0, K = 0.0;
  for (const Vec& v : p.dU) peak = std::max(peak, v.norm());
  for (size_t i = 0; i < p.x.size(); ++i) {
    if (p.dU[i].norm() < 1e-9 * peak) continue;
    const double rate = p.x[i] < 0 ? p.minus.theta : p.plus.theta;
    K = std::max(K, p.dU[i].norm() * std::exp(rate * std::abs(p.x[i])));
  }
  return goodman_weight(K, p.minus.theta, p.plus.theta, C_star, theta, X > 0 ? X : p.L, points);
}

TransportTrace goodman_transport(const GoodmanWeight& w, const std::function<double(double)>& a, double T, double x0) {
  TransportTrace tr;
  const int N = static_cast<int>(w.x.size());
  const double dx = w.x[1] - w.x[0];
  std::vector<double> av(N), W(N), k(N), W1(N), W2(N);
  double amax = 0.0;
  tr.min_speed = 1e300;
  for (int i = 0; i < N; ++i) {
    av[i] = a(w.x[i]);
    amax = std::max(amax, av[i]);
    tr.min_speed = std::min(tr.min_speed, av[i]);
    const double y = w.x[i] - x0;
    W[i] = std::abs(y) < 1.0 ? std::pow(1.0 - y * y, 4) : 0.0;
  }
  if (tr.min_speed <= 0.0) throw NumericalFailure("upwind", "the test equation needs a(x) >= theta > 0");
  auto rhs = [&](const std::vector<double>& u, std::vector<double>& out) {
    out[0] = -av[0] * u[0] / dx;
    for (int i = 1; i < N; ++i) out[i] = -av[i] * (u[i] - u[i - 1]) / dx;
  };
  auto energies = [&](double t) {
    double we = 0.0, ue = 0.0;
    for (int i = 0; i < N; ++i) we += 0.5 * w.alpha[i] * W[i] * W[i] * dx, ue += 0.5 * W[i] * W[i] * dx;
    tr.t.push_back(t);
    tr.weighted.push_back(we);
    tr.unweighted.push_back(ue);
  };
  const int steps = static_cast<int>(std::ceil(T / (0.5 * dx / amax)));
  const double dt = T / steps;
  const int every = std::max(1, steps / 400);
  energies(0.0);
  for (int s = 0; s < steps; ++s) {
    rhs(W, k);
    for (int i = 0; i < N; ++i) W1[i] = W[i] + dt * k[i];
    rhs(W1, k);
    for (int i = 0; i < N; ++i) W2[i] = 0.75 * W[i] + 0.25 * (W1[i] + dt * k[i]);
    rhs(W2, k);
    for (int i = 0; i < N; ++i) W[i] = W[i] / 3.0 + 2.0 / 3.0 * (W2[i] + dt * k[i]);
    if ((s + 1) % every == 0 || s + 1 == steps) energies((s + 1) * dt);
  }
  for (size_t i = 1; i < tr.t.size(); ++i) {
    tr.weighted_max_increase = std::max(tr.weighted_max_increase, (tr.weighted[i] - tr.weighted[i - 1]) / tr.weighted[0]);
    tr.unweighted_max_increase =
        std::max(tr.unweighted_max_increase, (tr.unweighted[i] - tr.unweighted[i - 1]) / tr.unweighted[0]);
  }
  return tr;
}

}  // namespace vss::verify
