#include "oracles.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

using namespace vss;

namespace oracle {

namespace {

// Differentiation matrix on the Chebyshev-Gauss-Lobatto points x_j = cos(pi j / N).
Mat cheb(int N, Vec& x) {
  x.resize(N + 1);
  for (int j = 0; j <= N; ++j) x(j) = std::cos(M_PI * j / N);
  Vec c = Vec::Ones(N + 1);
  c(0) = c(N) = 2.0;
  Mat D(N + 1, N + 1);
  for (int i = 0; i <= N; ++i)
    for (int j = 0; j <= N; ++j)
      if (i != j) D(i, j) = (c(i) / c(j)) * ((i + j) % 2 ? -1.0 : 1.0) / (x(i) - x(j));
  for (int i = 0; i <= N; ++i) D(i, i) = -(D.row(i).sum() - D(i, i));
  return D;
}

struct Pointwise {
  std::vector<Mat> A;                 // F^j Jacobians
  std::vector<std::vector<Mat>> B;    // B^{jk}
  std::vector<Mat> E;                 // (dB^{j1} . v) U'
};

Pointwise at(const Model& m, const profile::Profile& p, double x) {
  const int n = m.n, d = m.d;
  Vec U, dU;
  p.eval_u(x, U, &dU);
  Pointwise c;
  for (int j = 0; j < d; ++j) c.A.push_back(model::flux_jacobian_fd(m, U, j));
  c.B.assign(d, std::vector<Mat>(d));
  for (int j = 0; j < d; ++j)
    for (int k = 0; k < d; ++k) c.B[j][k] = m.viscosity(j, k, U);
  c.E.assign(d, Mat::Zero(n, n));
  for (int col = 0; col < n; ++col) {
    const double h = 1e-6 * std::max(1.0, std::abs(U(col)));
    Vec up = U, um = U;
    up(col) += h;
    um(col) -= h;
    for (int j = 0; j < d; ++j) c.E[j].col(col) = (m.viscosity(j, 0, up) - m.viscosity(j, 0, um)) * dU / (2 * h);
  }
  return c;
}

}  // namespace

Spectrum chebyshev_spectrum(const profile::Profile& p, const Vec& xi_t, int N, double L, double r, double R,
                            double tol) {
  const Model& m = p.shock.frame;
  const int n = m.n, d = m.d, M = N + 1;
  const cplx I(0.0, 1.0);
  Vec s;
  const Mat D1 = cheb(N, s) / L;
  const Mat D2 = D1 * D1;
  auto xi = [&](int j) { return xi_t(j - 1); };

  // L v = P v'' + Q v' + S v, coefficients per node.
  CMat Op = CMat::Zero(n * M, n * M);
  const double hx = 1e-4;
  for (int i = 0; i < M; ++i) {
    const double x = L * s(i);
    const Pointwise c = at(m, p, x), cp = at(m, p, x + hx), cm = at(m, p, x - hx);
    auto dx = [&](const Mat& a, const Mat& b) { return Mat((a - b) / (2 * hx)); };
    CMat P = c.B[0][0].cast<cplx>();
    CMat Q = (-c.A[0] + dx(cp.B[0][0], cm.B[0][0]) + c.E[0]).cast<cplx>();
    CMat S = (-dx(cp.A[0], cm.A[0]) + dx(cp.E[0], cm.E[0])).cast<cplx>();
    for (int j = 1; j < d; ++j) {
      Q += I * xi(j) * (c.B[0][j] + c.B[j][0]).cast<cplx>();
      S += -I * xi(j) * c.A[j].cast<cplx>() + I * xi(j) * dx(cp.B[0][j], cm.B[0][j]).cast<cplx>() +
           I * xi(j) * c.E[j].cast<cplx>();
      for (int k = 1; k < d; ++k) S -= xi(j) * xi(k) * c.B[j][k].cast<cplx>();
    }
    for (int jn = 0; jn < M; ++jn) {
      Op.block(i * n, jn * n, n, n) += D2(i, jn) * P + D1(i, jn) * Q;
    }
    Op.block(i * n, i * n, n, n) += S;
  }

  // Dirichlet rows: s(0) = 1 is x = +L, s(N) = -1 is x = -L. A component is hyperbolic at an end
  // when its row of B^{11} vanishes there; it is pinned only where its characteristic enters.
  std::vector<int> keep;
  for (int i = 0; i < M; ++i)
    for (int a = 0; a < n; ++a) {
      if (i != 0 && i != N) {
        keep.push_back(i * n + a);
        continue;
      }
      const double x = L * s(i);
      Vec U;
      p.eval_u(x, U);
      const Mat B11 = m.viscosity(0, 0, U);
      const bool hyperbolic = B11.row(a).norm() <= 1e-12 * std::max(1.0, B11.norm());
      const double speed = model::flux_jacobian_fd(m, U, 0)(a, a);
      const bool inflow = (i == N && speed > 0) || (i == 0 && speed < 0);
      if (hyperbolic && !inflow) keep.push_back(i * n + a);
    }
  CMat K(keep.size(), keep.size());
  for (size_t a = 0; a < keep.size(); ++a)
    for (size_t b = 0; b < keep.size(); ++b) K(a, b) = Op(keep[a], keep[b]);

  Spectrum out;
  Eigen::ComplexEigenSolver<CMat> es(K, false);
  for (int i = 0; i < es.eigenvalues().size(); ++i) {
    const cplx e = es.eigenvalues()(i);
    out.eig.push_back(e);
    if (std::abs(e) < std::abs(out.nearest_zero)) out.nearest_zero = e;
    if (std::abs(e) >= r && std::abs(e) <= R) {
      out.max_re_in_contour = std::max(out.max_re_in_contour, e.real());
      if (e.real() > tol) ++out.unstable_in_contour;
    }
  }
  return out;
}

}  // namespace oracle
