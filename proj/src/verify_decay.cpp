#include <cmath>

#include <unsupported/Eigen/FFT>
#include <unsupported/Eigen/MatrixFunctions>

#include "vss/verify.hpp"

namespace vss::verify {

namespace {

int fft_size(double target) {
  int best = 1 << 30;
  for (int base : {1, 3, 5})
    for (int p = 1; p < 30; ++p) {
      const long v = static_cast<long>(base) << p;
      if (v >= target && v < best) best = static_cast<int>(v);
    }
  return best;
}

// 1-D or 2-D transform of an N^d array stored row-major.
void fft_nd(std::vector<cplx>& a, int N, int d, bool inverse) {
  Eigen::FFT<double> fft;
  std::vector<cplx> in(N), out(N);
  auto pass = [&](long stride, long count, long jump) {
    for (long c = 0; c < count; ++c) {
      for (int i = 0; i < N; ++i) in[i] = a[c * jump + i * stride];
      if (inverse) fft.inv(out, in);
      else fft.fwd(out, in);
      for (int i = 0; i < N; ++i) a[c * jump + i * stride] = out[i];
    }
  };
  if (d == 1) {
    pass(1, 1, 0);
  } else {
    pass(1, N, N);
    pass(N, N, 1);
  }
}

double wavenumber(int i, int N, double box) {
  const int k = i <= N / 2 ? i : i - N;
  return 2.0 * M_PI * k / box;
}

}  // namespace

DecayResult const_coeff_decay(const Model& m, const Vec& U, const DecayOptions& opt) {
  const int d = m.d, n = m.n;
  if (d > 2) throw NumericalFailure("dimension", "heat-kernel decay runs support d <= 2");
  std::vector<Mat> A(d);
  std::vector<std::vector<Mat>> B(d, std::vector<Mat>(d));
  double cmax = 0.0, bmax = 0.0;
  for (int j = 0; j < d; ++j) {
    A[j] = model::flux_jacobian(m, U, j);
    cmax = std::max(cmax, A[j].eigenvalues().cwiseAbs().maxCoeff());
    for (int k = 0; k < d; ++k) B[j][k] = m.viscosity(j, k, U);
    bmax = std::max(bmax, B[j][j].norm());
  }

  DecayResult out;
  // The solution stays within R of the support up to Gaussian tails below 1e-12.
  const double R = cmax * opt.T + std::sqrt(4.0 * std::max(bmax, 1e-12) * opt.T * std::log(1e12)) + 2.0;
  out.box = opt.box > 0 ? opt.box : 2.0 * R / 0.8;
  out.N = fft_size(out.box / opt.dx);
  const int N = out.N;
  const double h = out.box / N;
  long total = 1;
  for (int j = 0; j < d; ++j) total *= N;

  // Compactly supported bump (1 - |x|^2)^4 on the unit ball.
  std::vector<cplx> phi(total);
  for (long idx = 0; idx < total; ++idx) {
    double r2 = 0.0;
    long rem = idx;
    for (int j = d - 1; j >= 0; --j) {
      const double x = -0.5 * out.box + h * static_cast<double>(rem % N);
      rem /= N;
      r2 += x * x;
    }
    phi[idx] = r2 < 1.0 ? std::pow(1.0 - r2, 4) : 0.0;
  }
  fft_nd(phi, N, d, false);
  Vec e = Vec::Constant(n, 0.5);
  e(0) = 1.0;

  for (int k = 0; k < opt.samples; ++k)
    out.t.push_back(opt.t_min * std::pow(opt.T / opt.t_min, static_cast<double>(k) / (opt.samples - 1)));
  std::vector<double> norm2(out.t.size(), 0.0);
  std::vector<CVec> final_modes(total);

  Vec xi(d);
  for (long idx = 0; idx < total; ++idx) {
    long rem = idx;
    // Row-major: the last index varies fastest, so component j of idx is read back to front.
    for (int j = d - 1; j >= 0; --j) {
      xi(j) = wavenumber(static_cast<int>(rem % N), N, out.box);
      rem /= N;
    }
    CMat M = CMat::Zero(n, n);
    for (int j = 0; j < d; ++j) {
      M -= cplx(0.0, xi(j)) * A[j].cast<cplx>();
      for (int k = 0; k < d; ++k) M -= xi(j) * xi(k) * B[j][k].cast<cplx>();
    }
    const CVec u0 = phi[idx] * e.cast<cplx>();
    if (std::abs(phi[idx]) == 0.0) {
      final_modes[idx] = CVec::Zero(n);
      continue;
    }
    Eigen::ComplexEigenSolver<CMat> es(M);
    const CMat& V = es.eigenvectors();
    Eigen::JacobiSVD<CMat> sv(V);
    const bool diag = sv.singularValues()(n - 1) > 1e-8 * sv.singularValues()(0);
    CVec c;
    if (diag) c = V.partialPivLu().solve(u0);
    for (size_t q = 0; q < out.t.size(); ++q) {
      CVec u;
      if (diag) u = V * (es.eigenvalues().array() * out.t[q]).exp().matrix().cwiseProduct(c);
      else u = (M * out.t[q]).exp() * u0;
      norm2[q] += u.squaredNorm();
    }
    final_modes[idx] = diag ? CVec(V * (es.eigenvalues().array() * opt.T).exp().matrix().cwiseProduct(c))
                            : CVec((M * opt.T).exp() * u0);
  }
  for (size_t q = 0; q < out.t.size(); ++q) out.norm.push_back(std::sqrt(norm2[q]));

  // Least-squares fit of log |U| = c - p log t.
  const double cnt = static_cast<double>(out.t.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t q = 0; q < out.t.size(); ++q) {
    const double x = std::log(out.t[q]), y = std::log(out.norm[q]);
    sx += x, sy += y, sxx += x * x, sxy += x * y;
  }
  const double slope = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx), icpt = (sy - slope * sx) / cnt;
  out.p = -slope;
  for (size_t q = 0; q < out.t.size(); ++q)
    out.fit_residual = std::max(out.fit_residual, std::abs(std::log(out.norm[q]) - icpt - slope * std::log(out.t[q])));

  // Boundary influence: mass near the box edge at the final time.
  double edge = 0.0, all = 0.0;
  for (int c = 0; c < n; ++c) {
    std::vector<cplx> f(total);
    for (long idx = 0; idx < total; ++idx) f[idx] = final_modes[idx](c);
    fft_nd(f, N, d, true);
    for (long idx = 0; idx < total; ++idx) {
      long rem = idx;
      bool near = false;
      for (int j = 0; j < d; ++j) {
        const double x = -0.5 * out.box + h * static_cast<double>(rem % N);
        rem /= N;
        near = near || std::abs(x) > 0.4 * out.box;
      }
      const double v = std::norm(f[idx]);
      all += v;
      if (near) edge += v;
    }
  }
  out.contamination = all > 0 ? std::sqrt(edge / all) : 0.0;
  out.contaminated = out.contamination > opt.contamination_tol;
  if (out.contaminated) out.advisory = "solution reaches the box edge; rerun with a larger box";
  return out;
}

}  // namespace vss::verify
