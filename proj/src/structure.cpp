#include "vss/structure.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

namespace vss::structure {

Mat SymmetricForm::A_xi(const Vec& xi) const {
  Mat S = Mat::Zero(A0.rows(), A0.cols());
  for (size_t j = 0; j < A.size(); ++j) S += xi(j) * A[j];
  return S;
}

Mat SymmetricForm::B_xi(const Vec& xi) const {
  Mat S = Mat::Zero(A0.rows(), A0.cols());
  for (size_t j = 0; j < B.size(); ++j)
    for (size_t k = 0; k < B.size(); ++k) S += xi(j) * xi(k) * B[j][k];
  return S;
}

Mat SymmetricForm::quasi_A(const Vec& xi) const { return A0.partialPivLu().solve(A_xi(xi)); }
Mat SymmetricForm::quasi_B(const Vec& xi) const { return A0.partialPivLu().solve(B_xi(xi)); }

SymmetricForm symmetric_form(const Model& m, const Vec& U) {
  SymmetricForm f;
  if (!m.symmetrizer) {
    f.note = "model supplies no symmetrizer";
    return f;
  }
  const int n = m.n, ni = m.ni();
  f.W = model::to_w(m, U);
  f.A0w = model::du_dw(m, f.W);
  f.A0 = m.symmetrizer(f.W);
  if (!f.A0.allFinite()) {
    f.note = "symmetrizer undefined at this state";
    return f;
  }
  Mat Minv = f.A0 * f.A0w.inverse();  // multiplier applied to the W-system
  f.A.resize(m.d);
  f.B.assign(m.d, std::vector<Mat>(m.d));
  double defect = (f.A0 - f.A0.transpose()).norm();
  double scale = f.A0.norm();
  for (int j = 0; j < m.d; ++j) {
    f.A[j] = Minv * model::flux_jacobian_w(m, j, f.W);
    defect = std::max(defect, (f.A[j] - f.A[j].transpose()).norm() / std::max(1.0, f.A[j].norm()));
    for (int k = 0; k < m.d; ++k) f.B[j][k] = Minv * model::viscosity_w(m, j, k, f.W);
  }
  f.a0_min_eig = linalg::min_eig_sym(f.A0);
  f.asym_defect = defect / std::max(1.0, scale);
  f.symmetric = f.asym_defect <= 1e-8 && f.a0_min_eig > 0.0;
  bool bd = true;
  for (int i = 0; i < ni; ++i)
    for (int j = ni; j < n; ++j) bd = bd && f.A0(i, j) == 0.0 && f.A0(j, i) == 0.0;
  f.a0_block_diag = bd;
  bool bs = true;
  for (int j = 0; j < m.d; ++j)
    for (int k = 0; k < m.d; ++k) {
      const Mat& b = f.B[j][k];
      double s = std::max(1.0, b.norm());
      bs = bs && b.topRows(ni).norm() <= 1e-12 * s && b.leftCols(ni).norm() <= 1e-12 * s;
    }
  f.b_block_structure = bs;
  f.defined = true;
  if (!f.symmetric) f.note = "first-order symmetry fails (A0~ A^j not symmetric or A0~ not positive)";
  return f;
}

CouplingResult genuine_coupling(const Mat& A, const Mat& B, const Mat* A0, double tol) {
  CouplingResult out;
  const int n = static_cast<int>(A.rows());
  const double bnorm = std::max(B.norm(), 1e-300);
  if (A0) {
    Mat S = linalg::sqrtm_spd(*A0), Si = linalg::inv_sqrtm_spd(*A0);
    Mat As = linalg::sym(S * A * Si);
    Mat Bs = S * B * Si;
    Eigen::SelfAdjointEigenSolver<Mat> es(As);
    std::vector<double> a(es.eigenvalues().data(), es.eigenvalues().data() + n);
    const double ctol = 1e-8 * std::max(1.0, As.norm());
    auto starts = linalg::cluster_sorted(a, ctol);
    double margin = std::numeric_limits<double>::infinity();
    for (size_t c = 0; c + 1 < starts.size(); ++c) {
      Mat Q = es.eigenvectors().middleCols(starts[c], starts[c + 1] - starts[c]);
      Eigen::JacobiSVD<Mat> svd(Bs * Q);
      margin = std::min(margin, svd.singularValues().minCoeff() / std::max(Bs.norm(), 1e-300));
    }
    out.margin = margin;
    out.coupled = margin > tol;
    return out;
  }
  Eigen::EigenSolver<Mat> es(A);
  std::vector<double> a(n);
  const double anorm = std::max(1.0, A.norm());
  for (int i = 0; i < n; ++i) {
    if (std::abs(es.eigenvalues()(i).imag()) > 1e-8 * anorm) {
      out.indeterminate = true;
      out.note = "A is not real-diagonalizable";
      return out;
    }
    a[i] = es.eigenvalues()(i).real();
  }
  std::sort(a.begin(), a.end());
  auto starts = linalg::cluster_sorted(a, 1e-8 * anorm);
  double margin = std::numeric_limits<double>::infinity();
  int dims = 0;
  for (size_t c = 0; c + 1 < starts.size(); ++c) {
    double mean = 0.0;
    int mult = starts[c + 1] - starts[c];
    for (int i = starts[c]; i < starts[c + 1]; ++i) mean += a[i] / mult;
    CMat N = linalg::null_space((A - mean * Mat::Identity(n, n)).cast<cplx>(), 1e-7);
    dims += static_cast<int>(N.cols());
    if (N.cols() == 0) continue;
    Eigen::JacobiSVD<CMat> svd(B.cast<cplx>() * N);
    margin = std::min(margin, svd.singularValues().minCoeff() / bnorm);
  }
  if (dims < n) {
    out.indeterminate = true;
    out.note = "A is defective within the cluster tolerance";
  }
  out.margin = margin;
  out.coupled = margin > tol;
  return out;
}

Compensator compensating_matrix(const Mat& A0, const Mat& A, const Mat& Bt) {
  Compensator out;
  const int n = static_cast<int>(A.rows());
  out.K = Mat::Zero(n, n);
  if (n == 1) {
    out.margin = Bt(0, 0);
    out.ok = out.margin > 0.0;
    return out;
  }
  Mat S = linalg::sqrtm_spd(A0), Si = linalg::inv_sqrtm_spd(A0);
  Mat As = linalg::sym(S * A * Si);
  Mat Bs = linalg::sym(Si * Bt * Si);
  Eigen::SelfAdjointEigenSolver<Mat> es(As);
  const Mat& Q = es.eigenvectors();
  const Vec& a = es.eigenvalues();
  std::vector<double> av(a.data(), a.data() + n);
  auto starts = linalg::cluster_sorted(av, 1e-8 * std::max(1.0, As.norm()));
  std::vector<int> block(n);
  for (size_t c = 0; c + 1 < starts.size(); ++c)
    for (int i = starts[c]; i < starts[c + 1]; ++i) block[i] = static_cast<int>(c);
  Mat Bq = Q.transpose() * Bs * Q;
  Mat Kq = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (block[i] != block[j]) Kq(i, j) = 2.0 * Bq(i, j) / (a(j) - a(i));
  Mat Kfull = S * (Q * Kq * Q.transpose()) * S;
  // Exact skewness: keep the strict upper triangle and mirror it.
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double v = 0.5 * (Kfull(i, j) - Kfull(j, i));
      out.K(i, j) = v;
      out.K(j, i) = -v;
    }
  double C = 1.0;
  double margin = linalg::min_eig_sym(C * Bt - out.K * A);
  while (margin <= 0.0 && C < 65536.0) {
    C *= 2.0;
    margin = linalg::min_eig_sym(C * Bt - out.K * A);
  }
  out.C = C;
  out.margin = margin;
  const double floor = 1e-10 * std::max(1.0, Bt.norm());
  out.ok = margin > floor;
  if (!out.ok) out.note = "positivity not reached at C = " + std::to_string(C) + ", margin " + std::to_string(margin);
  return out;
}

Compensator compensator_for(const SymmetricForm& f, const Vec& xi) {
  const double r = xi.norm();
  if (r == 0.0) {
    Compensator z;
    z.K = Mat::Zero(f.A0.rows(), f.A0.cols());
    z.ok = true;
    return z;
  }
  Vec e = xi / r;
  Compensator c = compensating_matrix(f.A0, f.quasi_A(e), f.B_xi(e));
  c.K *= r;
  return c;
}

double dissipativity_theta(const Mat& A, const Mat& B, const std::vector<double>& magnitudes) {
  double theta = std::numeric_limits<double>::infinity();
  const cplx I(0, 1);
  for (double x : magnitudes) {
    CMat S = -I * x * A.cast<cplx>() - (x * x) * B.cast<cplx>();
    Eigen::ComplexEigenSolver<CMat> es(S, false);
    double mr = es.eigenvalues().real().maxCoeff();
    theta = std::min(theta, -mr * (1 + x * x) / (x * x));
  }
  return theta;
}

std::vector<double> log_grid(double lo, double hi, int count) {
  std::vector<double> g(count);
  for (int i = 0; i < count; ++i) g[i] = lo * std::pow(hi / lo, count == 1 ? 0.0 : double(i) / (count - 1));
  return g;
}

std::vector<Vec> sphere_grid(int d, int samples) {
  std::vector<Vec> out;
  if (d == 1) {
    out.push_back(Vec::Ones(1));
    out.push_back(-Vec::Ones(1));
  } else if (d == 2) {
    for (int i = 0; i < samples; ++i) {
      double a = 2 * M_PI * i / samples;
      Vec v(2);
      v << std::cos(a), std::sin(a);
      out.push_back(v);
    }
  } else {
    const int nt = std::max(2, static_cast<int>(std::sqrt(samples / 2.0)));
    for (int i = 0; i <= nt; ++i) {
      double th = M_PI * i / nt;
      const int np = (i == 0 || i == nt) ? 1 : 2 * nt;
      for (int k = 0; k < np; ++k) {
        double ph = M_PI * k / nt;
        Vec v = Vec::Zero(d);
        v(0) = std::cos(th);
        v(1) = std::sin(th) * std::cos(ph);
        v(2) = std::sin(th) * std::sin(ph);
        out.push_back(v);
      }
    }
  }
  return out;
}

std::vector<Vec> frequency_grid(int d, int directions, int magnitudes) {
  std::vector<Vec> out;
  for (const Vec& e : sphere_grid(d, directions))
    for (double r : log_grid(1e-3, 1e3, magnitudes)) out.push_back(r * e);
  return out;
}

double dissipativity_scan(const Model& m, const Vec& U, const std::vector<Vec>& xi_grid) {
  double theta = std::numeric_limits<double>::infinity();
  const cplx I(0, 1);
  for (const Vec& xi : xi_grid) {
    const double x2 = xi.squaredNorm();
    if (x2 == 0.0) continue;
    CMat S = -I * model::symbol_A(m, U, xi).cast<cplx>() - model::symbol_B(m, U, xi).cast<cplx>();
    Eigen::ComplexEigenSolver<CMat> es(S, false);
    double mr = es.eigenvalues().real().maxCoeff();
    theta = std::min(theta, -mr * (1 + x2) / x2);
  }
  return theta;
}

MultiplicityResult constant_multiplicity_check(const Model& m, const Vec& U, const std::vector<Vec>& sphere) {
  MultiplicityResult out;
  out.constant = true;
  for (const Vec& xi : sphere) {
    Mat A = model::symbol_A(m, U, xi);
    Eigen::EigenSolver<Mat> es(A, false);
    const double scale = std::max(1.0, A.norm());
    std::vector<double> a(m.n);
    for (int i = 0; i < m.n; ++i) {
      if (std::abs(es.eigenvalues()(i).imag()) > 1e-8 * scale) {
        out.indeterminate = true;
        out.note = "complex characteristic speed (not hyperbolic)";
      }
      a[i] = es.eigenvalues()(i).real();
    }
    std::sort(a.begin(), a.end());
    const double tol = 1e-8 * scale;
    for (int i = 1; i < m.n; ++i) {
      double gap = a[i] - a[i - 1];
      if (gap > tol && gap <= 10 * tol) {
        out.indeterminate = true;
        out.note = "eigenvalue gap within 10x the cluster tolerance";
      }
    }
    auto starts = linalg::cluster_sorted(a, tol);
    std::vector<int> sizes;
    for (size_t c = 0; c + 1 < starts.size(); ++c) sizes.push_back(starts[c + 1] - starts[c]);
    if (out.per_point.empty()) out.profile = sizes;
    else if (sizes != out.profile) out.constant = false;
    out.per_point.push_back(sizes);
  }
  return out;
}

}  // namespace vss::structure
