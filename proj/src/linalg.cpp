#include "vss/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>

namespace vss::linalg {

Mat sqrtm_spd(const Mat& A) {
  Eigen::SelfAdjointEigenSolver<Mat> es(sym(A));
  Vec d = es.eigenvalues();
  if (d.minCoeff() <= 0.0) throw NumericalFailure("not-spd", "matrix square root of a non-SPD matrix");
  return es.eigenvectors() * d.cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
}

Mat inv_sqrtm_spd(const Mat& A) {
  Eigen::SelfAdjointEigenSolver<Mat> es(sym(A));
  Vec d = es.eigenvalues();
  if (d.minCoeff() <= 0.0) throw NumericalFailure("not-spd", "inverse square root of a non-SPD matrix");
  return es.eigenvectors() * d.cwiseSqrt().cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
}

Mat sym(const Mat& A) { return 0.5 * (A + A.transpose()); }

double min_eig_sym(const Mat& A) {
  Eigen::SelfAdjointEigenSolver<Mat> es(sym(A), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

std::vector<int> cluster_sorted(const std::vector<double>& vals, double tol) {
  std::vector<int> starts;
  if (vals.empty()) return {0};
  starts.push_back(0);
  for (size_t i = 1; i < vals.size(); ++i)
    if (vals[i] - vals[i - 1] > tol) starts.push_back(static_cast<int>(i));
  starts.push_back(static_cast<int>(vals.size()));
  return starts;
}

CMat null_space(const CMat& A, double rel_tol) {
  Eigen::JacobiSVD<CMat> svd(A, Eigen::ComputeFullV);
  const Vec& s = svd.singularValues();
  double smax = s.size() ? s(0) : 0.0;
  int rank = 0;
  for (int i = 0; i < s.size(); ++i)
    if (s(i) > rel_tol * std::max(smax, 1e-300)) ++rank;
  int k = static_cast<int>(A.cols()) - rank;
  return svd.matrixV().rightCols(k);
}

EigenSplit eig(const CMat& A) {
  Eigen::ComplexEigenSolver<CMat> es(A);
  if (es.info() != Eigen::Success) throw NumericalFailure("eig", "complex eigensolver failed");
  EigenSplit out{es.eigenvalues(), es.eigenvectors(), CMat()};
  Eigen::PartialPivLU<CMat> lu(out.vectors);
  out.inverse = lu.inverse();
  return out;
}

CMat projector(const CMat& V, const CMat& Vinv, const std::vector<bool>& mask) {
  const int n = static_cast<int>(V.rows());
  CMat P = CMat::Zero(n, n);
  for (int i = 0; i < n; ++i)
    if (mask[i]) P += V.col(i) * Vinv.row(i);
  return P;
}

CMat qr_q(const CMat& Y, cplx* logdet_r) {
  Eigen::HouseholderQR<CMat> qr(Y);
  const int k = static_cast<int>(Y.cols());
  CMat Q = qr.householderQ() * CMat::Identity(Y.rows(), k);
  CMat R = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  if (logdet_r) {
    cplx acc = 0.0;
    for (int i = 0; i < k; ++i) acc += std::log(R(i, i));
    *logdet_r += acc;
  }
  return Q;
}

double fd_step(double scale) {
  return std::cbrt(std::numeric_limits<double>::epsilon()) * (1.0 + scale);
}

void Hermite::eval(double t, Vec& out, Vec* dout) const {
  const size_t m = x.size();
  size_t i;
  if (t <= x.front()) i = 0;
  else if (t >= x.back()) i = m - 2;
  else i = static_cast<size_t>(std::upper_bound(x.begin(), x.end(), t) - x.begin()) - 1;
  const double h = x[i + 1] - x[i];
  const double s = (t - x[i]) / h;
  const double s2 = s * s, s3 = s2 * s;
  const double h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s;
  const double h01 = -2 * s3 + 3 * s2, h11 = s3 - s2;
  out = h00 * y[i] + h10 * h * dy[i] + h01 * y[i + 1] + h11 * h * dy[i + 1];
  if (dout) {
    const double d00 = (6 * s2 - 6 * s) / h, d10 = 3 * s2 - 4 * s + 1;
    const double d01 = (-6 * s2 + 6 * s) / h, d11 = 3 * s2 - 2 * s;
    *dout = d00 * y[i] + d10 * dy[i] + d01 * y[i + 1] + d11 * dy[i + 1];
  }
}

}  // namespace vss::linalg
