#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace vss {

using cplx = std::complex<double>;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

// Raised when an evaluator is asked for a state outside the model's admissible region.
struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Generic numerical failure carrying a short machine-readable kind.
struct NumericalFailure : std::runtime_error {
  std::string kind;
  NumericalFailure(std::string k, const std::string& msg) : std::runtime_error(msg), kind(std::move(k)) {}
};

namespace linalg {

// Symmetric square root and inverse square root of an SPD matrix.
Mat sqrtm_spd(const Mat& A);
Mat inv_sqrtm_spd(const Mat& A);

double min_eig_sym(const Mat& A);
Mat sym(const Mat& A);

// Groups sorted real values into clusters whose consecutive gaps are <= tol.
// Returns the starting index of each cluster plus a final sentinel.
std::vector<int> cluster_sorted(const std::vector<double>& vals, double tol);

// Orthonormal basis for the numerical null space (singular values <= tol * sigma_max).
CMat null_space(const CMat& A, double rel_tol);

// Spectral projector onto the eigenvalues selected by mask (eigen-decomposition based).
CMat projector(const CMat& V, const CMat& Vinv, const std::vector<bool>& mask);

struct EigenSplit {
  CVec values;
  CMat vectors;
  CMat inverse;
};
EigenSplit eig(const CMat& A);

// Determinant-preserving orthonormalisation: Y = Q R, returns Q and accumulates log det R.
CMat qr_q(const CMat& Y, cplx* logdet_r);

// Central finite-difference step for a function of x with scale s.
double fd_step(double scale);

// Cubic Hermite interpolation on a monotone grid.
struct Hermite {
  std::vector<double> x;
  std::vector<Vec> y, dy;
  void eval(double t, Vec& out, Vec* dout = nullptr) const;
};

}  // namespace linalg
}  // namespace vss
