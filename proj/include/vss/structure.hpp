#pragma once

#include <string>
#include <vector>

#include "vss/model.hpp"

namespace vss::structure {

// (A0~, A~^j, B~^{jk}) of the quasilinear natural-variable system, at one state.
struct SymmetricForm {
  bool defined = false;
  std::string note;
  Vec W;
  Mat A0;                            // A0~
  std::vector<Mat> A;                // A~^j
  std::vector<std::vector<Mat>> B;   // B~^{jk}
  Mat A0w;                           // dU/dW
  bool symmetric = false;            // every A~^j symmetric (and B~ symmetric)
  bool a0_block_diag = false;
  bool b_block_structure = false;    // B~ = blockdiag(0, b~)
  double a0_min_eig = 0.0;
  double asym_defect = 0.0;

  Mat A_xi(const Vec& xi) const;
  Mat B_xi(const Vec& xi) const;
  // Quasilinear coefficients A = A0~^{-1} A~^xi and B = A0~^{-1} B~^{xi xi}.
  Mat quasi_A(const Vec& xi) const;
  Mat quasi_B(const Vec& xi) const;
};

SymmetricForm symmetric_form(const Model& m, const Vec& U);

struct CouplingResult {
  bool coupled = false;
  bool indeterminate = false;
  double margin = 0.0;  // smallest block-restricted viscosity (relative to |B|)
  std::string note;
};

// (K0): no eigenvector of A lies in ker B. With a symmetrizer A0 (A0 A, A0 B symmetric) the
// eigenspaces are computed in symmetric coordinates.
CouplingResult genuine_coupling(const Mat& A, const Mat& B, const Mat* A0 = nullptr, double tol = 1e-8);

struct Compensator {
  Mat K;
  double margin = 0.0;  // min eig of Re(C B~ - K A)
  double C = 1.0;
  bool ok = false;
  std::string note;
};

// Skew K with Re(C B~ - K A) > 0, for A = A0~^{-1} A~ and symmetric B~ >= 0.
Compensator compensating_matrix(const Mat& A0, const Mat& A, const Mat& Bt);

// Compensator for direction xi built on the unit sphere and extended with degree one.
Compensator compensator_for(const SymmetricForm& f, const Vec& xi);

// Largest theta with max Re spec(-i A^xi - B^{xi xi}) <= -theta |xi|^2/(1+|xi|^2) on the grid.
double dissipativity_theta(const Mat& A, const Mat& B, const std::vector<double>& magnitudes);
double dissipativity_scan(const Model& m, const Vec& U, const std::vector<Vec>& xi_grid);

std::vector<double> log_grid(double lo, double hi, int count);
std::vector<Vec> sphere_grid(int d, int samples);
// Directions times log-spaced magnitudes in [1e-3, 1e3].
std::vector<Vec> frequency_grid(int d, int directions, int magnitudes);

struct MultiplicityResult {
  bool constant = false;
  bool indeterminate = false;
  std::vector<int> profile;  // cluster sizes at the first grid point
  std::vector<std::vector<int>> per_point;
  std::string note;
};

MultiplicityResult constant_multiplicity_check(const Model& m, const Vec& U, const std::vector<Vec>& sphere);

}  // namespace vss::structure
