#pragma once

#include <string>
#include <vector>

#include "vss/model.hpp"

namespace vss::profile {

enum class Side { Minus, Plus };

// Linearization of the reduced profile ODE w_II' = G(w_II) at one endstate.
struct EndstateLinearization {
  Mat M;
  CVec mu;
  int d_stable = 0;
  int d_unstable = 0;
  double gap = 0.0;  // smallest |Re mu|
  bool h2_ok = true;  // no eigenvalue of M on the imaginary axis (det A1 != 0)
  double det_a1 = 0.0;
  std::string note;
};

EndstateLinearization endstate_matrix(const ShockData& sd, Side side);
TypeCertificate classify_shock(const ShockData& sd);

struct Options {
  double L = 0.0;  // 0: chosen so that exp(-gap L) <= tail
  double tail = 1e-12;
  int points = 4001;
  double rtol = 1e-12;
  double atol = 1e-4;  // absolute tolerance in units of the launch offset
  int phase_component = -1;   // W component pinned at x = 0; -1 picks the largest jump
  double phase_fraction = 0.5;  // pinned value W- + fraction (W+ - W-)
};

struct DecayFit {
  double theta = 0.0;
  double C = 0.0;
  double r2 = 0.0;
  double gap = 0.0;  // spectral gap of M on this side
  bool ok = false;
  std::string advisory;
};

struct Profile {
  ShockData shock;
  std::vector<double> x;
  std::vector<Vec> U, dU, W, dW;
  double L = 0.0;
  int phase_component = 0;
  double phase_value = 0.0;
  std::string phase_kind = "midpoint-value";
  double residual = 0.0;           // max |C11 W' - F1(U) + F1(U-)| at grid points
  double level_set_defect = 0.0;   // max |F1_I(U) - F1_I(U-)|
  double end_mismatch = 0.0;       // |W(far end) - W_target|
  DecayFit minus, plus;

  // Values outside [-L, L] are the endstates.
  void eval_w(double t, Vec& w, Vec* dw = nullptr) const;
  void eval_u(double t, Vec& u, Vec* du = nullptr) const;
  void build_interpolants();

 private:
  linalg::Hermite hw_, hu_;
};

Profile solve_profile(const ShockData& sd, const Options& opt = {});

// Log-linear fits of |U(x) - U+-| over the outer two thirds of each resolvable tail.
void decay_certificate(const Profile& p, DecayFit& minus, DecayFit& plus);

// Right-hand side of the reduced profile ODE and the level-set recovery of w_I.
Vec level_set_w(const ShockData& sd, const Vec& w2, const Vec& guess);
Vec profile_rhs(const ShockData& sd, const Vec& W);  // full W' at a point on the level set

void export_profile(const Profile& p, const std::string& path);
Profile import_profile(const ShockData& sd, const std::string& path);

}  // namespace vss::profile
