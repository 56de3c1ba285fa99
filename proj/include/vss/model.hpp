#pragma once

#include <functional>
#include <json.hpp>
#include <string>
#include <vector>

#include "vss/linalg.hpp"

namespace vss {

using json = nlohmann::json;

// A system U_t + sum_j F^j(U)_{x_j} = sum_{jk} (B^{jk}(U) U_{x_k})_{x_j}.
// Directions are 0-based: j = 0 is the shock-normal direction x_1.
struct Model {
  std::string name;
  int d = 1;
  int n = 1;
  int r = 1;
  json params = json::object();

  std::function<Vec(int, const Vec&)> flux;
  std::function<Mat(int, int, const Vec&)> viscosity;
  std::function<Mat(int, const Vec&)> flux_jac;  // optional analytic dF^j/dU
  std::function<bool(const Vec&)> admissible;    // optional; empty means everywhere

  // Optional "natural" coordinates W in which the viscosity has zero inviscid columns.
  std::function<Vec(const Vec&)> to_w;    // U -> W
  std::function<Vec(const Vec&)> from_w;  // W -> U
  std::function<Mat(const Vec&)> du_dw;   // dU/dW evaluated at W

  // Optional symmetrizer A0~(W) for the quasilinear W-system.
  std::function<Mat(const Vec&)> symmetrizer;

  int ni() const { return n - r; }
};

// Builders for the shipped models.
namespace models {
Model burgers(int d = 1, const json& params = json::object());
Model isentropic(const json& params = json::object());
Model navier_stokes(int d = 1, const json& params = json::object());
// Two-dimensional 2x2 system whose Lopatinski determinant has the boundary root lambda = i w1 / 2 at
// xi~ = 1 for the shock (1, 0) | (-1, 0). Parameters w1 (default 3), b (default 1) and w2
// (default 2b); w2 != 2b tilts the front-deformation column and moves the root off the axis.
Model boundary_root_toy(const json& params = json::object());
// Constant-coefficient system with linear fluxes F^j = A^j U and viscosities B^{jk}.
Model linear(const std::vector<Mat>& A, const std::vector<std::vector<Mat>>& B, int r);
// Builds a model from a json definition {"name":..., "d":..., "params":{...}}.
Model from_json(const json& def);

// Ideal/van der Waals helpers for the Navier-Stokes model (natural variables W = (rho, u, T)).
struct Thermo {
  double p, p_rho, p_T, e, e_rho, e_T;
};
Thermo ns_thermo(const json& params, double rho, double T);
double ns_sound_speed(const json& params, const Vec& W);
Vec ns_state(const json& params, double rho, const Vec& u, double T);  // natural -> conservative
}  // namespace models

namespace model {

void check_admissible(const Model& m, const Vec& U);

Vec flux(const Model& m, int j, const Vec& U);
Mat viscosity(const Model& m, int j, int k, const Vec& U);

Mat flux_jacobian(const Model& m, const Vec& U, int j);
Mat flux_jacobian_fd(const Model& m, const Vec& U, int j);

// A^xi = sum_j xi_j dF^j(U), B^{xi xi} = sum_{jk} xi_j xi_k B^{jk}(U)
Mat symbol_A(const Model& m, const Vec& U, const Vec& xi);
Mat symbol_B(const Model& m, const Vec& U, const Vec& xi);

// Natural-coordinate helpers (identity when the model defines none).
Vec to_w(const Model& m, const Vec& U);
Vec from_w(const Model& m, const Vec& W);
Mat du_dw(const Model& m, const Vec& W);
// C^{jk}(W) = B^{jk}(U(W)) dU/dW
Mat viscosity_w(const Model& m, int j, int k, const Vec& W);
// dF^j/dW
Mat flux_jacobian_w(const Model& m, int j, const Vec& W);

Vec rh_residual(const Model& m, const Vec& Um, const Vec& Up, double s);

// Returns a copy whose normal flux is F^1(U) - s U (standing-wave frame).
Model frame_shift(const Model& m, double s);

// Largest fitted theta with Re spec(sum xi_j xi_k b_II^{jk}) >= theta |xi|^2 on a sphere grid.
double ellipticity_theta(const Model& m, const Vec& U, int samples = 64);

}  // namespace model

struct TypeCertificate {
  int i_plus = 0, i_minus = 0, d_plus = 0, d_minus = 0;
  int ell_hat = 0;
  int p = 0;  // 1-based Lax index, 0 if not Lax
  bool lax = false;
  std::string note;
};

struct ShockData {
  Vec Um, Up;
  double s_original = 0.0;  // speed before the frame shift; stored data has s = 0
  Model frame;              // frame-shifted model
  TypeCertificate cert;
};

struct HugoniotConstraint {
  enum Kind { Speed, Mach, Component } kind = Speed;
  double value = 0.0;
  int component = 0;
  // Optional seed for U+ (empty: generated from the characteristic family).
  Vec seed;
};

namespace model {
// Solves the Rankine-Hugoniot conditions for U+ and classifies the result.
ShockData hugoniot_solve(const Model& m, const Vec& Um, const HugoniotConstraint& c);
// Builds shock data from a known pair (checks the RH residual).
ShockData make_shock(const Model& m, const Vec& Um, const Vec& Up, double s);
}  // namespace model

}  // namespace vss
