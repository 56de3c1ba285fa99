#pragma once

#include <functional>
#include <string>
#include <vector>

#include "vss/inviscid.hpp"
#include "vss/profile.hpp"

namespace vss::evans {

using profile::Side;

// Phase variable Z = (Phi, w_II), where Phi is the linearised normal flux
//   Phi = C^{11} w' + i xi~_k C^{1k} w + (dC^{11} w) W' - A^1 w
// in natural coordinates w. The eigenvalue problem lambda S w = d_j Phi^j becomes Z' = A(x) Z with
//   A = A0 + lambda Al + sum_j xi~_j Aj + sum_jk xi~_j xi~_k Ajk.
struct Coefficients {
  CMat A0, Al;
  std::vector<CMat> Aj;                // d - 1 entries
  std::vector<std::vector<CMat>> Ajk;  // (d - 1) x (d - 1)
  CMat eval(const Vec& xi_t, cplx lambda) const;
  CMat d_rho(const Vec& xi_hat, cplx lambda_hat, double rho) const;  // d/drho of A(rho xi^, rho lambda^)
};

// Coefficients at a profile point (W, W'); W' = 0 gives the endstate pieces.
Coefficients coefficients(const Model& m, const Vec& W, const Vec& dW);

struct SpectralODE {
  int n = 0, r = 0, N = 0;
  int k_plus = 0;   // stable dimension of A_+
  int k_minus = 0;  // unstable dimension of A_-
  Vec xi_t;
  cplx lambda;
  std::function<CMat(double)> A;
  CMat Am, Ap;
};

SpectralODE spectral_ode(const profile::Profile& prof, const Vec& xi_t, cplx lambda);

// Lift of a hyperbolic mode v (conservative variables) to the slow eigenvector (-A1 v, (S^{-1} v)_II)
// of A(0, 0) at an endstate.
CMat lift_modes(const Model& m, const Vec& W, const CMat& V);

struct Options {
  double h_max = 0.25;      // largest Magnus step
  double dw_frac = 0.01;    // largest change of W across a step, relative to |[W]|
  int reortho = 1;          // QR every this many steps
  double L = 0.0;           // 0: the profile's L
  double polar_max = 0.1;   // polar frames below this |(xi~, lambda)|
  inviscid::FrameOptions frames = {1.0 / 32, 1e-9, 1e-9, 1e-6};
};

// Precomputed coefficient pieces on the Magnus mesh of one profile.
struct Context {
  profile::Profile prof;
  Options opt;
  int n = 0, r = 0, N = 0, d = 1;
  int k_plus = 0, k_minus = 0;
  double L = 0.0;
  double rho_polar = 0.0;
  std::vector<double> mesh_minus, mesh_plus;  // from -L to 0 and from +L to 0
  std::vector<Coefficients> nodes_minus, nodes_plus;  // 3 Gauss nodes per step
  Coefficients end_minus, end_plus;
  CMat fast_minus, fast_plus;  // fixed fast frames at (0, 0)
};

Context make_context(const profile::Profile& prof, const Options& opt = {});

struct EvansValue {
  cplx D = 0.0;
  cplx log_D = 0.0;             // log D (any branch)
  cplx log_correction = 0.0;    // sum of log det R over the QR steps and the asymptotic growth factors
  double conditioning = 0.0;    // smallest singular value of [Q-, Q+] at x = 0
  int steps = 0;
  std::string frames;           // "polar" or "radial"
};

// Frames at x = -L (unstable of A_-) and x = +L (stable of A_+). Direction (0, 1) is used at the origin.
CMat initial_frame(const Context& ctx, Side side, const Vec& xi_t, cplx lambda);

EvansValue evans(const Context& ctx, const Vec& xi_t, cplx lambda);

// Exterior-power evaluation of the same determinant. Only for n + r <= 6.
cplx evans_compound(const Context& ctx, const Vec& xi_t, cplx lambda);

struct TracePoint {
  cplx lambda;
  cplx value;
  double arg = 0.0;  // cumulative
};

struct WindingOptions {
  int samples = 256;
  double refine_above = 0.7853981633974483;  // pi/4
  int max_depth = 30;
  double abs_tol = 0.0;  // |f| below this on the contour is reported as a root on the contour
};

struct Winding {
  int winding = 0;
  bool resolved = true;
  double min_abs = 0.0;
  cplx min_at = 0.0;
  std::vector<TracePoint> trace;
};

using Evaluator = std::function<cplx(cplx)>;
using Contour = std::function<cplx(double)>;  // closed curve, parameter in [0, 1]

// Throws NumericalFailure("contour-through-root") when |f| < abs_tol at a sample.
Winding winding_number(const Evaluator& f, const Contour& c, const WindingOptions& opt = {});

Contour circle(cplx center, double radius);
// Boundary of {Re lambda >= 0, r <= |lambda| <= R}, counterclockwise.
Contour indented_half_disk(double r, double R);

struct DirectionVerdict {
  Vec xi_t;
  int winding = 0;
  bool resolved = true;
  bool through_root = false;
  std::string note;
  std::vector<TracePoint> trace;
};

struct SpectralVerdict {
  std::string verdict;  // "strongly stable", "strongly unstable", "weakly-only", "indeterminate"
  std::vector<DirectionVerdict> directions;
  int unstable_count = 0;
  double r = 1e-3, R = 10.0;
};

SpectralVerdict spectral_verdict(const Context& ctx, const std::vector<Vec>& xi_samples, double r = 1e-3,
                                 double R = 10.0, const WindingOptions& wopt = {});

// Same counting for an arbitrary evaluator family xi~ -> f(xi~, lambda) (used for planted roots).
SpectralVerdict spectral_verdict(const std::function<cplx(const Vec&, cplx)>& D, const std::vector<Vec>& xi_samples,
                                 double r = 1e-3, double R = 10.0, const WindingOptions& wopt = {});

// Low-frequency limit along the ray rho (xi^, lambda^).
struct LowFreqExpansion {
  Vec xi_hat;
  cplx lambda_hat;
  int ell = 0;
  double slope = 0.0;
  double slope_residual = 0.0;
  cplx delta_bar = 0.0;  // lim rho^{-ell} D
  cplx delta = 0.0;      // Lopatinski determinant at the same anchor
  cplx gamma = 0.0;
  double error = 0.0;    // extrapolation error estimate of delta_bar
  double gamma_error = 0.0;
  std::vector<double> rho;
  std::vector<cplx> D;
  cplx D0 = 0.0;         // numerical residual of the zero mode, subtracted before extrapolation
};

std::vector<double> default_rho_grid();

LowFreqExpansion low_freq_expand(const Context& ctx, const Vec& xi_hat, cplx lambda_hat,
                                 const std::vector<double>& rho = default_rho_grid());

// Log-log slope of |rho^{-ell} D - gamma Delta| over the expansion's grid.
double remainder_slope(const LowFreqExpansion& e, cplx gamma);

using FamilyEvaluator = std::function<cplx(const Vec&, cplx)>;

struct BetaResult {
  cplx beta = 0.0;       // finite differences of g
  cplx beta_track = 0.0; // root tracking fit
  double disagreement = 0.0;
  bool reliable = true;
  cplx g_lambda = 0.0;
  std::string note;
};

// beta = d_rho g / d_lambda g at (0, i tau), g(rho, lambda) = rho^{-ell} D(rho xi~, rho lambda).
BetaResult beta_coefficient(const FamilyEvaluator& D, const Vec& xi_t, double tau, int ell = 1);
BetaResult beta_coefficient(const Context& ctx, const Vec& xi_t, double tau, int ell = 1);

struct RefinedRoot {
  Vec xi_t;
  double tau = 0.0;
  bool glancing = false;
  cplx beta = 0.0;
  bool frames_independent = true;
  std::string note;
};

struct RefinedVerdict {
  std::string verdict;  // "strong refined", "weak refined", "fails refined", "not applicable"
  std::vector<RefinedRoot> roots;
  std::vector<std::string> notes;
};

RefinedVerdict refined_verdict(const inviscid::Verdict& iv, const FamilyEvaluator& D, const ShockData& sd);

}  // namespace vss::evans
