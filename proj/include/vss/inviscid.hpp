#pragma once

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "vss/profile.hpp"

namespace vss::inviscid {

using profile::Side;

// (A1)^{-1} (lambda + i A^xi~) at the endstate, in the shock frame.
CMat ibvp_symbol(const ShockData& sd, Side side, const Vec& xi_t, cplx lambda);

// Frame transported along t in [0, 1] by the Kato equation R' = [P', P] R.
struct FrameBundle {
  CMat R;                // transported frame
  CMat Q;                // orthonormal copy, R = Q T
  cplx log_det_t = 0.0;  // log det T
  double span_error = 0.0;
  int steps = 0;
  std::string method = "kato-rk4";
  bool ok = true;
  double fail_at = std::numeric_limits<double>::quiet_NaN();
  std::string failure;
};

struct FrameOptions {
  double max_step = 1.0 / 128;
  double min_step = 1e-9;
  double span_tol = 1e-9;
  double gap_tol = 1e-6;  // relative distance between followed and complementary eigenvalues
};

using MatrixPath = std::function<CMat(double)>;

// R0 must span an invariant subspace of M(0). dM may be empty (finite differences are used).
FrameBundle continue_frames(const MatrixPath& M, const MatrixPath& dM, const CMat& R0, const FrameOptions& opt = {});

// Frame normalisation at an anchor: unit columns with the largest entry real and positive.
void normalize_columns(CMat& R);

// Base point of the frame continuation. The default is (xi~, lambda) = (0, 1).
struct Anchor {
  Vec xi_t;  // empty means zero
  cplx lambda = 1.0;
};

// The linearised jump condition reads [A1 v] = X (lambda [U] + i [F^xi~]), so the determinant is
// built from the flux-variable frames R = A1 V of the decaying modes V.
struct LopatinskiFrames {
  CMat Vm;  // decaying modes at x -> -infinity: stable subspace of A_-, p - 1 columns
  CMat Vp;  // decaying modes at x -> +infinity: unstable subspace of A_+, n - p columns
  CMat Rm, Rp;
  FrameBundle fm, fp;
  cplx lambda_used = 0.0;  // lambda after the boundary offset
};

// Frames for the direction of (xi~, lambda); Re lambda = 0 is evaluated at lambda + eps |(xi~, lambda)|.
LopatinskiFrames lopatinski_frames(const ShockData& sd, const Vec& xi_t, cplx lambda, const Anchor* anchor = nullptr,
                                   const FrameOptions& opt = {});

constexpr double kBoundaryOffset = 1e-6;

// Throws NumericalFailure("frames") when the continuation fails and ("glancing") for a boundary
// point on the glancing set.
cplx lopatinski(const ShockData& sd, const Vec& xi_t, cplx lambda, const Anchor* anchor = nullptr,
                const FrameOptions& opt = {});

cplx liu_majda(const ShockData& sd);

// Jump of the transverse flux sum_j xi~_j [F^{j+1}].
Vec transverse_jump(const ShockData& sd, const Vec& xi_t);

struct CharacteristicData {
  std::vector<Vec> xi;
  std::vector<std::vector<double>> values;  // increasing eigenvalues of A^xi per grid point
  std::vector<int> multiplicities;          // cluster sizes at the first grid point
  bool ordered = true;                      // cluster structure constant across the grid
  double homogeneity_defect = 0.0;          // max |a(2 xi) - 2 a(xi)|
};

CharacteristicData characteristics(const ShockData& sd, Side side, const std::vector<Vec>& sphere);

struct GlancingPoint {
  Vec xi_t;
  int branch = 0;  // cluster index in increasing order
  double xi1 = 0.0;
  double tau = 0.0;
  int order = 2;  // multiplicity s_q of xi1 as a root of tau + a(., xi~)
};

struct GlancingSet {
  std::vector<GlancingPoint> points;
  std::vector<std::string> notes;
};

GlancingSet glancing_set(const ShockData& sd, Side side, const std::vector<Vec>& xi_t_grid);

struct ContourPoint {
  Vec xi_t;
  cplx lambda;
  cplx delta;
  double arg = 0.0;  // cumulative argument
};

struct WindingResult {
  int winding = 0;
  bool resolved = true;
  std::vector<ContourPoint> trace;
};

struct BoundaryRoot {
  Vec xi_t;
  double tau = 0.0;
  bool glancing = false;
  double depth = 0.0;  // min |Delta| over the scan relative to |Delta_lambda| eps
};

struct Resolution {
  int directions = 4;    // xi~ samples on the unit half-sphere of R^{d-1}
  int segment = 801;     // initial samples on the boundary segment
  int arc = 201;         // initial samples on the outer arc
  double radius = 0.0;   // 0: chosen from the characteristic speeds
  int max_refine = 40;
  FrameOptions frames = {1.0 / 64, 1e-9, 1e-9, 1e-6};
};

// Argument-principle count of Delta(xi~, .) over the right half-disk |lambda| <= radius, with the
// boundary segment at Re lambda = eps.
WindingResult lopatinski_winding(const ShockData& sd, const Vec& xi_t, double radius, const Resolution& res = {},
                                 const Anchor* anchor = nullptr);

struct Verdict {
  std::string verdict;  // "strongly stable", "weakly stable", "strongly unstable", "indeterminate"
  cplx delta = 0.0;     // Liu-Majda determinant
  int interior_roots = 0;
  std::vector<BoundaryRoot> boundary_roots;
  std::vector<std::vector<ContourPoint>> traces;
  std::vector<Vec> directions;
  std::vector<std::string> notes;
  double radius = 0.0;
};

Verdict inviscid_verdict(const ShockData& sd, const Resolution& res = {});

// Directions on the unit half-sphere of R^{d-1} (conjugation symmetry supplies the other half).
std::vector<Vec> transverse_directions(int d, int count);

}  // namespace vss::inviscid
