#pragma once

#include <string>
#include <vector>

#include "vss/inviscid.hpp"

namespace vss::jordan {

struct Sample {
  double rho = 0.0, sigma = 0.0;
  std::vector<cplx> predicted;  // alpha0 + pi_k^j
  std::vector<cplx> measured;   // -mu / rho for the matched slow eigenvalues
  double remainder = 0.0;       // max |measured - predicted|
};

struct JordanPrediction {
  int s = 1, m = 1;
  cplx alpha0 = 0.0;
  double d_s_a = 0.0;     // d^s a / d xi1^s
  double p_alt = 0.0;   // 1 / (s! d^s a)
  Mat Q_alt;            // p_alt R^t B^{xi0 xi0} R in symmetric coordinates
  double p = 0.0;         // s! / d^s a, the Puiseux coefficient of the reduced problem
  Vec b;                  // eigenvalues of R^t B R
  double sign_margin = 0.0;  // min eig sgn(p) Q_alt
  bool sign_ok = false;
  std::vector<Sample> samples;
  double exponent = 0.0;     // fitted remainder exponent in |sigma| + rho
  bool exponent_ok = false;
  double theta = 0.0;        // min |Re measured| / |Re predicted| over the split samples
  bool split_ok = false;     // stable/unstable counts agree with the prediction
  std::string note;
};

// Leading roots pi of pi^s = c (p sigma - i q rho) for each q.
std::vector<cplx> predicted_roots(int s, double p, const Vec& q, double sigma, double rho, cplx c);

// The canonical block i [[0, 1, ...], ..., [p sigma - i q rho, 0, ...]] against the predicted roots.
JordanPrediction canonical_block_check(int s, double p, double q, const std::vector<double>& rho,
                                       const std::vector<double>& sigma);

// Glancing (order s >= 2) or hyperbolic (s = 1) point of the endstate on `side`.
JordanPrediction jordan_bifurcation_check(const ShockData& sd, inviscid::Side side, const inviscid::GlancingPoint& g,
                                          const std::vector<double>& rho, const std::vector<double>& sigma);

}  // namespace vss::jordan
