#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "vss/profile.hpp"

namespace vss::verify {

// ---- constant-coefficient heat-kernel decay ----

struct DecayOptions {
  double T = 200.0;
  double t_min = 1.0;       // fits exclude t < t_min
  int samples = 30;         // log-spaced fit times in [t_min, T]
  double dx = 0.5;
  double box = 0.0;         // 0: sized from the characteristic speeds and viscosity
  double contamination_tol = 1e-10;
};

struct DecayResult {
  double p = 0.0;           // |U(t)|_{L2} ~ t^{-p}
  double fit_residual = 0.0;
  std::vector<double> t, norm;
  double box = 0.0;
  int N = 0;
  double contamination = 0.0;  // relative L2 mass within 10% of the box edge at t = T
  bool contaminated = false;
  std::string advisory;
};

// Evolves U_t = -(i A^xi + B^{xi xi}) U mode by mode on a periodic box from a compactly supported bump.
DecayResult const_coeff_decay(const Model& m, const Vec& U, const DecayOptions& opt = {});

// ---- Kawashima energy ----

struct EnergyOptions {
  int N = 128;
  double length = 8.0 * M_PI;
  double dt = 2e-3;
  int steps = 2500;
  unsigned seed = 1;
  double C = 0.0;  // 0: the smallest power-of-two multiple of the compensator's C that makes E a dissipated norm
};

struct EnergyTrace {
  std::vector<double> t, E, plain;   // E per the Kawashima functional; plain = (|W|^2 + |W_x|^2)/2
  std::vector<double> dx_norm, dxII_norm;
  double C = 1.0;
  Mat K;
  bool compensator = false;          // false when B = 0 or no compensator was found (K = 0)
  bool norm_equivalent = false;
  double max_violation = 0.0;        // max_n (E_{n+1} - E_n)_+ / E_0
  int violation_step = -1;
  double plain_max_increase = 0.0;   // same for the plain energy
  double identity_residual = 0.0;    // dissipation identity, trapezoid in time, relative to max |dE/dt|
  double drift = 0.0;                // |E_end - E_0| / E_0
  std::vector<std::string> log;
};

// One-dimensional A0 W_t + A W_x = B W_xx at the state U in symmetric coordinates.
EnergyTrace kawashima_energy_trace(const Model& m, const Vec& U, const EnergyOptions& opt = {});

// ---- Goodman weight ----

struct GoodmanWeight {
  std::vector<double> x, alpha, Theta;
  double C_star = 1.0;
  double theta = 1.0;       // upwind bound A >= theta of the test equation
  double K = 0.0;           // Theta = K exp(-rate |x|)
  double rate_minus = 1.0, rate_plus = 1.0;
  double integral = 0.0;    // closed form of int Theta over the line
  double ratio = 1.0;       // max alpha / min alpha on the grid
  double ratio_closed = 1.0;  // exp(2 C* int Theta / theta)
};

// Theta from the profile's decay rates, scaled to dominate |U_x|.
GoodmanWeight goodman_weight(const profile::Profile& p, double C_star, double theta, double X = 0.0, int points = 20001);
// Theta(x) = K exp(-rate_minus |x|) for x < 0 and K exp(-rate_plus x) for x > 0.
GoodmanWeight goodman_weight(double K, double rate_minus, double rate_plus, double C_star, double theta, double X,
                             int points = 20001);

struct TransportTrace {
  std::vector<double> t, weighted, unweighted;
  double weighted_max_increase = 0.0;    // relative to the initial value
  double unweighted_max_increase = 0.0;
  double min_speed = 0.0;
};

// W_t + a(x) W_x = 0 on the weight's grid, inflow W = 0, first-order upwind with SSP-RK3.
TransportTrace goodman_transport(const GoodmanWeight& w, const std::function<double(double)>& a, double T,
                                 double x0 = -4.0);

// ---- resolvent scans ----

struct ResolventOptions {
  int N = 400;
  double L = 0.0;         // 0: min(profile L, 20)
  int power_iters = 80;
  double tol = 1e-7;
  double near_spectrum = 1e9;
  unsigned seed = 7;
};

struct ResolventSample {
  cplx lambda;
  double norm = 0.0;
  bool near_spectrum = false;
  int iterations = 0;
};

struct ResolventTable {
  Vec xi_t;
  int N = 0;
  double L = 0.0;
  std::vector<ResolventSample> samples;
  double sup = 0.0;
  bool any_near_spectrum = false;
};

using SpMat = Eigen::SparseMatrix<cplx>;

// Finite-difference L_xi~ in conservative variables on N interior nodes of [-L, L] (Dirichlet ghosts).
SpMat discretize(const profile::Profile& p, const Vec& xi_t, int N, double L);

ResolventTable resolvent_scan(const profile::Profile& p, const Vec& xi_t, const std::vector<cplx>& lambdas,
                              const ResolventOptions& opt = {});

// Samples of {|(xi~, lambda)| >= R, Re lambda >= -theta} for fixed xi~: the line Re lambda = -theta with
// |Im lambda| in [R, 4R] and the arc |lambda| = R with Re lambda >= -theta.
std::vector<cplx> high_frequency_shell(double R, double theta, int count);

// Least-squares slope of log norm against log |lambda|.
double tail_exponent(const ResolventTable& t);

}  // namespace vss::verify
