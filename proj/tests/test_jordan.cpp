#include <doctest.h>

#include <cmath>

#include "vss/jordan.hpp"

using namespace vss;
using inviscid::Side;

namespace {

ShockData euler_at_rest(int d) {
  ShockData sd;
  sd.frame = models::navier_stokes(d);
  sd.Um = sd.Up = models::ns_state(sd.frame.params, 1.0, Vec::Zero(d), 1.0);
  return sd;
}

}  // namespace

TEST_CASE("canonical block") {
  auto jp = jordan::canonical_block_check(2, 1.0, 1.0, {1e-4}, {0.0});
  REQUIRE(jp.samples.size() == 1);
  // Direct eigenvalues of i [[0, 1], [-i rho, 0]]: +-sqrt(rho) e^{i pi/4}.
  const double r = std::sqrt(1e-4) / std::sqrt(2.0);
  for (const cplx& v : jp.samples[0].measured) {
    CHECK(std::abs(std::abs(v.real()) - r) < 1e-12);
    CHECK(std::abs(v.real() - v.imag()) < 1e-12);
  }
  CHECK(jp.samples[0].remainder < 1e-14);
  CHECK(jp.exponent_ok);
  CHECK(jp.sign_ok);

  auto j3 = jordan::canonical_block_check(3, -2.0, -0.5, {1e-5, 1e-4, 1e-3}, {-1e-3, 0.0, 2e-3});
  CHECK(j3.exponent_ok);
  CHECK(j3.split_ok);
}

TEST_CASE("predicted roots solve the defining equation") {
  const Vec q = Vec::Constant(2, 0.7);
  const cplx c(0.0, 1.0);
  for (const cplx& pi : jordan::predicted_roots(3, 1.3, q, 0.01, 0.02, c))
    CHECK(std::abs(std::pow(pi, 3) - c * (1.3 * 0.01 - cplx(0.0, 1.0) * 0.7 * 0.02)) < 1e-14);
}

TEST_CASE("acoustic glancing of the gas at rest") {
  const ShockData sd = euler_at_rest(2);
  const Vec xt = Vec::Constant(1, 1.0);
  auto gs = inviscid::glancing_set(sd, Side::Minus, {xt});
  int acoustic = 0;
  for (const auto& g : gs.points) {
    if (g.order != 2) continue;
    ++acoustic;
    CHECK(std::abs(g.xi1) < 1e-8);
    auto jp = jordan::jordan_bifurcation_check(sd, Side::Minus, g, {1e-5, 3e-5, 1e-4, 3e-4, 1e-3}, {0.0});
    CHECK(jp.s == 2);
    CHECK(jp.m == 1);
    // a(xi1) = -+c sqrt(xi1^2 + 1) through -tau = -+c, so d^2 a = -tau at xi1 = 0.
    CHECK(std::abs(jp.d_s_a + g.tau) < 1e-6 * std::abs(g.tau));
    CHECK(jp.sign_ok);
    CHECK(jp.sign_margin > 0.0);
    CHECK(jp.exponent >= 0.7);
    CHECK(jp.split_ok);
    CHECK(jp.theta > 0.5);
    auto js = jordan::jordan_bifurcation_check(sd, Side::Minus, g, {1e-5, 1e-4, 1e-3}, {-1e-3, 1e-3});
    CHECK(js.exponent_ok);
    CHECK(js.split_ok);
  }
  CHECK(acoustic == 2);
}

TEST_CASE("hyperbolic point: first-order real correction") {
  const ShockData sd = euler_at_rest(2);
  // xi = (1, 1): acoustic speeds +-c sqrt(2), simple and not glancing.
  inviscid::GlancingPoint g;
  g.xi_t = Vec::Constant(1, 1.0);
  g.xi1 = 1.0;
  g.order = 1;
  const Model& m = sd.frame;
  Mat A = model::flux_jacobian(m, sd.Um, 0) + model::flux_jacobian(m, sd.Um, 1);
  Eigen::EigenSolver<Mat> es(A);
  double amax = -1e300;
  for (int i = 0; i < A.rows(); ++i) amax = std::max(amax, es.eigenvalues()(i).real());
  g.tau = -amax;
  auto jp = jordan::jordan_bifurcation_check(sd, Side::Minus, g, {1e-5, 1e-4, 1e-3}, {0.0});
  CHECK(jp.s == 1);
  for (const auto& smp : jp.samples) {
    const cplx pi = smp.predicted[0] - jp.alpha0;
    CHECK(std::abs(pi.imag()) < 1e-12 * std::abs(pi));
    CHECK(std::abs(pi.real()) > 0.0);
  }
  CHECK(jp.exponent >= 1.2);
}
