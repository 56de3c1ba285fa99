#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "vss/profile.hpp"

using namespace vss;

namespace {

ShockData burgers_shock(double a) {
  Model b = models::burgers(1);
  Vec um(1), up(1);
  um << a;
  up << -a;
  return model::make_shock(b, um, up, 0.0);
}

ShockData ns_shock(int d, double mach) {
  Model m = models::navier_stokes(d);
  HugoniotConstraint c;
  c.kind = HugoniotConstraint::Mach;
  c.value = mach;
  return model::hugoniot_solve(m, models::ns_state(m.params, 1.0, Vec::Zero(d), 1.0), c);
}

ShockData isentropic_shock(double vplus) {
  Model m = models::isentropic();
  HugoniotConstraint c;
  c.kind = HugoniotConstraint::Component;
  c.component = 0;
  c.value = vplus;
  Vec Um(2);
  Um << 1.0, 0.0;
  c.seed = Um;
  c.seed(0) = vplus;
  c.seed(1) = -0.1;
  return model::hugoniot_solve(m, Um, c);
}

double max_tanh_error(const profile::Profile& p, double a, double X) {
  double err = 0.0;
  Vec u;
  for (size_t i = 0; i < p.x.size(); ++i) {
    if (std::abs(p.x[i]) > X) continue;
    err = std::max(err, std::abs(p.U[i](0) + a * std::tanh(a * p.x[i] / 2)));
    if (i + 1 < p.x.size()) {
      const double xm = 0.5 * (p.x[i] + p.x[i + 1]);
      p.eval_u(xm, u);
      err = std::max(err, std::abs(u(0) + a * std::tanh(a * xm / 2)));
    }
  }
  return err;
}

}  // namespace

TEST_CASE("burgers endstate linearization") {
  ShockData sd = burgers_shock(1.0);
  auto lm = profile::endstate_matrix(sd, profile::Side::Minus);
  auto lp = profile::endstate_matrix(sd, profile::Side::Plus);
  CHECK(lm.M(0, 0) == doctest::Approx(1.0));
  CHECK(lp.M(0, 0) == doctest::Approx(-1.0));
  CHECK(lm.d_unstable == 1);
  CHECK(lp.d_stable == 1);
}

TEST_CASE("sonic endstate flags (H2)") {
  // In the frame moving with speed -1 the state u = -1 has characteristic speed 0.
  ShockData sd;
  sd.Um = Vec::Constant(1, -1.0);
  sd.Up = Vec::Constant(1, -2.0);
  sd.frame = model::frame_shift(models::burgers(1), -1.0);
  auto lm = profile::endstate_matrix(sd, profile::Side::Minus);
  CHECK_FALSE(lm.h2_ok);
  CHECK(std::abs(lm.det_a1) < 1e-12);
  CHECK_FALSE(profile::classify_shock(sd).lax);
}

TEST_CASE("equal endstates are not a shock") {
  Model b = models::burgers(1);
  Vec u(1);
  u << 1.0;
  ShockData sd;
  sd.Um = u;
  sd.Up = u;
  sd.frame = b;
  CHECK_THROWS_AS(profile::classify_shock(sd), NumericalFailure);
}

TEST_CASE("burgers profile is -tanh(x/2)") {
  ShockData sd = burgers_shock(1.0);
  profile::Profile p = profile::solve_profile(sd);
  CHECK(p.L >= 20.0);
  CHECK(max_tanh_error(p, 1.0, 20.0) <= 1e-8);
  CHECK(p.residual <= 1e-8);
  CHECK(p.minus.theta == doctest::Approx(1.0).epsilon(0.05));
  CHECK(p.plus.theta == doctest::Approx(1.0).epsilon(0.05));
  CHECK(p.minus.ok);
  CHECK(p.plus.ok);
}

TEST_CASE("burgers amplitude family") {
  for (double a : {0.5, 2.0}) {
    profile::Profile p = profile::solve_profile(burgers_shock(a));
    CHECK(max_tanh_error(p, a, p.L * 0.7) <= 1e-8);
    CHECK(p.plus.theta == doctest::Approx(a).epsilon(0.2));
  }
}

TEST_CASE("decay rate independent of L") {
  ShockData sd = burgers_shock(1.0);
  profile::Options o;
  o.L = 30.0;
  profile::Profile p1 = profile::solve_profile(sd, o);
  o.L = 60.0;
  o.points = 8001;
  profile::Profile p2 = profile::solve_profile(sd, o);
  CHECK(p2.minus.theta == doctest::Approx(p1.minus.theta).epsilon(0.01));
  CHECK(p2.plus.theta == doctest::Approx(p1.plus.theta).epsilon(0.01));
}

TEST_CASE("decay tracks a small gap") {
  // Burgers with amplitude a has endstate gaps a; the fitted rate follows it down.
  for (double a : {0.3, 0.15}) {
    profile::Profile p = profile::solve_profile(burgers_shock(a));
    CHECK(p.minus.gap == doctest::Approx(a));
    CHECK(p.minus.theta == doctest::Approx(a).epsilon(0.2));
  }
}

TEST_CASE("translation family") {
  ShockData sd = burgers_shock(1.0);
  profile::Profile p = profile::solve_profile(sd);
  profile::Options o;
  o.phase_fraction = 0.3;
  profile::Profile q = profile::solve_profile(sd, o);
  // q(x) = p(x + h) with the shift determined by the phase values.
  const double h = 2 * std::atanh(-(q.phase_value));  // -tanh(h/2) = value at q's origin
  double err = 0.0;
  Vec u;
  for (size_t i = 0; i < q.x.size(); ++i) {
    if (std::abs(q.x[i]) > 15) continue;
    p.eval_u(q.x[i] + h, u);
    err = std::max(err, std::abs(u(0) - q.U[i](0)));
  }
  CHECK(err <= 1e-7);
}

TEST_CASE("profile derivative solves the linearized profile equation") {
  // Burgers: v = U' must satisfy v' = U v. v' comes from a five-point stencil on the interpolated values.
  profile::Profile p = profile::solve_profile(burgers_shock(1.0));
  double res = 0.0;
  const double h = 0.02;
  Vec u, du, a, b, c, d;
  for (double x = -10; x <= 10; x += 0.37) {
    p.eval_u(x, u, &du);
    p.eval_u(x - 2 * h, a);
    p.eval_u(x - h, b);
    p.eval_u(x + h, c);
    p.eval_u(x + 2 * h, d);
    const double upp = (-a(0) + 16 * b(0) - 30 * u(0) + 16 * c(0) - d(0)) / (12 * h * h);
    res = std::max(res, std::abs(upp - u(0) * du(0)));
  }
  CHECK(res <= 1e-6);
}

TEST_CASE("ideal-gas profile: level set and residual") {
  for (double mach : {1.1, 2.0}) {
    ShockData sd = ns_shock(1, mach);
    profile::Profile p = profile::solve_profile(sd);
    CHECK(p.level_set_defect <= 1e-10);
    CHECK(p.residual <= 1e-8);
    INFO("mach " << mach << " theta- " << p.minus.theta << " gap- " << p.minus.gap << " r2 " << p.minus.r2
                  << " theta+ " << p.plus.theta << " gap+ " << p.plus.gap << " r2 " << p.plus.r2);
    CHECK(p.minus.ok);
    CHECK(p.plus.ok);
  }
}

TEST_CASE("isentropic profile is monotone in v") {
  ShockData sd = isentropic_shock(0.8);
  CHECK(sd.cert.lax);
  CHECK(sd.cert.ell_hat == 1);
  profile::Profile p = profile::solve_profile(sd);
  CHECK(p.residual <= 1e-8);
  const double sgn = sd.Up(0) > sd.Um(0) ? 1.0 : -1.0;
  for (size_t i = 0; i + 1 < p.x.size(); ++i) CHECK(sgn * (p.U[i + 1](0) - p.U[i](0)) >= -1e-12);
}

TEST_CASE("profile export and import round trip") {
  ShockData sd = burgers_shock(1.0);
  profile::Profile p = profile::solve_profile(sd);
  const std::string path = "profile_roundtrip.txt";
  profile::export_profile(p, path);
  profile::Profile q = profile::import_profile(sd, path);
  std::remove(path.c_str());
  REQUIRE(q.x.size() == p.x.size());
  double err = 0.0;
  for (size_t i = 0; i < p.x.size(); ++i) err = std::max(err, (p.U[i] - q.U[i]).norm() + (p.dU[i] - q.dU[i]).norm());
  CHECK(err <= 1e-14);
  CHECK(q.plus.theta == doctest::Approx(p.plus.theta));
}
