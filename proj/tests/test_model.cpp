#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <random>

#include "vss/model.hpp"

using namespace vss;

namespace {

Vec ns_rest(const Model& m, double rho, double T) {
  return models::ns_state(m.params, rho, Vec::Zero(m.d), T);
}

// Classical normal-shock relations for a calorically perfect gas.
struct NormalShock {
  double rho_ratio, p_ratio, T_ratio;
};
NormalShock normal_shock(double gamma, double M) {
  const double r = (gamma + 1) * M * M / ((gamma - 1) * M * M + 2);
  const double p = 1 + 2 * gamma / (gamma + 1) * (M * M - 1);
  return {r, p, p / r};
}

}  // namespace

TEST_CASE("burgers jacobian and linear fluxes") {
  Model b = models::burgers(1);
  Vec U(1);
  U << 2.0;
  CHECK(model::flux_jacobian(b, U, 0)(0, 0) == doctest::Approx(2.0));
  CHECK(model::flux_jacobian_fd(b, U, 0)(0, 0) == doctest::Approx(2.0).epsilon(1e-8));

  Mat A(2, 2), B = Mat::Identity(2, 2);
  A << 1, 2, 3, 4;
  Model lin = models::linear({A}, {{B}}, 2);
  Vec x1(2), x2(2);
  x1 << 0.3, -1.0;
  x2 << 7.0, 2.5;
  CHECK((model::flux_jacobian_fd(lin, x1, 0) - model::flux_jacobian_fd(lin, x2, 0)).norm() < 1e-8);
}

TEST_CASE("navier-stokes rest state characteristics match the sound speed") {
  for (int d = 1; d <= 3; ++d) {
    Model m = models::navier_stokes(d);
    const double gamma = 1.4, rho = 1.3, T = 0.8;
    Vec U = ns_rest(m, rho, T);
    const double c = std::sqrt(gamma * rho * T / rho);  // c^2 = gamma p / rho with p = rho R T, R = 1
    Eigen::EigenSolver<Mat> es(model::flux_jacobian(m, U, 0), false);
    std::vector<double> a;
    for (int i = 0; i < m.n; ++i) a.push_back(es.eigenvalues()(i).real());
    std::sort(a.begin(), a.end());
    CHECK(a.front() == doctest::Approx(-c).epsilon(1e-10));
    CHECK(a.back() == doctest::Approx(c).epsilon(1e-10));
    for (int i = 1; i + 1 < m.n; ++i) CHECK(std::abs(a[i]) < 1e-10);
  }
}

TEST_CASE("analytic and finite-difference jacobians agree") {
  std::mt19937 gen(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int d = 1; d <= 3; ++d) {
    Model m = models::navier_stokes(d);
    for (int trial = 0; trial < 10; ++trial) {
      Vec vel(d);
      for (int i = 0; i < d; ++i) vel(i) = u(gen);
      Vec U = models::ns_state(m.params, 1.0 + 0.5 * u(gen), vel, 1.0 + 0.5 * u(gen));
      for (int j = 0; j < d; ++j) {
        Mat A = model::flux_jacobian(m, U, j), Af = model::flux_jacobian_fd(m, U, j);
        CHECK((A - Af).norm() <= 1e-6 * A.norm());
      }
    }
  }
  Model iso = models::isentropic();
  Vec U(2);
  U << 0.7, 0.2;
  Mat A = model::flux_jacobian(iso, U, 0), Af = model::flux_jacobian_fd(iso, U, 0);
  CHECK((A - Af).norm() <= 1e-6 * A.norm());
}

TEST_CASE("viscosity block structure and ellipticity on random states") {
  std::mt19937 gen(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Model> ms = {models::burgers(2), models::isentropic(), models::navier_stokes(1),
                           models::navier_stokes(2), models::navier_stokes(3)};
  for (const Model& m : ms) {
    for (int trial = 0; trial < 10; ++trial) {
      Vec U;
      if (m.name == "navier-stokes-ideal") {
        Vec vel(m.d);
        for (int i = 0; i < m.d; ++i) vel(i) = u(gen);
        U = models::ns_state(m.params, 1.0 + 0.5 * u(gen), vel, 1.0 + 0.5 * u(gen));
      } else if (m.name == "isentropic") {
        U = Vec(2);
        U << 1.0 + 0.5 * u(gen), u(gen);
      } else {
        U = Vec::Constant(1, u(gen));
      }
      for (int j = 0; j < m.d; ++j)
        for (int k = 0; k < m.d; ++k) {
          Mat B = model::viscosity(m, j, k, U);
          CHECK(B.topRows(m.ni()).norm() == 0.0);
        }
      CHECK(model::ellipticity_theta(m, U) > 0.0);
    }
  }
}

TEST_CASE("domain errors outside the admissible region") {
  Model m = models::navier_stokes(1);
  Vec U(3);
  U << -1.0, 0.0, 1.0;
  CHECK_THROWS_AS(model::flux(m, 0, U), DomainError);
  Model iso = models::isentropic();
  Vec V(2);
  V << -0.5, 0.0;
  CHECK_THROWS_AS(model::flux_jacobian(iso, V, 0), DomainError);
}

TEST_CASE("rankine-hugoniot residual") {
  Model b = models::burgers(1);
  Vec um(1), up(1);
  um << 1.0;
  up << -1.0;
  CHECK(model::rh_residual(b, um, up, 0.0).norm() == 0.0);
  std::mt19937 gen(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Model m = models::navier_stokes(2);
  for (int trial = 0; trial < 20; ++trial) {
    Vec vel(2);
    vel << u(gen), u(gen);
    Vec U = models::ns_state(m.params, 1.0 + 0.5 * u(gen), vel, 1.0 + 0.5 * u(gen));
    CHECK(model::rh_residual(m, U, U, 3.0 * u(gen)).norm() == 0.0);
  }
}

TEST_CASE("hugoniot solve: burgers branches") {
  Model b = models::burgers(1);
  Vec um(1);
  um << 1.0;
  HugoniotConstraint c;
  c.kind = HugoniotConstraint::Speed;
  c.value = 0.0;
  ShockData sd = model::hugoniot_solve(b, um, c);
  CHECK(sd.Up(0) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(sd.cert.lax);
  CHECK(sd.cert.p == 1);
  CHECK(sd.cert.ell_hat == 1);

  c.seed = um;
  try {
    model::hugoniot_solve(b, um, c);
    FAIL("trivial branch accepted");
  } catch (const NumericalFailure& e) {
    CHECK(e.kind == "not-a-shock");
  }
  CHECK_THROWS(model::make_shock(b, um, um, 0.0));
}

TEST_CASE("hugoniot solve: ideal-gas Mach-2 normal shock") {
  const double gamma = 1.4, M = 2.0;
  const NormalShock ref = normal_shock(gamma, M);
  for (int d = 1; d <= 2; ++d) {
    Model m = models::navier_stokes(d);
    Vec Um = ns_rest(m, 1.0, 1.0);
    HugoniotConstraint c;
    c.kind = HugoniotConstraint::Mach;
    c.value = M;
    ShockData sd = model::hugoniot_solve(m, Um, c);
    CHECK(model::rh_residual(m, sd.Um, sd.Up, sd.s_original).norm() <= 1e-10);
    Vec Wm = model::to_w(m, sd.Um), Wp = model::to_w(m, sd.Up);
    const double rho_ratio = Wp(0) / Wm(0), T_ratio = Wp(d + 1) / Wm(d + 1);
    CHECK(rho_ratio == doctest::Approx(ref.rho_ratio).epsilon(1e-9));
    CHECK(T_ratio == doctest::Approx(ref.T_ratio).epsilon(1e-9));
    CHECK(rho_ratio * T_ratio == doctest::Approx(ref.p_ratio).epsilon(1e-9));
    CHECK(ref.rho_ratio == doctest::Approx(2.6667).epsilon(1e-4));
    CHECK(ref.p_ratio == doctest::Approx(4.5));
    CHECK(ref.T_ratio == doctest::Approx(1.6875));
    // Gas at rest upstream, flow entering from the left: all speeds positive ahead, one negative behind.
    CHECK(sd.cert.lax);
    CHECK(sd.cert.p == 1);
    CHECK(sd.cert.ell_hat == 1);
    CHECK(sd.cert.i_minus == m.n);
    CHECK(sd.cert.i_plus == 1);
  }
}

TEST_CASE("mirrored ideal-gas shock is a Lax (d+2)-shock") {
  for (int d = 1; d <= 2; ++d) {
    Model m = models::navier_stokes(d);
    HugoniotConstraint c;
    c.kind = HugoniotConstraint::Mach;
    c.value = 2.0;
    ShockData sd = model::hugoniot_solve(m, ns_rest(m, 1.0, 1.0), c);
    // Reflect x1 -> -x1: swap the endstates and flip the normal momentum and the speed.
    Vec Um = sd.Up, Up = sd.Um;
    Um(1) = -Um(1);
    Up(1) = -Up(1);
    ShockData mir = model::make_shock(m, Um, Up, -sd.s_original);
    CHECK(mir.cert.lax);
    CHECK(mir.cert.p == d + 2);
    CHECK(mir.cert.ell_hat == 1);
  }
}

TEST_CASE("hugoniot solve: component constraint round trip") {
  Model m = models::navier_stokes(1);
  Vec Um = ns_rest(m, 1.0, 1.0);
  HugoniotConstraint c;
  c.kind = HugoniotConstraint::Mach;
  c.value = 1.5;
  ShockData ref = model::hugoniot_solve(m, Um, c);
  HugoniotConstraint k;
  k.kind = HugoniotConstraint::Component;
  k.component = 0;
  k.value = ref.Up(0);
  k.seed = ref.Up + 0.01 * Vec::Ones(3);
  ShockData sd = model::hugoniot_solve(m, Um, k);
  CHECK((sd.Up - ref.Up).norm() < 1e-8);
  CHECK(sd.s_original == doctest::Approx(ref.s_original).epsilon(1e-9));
}

TEST_CASE("frame shift produces standing data") {
  Model m = models::navier_stokes(1);
  HugoniotConstraint c;
  c.kind = HugoniotConstraint::Mach;
  c.value = 1.1;
  ShockData sd = model::hugoniot_solve(m, ns_rest(m, 1.0, 1.0), c);
  CHECK(model::rh_residual(sd.frame, sd.Um, sd.Up, 0.0).norm() <= 1e-10);
  CHECK(sd.frame.params["frame_speed"].get<double>() == doctest::Approx(sd.s_original));
}
