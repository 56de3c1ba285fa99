#include <doctest.h>

#include <cmath>

#include "vss/evans.hpp"

using namespace vss;
using evans::Side;

namespace {

constexpr cplx I(0.0, 1.0);

ShockData burgers_shock(int d, const json& params = json::object()) {
  Vec um = Vec::Constant(1, 1.0), up = Vec::Constant(1, -1.0);
  return model::make_shock(models::burgers(d, params), um, up, 0.0);
}

ShockData ns_shock(int d, double mach) {
  Model m = models::navier_stokes(d);
  HugoniotConstraint c;
  c.kind = HugoniotConstraint::Mach;
  c.value = mach;
  return model::hugoniot_solve(m, models::ns_state(m.params, 1.0, Vec::Zero(d), 1.0), c);
}

const evans::Context& burgers_ctx() {
  static const evans::Context ctx = evans::make_context(profile::solve_profile(burgers_shock(1)));
  return ctx;
}

const evans::Context& ns1_ctx() {
  static const evans::Context ctx = evans::make_context(profile::solve_profile(ns_shock(1, 2.0)));
  return ctx;
}

const evans::Context& ns2_ctx() {
  static const evans::Context ctx = evans::make_context(profile::solve_profile(ns_shock(2, 2.0)));
  return ctx;
}

double max_on_circle(const evans::Context& ctx, double r) {
  double mx = 0.0;
  for (int k = 0; k < 16; ++k) mx = std::max(mx, std::abs(evans::evans(ctx, Vec(), std::polar(r, 2 * M_PI * k / 16)).D));
  return mx;
}

// D(xi~, lambda) = lambda - i a xi~ + b xi~^2: reduced function lambda - i a xi~ + b rho xi~^2,
// boundary root at tau = a xi~ with beta = b xi~^2.
evans::FamilyEvaluator planted_beta(double a, double b) {
  return [=](const Vec& xi, cplx lam) { return lam - I * a * xi(0) + b * xi(0) * xi(0); };
}

}  // namespace

TEST_CASE("coefficients of viscous Burgers") {
  // lambda u + (u^2/2)' + i xi~ (u^2/2)~ u = u'' - xi~^2 u with Phi = u' - u_bar u:
  // Phi' = (lambda + i xi~ u_bar + xi~^2) u and u' = Phi + u_bar u.
  const Model m = models::burgers(2);
  const double ub = -0.3;
  auto c = evans::coefficients(m, Vec::Constant(1, ub), Vec::Constant(1, -0.455));
  for (cplx lam : {cplx(0.0), cplx(0.7, -0.2)})
    for (double xi : {0.0, 1.3}) {
      CMat expect(2, 2);
      expect << 0.0, lam + I * xi * ub + xi * xi, 1.0, ub;
      CHECK((c.eval(Vec::Constant(1, xi), lam) - expect).norm() < 1e-12);
    }
}

TEST_CASE("zero mode and dimension count") {
  for (const evans::Context* ctx : {&burgers_ctx(), &ns1_ctx()}) {
    CHECK(ctx->k_minus + ctx->k_plus == ctx->N);
    const double scale = max_on_circle(*ctx, 0.1);
    CHECK(std::abs(evans::evans(*ctx, Vec(), 0.0).D) <= 1e-8 * scale);
  }
}

TEST_CASE("variable coefficient converges to the endstates") {
  const auto& prof = ns1_ctx().prof;
  auto ode = evans::spectral_ode(prof, Vec(), cplx(0.3, 0.4));
  const double e5 = (ode.A(5.0) - ode.Ap).norm(), e10 = (ode.A(10.0) - ode.Ap).norm();
  const double f5 = (ode.A(-5.0) - ode.Am).norm(), f10 = (ode.A(-10.0) - ode.Am).norm();
  CHECK(e10 < 0.05 * e5);
  CHECK(f10 < 0.05 * f5);
  CHECK(e10 < 1e-3);
  CHECK(f10 < 1e-3);
}

TEST_CASE("domain length and step size") {
  const auto& prof = ns1_ctx().prof;
  evans::Options shorter;
  shorter.L = 0.7 * prof.L;
  evans::Options finer;
  finer.h_max = 0.1;
  finer.dw_frac = 0.004;
  const auto c1 = evans::make_context(prof, shorter), c2 = evans::make_context(prof, finer);
  for (cplx lam : {cplx(0.5, 0.0), cplx(0.2, 3.0), cplx(2.0, -1.0)}) {
    const cplx d0 = evans::evans(ns1_ctx(), Vec(), lam).D;
    CHECK(std::abs(evans::evans(c1, Vec(), lam).D - d0) <= 1e-2 * std::abs(d0));
    CHECK(std::abs(evans::evans(c2, Vec(), lam).D - d0) <= 1e-6 * std::abs(d0));
  }
}

TEST_CASE("conjugation symmetry") {
  const auto& ctx = ns2_ctx();
  for (cplx lam : {cplx(0.3, 0.7), cplx(0.05, -2.0)})
    for (double xi : {0.4, 1.5}) {
      const cplx a = evans::evans(ctx, Vec::Constant(1, xi), lam).D;
      const cplx b = evans::evans(ctx, Vec::Constant(1, -xi), std::conj(lam)).D;
      CHECK(std::abs(a - std::conj(b)) <= 1e-8 * std::abs(a));
    }
}

TEST_CASE("reorthogonalization schedule does not change D") {
  const auto& prof = ns1_ctx().prof;
  evans::Options o;
  o.reortho = 4;
  const auto c4 = evans::make_context(prof, o);
  for (cplx lam : {cplx(0.1, 0.0), cplx(1.0, 5.0)}) {
    const cplx d1 = evans::evans(ns1_ctx(), Vec(), lam).D, d4 = evans::evans(c4, Vec(), lam).D;
    CHECK(std::abs(d1 - d4) <= 1e-8 * std::abs(d1));
  }
}

TEST_CASE("exterior-power evaluation agrees with orthogonalization") {
  for (const evans::Context* ctx : {&burgers_ctx(), &ns1_ctx()})
    for (cplx lam : {cplx(0.2, 0.0), cplx(0.5, 2.0), cplx(3.0, -4.0)}) {
      const cplx d = evans::evans(*ctx, Vec(), lam).D;
      CHECK(std::abs(evans::evans_compound(*ctx, Vec(), lam) - d) <= 1e-6 * std::abs(d));
    }
}

TEST_CASE("winding numbers are contour-homotopy invariant") {
  const auto& ctx = burgers_ctx();
  evans::Evaluator f = [&](cplx l) { return evans::evans(ctx, Vec(), l).D; };
  evans::WindingOptions wo;
  wo.samples = 64;
  CHECK(evans::winding_number(f, evans::circle(0.0, 0.1), wo).winding == 1);
  // D extends analytically into Re lambda < 0 only up to the branch point lambda = -1/4.
  CHECK(evans::winding_number(f, evans::circle(0.05, 0.2), wo).winding == 1);
  CHECK(evans::winding_number(f, evans::circle(cplx(1.0, 1.0), 0.5), wo).winding == 0);
  auto w = evans::winding_number(f, evans::indented_half_disk(1e-3, 10.0), wo);
  CHECK(w.resolved);
  CHECK(w.winding == 0);
}

TEST_CASE("winding of an analytic test function") {
  evans::Evaluator f = [](cplx l) { return (l - 0.3) * (l - cplx(0.0, 0.2)) * (l + 2.0); };
  CHECK(evans::winding_number(f, evans::circle(0.0, 1.0)).winding == 2);
  CHECK(evans::winding_number(f, evans::circle(0.0, 3.0)).winding == 3);
  evans::WindingOptions wo;
  wo.abs_tol = 1e-6;
  CHECK_THROWS_AS(evans::winding_number([](cplx l) { return l - 1.0; }, evans::circle(0.0, 1.0), wo), NumericalFailure);
}

TEST_CASE("planted unstable root") {
  const auto& ctx = burgers_ctx();
  const cplx l0(0.5, 0.5);
  auto planted = [&](const Vec& xi, cplx l) { return (l - l0) * evans::evans(ctx, xi, l).D; };
  evans::WindingOptions wo;
  wo.samples = 64;
  auto v = evans::spectral_verdict(planted, {Vec()}, 1e-3, 10.0, wo);
  CHECK(v.verdict == "strongly unstable");
  CHECK(v.unstable_count == 1);
  CHECK(evans::spectral_verdict(ctx, {Vec()}, 1e-3, 10.0, wo).verdict == "strongly stable");
}

TEST_CASE("vanishing order and transversality constant") {
  const auto& ctx = burgers_ctx();
  auto e = evans::low_freq_expand(ctx, Vec(), 1.0);
  CHECK(e.ell == 1);
  CHECK(e.slope_residual < 0.05);
  // One-dimensional scalar: Delta(lambda) = delta lambda with delta = u+ - u-.
  CHECK(std::abs(e.delta - (-2.0)) < 1e-10);

  // Directional constancy of gamma for the two-dimensional shock.
  const auto& c2 = ns2_ctx();
  std::vector<cplx> gammas;
  double err = 0.0;
  for (int k = 0; k < 10; ++k) {
    const double th = 0.15 + 0.29 * k;
    auto lf = evans::low_freq_expand(c2, Vec::Constant(1, std::cos(th)), cplx(0.2 + std::abs(std::sin(th)), std::sin(th)));
    gammas.push_back(lf.gamma);
    err = std::max(err, lf.gamma_error);
    CHECK(lf.ell == 1);
    CHECK(evans::remainder_slope(lf, lf.gamma) >= 0.9);
  }
  for (const cplx& g : gammas) CHECK(std::abs(g - gammas[0]) <= 3.0 * err + 1e-12);
}

TEST_CASE("beta by finite differences and by root tracking") {
  auto D = planted_beta(1.5, 0.8);
  auto b = evans::beta_coefficient(D, Vec::Constant(1, 2.0), 3.0);
  CHECK(std::abs(b.beta - 3.2) < 1e-6);
  CHECK(b.reliable);

  // Homogeneous of degree one: no O(rho) term, beta = 0.
  auto h = evans::beta_coefficient(planted_beta(1.5, 0.0), Vec::Constant(1, 1.0), 1.5);
  CHECK(std::abs(h.beta) < 1e-8);

  // Constant g_lambda = 0 is a degenerate root.
  CHECK_THROWS_AS(evans::beta_coefficient([](const Vec& xi, cplx) { return cplx(xi(0)); }, Vec::Constant(1, 1.0), 0.0),
                  NumericalFailure);
}

TEST_CASE("beta of a linear-transverse Burgers shock") {
  // Viscous Burgers with flux u^2/2 in x1 and c u in x2 is Galilean-equivalent to the 1-D shock:
  // D(xi~, lambda) = D1(lambda + i c xi~ + xi~^2), so the root lambda = -i c xi~ - xi~^2 has beta = xi~^2.
  const auto sd = burgers_shock(2, {{"transverse_quadratic", 0.0}, {"transverse_linear", {0.6}}});
  const auto ctx = evans::make_context(profile::solve_profile(sd));
  for (double xi : {1.0, -1.0}) {
    auto b = evans::beta_coefficient(ctx, Vec::Constant(1, xi), -0.6 * xi);
    CHECK(std::abs(b.beta - 1.0) < 1e-3);
    CHECK(b.reliable);
  }
  auto bp = evans::beta_coefficient(ctx, Vec::Constant(1, 0.7), -0.42);
  auto bm = evans::beta_coefficient(ctx, Vec::Constant(1, -0.7), 0.42);
  CHECK(std::abs(bp.beta - std::conj(bm.beta)) < 1e-6);
}

TEST_CASE("refined verdict") {
  Vec um(2), up(2);
  um << 1, 0;
  up << -1, 0;
  const ShockData sd = model::make_shock(models::boundary_root_toy({{"w1", 3.0}, {"w2", 2.0}}), um, up, 0.0);
  inviscid::Verdict iv;
  iv.verdict = "indeterminate";
  inviscid::BoundaryRoot br;
  br.xi_t = Vec::Constant(1, 1.0);
  br.tau = 1.5;
  iv.boundary_roots.push_back(br);

  CHECK(evans::refined_verdict(iv, planted_beta(1.5, 0.4), sd).verdict == "strong refined");
  CHECK(evans::refined_verdict(iv, planted_beta(1.5, 0.0), sd).verdict == "weak refined");
  CHECK(evans::refined_verdict(iv, planted_beta(1.5, -0.4), sd).verdict == "fails refined");

  // Re beta < 0 puts the root at i rho tau - beta rho^2, inside Re lambda > 0.
  auto D = planted_beta(1.5, -0.4);
  const double rho = 0.05;
  const cplx centre = I * rho * 1.5 + 0.4 * rho * rho;
  auto w = evans::winding_number([&](cplx l) { return D(Vec::Constant(1, rho), l); }, evans::circle(centre, 0.5 * centre.real()));
  CHECK(w.winding == 1);

  inviscid::Verdict empty;
  empty.verdict = "strongly stable";
  CHECK(evans::refined_verdict(empty, planted_beta(1.5, 0.4), sd).verdict == "strong refined");
  iv.verdict = "strongly unstable";
  CHECK(evans::refined_verdict(iv, planted_beta(1.5, 0.4), sd).verdict == "not applicable");
  br.glancing = true;
  iv.verdict = "weakly stable";
  iv.boundary_roots = {br};
  auto g = evans::refined_verdict(iv, planted_beta(1.5, -0.4), sd);
  CHECK(g.verdict == "strong refined");
  CHECK(g.roots[0].glancing);
}
