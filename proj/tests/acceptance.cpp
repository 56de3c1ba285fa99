// Acceptance run: one PASS/FAIL line per criterion; the exit status is nonzero if any fails.
#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <string>

#include "kawashima_corpus.hpp"
#include "oracles.hpp"
#include "vss/evans.hpp"
#include "vss/jordan.hpp"
#include "vss/pipeline.hpp"
#include "vss/structure.hpp"
#include "vss/verify.hpp"

using namespace vss;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

ShockData burgers_shock(int d) {
  return model::make_shock(models::burgers(d), Vec::Constant(1, 1.0), Vec::Constant(1, -1.0), 0.0);
}

ShockData ns_shock(int d, double mach) {
  Model m = models::navier_stokes(d);
  HugoniotConstraint c;
  c.kind = HugoniotConstraint::Mach;
  c.value = mach;
  return model::hugoniot_solve(m, models::ns_state(m.params, 1.0, Vec::Zero(d), 1.0), c);
}

struct Line {
  bool pass = false;
  std::string detail;
};

Line c1_profile() {
  const auto t0 = Clock::now();
  const auto p = profile::solve_profile(burgers_shock(1));
  const double elapsed = seconds_since(t0);
  double err = 0.0;
  for (int i = 0; i <= 40000; ++i) {
    const double x = -20.0 + 1e-3 * i;
    Vec u;
    p.eval_u(x, u);
    err = std::max(err, std::abs(u(0) + std::tanh(x / 2)));
  }
  char buf[160];
  std::snprintf(buf, sizeof buf, "max |u + tanh(x/2)| = %.2e on [-20, 20], solve %.3f s", err, elapsed);
  return {err <= 1e-8 && elapsed < 1.0, buf};
}

Line c2_zero_mode(const evans::Context& ctx) {
  double mx = 0.0;
  for (int k = 0; k < 64; ++k) mx = std::max(mx, std::abs(evans::evans(ctx, Vec(), std::polar(0.1, 2 * M_PI * k / 64)).D));
  const double d0 = std::abs(evans::evans(ctx, Vec(), 0.0).D);
  const auto w = evans::winding_number([&](cplx l) { return evans::evans(ctx, Vec(), l).D; }, evans::circle(0.0, 0.1));
  char buf[160];
  std::snprintf(buf, sizeof buf, "|D(0,0)| / max|D| = %.2e, winding on |lambda| = 0.1: %d", d0 / mx, w.winding);
  return {d0 <= 1e-6 * mx && w.winding == 1 && w.resolved, buf};
}

Line c3_spectral() {
  std::vector<Vec> xs;
  for (double x : {0.0, 0.25, 0.5, 1.0, 2.0}) xs.push_back(Vec::Constant(1, x));
  std::string detail;
  bool ok = true;
  for (auto [name, sd, L] : {std::tuple<std::string, ShockData, double>{"Burgers d=2", burgers_shock(2), 15.0},
                             {"NS d=2 Mach 1.1", ns_shock(2, 1.1), 30.0}}) {
    const auto prof = profile::solve_profile(sd);
    const auto ctx = evans::make_context(prof);
    const auto v = evans::spectral_verdict(ctx, xs, 1e-3, 10.0);
    int wsum = 0, oracle_bad = 0;
    double max_re = -1e300;
    for (const auto& dv : v.directions) {
      wsum += std::abs(dv.winding);
      ok = ok && dv.resolved && dv.winding == 0;
    }
    for (const Vec& x : xs) {
      const auto s = oracle::chebyshev_spectrum(prof, x, 160, L, 1e-3, 10.0);
      oracle_bad += s.unstable_in_contour;
      max_re = std::max(max_re, s.max_re_in_contour);
    }
    ok = ok && v.verdict == "strongly stable" && oracle_bad == 0;
    char buf[200];
    std::snprintf(buf, sizeof buf, "%s%s: %zu xi~, sum |winding| = %d, oracle eigenvalues Re > 1e-4 in contour: %d (max Re %.2e)",
                  detail.empty() ? "" : "; ", name.c_str(), xs.size(), wsum, oracle_bad, max_re);
    detail += buf;
  }
  return {ok, detail};
}

Line c4_lowfreq() {
  const auto ctx = evans::make_context(profile::solve_profile(ns_shock(2, 2.0)));
  std::mt19937 gen(11);
  std::normal_distribution<double> g;
  std::vector<cplx> gam;
  double err = 0.0, min_slope = 1e300;
  for (int k = 0; k < 5; ++k) {
    Vec z(3);
    do {
      for (int j = 0; j < 3; ++j) z(j) = g(gen);
      z.normalize();
      z(1) = std::abs(z(1));
    } while (z(1) < 0.1);
    const auto e = evans::low_freq_expand(ctx, z.head(1), cplx(z(1), z(2)));
    gam.push_back(e.gamma);
    err = std::max(err, e.gamma_error);
    min_slope = std::min(min_slope, evans::remainder_slope(e, e.gamma));
  }
  cplx mean = 0.0;
  for (cplx x : gam) mean += x / 5.0;
  double spread = 0.0;
  for (cplx x : gam) spread = std::max(spread, std::abs(x - mean));
  char buf[200];
  std::snprintf(buf, sizeof buf, "NS d=2 Mach 2, 5 directions: min slope %.3f, gamma = %.6f%+.1ei, spread %.2e vs 3 x error %.2e",
                min_slope, mean.real(), mean.imag(), spread, 3 * err);
  return {min_slope >= 0.9 && spread <= 3 * err, buf};
}

Line c5_liu_majda() {
  const cplx db = inviscid::liu_majda(burgers_shock(1));
  const ShockData ns = ns_shock(2, 1.1);
  const cplx d1 = inviscid::liu_majda(ns), d2 = inviscid::liu_majda(ns);
  inviscid::FrameOptions fine;
  fine.max_step = 1.0 / 512;
  const cplx d3 = inviscid::lopatinski(ns, Vec::Zero(1), 1.0, nullptr, fine);
  const double var = std::max(std::abs(d1 - d2), std::abs(d1 - d3)) / std::abs(d1);
  char buf[200];
  std::snprintf(buf, sizeof buf, "Burgers delta - (u+ - u-) = %.1e; NS Mach 1.1 delta = %.10f, relative change on recomputation %.1e",
                std::abs(db - cplx(-2.0)), d1.real(), var);
  return {std::abs(db + 2.0) <= 4 * 2.2e-16 && std::abs(d1) > 1e-8 && var <= 1e-8, buf};
}

Line c6_kawashima() {
  const auto cases = corpus::make(100, 2024);
  const auto mags = structure::log_grid(1e-3, 1e3, 61);
  int bad = 0, coupled = 0;
  for (const auto& c : cases) {
    const bool gc = structure::genuine_coupling(c.A(), c.B(), &c.A0).coupled;
    const auto comp = structure::compensating_matrix(c.A0, c.A(), c.Bt);
    const double theta = structure::dissipativity_theta(c.A(), c.B(), mags);
    const bool k2 = comp.ok && comp.margin > 0.0;
    if (gc != k2 || gc != (theta > 0.0)) ++bad;
    coupled += gc;
  }
  // Navier-Stokes: genuine coupling holds exactly when p_rho != 0.
  int flips = 0;
  for (double prho : {1e-3, 0.0, -1e-3}) {
    Model m = models::navier_stokes(1, {{"eos", "vdw"}, {"b_vdw", 1.0 / 3.0}, {"a_vdw", (2.25 - prho) / 2.0}});
    const Vec U = models::ns_state(m.params, 1.0, Vec::Constant(1, 0.2), 1.0);
    const Vec xi = Vec::Ones(1);
    const auto gc = structure::genuine_coupling(model::symbol_A(m, U, xi), model::symbol_B(m, U, xi));
    flips += (gc.coupled == (prho != 0.0)) && !gc.indeterminate;
  }
  char buf[160];
  std::snprintf(buf, sizeof buf, "100 systems (%d coupled): %d counterexamples; NS p_rho = +1e-3, 0, -1e-3 agree: %d/3", coupled, bad,
                flips);
  return {bad == 0 && flips == 3, buf};
}

Line c7_jordan() {
  const auto cb = jordan::canonical_block_check(2, 1.0, 1.0, {1e-6, 1e-5, 1e-4, 1e-3}, {0.0});
  ShockData rest;
  rest.frame = models::navier_stokes(2);
  rest.Um = rest.Up = models::ns_state(rest.frame.params, 1.0, Vec::Zero(2), 1.0);
  const auto gs = inviscid::glancing_set(rest, profile::Side::Minus, {Vec::Constant(1, 1.0)});
  bool ok = cb.exponent >= 0.7 && cb.sign_margin > 0.0;
  double min_exp = 1e300, min_margin = 1e300;
  int points = 0;
  for (const auto& g : gs.points) {
    if (g.order != 2) continue;
    ++points;
    const auto jp = jordan::jordan_bifurcation_check(rest, profile::Side::Minus, g, {1e-5, 3e-5, 1e-4, 3e-4, 1e-3}, {0.0});
    min_exp = std::min(min_exp, jp.exponent);
    min_margin = std::min(min_margin, jp.sign_margin);
    ok = ok && jp.s == 2 && jp.exponent >= 0.7 && jp.sign_ok && jp.sign_margin > 0.0;
  }
  char buf[200];
  std::snprintf(buf, sizeof buf, "canonical s=2: exponent %g, margin %g; Euler at rest (%d points): min exponent %.3f (need 0.7), min margin %.3f",
                cb.exponent, cb.sign_margin, points, min_exp, min_margin);
  return {ok && points == 2, buf};
}

Line c8_decay() {
  verify::DecayOptions o;
  o.T = 400.0;
  auto t0 = Clock::now();
  const auto h1 = verify::const_coeff_decay(models::burgers(1), Vec::Zero(1), o);
  const double s1 = seconds_since(t0);
  o.T = 100.0;
  t0 = Clock::now();
  const auto h2 = verify::const_coeff_decay(models::burgers(2), Vec::Zero(1), o);
  const double s2 = seconds_since(t0);
  char buf[200];
  std::snprintf(buf, sizeof buf, "d=1: p = %.4f (%.1f s), d=2: p = %.4f (%.1f s), contamination %.1e / %.1e", h1.p, s1, h2.p, s2,
                h1.contamination, h2.contamination);
  return {std::abs(h1.p - 0.25) <= 0.02 && std::abs(h2.p - 0.5) <= 0.03 && s1 < 120 && s2 < 120 && !h1.contaminated &&
              !h2.contaminated,
          buf};
}

Line c9_energy() {
  Vec U(2);
  U << 1.0, 0.0;
  std::string detail;
  bool ok = true;
  for (auto [name, m, state] : {std::tuple<std::string, Model, Vec>{"heat", models::burgers(1), Vec::Zero(1)},
                                {"p-system", models::isentropic(), U}}) {
    verify::EnergyOptions o;
    const auto a = verify::kawashima_energy_trace(m, state, o);
    o.dt /= 2;
    o.steps *= 2;
    const auto b = verify::kawashima_energy_trace(m, state, o);
    // A violation already at rounding level cannot halve further.
    const bool halves = b.max_violation <= 0.5 * a.max_violation || b.max_violation <= 1e-15;
    ok = ok && a.norm_equivalent && a.max_violation <= 1e-10 && halves;
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s%s: violation %.1e, at dt/2 %.1e", detail.empty() ? "" : "; ", name.c_str(), a.max_violation,
                  b.max_violation);
    detail += buf;
  }
  return {ok, detail};
}

Line c10_resolvent() {
  const auto p = profile::solve_profile(burgers_shock(1));
  const auto shell = verify::high_frequency_shell(10.0, 0.05, 8);
  verify::ResolventOptions o;
  o.N = 200;
  const auto a = verify::resolvent_scan(p, Vec(), shell, o);
  o.N = 400;
  const auto b = verify::resolvent_scan(p, Vec(), shell, o);
  const auto tail = verify::resolvent_scan(p, Vec(), {10.0, 30.0, 100.0, 300.0, 1000.0}, o);
  const double change = std::abs(b.sup / a.sup - 1.0), slope = verify::tail_exponent(tail);
  char buf[200];
  std::snprintf(buf, sizeof buf, "Burgers shell R=10 theta=0.05: sup %.5f (N=200), %.5f (N=400), change %.2f%%; real-axis tail exponent %.4f",
                a.sup, b.sup, 100 * change, slope);
  const bool finite = std::isfinite(a.sup) && !a.any_near_spectrum && !b.any_near_spectrum;
  return {finite && change < 0.05 && std::abs(slope + 1.0) <= 0.05, buf};
}

Line c11_determinism() {
  pipeline::RunOptions o;
  o.seed = 5;
  const json cfg = pipeline::merge_config(json::parse(R"({"model": {"name": "burgers", "d": 1},
                                                          "shock": {"Um": [1.0], "Up": [-1.0]}})"),
                                          o);
  const auto a = pipeline::run("report", cfg, o), b = pipeline::run("report", cfg, o);
  const std::string sa = a.report.dump(2), sb = b.report.dump(2);
  char buf[120];
  std::snprintf(buf, sizeof buf, "two Burgers reports, seed 5: %zu bytes, identical: %s, exit %d", sa.size(), sa == sb ? "yes" : "no",
                a.exit_code);
  return {sa == sb && a.csv == b.csv, buf};
}

}  // namespace

int main() {
  int failed = 0;
  auto report = [&](int k, const std::function<Line()>& f) {
    const auto t0 = Clock::now();
    Line l;
    try {
      l = f();
    } catch (const std::exception& e) {
      l = {false, std::string("exception: ") + e.what()};
    }
    std::printf("criterion %2d: %s  %s  [%.1f s]\n", k, l.pass ? "PASS" : "FAIL", l.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
    failed += !l.pass;
  };
  report(1, c1_profile);
  const auto burgers_ctx = evans::make_context(profile::solve_profile(burgers_shock(1)));
  report(2, [&] { return c2_zero_mode(burgers_ctx); });
  report(3, c3_spectral);
  report(4, c4_lowfreq);
  report(5, c5_liu_majda);
  report(6, c6_kawashima);
  report(7, c7_jordan);
  report(8, c8_decay);
  report(9, c9_energy);
  report(10, c10_resolvent);
  report(11, c11_determinism);
  std::printf("%d of 11 criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
