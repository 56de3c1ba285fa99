#include "vss/pipeline.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <optional>
#include <random>
#include <sstream>

#include "vss/evans.hpp"
#include "vss/jordan.hpp"
#include "vss/structure.hpp"
#include "vss/verify.hpp"

namespace vss::pipeline {

namespace {

json cj(cplx z) { return json::array({z.real(), z.imag()}); }

json vj(const Vec& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Vec read_vec(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) throw ConfigError(where + ": expected a non-empty array of numbers");
  Vec v(j.size());
  for (size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ConfigError(where + ": entry " + std::to_string(i) + " is not a number");
    v(i) = j[i].get<double>();
  }
  return v;
}

template <class T>
T get(const json& cfg, const std::string& section, const std::string& key) {
  try {
    return cfg.at(section).at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(section + "." + key + ": " + e.what());
  }
}

json hyp(const std::string& status, json evidence, const std::string& note = "") {
  json h = {{"status", status}, {"evidence", std::move(evidence)}};
  if (!note.empty()) h["note"] = note;
  return h;
}

int exit_for(const std::string& verdict) {
  if (verdict == "strongly stable" || verdict == "strong refined") return Stable;
  if (verdict == "strongly unstable" || verdict == "fails refined") return Unstable;
  return Indeterminate;
}

// Lazily built objects shared by the stages of one run.
struct State {
  const json& cfg;
  RunOptions opt;
  Model model;
  std::optional<ShockData> shock;
  std::optional<profile::Profile> prof;
  std::optional<evans::Context> ctx;
  std::optional<inviscid::Verdict> iv;
  json report;
  std::map<std::string, std::string> csv;

  State(const json& c, const RunOptions& o) : cfg(c), opt(o) {}

  bool strict() const { return opt.tolerance_profile == "strict"; }

  const ShockData& get_shock() {
    if (shock) return *shock;
    const json& s = cfg.at("shock");
    Vec Um;
    if (s.contains("Um_natural")) {
      if (model.name != "navier-stokes-ideal") throw ConfigError("shock.Um_natural is only defined for navier-stokes-ideal");
      const Vec w = read_vec(s["Um_natural"], "shock.Um_natural");
      if (w.size() != model.d + 2) throw ConfigError("shock.Um_natural: expected (rho, u_1..u_d, T)");
      Um = models::ns_state(model.params, w(0), w.segment(1, model.d), w(model.d + 1));
    } else if (s.contains("Um")) {
      Um = read_vec(s["Um"], "shock.Um");
    } else {
      throw ConfigError("shock: needs \"Um\" or \"Um_natural\"");
    }
    if (Um.size() != model.n) throw ConfigError("shock.Um: expected " + std::to_string(model.n) + " components");
    if (s.contains("Up")) {
      const Vec Up = read_vec(s["Up"], "shock.Up");
      if (Up.size() != model.n) throw ConfigError("shock.Up: expected " + std::to_string(model.n) + " components");
      shock = model::make_shock(model, Um, Up, s.value("s", 0.0));
    } else if (s.contains("constraint")) {
      const json& c = s["constraint"];
      HugoniotConstraint hc;
      const std::string kind = c.value("kind", "");
      if (kind == "speed") hc.kind = HugoniotConstraint::Speed;
      else if (kind == "mach") hc.kind = HugoniotConstraint::Mach;
      else if (kind == "component") hc.kind = HugoniotConstraint::Component;
      else throw ConfigError("shock.constraint.kind: expected speed, mach or component");
      if (!c.contains("value") || !c["value"].is_number()) throw ConfigError("shock.constraint.value: expected a number");
      hc.value = c["value"].get<double>();
      hc.component = c.value("component", 0);
      shock = model::hugoniot_solve(model, Um, hc);
    } else {
      throw ConfigError("shock: needs \"Up\" or \"constraint\"");
    }
    report["shock"] = {{"Um", vj(shock->Um)},
                       {"Up", vj(shock->Up)},
                       {"s", shock->s_original},
                       {"lax", shock->cert.lax},
                       {"p", shock->cert.p}};
    return *shock;
  }

  const profile::Profile& get_profile() {
    if (prof) return *prof;
    profile::Options po;
    po.tail = get<double>(cfg, "profile", "tail");
    po.points = get<int>(cfg, "profile", "points");
    if (strict()) {
      po.tail = std::min(po.tail, 1e-13);
      po.rtol = 1e-13;
    }
    prof = profile::solve_profile(get_shock(), po);
    return *prof;
  }

  const evans::Context& get_context() {
    if (ctx) return *ctx;
    evans::Options eo;
    eo.h_max = get<double>(cfg, "evans", "h_max");
    eo.dw_frac = get<double>(cfg, "evans", "dw_frac");
    ctx = evans::make_context(get_profile(), eo);
    return *ctx;
  }

  evans::WindingOptions winding_options() const {
    evans::WindingOptions w;
    w.samples = get<int>(cfg, "contours", "samples");
    return w;
  }

  std::vector<Vec> xi_samples() const {
    const int d = model.d;
    if (d == 1) return {Vec()};
    std::vector<Vec> out{Vec::Zero(d - 1)};
    const int k = get<int>(cfg, "contours", "directions");
    for (const auto& mag : cfg.at("contours").at("xi_magnitudes"))
      for (const Vec& dir : inviscid::transverse_directions(d, k)) out.push_back(mag.get<double>() * dir);
    return out;
  }

  const inviscid::Verdict& get_inviscid() {
    if (iv) return *iv;
    inviscid::Resolution res;
    res.directions = get<int>(cfg, "inviscid", "directions");
    if (strict()) {
      res.segment = 1601;
      res.arc = 401;
    }
    iv = inviscid::inviscid_verdict(get_shock(), res);
    return *iv;
  }

  evans::FamilyEvaluator evaluator() {
    const evans::Context& c = get_context();
    evans::FamilyEvaluator D = [&c](const Vec& xi, cplx lam) { return evans::evans(c, xi, lam).D; };
    const json& fx = cfg.at("fixture");
    if (fx.contains("planted_root") && !fx["planted_root"].is_null()) {
      const Vec z = read_vec(fx["planted_root"], "fixture.planted_root");
      if (z.size() != 2) throw ConfigError("fixture.planted_root: expected [re, im]");
      const cplx lam0(z(0), z(1));
      return [D, lam0](const Vec& xi, cplx lam) { return (lam - lam0) * D(xi, lam); };
    }
    return D;
  }
};

void add_csv(State& st, const std::string& name, const std::string& header, const std::vector<std::vector<double>>& rows) {
  std::ostringstream os;
  os << header << '\n';
  for (const auto& r : rows) {
    for (size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << num(r[i]);
    os << '\n';
  }
  st.csv[name] = os.str();
}

// ---- stages ----

void stage_structure(State& st) {
  const Model& m = st.model;
  const ShockData& sd = st.get_shock();
  json& H = st.report["hypotheses"];
  json sides = json::object();
  std::string a1 = "pass", a2 = "pass", h4 = "pass";
  json ev1 = json::object(), ev2 = json::object(), ev4 = json::object();
  const auto sphere = structure::sphere_grid(m.d, m.d == 1 ? 2 : 32);
  for (const auto& [name, U] : {std::pair<std::string, Vec>{"minus", sd.Um}, {"plus", sd.Up}}) {
    json side;
    const auto sf = structure::symmetric_form(m, U);
    side["symmetric_form"] = {{"defined", sf.defined},
                              {"symmetric", sf.symmetric},
                              {"a0_min_eig", sf.a0_min_eig},
                              {"b_block_structure", sf.b_block_structure},
                              {"note", sf.note}};
    if (!sf.defined || !(sf.a0_min_eig > 0.0)) a1 = "fail";
    ev1[name] = {{"a0_min_eig", sf.a0_min_eig}, {"defined", sf.defined}};
    const double ell = model::ellipticity_theta(m, U);
    if (!sf.symmetric || !sf.b_block_structure || !(ell > 0.0)) a2 = "fail";
    ev2[name] = {{"symmetric", sf.symmetric}, {"asym_defect", sf.asym_defect}, {"ellipticity_theta", ell}};

    // Kawashima circle along the sphere: (K0), compensator margin, dissipativity.
    bool coupled = true, indeterminate = false;
    double comp_margin = std::numeric_limits<double>::infinity();
    for (const Vec& xi : sphere) {
      if (!sf.defined) break;
      const auto gc = structure::genuine_coupling(sf.quasi_A(xi), sf.quasi_B(xi), &sf.A0);
      coupled = coupled && gc.coupled;
      indeterminate = indeterminate || gc.indeterminate;
      const auto K = structure::compensator_for(sf, xi);
      comp_margin = std::min(comp_margin, K.ok ? K.margin : 0.0);
    }
    const double theta = structure::dissipativity_scan(m, U, structure::frequency_grid(m.d, m.d == 1 ? 1 : 16, 41));
    side["kawashima"] = {{"genuine_coupling", coupled},
                         {"indeterminate", indeterminate},
                         {"compensator_margin", sf.defined ? comp_margin : 0.0},
                         {"dissipativity_theta", theta}};
    const auto cm = structure::constant_multiplicity_check(m, U, sphere);
    if (cm.indeterminate) h4 = h4 == "fail" ? h4 : "indeterminate";
    else if (!cm.constant) h4 = "fail";
    ev4[name] = {{"constant", cm.constant}, {"multiplicities", cm.profile}, {"note", cm.note}};
    sides[name] = side;
  }
  st.report["structure"] = sides;
  H["A1"] = hyp(a1, ev1);
  H["A2"] = hyp(a2, ev2);
  H["H4"] = hyp(h4, ev4);
  H["H0"] = hyp("pass", {{"admissible_endstates", true}}, "coefficients are smooth on the model's admissible region");
}

void stage_profile(State& st) {
  const ShockData& sd = st.get_shock();
  json& H = st.report["hypotheses"];
  json ev2;
  std::string h2 = "pass";
  for (auto [name, side] : {std::pair<std::string, profile::Side>{"minus", profile::Side::Minus},
                            {"plus", profile::Side::Plus}}) {
    const auto el = profile::endstate_matrix(sd, side);
    ev2[name] = {{"det_a1", el.det_a1}, {"gap", el.gap}, {"h2_ok", el.h2_ok}};
    if (!el.h2_ok) h2 = "fail";
  }
  H["H2"] = hyp(h2, ev2);
  const auto& p = st.get_profile();

  // Sign scan of A~^1_11 along the profile.
  const Model& fm = sd.frame;
  const int ni = fm.ni();
  double min_abs = std::numeric_limits<double>::infinity();
  int sign = 0;
  bool definite = true;
  for (size_t i = 0; i < p.U.size() && ni > 0; i += 10) {
    const auto sf = structure::symmetric_form(fm, p.U[i]);
    if (!sf.defined) {
      definite = false;
      break;
    }
    Eigen::SelfAdjointEigenSolver<Mat> es(linalg::sym(sf.A[0].topLeftCorner(ni, ni)));
    for (int k = 0; k < ni; ++k) {
      const double e = es.eigenvalues()(k);
      const int sg = e > 0 ? 1 : -1;
      if (sign == 0) sign = sg;
      definite = definite && sg == sign;
      min_abs = std::min(min_abs, std::abs(e));
    }
  }
  if (ni == 0) H["H1"] = hyp("pass", {{"hyperbolic_block", 0}}, "no hyperbolic block");
  else H["H1"] = hyp(definite && min_abs > 1e-8 ? "pass" : "fail", {{"min_abs_eig_a11", min_abs}, {"sign", sign}});

  st.report["profile"] = {{"L", p.L},
                          {"points", p.x.size()},
                          {"residual", p.residual},
                          {"level_set_defect", p.level_set_defect},
                          {"end_mismatch", p.end_mismatch},
                          {"phase", {{"kind", p.phase_kind}, {"component", p.phase_component}, {"value", p.phase_value}}},
                          {"decay_minus", {{"theta", p.minus.theta}, {"C", p.minus.C}, {"ok", p.minus.ok}}},
                          {"decay_plus", {{"theta", p.plus.theta}, {"C", p.plus.C}, {"ok", p.plus.ok}}}};
  const bool ok = p.residual < 1e-6 && p.end_mismatch < 1e-6;
  H["H3"] = hyp(ok ? "pass" : "fail", {{"profile_residual", p.residual}, {"end_mismatch", p.end_mismatch}},
                "the connection manifold is certified by gamma != 0 in the structural verdict");

  std::vector<std::vector<double>> rows;
  std::string header = "x";
  for (int k = 0; k < fm.n; ++k) header += ",U" + std::to_string(k + 1);
  for (int k = 0; k < fm.n; ++k) header += ",W" + std::to_string(k + 1);
  const size_t stride = std::max<size_t>(1, p.x.size() / 2000);
  for (size_t i = 0; i < p.x.size(); i += stride) {
    std::vector<double> r{p.x[i]};
    for (int k = 0; k < fm.n; ++k) r.push_back(p.U[i](k));
    for (int k = 0; k < fm.n; ++k) r.push_back(p.W[i](k));
    rows.push_back(r);
  }
  add_csv(st, "profile.csv", header, rows);
}

int stage_inviscid(State& st) {
  const ShockData& sd = st.get_shock();
  const auto& v = st.get_inviscid();
  json roots = json::array();
  for (const auto& b : v.boundary_roots)
    roots.push_back({{"xi_t", vj(b.xi_t)}, {"tau", b.tau}, {"glancing", b.glancing}, {"depth", b.depth}});
  st.report["verdicts"]["inviscid"] = {{"verdict", v.verdict},
                                       {"evidence", {{"delta", cj(v.delta)},
                                                     {"interior_roots", v.interior_roots},
                                                     {"boundary_roots", roots},
                                                     {"radius", v.radius},
                                                     {"directions", v.directions.size()}}},
                                       {"notes", v.notes}};
  if (v.verdict == "indeterminate") st.report["verdicts"]["inviscid"]["tolerance"] = {{"boundary_offset", inviscid::kBoundaryOffset}};

  // Liu-Majda determinant and a recomputation with finer frame steps.
  inviscid::FrameOptions fine;
  fine.max_step = 1.0 / 512;
  const cplx again = inviscid::lopatinski(sd, Vec::Zero(st.model.d - 1), 1.0, nullptr, fine);
  const cplx d0 = inviscid::liu_majda(sd);
  st.report["evidence"]["delta"] = {{"value", cj(d0)}, {"recomputed_fine_frames", cj(again)}};

  json& H = st.report["hypotheses"];
  if (st.model.d == 1) {
    H["H5"] = hyp("pass", {{"glancing_points", 0}}, "one-dimensional: no glancing set");
  } else {
    int count = 0;
    json notes = json::array();
    for (auto side : {profile::Side::Minus, profile::Side::Plus}) {
      const auto gs = inviscid::glancing_set(sd, side, inviscid::transverse_directions(st.model.d, 8));
      count += static_cast<int>(gs.points.size());
      for (const auto& n : gs.notes) notes.push_back(n);
    }
    H["H5"] = hyp("pass", {{"glancing_points", count}, {"notes", notes}});
  }
  return exit_for(v.verdict);
}

int stage_evans(State& st) {
  const auto xs = st.xi_samples();
  const double r = get<double>(st.cfg, "contours", "r"), R = get<double>(st.cfg, "contours", "R");
  const auto wopt = st.winding_options();
  const auto D = st.evaluator();
  std::vector<evans::SpectralVerdict> parts(xs.size());
  if (st.opt.threads > 1) {
    std::vector<std::future<evans::SpectralVerdict>> fut;
    for (const Vec& x : xs)
      fut.push_back(std::async(std::launch::async, [&, x] { return evans::spectral_verdict(D, {x}, r, R, wopt); }));
    for (size_t i = 0; i < xs.size(); ++i) parts[i] = fut[i].get();
  } else {
    for (size_t i = 0; i < xs.size(); ++i) parts[i] = evans::spectral_verdict(D, {xs[i]}, r, R, wopt);
  }
  // Merge in sample order, with the same precedence as the one-call sweep.
  evans::SpectralVerdict v;
  v.r = r;
  v.R = R;
  bool unresolved = false;
  for (const auto& p : parts) {
    v.directions.push_back(p.directions.at(0));
    v.unstable_count += p.unstable_count;
    unresolved = unresolved || p.verdict == "indeterminate";
  }
  v.verdict = v.unstable_count > 0 ? "strongly unstable" : unresolved ? "indeterminate" : "strongly stable";

  json dirs = json::array();
  for (size_t k = 0; k < v.directions.size(); ++k) {
    const auto& dv = v.directions[k];
    dirs.push_back({{"xi_t", vj(dv.xi_t)},
                    {"winding", dv.winding},
                    {"resolved", dv.resolved},
                    {"through_root", dv.through_root},
                    {"note", dv.note},
                    {"samples", dv.trace.size()}});
    std::vector<std::vector<double>> rows;
    for (const auto& t : dv.trace) rows.push_back({t.lambda.real(), t.lambda.imag(), t.value.real(), t.value.imag(), t.arg});
    add_csv(st, "evans_trace_" + std::to_string(k) + ".csv", "re_lambda,im_lambda,re_D,im_D,arg", rows);
  }
  json& out = st.report["verdicts"]["spectral"];
  out = {{"verdict", v.verdict}, {"evidence", {{"r", r}, {"R", R}, {"unstable_count", v.unstable_count}, {"directions", dirs}}}};
  if (v.verdict == "indeterminate") out["tolerance"] = {{"winding_samples", wopt.samples}, {"max_depth", wopt.max_depth}};
  if (st.cfg.at("fixture").contains("planted_root") && !st.cfg["fixture"]["planted_root"].is_null())
    out["fixture"] = "planted root multiplies D";
  return exit_for(v.verdict);
}

int stage_lowfreq(State& st) {
  const auto& c = st.get_context();
  const int d = st.model.d;
  const int k = d == 1 ? 1 : get<int>(st.cfg, "lowfreq", "directions");
  std::mt19937 gen(st.opt.seed);
  std::normal_distribution<double> g;
  // The expansion is asymptotic only for rho well below the shock strength; weak shocks need a lower window.
  const double lo = get<double>(st.cfg, "lowfreq", "rho_min"), hi = get<double>(st.cfg, "lowfreq", "rho_max");
  std::vector<double> rho;
  for (int i = 0; i <= 8; ++i) rho.push_back(lo * std::pow(hi / lo, i / 8.0));
  json dirs = json::array();
  std::vector<std::vector<double>> rows;
  std::vector<cplx> gammas;
  double err = 0.0;
  int ell = -1;
  double min_slope = std::numeric_limits<double>::infinity();
  for (int i = 0; i < k; ++i) {
    Vec xh = Vec::Zero(d - 1);
    cplx lh = 1.0;
    if (d > 1) {
      // Uniform on the unit hemisphere Re lambda^ > 0, kept away from the imaginary axis.
      Vec z(d + 1);
      do {
        for (int j = 0; j < d + 1; ++j) z(j) = g(gen);
        z.normalize();
        z(d - 1) = std::abs(z(d - 1));
      } while (z(d - 1) < 0.1);
      xh = z.head(d - 1);
      lh = cplx(z(d - 1), z(d));
    }
    evans::LowFreqExpansion e;
    try {
      e = evans::low_freq_expand(c, xh, lh, rho);
    } catch (const NumericalFailure& f) {
      dirs.push_back({{"xi_hat", vj(xh)}, {"lambda_hat", cj(lh)}, {"failure", f.what()}});
      ell = -2;
      continue;
    }
    const double slope = evans::remainder_slope(e, e.gamma);
    gammas.push_back(e.gamma);
    err = std::max(err, e.gamma_error);
    ell = ell < 0 ? e.ell : (ell == e.ell ? ell : -2);
    min_slope = std::min(min_slope, slope);
    dirs.push_back({{"xi_hat", vj(xh)},
                    {"lambda_hat", cj(lh)},
                    {"ell", e.ell},
                    {"gamma", cj(e.gamma)},
                    {"gamma_error", e.gamma_error},
                    {"delta_bar", cj(e.delta_bar)},
                    {"Delta", cj(e.delta)},
                    {"remainder_slope", slope}});
    for (size_t q = 0; q < e.rho.size(); ++q) rows.push_back({double(i), e.rho[q], e.D[q].real(), e.D[q].imag()});
  }
  add_csv(st, "lowfreq.csv", "direction,rho,re_D,im_D", rows);
  cplx mean = 0.0;
  for (const cplx& x : gammas) mean += x / double(std::max<size_t>(1, gammas.size()));
  double spread = 0.0;
  for (const cplx& x : gammas) spread = std::max(spread, std::abs(x - mean));
  const bool nonzero = std::abs(mean) > 10.0 * err && std::abs(mean) > 1e-12;
  const bool constant = spread <= 3.0 * err + 1e-12 * std::abs(mean);
  const std::string verdict = nonzero && constant && ell == 1 ? "pass" : "indeterminate";
  json& out = st.report["verdicts"]["structural"];
  out = {{"verdict", verdict},
         {"evidence", {{"gamma", cj(mean)}, {"gamma_spread", spread}, {"gamma_error", err}, {"ell", ell},
                       {"min_remainder_slope", min_slope}, {"directions", dirs}}}};
  if (verdict != "pass") out["tolerance"] = {{"nonzero_factor", 10.0}, {"constancy_factor", 3.0}};
  st.report["evidence"]["gamma"] = cj(mean);
  st.report["evidence"]["ell"] = ell;
  if (st.report["hypotheses"].contains("H3")) st.report["hypotheses"]["H3"]["evidence"]["gamma"] = cj(mean);
  return verdict == "pass" ? Stable : Indeterminate;
}

int stage_beta(State& st) {
  const auto& iv = st.get_inviscid();
  const auto rv = evans::refined_verdict(iv, st.evaluator(), st.get_shock());
  json roots = json::array();
  json betas = json::array();
  for (const auto& r : rv.roots) {
    roots.push_back({{"xi_t", vj(r.xi_t)}, {"tau", r.tau}, {"glancing", r.glancing}, {"beta", cj(r.beta)},
                     {"frames_independent", r.frames_independent}, {"note", r.note}});
    if (!r.glancing) betas.push_back(cj(r.beta));
  }
  const bool vacuous = iv.boundary_roots.empty() && rv.verdict == "strong refined";
  st.report["verdicts"]["refined"] = {{"verdict", rv.verdict}, {"vacuous", vacuous},
                                      {"evidence", {{"roots", roots}, {"boundary_roots", iv.boundary_roots.size()}}},
                                      {"notes", rv.notes}};
  if (rv.verdict == "weak refined") st.report["verdicts"]["refined"]["tolerance"] = {{"beta_zero", 1e-6}};
  st.report["evidence"]["beta"] = betas;
  return exit_for(rv.verdict);
}

int stage_jordan(State& st) {
  const ShockData& sd = st.get_shock();
  json& out = st.report["jordan"];
  if (st.model.d == 1) {
    out = {{"status", "not applicable"}, {"note", "one-dimensional: no glancing points"}};
    return Stable;
  }
  std::vector<double> rho, sigma;
  for (const auto& v : st.cfg.at("jordan").at("rho")) rho.push_back(v.get<double>());
  for (const auto& v : st.cfg.at("jordan").at("sigma")) sigma.push_back(v.get<double>());
  json checks = json::array();
  std::vector<std::vector<double>> rows;
  bool ok = true;
  int count = 0;
  for (auto side : {profile::Side::Minus, profile::Side::Plus}) {
    const auto gs = inviscid::glancing_set(sd, side, inviscid::transverse_directions(st.model.d, 4));
    for (const auto& g : gs.points) {
      if (g.order < 2) continue;
      const auto jp = jordan::jordan_bifurcation_check(sd, side, g, rho, sigma);
      ok = ok && jp.sign_ok && jp.exponent_ok && jp.split_ok;
      checks.push_back({{"side", side == profile::Side::Minus ? "minus" : "plus"},
                        {"xi_t", vj(g.xi_t)}, {"tau", g.tau}, {"s", jp.s}, {"m", jp.m},
                        {"d_s_a", jp.d_s_a}, {"p", jp.p}, {"p_alt", jp.p_alt},
                        {"sign_margin", jp.sign_margin}, {"sign_ok", jp.sign_ok},
                        {"exponent", jp.exponent}, {"exponent_ok", jp.exponent_ok},
                        {"theta", jp.theta}, {"split_ok", jp.split_ok}, {"note", jp.note}});
      for (const auto& s : jp.samples) rows.push_back({double(count), s.rho, s.sigma, s.remainder});
      ++count;
    }
  }
  add_csv(st, "jordan.csv", "point,rho,sigma,remainder", rows);
  out = {{"status", count == 0 ? "no glancing points sampled" : ok ? "pass" : "fail"}, {"points", checks}};
  return ok ? Stable : Indeterminate;
}

int stage_verify_decay(State& st, bool forced) {
  json& out = st.report["verify"]["decay"];
  const json& c = st.cfg.at("verify").at("decay");
  if (!forced && st.model.d > 1 && !c.value("multi_d", false)) {
    out = {{"status", "skipped"}, {"note", "multi-dimensional decay runs are opt-in (verify.decay.multi_d)"}};
    return Stable;
  }
  verify::DecayOptions o;
  o.T = c.value("T", o.T);
  o.dx = c.value("dx", o.dx);
  o.samples = c.value("samples", o.samples);
  const auto r = verify::const_coeff_decay(st.model, st.get_shock().Um, o);
  const double expect = 0.25 * st.model.d;
  out = {{"p", r.p}, {"expected", expect}, {"fit_residual", r.fit_residual}, {"box", r.box}, {"N", r.N},
         {"contamination", r.contamination}, {"contaminated", r.contaminated}, {"advisory", r.advisory}};
  std::vector<std::vector<double>> rows;
  for (size_t i = 0; i < r.t.size(); ++i) rows.push_back({r.t[i], r.norm[i]});
  add_csv(st, "decay.csv", "t,norm", rows);
  const bool ok = !r.contaminated && std::abs(r.p - expect) <= 0.05;
  out["status"] = ok ? "pass" : "fail";
  return ok ? Stable : Indeterminate;
}

int stage_verify_energy(State& st) {
  const json& c = st.cfg.at("verify").at("energy");
  verify::EnergyOptions o;
  o.N = c.value("N", o.N);
  o.dt = c.value("dt", o.dt);
  o.steps = c.value("steps", o.steps);
  o.seed = st.opt.seed;
  const auto r = verify::kawashima_energy_trace(st.model, st.get_shock().Um, o);
  const double tol = 1e-10;
  const bool ok = r.norm_equivalent && r.max_violation <= tol;
  st.report["verify"]["energy"] = {{"status", ok ? "pass" : "fail"}, {"C", r.C}, {"compensator", r.compensator},
                                   {"norm_equivalent", r.norm_equivalent}, {"max_violation", r.max_violation},
                                   {"violation_step", r.violation_step}, {"tolerance", tol},
                                   {"plain_max_increase", r.plain_max_increase},
                                   {"identity_residual", r.identity_residual}, {"drift", r.drift}, {"log", r.log}};
  std::vector<std::vector<double>> rows;
  const size_t stride = std::max<size_t>(1, r.t.size() / 500);
  for (size_t i = 0; i < r.t.size(); i += stride) rows.push_back({r.t[i], r.E[i], r.plain[i]});
  add_csv(st, "energy.csv", "t,E,plain", rows);
  return ok ? Stable : Indeterminate;
}

int stage_resolvent(State& st) {
  const json& c = st.cfg.at("verify").at("resolvent");
  const auto& p = st.get_profile();
  verify::ResolventOptions o;
  o.N = c.value("N", 100);
  o.seed = st.opt.seed;
  if (st.strict()) o.tol = 1e-9;
  const auto lams = verify::high_frequency_shell(c.value("R", 10.0), c.value("theta", 0.05), c.value("count", 8));
  const Vec xi = Vec::Zero(st.model.d - 1);
  const auto a = verify::resolvent_scan(p, xi, lams, o);
  o.N *= 2;
  const auto b = verify::resolvent_scan(p, xi, lams, o);
  const double change = a.sup > 0 ? std::abs(b.sup / a.sup - 1.0) : 1.0;
  const bool ok = !a.any_near_spectrum && !b.any_near_spectrum && change < 0.05;
  std::vector<std::vector<double>> rows;
  for (const auto* t : {&a, &b})
    for (const auto& s : t->samples) rows.push_back({double(t->N), s.lambda.real(), s.lambda.imag(), s.norm, double(s.near_spectrum)});
  add_csv(st, "resolvent.csv", "N,re_lambda,im_lambda,norm,near_spectrum", rows);
  st.report["verify"]["resolvent"] = {{"status", ok ? "pass" : "fail"}, {"L", a.L}, {"N", {a.N, b.N}},
                                      {"sup", {a.sup, b.sup}}, {"grid_change", change},
                                      {"near_spectrum", a.any_near_spectrum || b.any_near_spectrum}};
  if (!ok && change >= 0.05)
    st.report["verify"]["resolvent"]["advisory"] = "not grid-stable: increase verify.resolvent.N (hyperbolic modes need several points per wavelength 2 pi |u| / |Im lambda|)";
  return ok ? Stable : Indeterminate;
}

// Combined exit code of a full report.
int report_exit(const json& R) {
  const auto& V = R.at("verdicts");
  const std::string sp = V.at("spectral").at("verdict"), inv = V.at("inviscid").at("verdict"),
                    ref = V.at("refined").at("verdict"), str = V.at("structural").at("verdict");
  if (sp == "strongly unstable" || inv == "strongly unstable" || ref == "fails refined") return Unstable;
  bool hyps = true;
  for (const auto& [k, h] : R.at("hypotheses").items()) hyps = hyps && h.at("status") == "pass";
  if (hyps && sp == "strongly stable" && str == "pass" && (inv == "strongly stable" || ref == "strong refined"))
    return Stable;
  return Indeterminate;
}

}  // namespace

json default_config() {
  return json::parse(R"({
    "model": {"name": "burgers", "d": 1, "params": {}},
    "shock": {"Um": [1.0], "Up": [-1.0], "s": 0.0},
    "profile": {"tail": 1e-12, "points": 4001},
    "evans": {"h_max": 0.25, "dw_frac": 0.01},
    "inviscid": {"directions": 4},
    "contours": {"r": 1e-3, "R": 10.0, "directions": 4, "xi_magnitudes": [0.25, 0.5, 1.0, 2.0], "samples": 256},
    "lowfreq": {"directions": 3, "rho_min": 1e-4, "rho_max": 1e-2},
    "jordan": {"rho": [1e-5, 1e-4, 1e-3], "sigma": [0.0]},
    "tolerances": {},
    "verify": {"decay": {"T": 200.0, "dx": 0.5, "samples": 30, "multi_d": false},
               "energy": {"N": 128, "dt": 2e-3, "steps": 2500},
               "resolvent": {"N": 100, "R": 10.0, "theta": 0.05, "count": 8}},
    "fixture": {"planted_root": null}
  })");
}

json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  try {
    return json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

json merge_config(const json& user, const RunOptions& opt) {
  if (!user.is_object()) throw ConfigError("config: top level must be an object");
  json cfg = default_config();
  for (const auto& [k, v] : user.items()) {
    if (!cfg.contains(k)) throw ConfigError("config: unknown section \"" + k + "\"");
    if (!v.is_object()) throw ConfigError("config: section \"" + k + "\" must be an object");
  }
  // A user shock replaces the default one entirely; other sections merge key by key.
  if (user.contains("shock")) cfg["shock"] = json::object();
  cfg.merge_patch(user);
  if (opt.tolerance_profile != "default" && opt.tolerance_profile != "strict")
    throw ConfigError("--tolerance-profile: expected strict or default");
  if (opt.tolerance_profile == "strict") {
    cfg["evans"]["h_max"] = std::min(cfg["evans"]["h_max"].get<double>(), 0.125);
    cfg["evans"]["dw_frac"] = std::min(cfg["evans"]["dw_frac"].get<double>(), 0.005);
    cfg["contours"]["samples"] = std::max(cfg["contours"]["samples"].get<int>(), 512);
  }
  cfg["tolerances"]["profile"] = opt.tolerance_profile;
  return cfg;
}

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> s{"structure-check", "profile-solve", "inviscid",     "evans-sweep",
                                          "lowfreq",         "beta",          "jordan",       "verify-decay",
                                          "verify-energy",   "resolvent-scan", "report"};
  return s;
}

Output run(const std::string& sub, const json& cfg, const RunOptions& opt) {
  if (std::find(subcommands().begin(), subcommands().end(), sub) == subcommands().end())
    throw ConfigError("unknown subcommand \"" + sub + "\"");
  State st(cfg, opt);
  try {
    st.model = models::from_json(cfg.at("model"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("model: ") + e.what());
  } catch (const json::exception& e) {
    throw ConfigError(std::string("model: ") + e.what());
  }
  st.report["subcommand"] = sub;
  st.report["config"] = cfg;
  st.report["model"] = {{"name", st.model.name}, {"d", st.model.d}, {"n", st.model.n}, {"r", st.model.r},
                        {"params", st.model.params}};
  st.report["provenance"] = {{"seed", opt.seed}, {"threads", opt.threads}, {"tolerance_profile", opt.tolerance_profile}};
  st.report["hypotheses"] = json::object();
  st.report["verdicts"] = json::object();
  st.report["evidence"] = json::object();

  int code = Stable;
  auto worst = [&code](int c) {
    if (c == Unstable || code == Unstable) code = Unstable;
    else if (c == Indeterminate) code = Indeterminate;
  };
  try {
    if (sub == "structure-check") {
      stage_structure(st);
      for (const auto& [k, h] : st.report["hypotheses"].items()) worst(h["status"] == "pass" ? Stable : Indeterminate);
    } else if (sub == "profile-solve") {
      stage_profile(st);
      worst(st.report["hypotheses"]["H3"]["status"] == "pass" ? Stable : Indeterminate);
    } else if (sub == "inviscid") {
      worst(stage_inviscid(st));
    } else if (sub == "evans-sweep") {
      worst(stage_evans(st));
    } else if (sub == "lowfreq") {
      worst(stage_lowfreq(st));
    } else if (sub == "beta") {
      worst(stage_beta(st));
    } else if (sub == "jordan") {
      worst(stage_jordan(st));
    } else if (sub == "verify-decay") {
      worst(stage_verify_decay(st, true));
    } else if (sub == "verify-energy") {
      worst(stage_verify_energy(st));
    } else if (sub == "resolvent-scan") {
      worst(stage_resolvent(st));
    } else {
      stage_structure(st);
      stage_profile(st);
      stage_inviscid(st);
      stage_evans(st);
      stage_lowfreq(st);
      stage_beta(st);
      stage_jordan(st);
      stage_verify_decay(st, false);
      stage_verify_energy(st);
      stage_resolvent(st);
      code = report_exit(st.report);
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const NumericalFailure& e) {
    st.report["failure"] = {{"kind", e.kind}, {"message", e.what()}};
    code = Indeterminate;
  } catch (const DomainError& e) {
    st.report["failure"] = {{"kind", "domain"}, {"message", e.what()}};
    code = Indeterminate;
  }
  st.report["exit_code"] = code;
  return {st.report, code, st.csv};
}

void write_output(const Output& out, const std::string& dir) {
  std::filesystem::create_directories(dir);
  std::ofstream(std::filesystem::path(dir) / "report.json") << out.report.dump(2) << '\n';
  for (const auto& [name, body] : out.csv) std::ofstream(std::filesystem::path(dir) / name) << body;
}

}  // namespace vss::pipeline
