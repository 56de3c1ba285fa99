#include "vss/profile.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace vss::profile {

namespace {

const Model& frame(const ShockData& sd) { return sd.frame; }

Vec endstate_w(const ShockData& sd, Side side) {
  return model::to_w(frame(sd), side == Side::Minus ? sd.Um : sd.Up);
}

}  // namespace

Vec level_set_w(const ShockData& sd, const Vec& w2, const Vec& guess) {
  const Model& m = frame(sd);
  const int n = m.n, ni = m.ni();
  Vec W(n);
  W.tail(m.r) = w2;
  if (ni == 0) return W;
  W.head(ni) = guess.head(ni);
  const Vec target = model::flux(m, 0, sd.Um).head(ni);
  const double scale = 1.0 + target.norm();
  for (int it = 0; it < 60; ++it) {
    Vec R = model::flux(m, 0, model::from_w(m, W)).head(ni) - target;
    Mat a11 = model::flux_jacobian_w(m, 0, W).topLeftCorner(ni, ni);
    Vec dw = a11.partialPivLu().solve(-R);
    W.head(ni) += dw;
    if (R.norm() <= 1e-15 * scale && dw.norm() <= 1e-15 * (1.0 + W.head(ni).norm())) return W;
    if (dw.norm() <= 1e-14 * (1.0 + W.head(ni).norm())) {
      Vec R2 = model::flux(m, 0, model::from_w(m, W)).head(ni) - target;
      if (R2.norm() <= 1e-12 * scale) return W;
    }
  }
  Vec R = model::flux(m, 0, model::from_w(m, W)).head(ni) - target;
  if (R.norm() <= 1e-11 * scale) return W;
  throw NumericalFailure("h1-path", "Newton on the level set failed along the profile");
}

Vec profile_rhs(const ShockData& sd, const Vec& W) {
  const Model& m = frame(sd);
  const int n = m.n, ni = m.ni(), r = m.r;
  const Vec U = model::from_w(m, W);
  const Vec G = model::flux(m, 0, U) - model::flux(m, 0, sd.Um);
  const Mat c = model::viscosity_w(m, 0, 0, W);
  Vec dW(n);
  dW.tail(r) = c.bottomRightCorner(r, r).partialPivLu().solve(G.tail(r));
  if (ni > 0) {
    Mat a = model::flux_jacobian_w(m, 0, W);
    dW.head(ni) = -a.topLeftCorner(ni, ni).partialPivLu().solve(a.topRightCorner(ni, r) * dW.tail(r));
  }
  return dW;
}

EndstateLinearization endstate_matrix(const ShockData& sd, Side side) {
  const Model& m = frame(sd);
  const int n = m.n, ni = m.ni(), r = m.r;
  const Vec W = endstate_w(sd, side);
  const Mat a = model::flux_jacobian_w(m, 0, W);
  const Mat c = model::viscosity_w(m, 0, 0, W);
  if (ni > 0 && c.leftCols(ni).norm() > 1e-12 * std::max(1.0, c.norm()))
    throw NumericalFailure("structure", "viscosity has nonzero inviscid columns in natural coordinates");
  EndstateLinearization out;
  Mat core = a.bottomRightCorner(r, r);
  if (ni > 0) {
    Mat a11 = a.topLeftCorner(ni, ni);
    Eigen::FullPivLU<Mat> lu(a11);
    if (lu.rank() < ni || std::abs(a11.determinant()) <= 1e-12 * std::pow(std::max(1.0, a11.norm()), ni))
      throw NumericalFailure("h1", "alpha_11 singular at the endstate: (H1) fails");
    core -= a.bottomLeftCorner(r, ni) * lu.solve(a.topRightCorner(ni, r));
  }
  out.M = c.bottomRightCorner(r, r).partialPivLu().solve(core);
  Eigen::EigenSolver<Mat> es(out.M, false);
  out.mu = es.eigenvalues();
  const double tol = 1e-10 * (1.0 + out.M.norm());
  out.gap = std::numeric_limits<double>::infinity();
  for (int i = 0; i < r; ++i) {
    const double re = out.mu(i).real();
    if (re < -tol) ++out.d_stable;
    else if (re > tol) ++out.d_unstable;
    else out.h2_ok = false;
    out.gap = std::min(out.gap, std::abs(re));
  }
  out.det_a1 = model::flux_jacobian(m, side == Side::Minus ? sd.Um : sd.Up, 0).determinant();
  if (!out.h2_ok) out.note = "eigenvalue of M on the imaginary axis: characteristic endstate, (H2) fails";
  (void)n;
  return out;
}

TypeCertificate classify_shock(const ShockData& sd) {
  const Model& m = frame(sd);
  const int n = m.n;
  if ((sd.Up - sd.Um).norm() <= 1e-10 * (1.0 + sd.Um.norm()))
    throw NumericalFailure("not-a-shock", "equal endstates: not a shock");
  TypeCertificate c;
  auto speeds = [&](const Vec& U) {
    Eigen::EigenSolver<Mat> es(model::flux_jacobian(m, U, 0), false);
    std::vector<double> a(n);
    for (int i = 0; i < n; ++i) a[i] = es.eigenvalues()(i).real();
    std::sort(a.begin(), a.end());
    return a;
  };
  const auto am = speeds(sd.Um), ap = speeds(sd.Up);
  const double tol = 1e-10 * (1.0 + std::abs(am.back()) + std::abs(ap.back()));
  for (double v : am) c.i_minus += v > tol;
  for (double v : ap) c.i_plus += v < -tol;
  bool sonic = false;
  for (double v : am) sonic = sonic || std::abs(v) <= tol;
  for (double v : ap) sonic = sonic || std::abs(v) <= tol;

  EndstateLinearization lm = endstate_matrix(sd, Side::Minus);
  EndstateLinearization lp = endstate_matrix(sd, Side::Plus);
  c.d_minus = lm.d_unstable;
  c.d_plus = lp.d_stable;
  c.ell_hat = c.d_plus + c.d_minus - m.r;
  if (sonic || !lm.h2_ok || !lp.h2_ok) {
    c.note = "characteristic endstate: (H2) fails";
    return c;
  }
  if (c.ell_hat != c.i_plus + c.i_minus - n)
    throw NumericalFailure("inconsistent", "d+ + d- - r = " + std::to_string(c.ell_hat) + " but i+ + i- - n = " +
                                               std::to_string(c.i_plus + c.i_minus - n));
  if (c.i_plus + c.i_minus == n + 1) {
    c.p = n - c.i_minus + 1;
    c.lax = c.i_plus == c.p && am[c.p - 1] > 0.0 && ap[c.p - 1] < 0.0;
  }
  c.note = c.lax ? "Lax " + std::to_string(c.p) + "-shock" : "not of Lax type";
  return c;
}

void Profile::build_interpolants() {
  hw_.x = x;
  hw_.y = W;
  hw_.dy = dW;
  hu_.x = x;
  hu_.y = U;
  hu_.dy = dU;
}

void Profile::eval_w(double t, Vec& w, Vec* dw) const {
  if (t <= x.front() || t >= x.back()) {
    w = t <= x.front() ? W.front() : W.back();
    if (dw) *dw = Vec::Zero(w.size());
    return;
  }
  hw_.eval(t, w, dw);
}

void Profile::eval_u(double t, Vec& u, Vec* du) const {
  if (t <= x.front() || t >= x.back()) {
    u = t <= x.front() ? U.front() : U.back();
    if (du) *du = Vec::Zero(u.size());
    return;
  }
  hu_.eval(t, u, du);
}

namespace {

// Smooth monotone stretching x = L (k t + (1-k) t^5) with about 60% of the points in |x| <= 5/gap.
std::vector<double> stretched_grid(double L, double inner, int points) {
  const double t0 = 0.6, f = std::min(inner / L, 0.9);
  double k = (f - std::pow(t0, 5)) / (t0 - std::pow(t0, 5));
  k = std::clamp(k, 0.05, 1.0);
  std::vector<double> x(points);
  for (int i = 0; i < points; ++i) {
    const double t = -1.0 + 2.0 * i / (points - 1);
    x[i] = L * (k * t + (1 - k) * std::pow(t, 5));
  }
  x.front() = -L;
  x.back() = L;
  return x;
}

double side_gap(const EndstateLinearization& e, bool unstable) {
  double g = std::numeric_limits<double>::infinity();
  for (int i = 0; i < e.mu.size(); ++i) {
    const double re = e.mu(i).real();
    if (unstable ? re > 0 : re < 0) g = std::min(g, std::abs(re));
  }
  return g;
}

struct Trajectory {
  std::vector<Vec> W, dW;
};

// Orbit on the one-dimensional launch manifold W = base + delta v exp(mu (x - x0)) near the endstate.
// Grid points on the endstate side of x0 use that linear manifold (error O(delta^2)); the rest are
// integrated from x0.
Trajectory integrate(const ShockData& sd, const std::vector<double>& x, bool forward, const Vec& base,
                     const Vec& v, double mu, double delta, double x0, const Options& opt) {
  using State = std::vector<double>;
  namespace ode = boost::numeric::odeint;
  const Model& m = sd.frame;
  const int r = m.r, n = m.n;
  const Vec b2 = base.tail(r);
  Trajectory t;
  t.W.resize(x.size());
  t.dW.resize(x.size());

  std::vector<size_t> idx;
  for (size_t i = 0; i < x.size(); ++i)
    if (forward ? x[i] > x0 : x[i] < x0) idx.push_back(i);
  if (!forward) std::reverse(idx.begin(), idx.end());

  Vec guess = base;
  for (size_t i = 0; i < x.size(); ++i) {
    if (forward ? x[i] > x0 : x[i] < x0) continue;
    t.W[i] = level_set_w(sd, b2 + delta * std::exp(mu * (x[i] - x0)) * v, guess);
    guess = t.W[i];
    t.dW[i] = profile_rhs(sd, t.W[i]);
  }
  if (idx.empty()) return t;

  // The state is the deviation from the endstate so relative tolerances stay meaningful near it.
  guess = level_set_w(sd, b2 + delta * v, base);
  auto sys = [&](const State& y, State& dy, double) {
    Vec W = level_set_w(sd, b2 + Eigen::Map<const Vec>(y.data(), r), guess);
    guess = W;
    Vec d = profile_rhs(sd, W);
    for (int i = 0; i < r; ++i) dy[i] = d(n - r + i);
  };
  std::vector<double> times{x0};
  for (size_t i : idx) times.push_back(x[i]);
  Vec dev0 = delta * v;
  State y(dev0.data(), dev0.data() + r);
  std::vector<Vec> w2s;
  w2s.reserve(times.size());
  auto obs = [&](const State& s, double) { w2s.push_back(b2 + Eigen::Map<const Vec>(s.data(), r)); };
  auto stepper = ode::make_dense_output(opt.atol * delta, opt.rtol, ode::runge_kutta_dopri5<State>());
  ode::integrate_times(stepper, sys, y, times.begin(), times.end(), forward ? 1e-3 : -1e-3, obs);
  Vec g = level_set_w(sd, w2s.front(), base);
  for (size_t k = 0; k < idx.size(); ++k) {
    const size_t i = idx[k];
    t.W[i] = level_set_w(sd, w2s[k + 1], g);
    g = t.W[i];
    t.dW[i] = profile_rhs(sd, t.W[i]);
  }
  return t;
}

double locate_crossing(const std::vector<double>& x, const Trajectory& t, int comp, double value, bool* found) {
  *found = false;
  double best = 0.0, bestabs = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i + 1 < x.size(); ++i) {
    const double a = t.W[i](comp) - value, b = t.W[i + 1](comp) - value;
    if (a * b > 0.0 || (a == 0.0 && b == 0.0)) continue;
    linalg::Hermite h;
    h.x = {x[i], x[i + 1]};
    h.y = {t.W[i], t.W[i + 1]};
    h.dy = {t.dW[i], t.dW[i + 1]};
    double lo = x[i], hi = x[i + 1];
    Vec v;
    for (int it = 0; it < 80; ++it) {
      const double mid = 0.5 * (lo + hi);
      h.eval(mid, v);
      if ((v(comp) - value) * a > 0.0) lo = mid;
      else hi = mid;
    }
    const double xc = 0.5 * (lo + hi);
    if (std::abs(xc) < bestabs) {
      bestabs = std::abs(xc);
      best = xc;
      *found = true;
    }
  }
  return best;
}

}  // namespace

Profile solve_profile(const ShockData& sd, const Options& opt) {
  const Model& m = sd.frame;
  const int r = m.r, ni = m.ni();
  if (!sd.cert.lax || sd.cert.ell_hat != 1)
    throw NumericalFailure("not-lax", "profile solver needs a Lax shock with ell_hat = 1");
  const EndstateLinearization lm = endstate_matrix(sd, Side::Minus);
  const EndstateLinearization lp = endstate_matrix(sd, Side::Plus);
  const Vec Wm = endstate_w(sd, Side::Minus), Wp = endstate_w(sd, Side::Plus);
  const double gm = side_gap(lm, true), gp = side_gap(lp, false);
  const double gap = std::min(gm, gp);

  Profile p;
  p.shock = sd;
  p.L = opt.L > 0.0 ? opt.L : std::log(1.0 / opt.tail) / gap;
  p.x = stretched_grid(p.L, 5.0 / gap, opt.points);

  bool forward;
  if (lm.d_unstable == 1) forward = true;
  else if (lp.d_stable == 1) forward = false;
  else
    throw NumericalFailure("existence", "neither endstate has a one-dimensional launch manifold");
  const EndstateLinearization& le = forward ? lm : lp;
  Eigen::EigenSolver<Mat> es(le.M);
  int k = -1;
  for (int i = 0; i < r; ++i) {
    const double re = es.eigenvalues()(i).real();
    if (forward ? re > 0 : re < 0) k = i;
  }
  const double mu = es.eigenvalues()(k).real();
  Vec v = es.eigenvectors().col(k).real();
  v.normalize();
  const Vec& base = forward ? Wm : Wp;
  const Vec& target = forward ? Wp : Wm;
  if (v.dot(target.tail(r) - base.tail(r)) < 0.0) v = -v;

  const Vec jump = Wp - Wm;
  int comp = opt.phase_component;
  if (comp < 0) jump.cwiseAbs().maxCoeff(&comp);
  p.phase_component = comp;
  p.phase_value = Wm(comp) + opt.phase_fraction * jump(comp);

  const double delta = 1e-7 * jump.norm();
  double x0 = std::log(delta / (0.5 * jump.norm())) / mu;
  Trajectory t;
  bool converged = false;
  double prev = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 12; ++it) {
    t = integrate(sd, p.x, forward, base, v, mu, delta, x0, opt);
    bool found = false;
    const double xc = locate_crossing(p.x, t, comp, p.phase_value, &found);
    if (!found) throw NumericalFailure("existence", "phase condition never met along the shooting orbit");
    // Translating the orbit by -xc is a Newton step on the launch coordinate x0.
    x0 -= xc;
    if (std::abs(xc) <= 1e-12 * (1.0 + p.L) || (it >= 3 && std::abs(xc) >= 0.5 * prev && std::abs(xc) <= 1e-9)) {
      converged = true;
      t = integrate(sd, p.x, forward, base, v, mu, delta, x0, opt);
      break;
    }
    prev = std::abs(xc);
  }
  if (!converged) throw NumericalFailure("existence", "launch-amplitude Newton did not converge");

  p.W = t.W;
  p.dW = t.dW;
  p.U.resize(p.x.size());
  p.dU.resize(p.x.size());
  const Vec F0 = model::flux(m, 0, sd.Um);
  const double fscale = 1.0 + (model::flux(m, 0, sd.Up) - F0).norm() + F0.norm();
  for (size_t i = 0; i < p.x.size(); ++i) {
    p.U[i] = model::from_w(m, p.W[i]);
    p.dU[i] = model::du_dw(m, p.W[i]) * p.dW[i];
    const Vec G = model::flux(m, 0, p.U[i]) - F0;
    const Vec res = model::viscosity_w(m, 0, 0, p.W[i]) * p.dW[i] - G;
    p.residual = std::max(p.residual, res.norm() / fscale);
    if (ni > 0) p.level_set_defect = std::max(p.level_set_defect, G.head(ni).norm() / fscale);
  }
  p.end_mismatch = ((forward ? p.W.back() : p.W.front()) - target).norm();
  if (p.end_mismatch > 1e-6 * (1.0 + jump.norm()))
    throw NumericalFailure("existence", "shooting orbit misses the far endstate by " + std::to_string(p.end_mismatch));
  p.build_interpolants();
  decay_certificate(p, p.minus, p.plus);
  return p;
}

void decay_certificate(const Profile& p, DecayFit& minus, DecayFit& plus) {
  const ShockData& sd = p.shock;
  const double jump = (sd.Up - sd.Um).norm();
  auto fit = [&](bool left, DecayFit& out) {
    const Vec& Uend = left ? sd.Um : sd.Up;
    const double floor = 1e-10 * std::max(1.0, jump) * (1.0 + Uend.norm());
    // Outer two thirds of the part of the tail that is still resolvable above the noise floor.
    double reach = 0.0;
    for (size_t i = 0; i < p.x.size(); ++i)
      if ((left ? p.x[i] < 0 : p.x[i] > 0) && (p.U[i] - Uend).norm() > floor) reach = std::max(reach, std::abs(p.x[i]));
    std::vector<double> xs, ys;
    for (size_t i = 0; i < p.x.size(); ++i) {
      const double x = p.x[i];
      if (left ? x > -reach / 3 : x < reach / 3) continue;
      const double dev = (p.U[i] - Uend).norm();
      if (dev <= floor) continue;
      xs.push_back(std::abs(x));
      ys.push_back(std::log(dev));
    }
    const auto lin = endstate_matrix(sd, left ? Side::Minus : Side::Plus);
    out.gap = side_gap(lin, left);
    if (xs.size() < 10) {
      out.advisory = "too few resolvable tail points; enlarge L";
      return;
    }
    const double N = static_cast<double>(xs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (size_t i = 0; i < xs.size(); ++i) {
      sx += xs[i];
      sy += ys[i];
      sxx += xs[i] * xs[i];
      sxy += xs[i] * ys[i];
      syy += ys[i] * ys[i];
    }
    const double slope = (N * sxy - sx * sy) / (N * sxx - sx * sx);
    const double icpt = (sy - slope * sx) / N;
    const double vx = sxx - sx * sx / N, vy = syy - sy * sy / N, cxy = sxy - sx * sy / N;
    out.theta = -slope;
    out.C = std::exp(icpt);
    out.r2 = vy > 0 ? cxy * cxy / (vx * vy) : 1.0;
    out.ok = out.r2 >= 0.99 && std::abs(out.theta - out.gap) <= 0.2 * out.gap;
    if (out.r2 < 0.99) out.advisory = "tail fit R^2 below 0.99; enlarge L";
    else if (!out.ok) out.advisory = "fitted rate differs from the spectral gap by more than 20%";
  };
  fit(true, minus);
  fit(false, plus);
}

void export_profile(const Profile& p, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  const Model& m = p.shock.frame;
  f << "# profile model=" << m.name << " n=" << m.n << std::setprecision(17) << " L=" << p.L
    << " theta_minus=" << p.minus.theta << " theta_plus=" << p.plus.theta << " residual=" << p.residual
    << " phase_component=" << p.phase_component << " phase_value=" << p.phase_value << "\n";
  f << "# x";
  for (int i = 0; i < m.n; ++i) f << " U" << i + 1;
  f << "\n";
  for (size_t i = 0; i < p.x.size(); ++i) {
    f << p.x[i];
    for (int c = 0; c < m.n; ++c) f << ' ' << p.U[i](c);
    f << '\n';
  }
}

Profile import_profile(const ShockData& sd, const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read " + path);
  const Model& m = sd.frame;
  Profile p;
  p.shock = sd;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream hs(line.substr(1));
      std::string tok;
      while (hs >> tok) {
        auto eq = tok.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
        if (key == "n" && std::stoi(val) != m.n) throw std::runtime_error("profile file has the wrong state size");
        if (key == "phase_component") p.phase_component = std::stoi(val);
        if (key == "phase_value") p.phase_value = std::stod(val);
      }
      continue;
    }
    std::istringstream ls(line);
    double x;
    ls >> x;
    Vec U(m.n);
    for (int c = 0; c < m.n; ++c) ls >> U(c);
    if (!ls) throw std::runtime_error("malformed profile row: " + line);
    p.x.push_back(x);
    p.U.push_back(U);
  }
  if (p.x.size() < 4) throw std::runtime_error("profile file has too few rows");
  p.L = p.x.back();
  const Vec F0 = model::flux(m, 0, sd.Um);
  const double fscale = 1.0 + F0.norm();
  for (size_t i = 0; i < p.x.size(); ++i) {
    Vec W = model::to_w(m, p.U[i]);
    Vec dW = profile_rhs(sd, W);
    p.W.push_back(W);
    p.dW.push_back(dW);
    p.dU.push_back(model::du_dw(m, W) * dW);
    if (m.ni() > 0)
      p.level_set_defect =
          std::max(p.level_set_defect, (model::flux(m, 0, p.U[i]) - F0).head(m.ni()).norm() / fscale);
  }
  p.build_interpolants();
  decay_certificate(p, p.minus, p.plus);
  return p;
}

}  // namespace vss::profile
