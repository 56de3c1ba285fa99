#include "vss/inviscid.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <map>

namespace vss::inviscid {

namespace {

constexpr cplx I(0.0, 1.0);

// Flux Jacobians at one endstate, cached for repeated symbol evaluation.
struct SideData {
  Mat A1, A1inv;
  std::vector<Mat> A;  // transverse Jacobians A^2..A^d
  int n = 0;

  SideData(const ShockData& sd, Side side) {
    const Vec& U = side == Side::Minus ? sd.Um : sd.Up;
    const Model& m = sd.frame;
    n = m.n;
    A1 = model::flux_jacobian(m, U, 0);
    Eigen::JacobiSVD<Mat> svd(A1);
    const Vec& sv = svd.singularValues();
    if (sv(n - 1) <= 1e-12 * std::max(1.0, sv(0)))
      throw NumericalFailure("h2", "A1 is singular at the endstate: (H2) fails");
    A1inv = A1.inverse();
    for (int j = 1; j < m.d; ++j) A.push_back(model::flux_jacobian(m, U, j));
  }

  CMat transverse(const Vec& xi_t) const {
    CMat S = CMat::Zero(n, n);
    for (int j = 0; j < static_cast<int>(A.size()) && j < xi_t.size(); ++j) S += xi_t(j) * A[j].cast<cplx>();
    return S;
  }

  CMat symbol(const Vec& xi_t, cplx lambda) const {
    CMat S = I * transverse(xi_t);
    S.diagonal().array() += lambda;
    return A1inv.cast<cplx>() * S;
  }
};

bool is_zero(const Vec& v) { return v.size() == 0 || v.norm() == 0.0; }

Vec padded(const Vec& v, int size) {
  Vec out = Vec::Zero(size);
  for (int i = 0; i < std::min<int>(size, static_cast<int>(v.size())); ++i) out(i) = v(i);
  return out;
}

// Real eigenvectors of A1 for the outgoing modes: a < 0 on the minus side, a > 0 on the plus side.
CMat outgoing_eigenvectors(const SideData& s, Side side) {
  Eigen::EigenSolver<Mat> es(s.A1);
  std::vector<std::pair<double, int>> order;
  for (int i = 0; i < s.n; ++i) {
    const double a = es.eigenvalues()(i).real();
    if (std::abs(es.eigenvalues()(i).imag()) > 1e-10 * (1.0 + std::abs(a)))
      throw NumericalFailure("hyperbolicity", "A1 has complex eigenvalues at an endstate");
    if ((side == Side::Minus && a < 0) || (side == Side::Plus && a > 0)) order.push_back({a, i});
  }
  std::sort(order.begin(), order.end());
  Mat R(s.n, order.size());
  // Orthonormalise inside clusters of equal speed so the basis does not depend on the solver's choice.
  std::vector<double> vals;
  for (auto& o : order) vals.push_back(o.first);
  double scale = 1.0;
  for (double v : vals) scale = std::max(scale, std::abs(v));
  auto bounds = linalg::cluster_sorted(vals, 1e-9 * scale);
  for (size_t c = 0; c + 1 < bounds.size(); ++c) {
    const int b = bounds[c], e = bounds[c + 1];
    Mat block(s.n, e - b);
    for (int k = b; k < e; ++k) block.col(k - b) = es.eigenvectors().col(order[k].second).real();
    if (e - b > 1) {
      Eigen::HouseholderQR<Mat> qr(block);
      block = qr.householderQ() * Mat::Identity(s.n, e - b);
    }
    R.middleCols(b, e - b) = block;
  }
  CMat out = R.cast<cplx>();
  normalize_columns(out);
  return out;
}

// Flux-variable frame A1 r at the anchor; r are the decaying modes.
CMat anchor_frame(const SideData& s, Side side, const Anchor* anchor) {
  const bool standard = !anchor || (is_zero(anchor->xi_t) && anchor->lambda.imag() == 0.0 && anchor->lambda.real() > 0);
  if (standard) return outgoing_eigenvectors(s, side);
  auto e = linalg::eig(s.symbol(anchor->xi_t, anchor->lambda));
  std::vector<std::pair<std::pair<double, double>, int>> order;
  for (int i = 0; i < s.n; ++i) {
    const double re = e.values(i).real();
    if ((side == Side::Minus && re < 0) || (side == Side::Plus && re > 0))
      order.push_back({{re, e.values(i).imag()}, i});
  }
  std::sort(order.begin(), order.end());
  CMat R(s.n, order.size());
  for (size_t k = 0; k < order.size(); ++k) R.col(k) = s.A1.cast<cplx>() * e.vectors.col(order[k].second);
  normalize_columns(R);
  return R;
}

struct Evaluator {
  const ShockData& sd;
  SideData minus, plus;
  Vec jumpU;
  int dt;  // transverse dimension

  explicit Evaluator(const ShockData& s)
      : sd(s), minus(s, Side::Minus), plus(s, Side::Plus), jumpU(s.Up - s.Um), dt(s.frame.d - 1) {}

  LopatinskiFrames frames(const Vec& xi_in, cplx lambda, const Anchor* anchor, const FrameOptions& opt) const {
    Vec xi = padded(xi_in, dt);
    double nrm = std::sqrt(xi.squaredNorm() + std::norm(lambda));
    if (nrm == 0.0) throw NumericalFailure("domain", "Lopatinski determinant needs (xi, lambda) != 0");
    if (lambda.real() < -1e-14 * nrm) throw NumericalFailure("domain", "Lopatinski determinant needs Re lambda >= 0");
    if (lambda.real() <= 1e-14 * nrm) lambda = cplx(kBoundaryOffset * nrm, lambda.imag());
    nrm = std::sqrt(xi.squaredNorm() + std::norm(lambda));
    const Vec xh = xi / nrm;
    const cplx lh = lambda / nrm;
    const Vec x0 = anchor ? padded(anchor->xi_t, dt) : Vec::Zero(dt);
    const cplx l0 = anchor ? anchor->lambda : cplx(1.0);

    LopatinskiFrames out;
    out.lambda_used = lambda;
    auto run = [&](const SideData& s, Side side) {
      MatrixPath M = [&, x0, xh, l0, lh](double t) { return s.symbol((1 - t) * x0 + t * xh, (1 - t) * l0 + t * lh); };
      CMat dM = s.A1inv.cast<cplx>() * (I * s.transverse(xh - x0));
      dM += (lh - l0) * s.A1inv.cast<cplx>();
      MatrixPath D = [dM](double) { return dM; };
      return continue_frames(M, D, s.A1inv.cast<cplx>() * anchor_frame(s, side, anchor), opt);
    };
    out.fm = run(minus, Side::Minus);
    out.fp = run(plus, Side::Plus);
    out.Vm = out.fm.R;
    out.Vp = out.fp.R;
    out.Rm = minus.A1.cast<cplx>() * out.Vm;
    out.Rp = plus.A1.cast<cplx>() * out.Vp;
    return out;
  }

  cplx delta(const Vec& xi_in, cplx lambda, const Anchor* anchor, const FrameOptions& opt) const {
    LopatinskiFrames f = frames(xi_in, lambda, anchor, opt);
    if (!f.fm.ok || !f.fp.ok)
      throw NumericalFailure("frames", "frame continuation failed: " + (f.fm.ok ? f.fp.failure : f.fm.failure));
    const int n = sd.frame.n;
    CMat D(n, n);
    D << f.Rm, f.Rp, f.lambda_used * jumpU.cast<cplx>() + I * transverse_jump(sd, padded(xi_in, dt)).cast<cplx>();
    return D.determinant();
  }
};

// Branch data of A(xi1) = xi1 A1 + A^xi~: cluster means and d a / d xi1.
struct Branches {
  std::vector<double> a, g;
};

Branches branches(const Mat& A1, const Mat& At, double xi1, int expected) {
  Mat A = xi1 * A1 + At;
  Eigen::EigenSolver<Mat> es(A);
  const int n = static_cast<int>(A.rows());
  std::vector<std::pair<double, int>> order;
  for (int i = 0; i < n; ++i) order.push_back({es.eigenvalues()(i).real(), i});
  std::sort(order.begin(), order.end());
  CMat V(n, n);
  for (int i = 0; i < n; ++i) V.col(i) = es.eigenvectors().col(order[i].second);
  CMat W = V.inverse();
  std::vector<double> vals;
  for (auto& o : order) vals.push_back(o.first);
  double scale = 1.0;
  for (double v : vals) scale = std::max(scale, std::abs(v));
  auto b = linalg::cluster_sorted(vals, 1e-8 * scale);
  Branches out;
  if (expected >= 0 && static_cast<int>(b.size()) - 1 != expected)
    throw NumericalFailure("h4", "branch structure of A^xi changes along xi1: (H4) fails");
  CMat G = W * A1.cast<cplx>() * V;
  for (size_t c = 0; c + 1 < b.size(); ++c) {
    double mean = 0.0;
    cplx tr = 0.0;
    for (int k = b[c]; k < b[c + 1]; ++k) mean += vals[k], tr += G(k, k);
    const int mlt = b[c + 1] - b[c];
    out.a.push_back(mean / mlt);
    out.g.push_back(tr.real() / mlt);
  }
  return out;
}

}  // namespace

CMat ibvp_symbol(const ShockData& sd, Side side, const Vec& xi_t, cplx lambda) {
  SideData s(sd, side);
  return s.symbol(padded(xi_t, sd.frame.d - 1), lambda);
}

Vec transverse_jump(const ShockData& sd, const Vec& xi_t) {
  Vec out = Vec::Zero(sd.frame.n);
  for (int j = 1; j < sd.frame.d && j - 1 < xi_t.size(); ++j)
    if (xi_t(j - 1) != 0.0)
      out += xi_t(j - 1) * (model::flux(sd.frame, j, sd.Up) - model::flux(sd.frame, j, sd.Um));
  return out;
}

LopatinskiFrames lopatinski_frames(const ShockData& sd, const Vec& xi_t, cplx lambda, const Anchor* anchor,
                                   const FrameOptions& opt) {
  Evaluator ev(sd);
  return ev.frames(xi_t, lambda, anchor, opt);
}

cplx lopatinski(const ShockData& sd, const Vec& xi_t, cplx lambda, const Anchor* anchor, const FrameOptions& opt) {
  Evaluator ev(sd);
  const Vec xi = padded(xi_t, sd.frame.d - 1);
  if (lambda.real() == 0.0 && !is_zero(xi)) {
    const double nrm = std::sqrt(xi.squaredNorm() + std::norm(lambda));
    for (Side side : {Side::Minus, Side::Plus}) {
      for (const auto& g : glancing_set(sd, side, {xi}).points)
        if (std::abs(g.tau - lambda.imag()) <= 1e-6 * nrm)
          throw NumericalFailure("glancing", "boundary point lies on the glancing set");
    }
  }
  return ev.delta(xi, lambda, anchor, opt);
}

cplx liu_majda(const ShockData& sd) {
  SideData m(sd, Side::Minus), p(sd, Side::Plus);
  const int n = sd.frame.n;
  CMat D(n, n);
  D << outgoing_eigenvectors(m, Side::Minus), outgoing_eigenvectors(p, Side::Plus), (sd.Up - sd.Um).cast<cplx>();
  return D.determinant();
}

CharacteristicData characteristics(const ShockData& sd, Side side, const std::vector<Vec>& sphere) {
  CharacteristicData out;
  const Vec& U = side == Side::Minus ? sd.Um : sd.Up;
  auto sorted_eigs = [&](const Vec& xi) {
    Eigen::EigenSolver<Mat> es(model::symbol_A(sd.frame, U, xi));
    std::vector<double> v;
    for (int i = 0; i < es.eigenvalues().size(); ++i) v.push_back(es.eigenvalues()(i).real());
    std::sort(v.begin(), v.end());
    return v;
  };
  std::vector<int> first;
  for (const Vec& xi : sphere) {
    auto v = sorted_eigs(xi);
    auto v2 = sorted_eigs(2.0 * xi);
    for (size_t i = 0; i < v.size(); ++i)
      out.homogeneity_defect = std::max(out.homogeneity_defect, std::abs(v2[i] - 2.0 * v[i]));
    double scale = 1.0;
    for (double a : v) scale = std::max(scale, std::abs(a));
    auto b = linalg::cluster_sorted(v, 1e-8 * scale);
    std::vector<int> sizes;
    for (size_t c = 0; c + 1 < b.size(); ++c) sizes.push_back(b[c + 1] - b[c]);
    if (out.xi.empty()) out.multiplicities = sizes;
    else if (sizes != out.multiplicities) out.ordered = false;
    out.xi.push_back(xi);
    out.values.push_back(v);
  }
  return out;
}

GlancingSet glancing_set(const ShockData& sd, Side side, const std::vector<Vec>& xi_t_grid) {
  GlancingSet out;
  const Vec& U = side == Side::Minus ? sd.Um : sd.Up;
  const Model& m = sd.frame;
  const int n = m.n;
  const Mat A1 = model::flux_jacobian(m, U, 0);
  const double a1n = std::max(1e-300, A1.norm());
  std::vector<bool> noted;
  for (const Vec& xin : xi_t_grid) {
    const Vec xi = padded(xin, m.d - 1);
    const double s = xi.norm();
    if (s == 0.0) continue;
    Mat At = Mat::Zero(n, n);
    for (int j = 1; j < m.d; ++j) At += xi(j - 1) * model::flux_jacobian(m, U, j);
    const int nb = static_cast<int>(branches(A1, At, 0.0, -1).a.size());
    noted.resize(nb, false);
    const int samples = 2001;
    std::vector<double> x1(samples);
    std::vector<Branches> br(samples);
    for (int k = 0; k < samples; ++k) {
      const double th = -M_PI / 2 + 0.01 + (M_PI - 0.02) * k / (samples - 1);
      x1[k] = s * std::tan(th);
      br[k] = branches(A1, At, x1[k], nb);
    }
    for (int r = 0; r < nb; ++r) {
      double gmax = 0.0;
      for (int k = 0; k < samples; ++k) gmax = std::max(gmax, std::abs(br[k].g[r]));
      if (gmax <= 1e-12 * a1n) {
        if (!noted[r]) out.notes.push_back("branch " + std::to_string(r) + ": da/dxi1 vanishes identically");
        noted[r] = true;
        continue;
      }
      auto g = [&](double x) { return branches(A1, At, x, nb).g[r]; };
      for (int k = 0; k + 1 < samples; ++k) {
        const double ga = br[k].g[r], gb = br[k + 1].g[r];
        if (!(ga * gb < 0.0 || ga == 0.0)) continue;
        double lo = x1[k], hi = ga == 0.0 ? x1[k] : x1[k + 1], flo = ga;
        if (ga != 0.0) {
          for (int it = 0; it < 200 && hi - lo > 1e-15 * (1.0 + std::abs(lo)); ++it) {
            const double mid = 0.5 * (lo + hi);
            const double fm = g(mid);
            if (fm == 0.0) {
              lo = hi = mid;
              break;
            }
            if ((fm < 0) == (flo < 0)) lo = mid, flo = fm;
            else hi = mid;
          }
        }
        GlancingPoint p;
        p.xi_t = xi;
        p.branch = r;
        p.xi1 = 0.5 * (lo + hi);
        p.tau = -branches(A1, At, p.xi1, nb).a[r];
        // Taylor test on a(xi1) - a(xi1*): the first non-vanishing derivative fixes the order.
        const double rad = s + std::abs(p.xi1);
        const double h = 1e-3 * rad;
        const double scale = a1n / rad;
        const double g0 = g(p.xi1), gp = g(p.xi1 + h), gm = g(p.xi1 - h);
        const double a2 = (gp - gm) / (2 * h);
        const double a3 = (gp - 2 * g0 + gm) / (h * h);
        if (std::abs(a2) > 1e-6 * scale) p.order = 2;
        else if (std::abs(a3) > 1e-6 * scale / rad) p.order = 3;
        else p.order = n;
        p.order = std::min(p.order, n);
        bool dup = false;
        for (const auto& q : out.points)
          if (q.branch == r && (q.xi_t - xi).norm() == 0.0 && std::abs(q.xi1 - p.xi1) < 1e-9 * rad) dup = true;
        if (!dup) out.points.push_back(p);
      }
    }
  }
  return out;
}

std::vector<Vec> transverse_directions(int d, int count) {
  std::vector<Vec> out;
  if (d == 2) out.push_back(Vec::Ones(1));
  if (d == 3)
    for (int k = 0; k < count; ++k) {
      const double th = M_PI * k / count;
      Vec v(2);
      v << std::cos(th), std::sin(th);
      out.push_back(v);
    }
  if (d > 3) throw std::invalid_argument("transverse sampling is implemented for d <= 3");
  return out;
}

namespace {

double default_radius(const ShockData& sd) {
  double ratio = 1.0;
  for (Side side : {Side::Minus, Side::Plus}) {
    SideData s(sd, side);
    Eigen::JacobiSVD<Mat> svd(s.A1);
    const double amin = svd.singularValues()(s.n - 1);
    for (const Mat& A : s.A) ratio = std::max(ratio, A.norm() / amin);
  }
  return std::min(1e3, 10.0 * ratio);
}

struct Contour {
  double R, eps;
  // s in [0, 1/2]: boundary segment from +iR to -iR; s in [1/2, 1]: the arc back to +iR.
  cplx at(double s) const {
    if (s <= 0.5) {
      const double tau = R * (1.0 - 4.0 * s);
      return cplx(eps * std::sqrt(1.0 + tau * tau), tau);
    }
    const double phi = -M_PI / 2 + M_PI * (2.0 * s - 1.0);
    cplx z = std::polar(R, phi);
    const double floor = eps * std::sqrt(1.0 + R * R);
    if (z.real() < floor) z = cplx(floor, z.imag());
    return z;
  }
};

}  // namespace

WindingResult lopatinski_winding(const ShockData& sd, const Vec& xi_t, double radius, const Resolution& res,
                                 const Anchor* anchor) {
  Evaluator ev(sd);
  Contour c{radius, kBoundaryOffset * std::max(1.0, xi_t.norm())};
  std::map<double, cplx> vals;
  WindingResult out;
  auto eval = [&](double s) -> cplx {
    auto it = vals.find(s);
    if (it != vals.end()) return it->second;
    cplx v;
    try {
      v = ev.delta(xi_t, c.at(s), anchor, res.frames);
    } catch (const NumericalFailure&) {
      v = cplx(std::nan(""), 0.0);
      out.resolved = false;
    }
    vals[s] = v;
    return v;
  };
  std::vector<double> seeds;
  for (int k = 0; k < res.segment; ++k) seeds.push_back(0.5 * k / (res.segment - 1));
  for (int k = 1; k < res.arc; ++k) seeds.push_back(0.5 + 0.5 * k / (res.arc - 1));
  for (double s : seeds) eval(s);
  // Refine every interval whose argument increment exceeds pi/4.
  for (size_t k = 0; k + 1 < seeds.size(); ++k) {
    std::vector<std::pair<double, double>> stack = {{seeds[k], seeds[k + 1]}};
    std::vector<int> depth = {0};
    while (!stack.empty()) {
      auto [a, b] = stack.back();
      int dpt = depth.back();
      stack.pop_back();
      depth.pop_back();
      const cplx va = eval(a), vb = eval(b);
      if (std::isnan(va.real()) || std::isnan(vb.real())) continue;
      const double inc = std::abs(std::arg(vb / va));
      if (inc <= M_PI / 4) continue;
      if (dpt >= res.max_refine) {
        if (inc > M_PI / 2) out.resolved = false;
        continue;
      }
      const double mid = 0.5 * (a + b);
      stack.push_back({a, mid});
      depth.push_back(dpt + 1);
      stack.push_back({mid, b});
      depth.push_back(dpt + 1);
    }
  }
  double arg = 0.0;
  cplx prev = 0.0;
  bool first = true;
  for (auto& [s, v] : vals) {
    if (std::isnan(v.real())) continue;
    if (!first) arg += std::arg(v / prev);
    first = false;
    prev = v;
    out.trace.push_back({xi_t, c.at(s), v, arg});
  }
  if (!first) arg += std::arg(vals.begin()->second / prev);  // close the loop
  out.winding = static_cast<int>(std::lround(arg / (2 * M_PI)));
  if (std::abs(arg / (2 * M_PI) - out.winding) > 0.1) out.resolved = false;
  return out;
}

Verdict inviscid_verdict(const ShockData& sd, const Resolution& res) {
  Verdict v;
  v.delta = liu_majda(sd);
  const double jump = (sd.Up - sd.Um).norm();
  if (std::abs(v.delta) <= 1e-10 * jump) {
    v.verdict = "strongly unstable";
    v.notes.push_back("Liu-Majda determinant vanishes: Delta(0, lambda) = 0 for all lambda");
    return v;
  }
  const int d = sd.frame.d;
  if (d == 1) {
    v.verdict = "strongly stable";
    v.notes.push_back("one-dimensional: Delta(0, lambda) = lambda delta with delta != 0");
    return v;
  }
  v.radius = res.radius > 0 ? res.radius : default_radius(sd);
  v.directions = transverse_directions(d, res.directions);
  Evaluator ev(sd);
  bool unresolved = false;
  for (const Vec& xi : v.directions) {
    WindingResult w = lopatinski_winding(sd, xi, v.radius, res);
    if (!w.resolved) unresolved = true;
    if (w.winding < 0) v.notes.push_back("negative winding: contour sampling too coarse");
    v.interior_roots += std::max(0, w.winding);

    std::vector<GlancingPoint> glance;
    for (Side side : {Side::Minus, Side::Plus}) {
      auto g = glancing_set(sd, side, {xi});
      glance.insert(glance.end(), g.points.begin(), g.points.end());
    }
    // Boundary roots: local minima of |Delta| along the segment, refined by golden section.
    std::vector<std::pair<double, cplx>> seg;
    for (const auto& p : w.trace)
      if (p.lambda.real() <= 2 * kBoundaryOffset * std::sqrt(1.0 + std::norm(p.lambda)) * std::max(1.0, xi.norm()))
        seg.push_back({p.lambda.imag(), p.delta});
    std::sort(seg.begin(), seg.end(), [](auto& a, auto& b) { return a.first < b.first; });
    auto mag = [&](double tau) { return std::abs(ev.delta(xi, cplx(0.0, tau), nullptr, res.frames)); };
    for (size_t k = 1; k + 1 < seg.size(); ++k) {
      const double f = std::abs(seg[k].second);
      if (!(f < std::abs(seg[k - 1].second) && f <= std::abs(seg[k + 1].second))) continue;
      double a = seg[k - 1].first, b = seg[k + 1].first;
      const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
      double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
      double f1 = mag(x1), f2 = mag(x2);
      for (int it = 0; it < 80 && b - a > 1e-12 * (1.0 + std::abs(a)); ++it) {
        if (f1 < f2) b = x2, x2 = x1, f2 = f1, x1 = b - gr * (b - a), f1 = mag(x1);
        else a = x1, x1 = x2, f1 = f2, x2 = a + gr * (b - a), f2 = mag(x2);
      }
      const double tau = 0.5 * (a + b);
      const double h = 1e-3 * (1.0 + std::abs(tau));
      const cplx dp = ev.delta(xi, cplx(0.0, tau + h), nullptr, res.frames);
      const cplx dm = ev.delta(xi, cplx(0.0, tau - h), nullptr, res.frames);
      const double dlam = std::abs(dp - dm) / (2 * h);
      const double eps = kBoundaryOffset * std::sqrt(xi.squaredNorm() + tau * tau);
      const double depth = mag(tau) / std::max(1e-300, dlam * eps);
      if (depth > 10.0) continue;
      BoundaryRoot br;
      br.xi_t = xi;
      br.tau = tau;
      br.depth = depth;
      for (const auto& g : glance)
        if (std::abs(g.tau - tau) <= 1e-3 * (1.0 + std::abs(tau))) br.glancing = true;
      v.boundary_roots.push_back(br);
    }
    v.traces.push_back(std::move(w.trace));
  }
  if (v.interior_roots > 0) v.verdict = "strongly unstable";
  else if (unresolved) {
    v.verdict = "indeterminate";
    v.notes.push_back("winding increment unresolved after maximal refinement");
  } else if (v.boundary_roots.empty()) v.verdict = "strongly stable";
  else {
    bool all_glancing = true;
    for (const auto& b : v.boundary_roots) all_glancing = all_glancing && b.glancing;
    v.verdict = all_glancing ? "weakly stable" : "indeterminate";
    v.notes.push_back("boundary roots on Re lambda = 0 without interior roots");
  }
  return v;
}

}  // namespace vss::inviscid
