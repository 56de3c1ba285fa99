#include "vss/evans.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace vss::evans {

namespace {

const cplx I1(0.0, 1.0);

Vec endstate_w(const ShockData& sd, Side side) {
  return model::to_w(sd.frame, side == Side::Minus ? sd.Um : sd.Up);
}

// W on the level set and W' from the profile equation, so that the translational mode is exact
// up to the interpolation error in W alone.
void profile_point(const profile::Profile& p, double x, Vec& W, Vec& dW) {
  const ShockData& sd = p.shock;
  if (x <= p.x.front() || x >= p.x.back()) {
    W = endstate_w(sd, x <= p.x.front() ? Side::Minus : Side::Plus);
    dW = Vec::Zero(W.size());
    return;
  }
  Vec w;
  p.eval_w(x, w);
  W = profile::level_set_w(sd, w.tail(sd.frame.r), w);
  dW = profile::profile_rhs(sd, W);
}

// Magnus step of order six from the three Gauss-node values of A (already multiplied by h).
CMat magnus6(const CMat& A1, const CMat& A2, const CMat& A3) {
  auto br = [](const CMat& X, const CMat& Y) { return CMat(X * Y - Y * X); };
  const CMat a1 = A2;
  const CMat a2 = (std::sqrt(15.0) / 3.0) * (A3 - A1);
  const CMat a3 = (10.0 / 3.0) * (A3 - 2.0 * A2 + A1);
  const CMat c1 = br(a1, a2);
  const CMat c2 = (-1.0 / 60.0) * br(a1, 2.0 * a3 + c1);
  return a1 + a3 / 12.0 + (1.0 / 240.0) * br(-20.0 * a1 - a3 + c1, a2 + c2);
}

constexpr double kGauss[3] = {0.5 - 0.1 * 3.872983346207417, 0.5, 0.5 + 0.1 * 3.872983346207417};

std::vector<double> march(const profile::Profile& p, double from, double to, const Options& opt) {
  const ShockData& sd = p.shock;
  const double jump = (endstate_w(sd, Side::Plus) - endstate_w(sd, Side::Minus)).norm();
  std::vector<double> xs{from};
  const double dir = to > from ? 1.0 : -1.0;
  double x = from;
  Vec wa, wb;
  p.eval_w(x, wa);
  while (dir * (to - x) > 1e-12) {
    double h = std::min(opt.h_max, std::abs(to - x));
    for (int it = 0; it < 40; ++it) {
      p.eval_w(x + dir * h, wb);
      if ((wb - wa).norm() <= opt.dw_frac * jump) break;
      h *= 0.5;
    }
    x = std::abs(to - x - dir * h) < 1e-12 ? to : x + dir * h;
    p.eval_w(x, wa);
    xs.push_back(x);
  }
  return xs;
}

std::vector<Coefficients> gauss_nodes(const profile::Profile& p, const std::vector<double>& xs) {
  std::vector<Coefficients> out;
  out.reserve(3 * (xs.size() - 1));
  Vec W, dW;
  for (size_t i = 0; i + 1 < xs.size(); ++i) {
    for (double c : kGauss) {
      profile_point(p, xs[i] + c * (xs[i + 1] - xs[i]), W, dW);
      out.push_back(coefficients(p.shock.frame, W, dW));
    }
  }
  return out;
}

// Spectral projector onto the eigenvalues of A with Re mu < 0 (stable) or > 0.
CMat dichotomy_projector(const CMat& A, bool stable, int expected) {
  auto e = linalg::eig(A);
  std::vector<bool> sel(e.values.size());
  int count = 0;
  for (int i = 0; i < e.values.size(); ++i) {
    sel[i] = stable ? e.values(i).real() < 0.0 : e.values(i).real() > 0.0;
    count += sel[i];
  }
  if (count != expected)
    throw NumericalFailure("dichotomy", "stable/unstable splitting has " + std::to_string(count) + " modes, expected " +
                                            std::to_string(expected));
  return linalg::projector(e.vectors, e.inverse, sel);
}

// trace of A restricted to span Y
cplx restricted_trace(const CMat& A, const CMat& Y) {
  CMat G = Y.adjoint() * Y;
  return (G.partialPivLu().solve(Y.adjoint() * A * Y)).trace();
}

struct Propagated {
  CMat Q;
  cplx logdet = 0.0;
  int steps = 0;
};

Propagated propagate(const CMat& Y0, const std::vector<double>& xs, const std::vector<Coefficients>& nodes,
                     const Vec& xi_t, cplx lambda, int reortho) {
  Propagated out;
  CMat Y = linalg::qr_q(Y0, &out.logdet);
  for (size_t i = 0; i + 1 < xs.size(); ++i) {
    const double h = xs[i + 1] - xs[i];
    const CMat Om = magnus6(h * nodes[3 * i].eval(xi_t, lambda), h * nodes[3 * i + 1].eval(xi_t, lambda),
                            h * nodes[3 * i + 2].eval(xi_t, lambda));
    Y = Om.exp() * Y;
    ++out.steps;
    if (out.steps % reortho == 0 || i + 2 == xs.size()) Y = linalg::qr_q(Y, &out.logdet);
  }
  out.Q = Y;
  return out;
}

double vec_norm(const Vec& v) { return v.size() ? v.norm() : 0.0; }

}  // namespace

CMat Coefficients::eval(const Vec& xi_t, cplx lambda) const {
  CMat A = A0 + lambda * Al;
  for (int j = 0; j < xi_t.size(); ++j) {
    if (xi_t(j) == 0.0) continue;
    A += xi_t(j) * Aj[j];
    for (int k = 0; k < xi_t.size(); ++k) A += (xi_t(j) * xi_t(k)) * Ajk[j][k];
  }
  return A;
}

CMat Coefficients::d_rho(const Vec& xi_hat, cplx lambda_hat, double rho) const {
  CMat A = lambda_hat * Al;
  for (int j = 0; j < xi_hat.size(); ++j) {
    A += xi_hat(j) * Aj[j];
    for (int k = 0; k < xi_hat.size(); ++k) A += (2.0 * rho * xi_hat(j) * xi_hat(k)) * Ajk[j][k];
  }
  return A;
}

Coefficients coefficients(const Model& m, const Vec& W, const Vec& dW) {
  const int n = m.n, r = m.r, ni = n - r, N = n + r, d = m.d;
  const Mat S = model::du_dw(m, W);
  std::vector<Mat> Aw(d), E(d, Mat::Zero(n, n));
  std::vector<std::vector<Mat>> C(d, std::vector<Mat>(d));
  for (int j = 0; j < d; ++j) {
    Aw[j] = model::flux_jacobian_w(m, j, W);
    for (int k = 0; k < d; ++k) C[j][k] = model::viscosity_w(m, j, k, W);
  }
  if (dW.norm() > 0.0) {
    for (int i = 0; i < n; ++i) {
      const double h = linalg::fd_step(std::abs(W(i)));
      Vec Wp = W, Wm = W;
      Wp(i) += h;
      Wm(i) -= h;
      for (int j = 0; j < d; ++j)
        E[j].col(i) = (model::viscosity_w(m, j, 0, Wp) - model::viscosity_w(m, j, 0, Wm)) * dW / (2 * h);
    }
  }
  const Mat c11 = C[0][0].bottomRightCorner(r, r);
  Eigen::PartialPivLU<Mat> c11lu(c11);
  if (std::abs(c11.determinant()) <= 1e-14 * std::pow(std::max(1.0, c11.norm()), r))
    throw NumericalFailure("assembly", "viscosity block b_II^{11} is singular");

  // w = P Z
  Mat P = Mat::Zero(n, N);
  if (ni > 0) {
    const Mat a11 = Aw[0].topLeftCorner(ni, ni);
    Eigen::PartialPivLU<Mat> a11lu(a11);
    P.topLeftCorner(ni, ni) = -a11lu.inverse();
    P.block(0, n, ni, r) = -a11lu.solve(Aw[0].topRightCorner(ni, r));
  }
  P.block(ni, n, r, r) = Mat::Identity(r, r);
  Mat pick = Mat::Zero(r, N);
  pick.block(0, ni, r, r) = Mat::Identity(r, r);

  const Mat G0 = c11lu.solve(pick - ((E[0] - Aw[0]) * P).bottomRows(r));
  std::vector<CMat> Gk(d);
  for (int k = 1; k < d; ++k) Gk[k] = -I1 * c11lu.solve((C[0][k] * P).bottomRows(r)).cast<cplx>();

  Coefficients out;
  out.A0 = CMat::Zero(N, N);
  out.A0.bottomRows(r) = G0.cast<cplx>();
  out.Al = CMat::Zero(N, N);
  out.Al.topRows(n) = (S * P).cast<cplx>();
  out.Aj.assign(d - 1, CMat::Zero(N, N));
  out.Ajk.assign(d - 1, std::vector<CMat>(d - 1, CMat::Zero(N, N)));
  for (int j = 1; j < d; ++j) {
    const Mat Cj0 = C[j][0].rightCols(r);
    out.Aj[j - 1].topRows(n) = -I1 * (Cj0 * G0 + (E[j] - Aw[j]) * P).cast<cplx>();
    out.Aj[j - 1].bottomRows(r) = Gk[j];
    for (int k = 1; k < d; ++k)
      out.Ajk[j - 1][k - 1].topRows(n) = -I1 * (Cj0.cast<cplx>() * Gk[k]) + (C[j][k] * P).cast<cplx>();
  }
  return out;
}

SpectralODE spectral_ode(const profile::Profile& prof, const Vec& xi_t, cplx lambda) {
  const ShockData& sd = prof.shock;
  const Model& m = sd.frame;
  for (size_t i = 0; i < prof.x.size(); ++i) {
    if (m.ni() == 0) break;
    const Mat a11 = model::flux_jacobian_w(m, 0, prof.W[i]).topLeftCorner(m.ni(), m.ni());
    Eigen::SelfAdjointEigenSolver<Mat> es(linalg::sym(a11));
    const double lo = es.eigenvalues().minCoeff(), hi = es.eigenvalues().maxCoeff();
    if (lo * hi <= 0.0) throw NumericalFailure("h1", "A1_11 is not definite along the profile");
  }
  SpectralODE out;
  out.n = m.n;
  out.r = m.r;
  out.N = m.n + m.r;
  out.xi_t = xi_t;
  out.lambda = lambda;
  out.Am = coefficients(m, endstate_w(sd, Side::Minus), Vec::Zero(m.n)).eval(xi_t, lambda);
  out.Ap = coefficients(m, endstate_w(sd, Side::Plus), Vec::Zero(m.n)).eval(xi_t, lambda);
  auto em = linalg::eig(out.Am), ep = linalg::eig(out.Ap);
  for (int i = 0; i < out.N; ++i) {
    out.k_minus += em.values(i).real() > 0.0;
    out.k_plus += ep.values(i).real() < 0.0;
  }
  const profile::Profile* p = &prof;
  out.A = [p, xi_t, lambda](double x) {
    Vec W, dW;
    profile_point(*p, x, W, dW);
    return coefficients(p->shock.frame, W, dW).eval(xi_t, lambda);
  };
  return out;
}

CMat lift_modes(const Model& m, const Vec& W, const CMat& V) {
  const int n = m.n, r = m.r;
  const Mat A1 = model::flux_jacobian(m, model::from_w(m, W), 0);
  const Mat S = model::du_dw(m, W);
  CMat Z(n + r, V.cols());
  Z.topRows(n) = -A1.cast<cplx>() * V;
  Z.bottomRows(r) = (S.cast<cplx>().partialPivLu().solve(V)).bottomRows(r);
  return Z;
}

Context make_context(const profile::Profile& prof, const Options& opt) {
  Context c;
  c.prof = prof;
  c.prof.build_interpolants();
  c.opt = opt;
  const ShockData& sd = c.prof.shock;
  const Model& m = sd.frame;
  c.n = m.n;
  c.r = m.r;
  c.N = m.n + m.r;
  c.d = m.d;
  c.L = opt.L > 0.0 ? opt.L : c.prof.L;
  if (!sd.cert.lax) throw NumericalFailure("type", "Evans frames are set up for Lax shocks only");
  const int p = sd.cert.p;

  c.mesh_minus = march(c.prof, -c.L, 0.0, opt);
  c.mesh_plus = march(c.prof, c.L, 0.0, opt);
  c.nodes_minus = gauss_nodes(c.prof, c.mesh_minus);
  c.nodes_plus = gauss_nodes(c.prof, c.mesh_plus);
  c.end_minus = coefficients(m, endstate_w(sd, Side::Minus), Vec::Zero(m.n));
  c.end_plus = coefficients(m, endstate_w(sd, Side::Plus), Vec::Zero(m.n));

  double fast_min = 1e300;
  auto fast = [&](const CMat& A0, bool stable) {
    auto e = linalg::eig(A0);
    const double scale = std::max(1.0, A0.norm());
    std::vector<int> idx;
    for (int i = 0; i < e.values.size(); ++i) {
      const cplx mu = e.values(i);
      if (std::abs(mu) <= 1e-9 * scale) continue;
      fast_min = std::min(fast_min, std::abs(mu));
      if (stable ? mu.real() < 0.0 : mu.real() > 0.0) idx.push_back(i);
    }
    // deterministic column order: by real part, then imaginary part
    std::sort(idx.begin(), idx.end(), [&](int a, int b) {
      const cplx x = e.values(a), y = e.values(b);
      return x.real() != y.real() ? x.real() < y.real() : x.imag() < y.imag();
    });
    CMat F(A0.rows(), idx.size());
    for (size_t i = 0; i < idx.size(); ++i) F.col(i) = e.vectors.col(idx[i]);
    inviscid::normalize_columns(F);
    return F;
  };
  c.fast_minus = fast(c.end_minus.A0, false);
  c.fast_plus = fast(c.end_plus.A0, true);
  c.k_minus = static_cast<int>(c.fast_minus.cols()) + p - 1;
  c.k_plus = static_cast<int>(c.fast_plus.cols()) + c.n - p;
  if (c.k_minus + c.k_plus != c.N)
    throw NumericalFailure("dichotomy", "fast and slow dimensions do not add up to n + r");

  double nu = 0.0;
  for (const Vec& U : {sd.Um, sd.Up}) {
    const Mat A1 = model::flux_jacobian(m, U, 0);
    double bound = 1.0;
    for (int j = 1; j < m.d; ++j) bound += model::flux_jacobian(m, U, j).norm();
    nu = std::max(nu, bound / Eigen::JacobiSVD<Mat>(A1).singularValues().minCoeff());
  }
  c.rho_polar = std::min(opt.polar_max, 0.25 * fast_min / nu);
  return c;
}

namespace {

inviscid::LopatinskiFrames base_frames(const Context& ctx, const Vec& xi_t, cplx lambda) {
  const double rho = std::sqrt(vec_norm(xi_t) * vec_norm(xi_t) + std::norm(lambda));
  if (rho == 0.0 || (lambda.real() < 0.0 && vec_norm(xi_t) == 0.0))
    return inviscid::lopatinski_frames(ctx.prof.shock, Vec::Zero(ctx.d - 1), 1.0);
  if (lambda.real() < 0.0) lambda = cplx(0.0, lambda.imag());
  return inviscid::lopatinski_frames(ctx.prof.shock, xi_t / rho, lambda / rho);
}

CMat frame_from(const Context& ctx, Side side, const Vec& xi_t, cplx lambda, const inviscid::LopatinskiFrames& lf) {
  const ShockData& sd = ctx.prof.shock;
  const Model& m = sd.frame;
  const double rho = std::sqrt(vec_norm(xi_t) * vec_norm(xi_t) + std::norm(lambda));
  Vec xi_hat = Vec::Zero(ctx.d - 1);
  cplx lambda_hat = 1.0;
  if (rho > 0.0) {
    if (xi_t.size()) xi_hat = xi_t / rho;
    lambda_hat = lambda / rho;
  }
  const bool minus = side == Side::Minus;
  const bool behind = lambda_hat.real() < 0.0;  // analytic continuation into Re lambda < 0
  if (behind && xi_hat.size() && xi_hat.norm() > 0.0) {
    // Continue horizontally from the imaginary axis; valid in a strip free of branch points.
    const CMat Y0 = frame_from(ctx, side, xi_t, cplx(0.0, lambda.imag()), lf);
    const Coefficients& e = minus ? ctx.end_minus : ctx.end_plus;
    const double re = lambda.real();
    auto M = [&](double t) { return e.eval(xi_t, cplx(t * re, lambda.imag())); };
    auto dM = [&](double) { return CMat(re * e.Al); };
    auto fb = inviscid::continue_frames(M, dM, Y0, ctx.opt.frames);
    if (!fb.ok) throw NumericalFailure("frames", "continuation into Re lambda < 0 failed: " + fb.failure);
    return fb.R;
  }
  const CMat& fastF = minus ? ctx.fast_minus : ctx.fast_plus;
  const CMat slow = lift_modes(m, endstate_w(sd, side), minus ? lf.Vm : lf.Vp);
  CMat B0(ctx.N, fastF.cols() + slow.cols());
  B0 << fastF, slow;
  if (rho == 0.0) return B0;

  const Coefficients& end = minus ? ctx.end_minus : ctx.end_plus;
  const int k = minus ? ctx.k_minus : ctx.k_plus;
  const double rho0 = std::min(rho, ctx.rho_polar);
  const CMat A = end.eval(rho0 * xi_hat, rho0 * lambda_hat);
  CMat Y;
  if (!behind) {
    Y = dichotomy_projector(A, !minus, k) * B0;
  } else {
    // Slow modes mu = -rho lambda / a for the decaying speeds a, fast modes by the sign of Re mu.
    Eigen::EigenSolver<Mat> ea(model::flux_jacobian(m, minus ? sd.Um : sd.Up, 0));
    std::vector<cplx> targets;
    for (int i = 0; i < ea.eigenvalues().size(); ++i) {
      const double a = ea.eigenvalues()(i).real();
      if (minus ? a < 0.0 : a > 0.0) targets.push_back(-rho0 * lambda_hat / a);
    }
    auto e = linalg::eig(A);
    std::vector<int> order(ctx.N);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return std::abs(e.values(a)) < std::abs(e.values(b)); });
    std::vector<bool> sel(ctx.N, false);
    for (int i = ctx.n; i < ctx.N; ++i) {
      const cplx mu = e.values(order[i]);
      sel[order[i]] = minus ? mu.real() > 0.0 : mu.real() < 0.0;
    }
    for (const cplx t : targets) {
      int best = -1;
      for (int i = 0; i < ctx.n; ++i) {
        const int j = order[i];
        if (!sel[j] && (best < 0 || std::abs(e.values(j) - t) < std::abs(e.values(best) - t))) best = j;
      }
      sel[best] = true;
    }
    if (std::count(sel.begin(), sel.end(), true) != k)
      throw NumericalFailure("dichotomy", "continued splitting has the wrong dimension");
    Y = linalg::projector(e.vectors, e.inverse, sel) * B0;
  }
  if (rho == rho0) return Y;

  // geometric in rho, so that each decade gets the same number of steps
  const double span = std::log(rho / rho0);
  auto M = [&](double t) {
    const double r = rho0 * std::exp(t * span);
    return end.eval(r * xi_hat, r * lambda_hat);
  };
  auto dM = [&](double t) {
    const double r = rho0 * std::exp(t * span);
    return CMat((r * span) * end.d_rho(xi_hat, lambda_hat, r));
  };
  auto fb = inviscid::continue_frames(M, dM, Y, ctx.opt.frames);
  if (!fb.ok) throw NumericalFailure("frames", "radial frame continuation failed: " + fb.failure);
  return fb.R;
}

}  // namespace

CMat initial_frame(const Context& ctx, Side side, const Vec& xi_t, cplx lambda) {
  return frame_from(ctx, side, xi_t, lambda, base_frames(ctx, xi_t, lambda));
}

EvansValue evans(const Context& ctx, const Vec& xi_t, cplx lambda) {
  EvansValue out;
  const double rho = std::sqrt(vec_norm(xi_t) * vec_norm(xi_t) + std::norm(lambda));
  out.frames = rho <= ctx.rho_polar ? "polar" : "radial";
  const auto lf = base_frames(ctx, xi_t, lambda);
  const CMat Ym = frame_from(ctx, Side::Minus, xi_t, lambda, lf);
  const CMat Yp = frame_from(ctx, Side::Plus, xi_t, lambda, lf);
  cplx growth = ctx.L * (restricted_trace(ctx.end_plus.eval(xi_t, lambda), Yp) -
                         restricted_trace(ctx.end_minus.eval(xi_t, lambda), Ym));
  auto pm = propagate(Ym, ctx.mesh_minus, ctx.nodes_minus, xi_t, lambda, ctx.opt.reortho);
  auto pp = propagate(Yp, ctx.mesh_plus, ctx.nodes_plus, xi_t, lambda, ctx.opt.reortho);
  CMat M(ctx.N, ctx.N);
  M << pm.Q, pp.Q;
  Eigen::PartialPivLU<CMat> lu(M);
  cplx logdet = 0.0;
  const CMat& LU = lu.matrixLU();
  for (int i = 0; i < ctx.N; ++i) logdet += std::log(LU(i, i));
  if (lu.permutationP().determinant() < 0) logdet += cplx(0.0, M_PI);
  out.log_correction = pm.logdet + pp.logdet + growth;
  out.log_D = logdet + out.log_correction;
  out.D = std::exp(out.log_D);
  out.conditioning = Eigen::JacobiSVD<CMat>(M).singularValues().minCoeff();
  out.steps = pm.steps + pp.steps;
  return out;
}

namespace {

// k-subsets of {0..N-1} in lexicographic order.
std::vector<std::vector<int>> subsets(int N, int k) {
  std::vector<std::vector<int>> out;
  std::vector<int> s(k);
  std::iota(s.begin(), s.end(), 0);
  while (true) {
    out.push_back(s);
    int i = k - 1;
    while (i >= 0 && s[i] == N - k + i) --i;
    if (i < 0) break;
    ++s[i];
    for (int j = i + 1; j < k; ++j) s[j] = s[j - 1] + 1;
  }
  return out;
}

struct Compound {
  int N = 0, k = 0;
  std::vector<std::vector<int>> sets;
  std::map<std::vector<int>, int> index;
  Compound(int N_, int k_) : N(N_), k(k_), sets(subsets(N_, k_)) {
    for (size_t i = 0; i < sets.size(); ++i) index[sets[i]] = static_cast<int>(i);
  }
  // Derivation induced by A on the k-th exterior power.
  CMat generator(const CMat& A) const {
    const int m = static_cast<int>(sets.size());
    CMat G = CMat::Zero(m, m);
    for (int c = 0; c < m; ++c) {
      const auto& S = sets[c];
      for (int pos = 0; pos < k; ++pos) {
        for (int l = 0; l < N; ++l) {
          const cplx a = A(l, S[pos]);
          if (a == 0.0) continue;
          if (l != S[pos] && std::find(S.begin(), S.end(), l) != S.end()) continue;
          std::vector<int> T = S;
          T[pos] = l;
          // sort T and count transpositions
          int sign = 1;
          for (int i = 0; i < k; ++i)
            for (int j = i + 1; j < k; ++j)
              if (T[i] > T[j]) sign = -sign;
          std::sort(T.begin(), T.end());
          G(index.at(T), c) += static_cast<double>(sign) * a;
        }
      }
    }
    return G;
  }
  CVec wedge(const CMat& Y) const {
    CVec w(sets.size());
    for (size_t i = 0; i < sets.size(); ++i) {
      CMat sub(k, k);
      for (int a = 0; a < k; ++a) sub.row(a) = Y.row(sets[i][a]);
      w(i) = k ? sub.determinant() : cplx(1.0);
    }
    return w;
  }
};

CVec propagate_compound(const Compound& cp, CVec eta, const std::vector<double>& xs,
                        const std::vector<Coefficients>& nodes, const Vec& xi_t, cplx lambda, cplx shift) {
  const int m = static_cast<int>(eta.size());
  for (size_t i = 0; i + 1 < xs.size(); ++i) {
    const double h = xs[i + 1] - xs[i];
    const CMat Om = magnus6(h * nodes[3 * i].eval(xi_t, lambda), h * nodes[3 * i + 1].eval(xi_t, lambda),
                            h * nodes[3 * i + 2].eval(xi_t, lambda));
    eta = CMat(cp.generator(Om) - (h * shift) * CMat::Identity(m, m)).exp() * eta;
  }
  return eta;
}

}  // namespace

cplx evans_compound(const Context& ctx, const Vec& xi_t, cplx lambda) {
  if (ctx.N > 6) throw NumericalFailure("compound", "exterior-power evaluation is limited to n + r <= 6");
  const auto lf = base_frames(ctx, xi_t, lambda);
  const CMat Ym = frame_from(ctx, Side::Minus, xi_t, lambda, lf);
  const CMat Yp = frame_from(ctx, Side::Plus, xi_t, lambda, lf);
  const int km = ctx.k_minus, kp = ctx.k_plus;
  Compound cm(ctx.N, km), cpl(ctx.N, kp);
  const cplx tm = restricted_trace(ctx.end_minus.eval(xi_t, lambda), Ym);
  const cplx tp = restricted_trace(ctx.end_plus.eval(xi_t, lambda), Yp);
  CVec em = propagate_compound(cm, cm.wedge(Ym), ctx.mesh_minus, ctx.nodes_minus, xi_t, lambda, tm);
  CVec ep = propagate_compound(cpl, cpl.wedge(Yp), ctx.mesh_plus, ctx.nodes_plus, xi_t, lambda, tp);
  // Laplace expansion of det[Y-, Y+] along the first km columns.
  cplx D = 0.0;
  for (size_t i = 0; i < cm.sets.size(); ++i) {
    const auto& S = cm.sets[i];
    std::vector<int> T;
    for (int l = 0; l < ctx.N; ++l)
      if (!std::binary_search(S.begin(), S.end(), l)) T.push_back(l);
    int inv = 0;
    for (int a : S)
      for (int b : T)
        if (a > b) ++inv;
    D += (inv % 2 ? -1.0 : 1.0) * em(i) * ep(cpl.index.at(T));
  }
  return D;
}

Winding winding_number(const Evaluator& f, const Contour& c, const WindingOptions& opt) {
  Winding out;
  out.min_abs = 1e300;
  double total = 0.0;
  auto sample = [&](double s) {
    const cplx lam = c(s);
    const cplx v = f(lam);
    const double a = std::abs(v);
    if (a < out.min_abs) out.min_abs = a, out.min_at = lam;
    if (opt.abs_tol > 0.0 && a < opt.abs_tol)
      throw NumericalFailure("contour-through-root", "|D| = " + std::to_string(a) + " at lambda = " +
                                                         std::to_string(lam.real()) + " + " +
                                                         std::to_string(lam.imag()) + "i");
    return v;
  };
  std::function<void(double, cplx, double, cplx, int)> walk = [&](double sa, cplx fa, double sb, cplx fb, int depth) {
    const double inc = std::arg(fb / fa);
    if (std::abs(inc) > opt.refine_above && depth < opt.max_depth) {
      const double sm = 0.5 * (sa + sb);
      const cplx fm = sample(sm);
      walk(sa, fa, sm, fm, depth + 1);
      walk(sm, fm, sb, fb, depth + 1);
      return;
    }
    if (std::abs(inc) >= 0.5 * M_PI) out.resolved = false;
    total += inc;
    out.trace.push_back({c(sb), fb, total});
  };
  cplx f0 = sample(0.0);
  out.trace.push_back({c(0.0), f0, 0.0});
  cplx fa = f0;
  for (int i = 1; i <= opt.samples; ++i) {
    const double s = static_cast<double>(i) / opt.samples;
    const cplx fb = i == opt.samples ? f0 : sample(s);
    walk(static_cast<double>(i - 1) / opt.samples, fa, s, fb, 0);
    fa = fb;
  }
  out.winding = static_cast<int>(std::lround(total / (2 * M_PI)));
  return out;
}

Contour circle(cplx center, double radius) {
  return [center, radius](double s) { return center + radius * std::exp(cplx(0.0, 2 * M_PI * s)); };
}

Contour indented_half_disk(double r, double R) {
  return [r, R](double s) -> cplx {
    const double ratio = r / R;
    if (s <= 0.35) return cplx(0.0, R * std::pow(ratio, s / 0.35));
    if (s <= 0.40) return r * std::exp(cplx(0.0, 0.5 * M_PI - M_PI * (s - 0.35) / 0.05));
    if (s <= 0.75) return cplx(0.0, -r * std::pow(1.0 / ratio, (s - 0.40) / 0.35));
    if (s >= 1.0) return cplx(0.0, R);
    return R * std::exp(cplx(0.0, -0.5 * M_PI + M_PI * (s - 0.75) / 0.25));
  };
}

SpectralVerdict spectral_verdict(const std::function<cplx(const Vec&, cplx)>& D, const std::vector<Vec>& xi_samples,
                                 double r, double R, const WindingOptions& wopt) {
  SpectralVerdict out;
  out.r = r;
  out.R = R;
  bool unresolved = false, touching = false;
  const Contour contour = indented_half_disk(r, R);
  for (const Vec& xi : xi_samples) {
    DirectionVerdict dv;
    dv.xi_t = xi;
    try {
      Winding w = winding_number([&](cplx lam) { return D(xi, lam); }, contour, wopt);
      double top = 0.0;
      for (const auto& t : w.trace) top = std::max(top, std::abs(t.value));
      dv.winding = w.winding;
      dv.resolved = w.resolved;
      dv.trace = std::move(w.trace);
      if (w.min_abs <= 1e-10 * top) {
        dv.through_root = true;
        dv.note = "|D| nearly vanishes on the contour at lambda = " + std::to_string(w.min_at.real()) + " + " +
                  std::to_string(w.min_at.imag()) + "i";
      }
    } catch (const NumericalFailure& e) {
      if (e.kind != "contour-through-root") throw;
      dv.through_root = true;
      dv.resolved = false;
      dv.note = e.what();
    }
    unresolved = unresolved || !dv.resolved;
    touching = touching || dv.through_root;
    if (dv.resolved && dv.winding != 0) out.unstable_count += dv.winding;
    out.directions.push_back(std::move(dv));
  }
  if (out.unstable_count > 0) out.verdict = "strongly unstable";
  else if (touching) out.verdict = "weakly-only";
  else if (unresolved) out.verdict = "indeterminate";
  else out.verdict = "strongly stable";
  return out;
}

SpectralVerdict spectral_verdict(const Context& ctx, const std::vector<Vec>& xi_samples, double r, double R,
                                 const WindingOptions& wopt) {
  return spectral_verdict([&](const Vec& xi, cplx lam) { return evans(ctx, xi, lam).D; }, xi_samples, r, R, wopt);
}

}  // namespace vss::evans
