#include <algorithm>
#include <cmath>

#include "vss/inviscid.hpp"

namespace vss::inviscid {

namespace {

struct Split {
  CVec vals;
  CMat V, W;
  std::vector<bool> sel;
  CMat P;
  double gap = 0.0;
  bool clear = true;
};

double relative_gap(const CVec& vals, const std::vector<bool>& sel) {
  double scale = 1.0;
  for (int i = 0; i < vals.size(); ++i) scale = std::max(scale, std::abs(vals(i)));
  double g = 1e300;
  for (int i = 0; i < vals.size(); ++i)
    for (int j = 0; j < vals.size(); ++j)
      if (sel[i] && !sel[j]) g = std::min(g, std::abs(vals(i) - vals(j)));
  return g / scale;
}

Split decompose(const CMat& M) {
  Split s;
  auto e = linalg::eig(M);
  s.vals = e.values;
  s.V = e.vectors;
  s.W = e.inverse;
  return s;
}

// Follows the previously selected eigenvalues to their nearest neighbours.
void select_by_continuity(Split& s, const CVec& prev_vals, const std::vector<bool>& prev_sel) {
  const int n = static_cast<int>(s.vals.size());
  s.sel.assign(n, false);
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    if (!prev_sel[i]) continue;
    int best = -1;
    double bd = 1e300;
    for (int j = 0; j < n; ++j) {
      if (s.sel[j]) continue;
      const double dist = std::abs(s.vals(j) - prev_vals(i));
      if (dist < bd) bd = dist, best = j;
    }
    s.sel[best] = true;
    worst = std::max(worst, bd);
  }
  double scale = 1.0;
  for (int i = 0; i < n; ++i) scale = std::max(scale, std::abs(s.vals(i)));
  s.gap = relative_gap(s.vals, s.sel);
  s.clear = worst < 0.25 * s.gap * scale;
  s.P = linalg::projector(s.V, s.W, s.sel);
}

// P' from the eigen-decomposition: in the eigenbasis (P')_ij = (chi_i - chi_j) G_ij / (l_i - l_j).
CMat projector_derivative(const Split& s, const CMat& dM) {
  const int n = static_cast<int>(s.vals.size());
  CMat G = s.W * dM * s.V;
  CMat D = CMat::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (s.sel[i] != s.sel[j]) D(i, j) = (s.sel[i] ? 1.0 : -1.0) * G(i, j) / (s.vals(i) - s.vals(j));
  return s.V * D * s.W;
}

}  // namespace

void normalize_columns(CMat& R) {
  for (int c = 0; c < R.cols(); ++c) {
    const double nrm = R.col(c).norm();
    if (nrm == 0.0) continue;
    R.col(c) /= nrm;
    int k = 0;
    double big = 0.0;
    for (int i = 0; i < R.rows(); ++i) {
      // Ties are broken towards the lower index so that the choice is stable under rounding.
      if (std::abs(R(i, c)) > big * (1.0 + 1e-10)) big = std::abs(R(i, c)), k = i;
    }
    R.col(c) *= std::conj(R(k, c)) / std::abs(R(k, c));
  }
}

FrameBundle continue_frames(const MatrixPath& M, const MatrixPath& dM, const CMat& R0, const FrameOptions& opt) {
  FrameBundle out;
  const int k = static_cast<int>(R0.cols());
  auto deriv = [&](double t) -> CMat {
    if (dM) return dM(t);
    const double h = 1e-3;
    return (-M(t + 2 * h) + 8.0 * M(t + h) - 8.0 * M(t - h) + M(t - 2 * h)) / (12 * h);
  };

  Split cur = decompose(M(0.0));
  {
    const int n = static_cast<int>(cur.vals.size());
    CMat C = cur.W * R0;
    std::vector<int> idx(n);
    for (int i = 0; i < n; ++i) idx[i] = i;
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return C.row(a).norm() > C.row(b).norm(); });
    cur.sel.assign(n, false);
    for (int i = 0; i < k; ++i) cur.sel[idx[i]] = true;
    cur.P = linalg::projector(cur.V, cur.W, cur.sel);
    cur.gap = relative_gap(cur.vals, cur.sel);
  }
  CMat R = R0;
  if (k == 0) {
    out.R = R;
    out.Q = R;
    return out;
  }
  out.span_error = (R - cur.P * R).norm() / R.norm();

  double t = 0.0, h = opt.max_step;
  while (t < 1.0) {
    h = std::min(h, 1.0 - t);
    Split mid = decompose(M(t + 0.5 * h));
    select_by_continuity(mid, cur.vals, cur.sel);
    Split end = decompose(M(t + h));
    select_by_continuity(end, mid.vals, mid.sel);
    const bool collapse = end.gap < opt.gap_tol || mid.gap < opt.gap_tol;
    if (!mid.clear || !end.clear || collapse) {
      if (h * 0.5 < opt.min_step) {
        out.ok = false;
        out.fail_at = t;
        out.failure = collapse ? "spectral gap collapsed (candidate glancing point)" : "eigenvalue tracking ambiguous";
        break;
      }
      h *= 0.5;
      continue;
    }
    auto rhs = [&](const Split& s, double tt, const CMat& Y) {
      CMat Pd = projector_derivative(s, deriv(tt));
      return CMat((Pd * s.P - s.P * Pd) * Y);
    };
    CMat k1 = rhs(cur, t, R);
    CMat k2 = rhs(mid, t + 0.5 * h, R + 0.5 * h * k1);
    CMat k3 = rhs(mid, t + 0.5 * h, R + 0.5 * h * k2);
    CMat k4 = rhs(end, t + h, R + h * k3);
    CMat Rn = R + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    const double span = (Rn - end.P * Rn).norm() / Rn.norm();
    if (span > opt.span_tol && h * 0.5 >= opt.min_step) {
      h *= 0.5;
      continue;
    }
    out.span_error = std::max(out.span_error, span);
    R = end.P * Rn;
    cur = std::move(end);
    t += h;
    ++out.steps;
    h = std::min(2.0 * h, opt.max_step);
  }
  out.R = R;
  out.Q = linalg::qr_q(R, &out.log_det_t);
  return out;
}

}  // namespace vss::inviscid
