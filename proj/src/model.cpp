#include "vss/model.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "vss/profile.hpp"

namespace vss::model {

void check_admissible(const Model& m, const Vec& U) {
  if (U.size() != m.n) throw DomainError(m.name + ": state has wrong dimension");
  if (!U.allFinite()) throw DomainError(m.name + ": non-finite state");
  if (m.admissible && !m.admissible(U)) throw DomainError(m.name + ": state outside admissible region");
}

Vec flux(const Model& m, int j, const Vec& U) {
  check_admissible(m, U);
  Vec f = m.flux(j, U);
  if (!f.allFinite()) throw DomainError(m.name + ": non-finite flux evaluation");
  return f;
}

Mat viscosity(const Model& m, int j, int k, const Vec& U) {
  check_admissible(m, U);
  return m.viscosity(j, k, U);
}

Mat flux_jacobian_fd(const Model& m, const Vec& U, int j) {
  check_admissible(m, U);
  const double h = linalg::fd_step(U.norm());
  Mat J(m.n, m.n);
  for (int c = 0; c < m.n; ++c) {
    Vec up = U, um = U;
    up(c) += h;
    um(c) -= h;
    Vec fp = m.flux(j, up), fm = m.flux(j, um);
    if (!fp.allFinite() || !fm.allFinite()) throw DomainError(m.name + ": non-finite flux evaluation");
    J.col(c) = (fp - fm) / (2 * h);
  }
  return J;
}

Mat flux_jacobian(const Model& m, const Vec& U, int j) {
  if (m.flux_jac) {
    check_admissible(m, U);
    Mat J = m.flux_jac(j, U);
    if (!J.allFinite()) throw DomainError(m.name + ": non-finite flux Jacobian");
    return J;
  }
  return flux_jacobian_fd(m, U, j);
}

Mat symbol_A(const Model& m, const Vec& U, const Vec& xi) {
  Mat A = Mat::Zero(m.n, m.n);
  for (int j = 0; j < m.d; ++j)
    if (xi(j) != 0.0) A += xi(j) * flux_jacobian(m, U, j);
  return A;
}

Mat symbol_B(const Model& m, const Vec& U, const Vec& xi) {
  Mat B = Mat::Zero(m.n, m.n);
  for (int j = 0; j < m.d; ++j)
    for (int k = 0; k < m.d; ++k)
      if (xi(j) * xi(k) != 0.0) B += xi(j) * xi(k) * viscosity(m, j, k, U);
  return B;
}

Vec to_w(const Model& m, const Vec& U) { return m.to_w ? m.to_w(U) : U; }
Vec from_w(const Model& m, const Vec& W) { return m.from_w ? m.from_w(W) : W; }

Mat du_dw(const Model& m, const Vec& W) {
  if (!m.from_w) return Mat::Identity(m.n, m.n);
  if (m.du_dw) return m.du_dw(W);
  const double h = linalg::fd_step(W.norm());
  Mat J(m.n, m.n);
  for (int c = 0; c < m.n; ++c) {
    Vec wp = W, wm = W;
    wp(c) += h;
    wm(c) -= h;
    J.col(c) = (m.from_w(wp) - m.from_w(wm)) / (2 * h);
  }
  return J;
}

Mat viscosity_w(const Model& m, int j, int k, const Vec& W) {
  return viscosity(m, j, k, from_w(m, W)) * du_dw(m, W);
}

Mat flux_jacobian_w(const Model& m, int j, const Vec& W) {
  return flux_jacobian(m, from_w(m, W), j) * du_dw(m, W);
}

Vec rh_residual(const Model& m, const Vec& Um, const Vec& Up, double s) {
  return s * (Up - Um) - (flux(m, 0, Up) - flux(m, 0, Um));
}

Model frame_shift(const Model& m, double s) {
  if (s == 0.0) return m;
  Model out = m;
  auto f = m.flux;
  out.flux = [f, s](int j, const Vec& U) -> Vec {
    Vec v = f(j, U);
    if (j == 0) v -= s * U;
    return v;
  };
  if (m.flux_jac) {
    auto J = m.flux_jac;
    out.flux_jac = [J, s](int j, const Vec& U) -> Mat {
      Mat A = J(j, U);
      if (j == 0) A -= s * Mat::Identity(A.rows(), A.cols());
      return A;
    };
  }
  out.params["frame_speed"] = s;
  return out;
}

double ellipticity_theta(const Model& m, const Vec& U, int samples) {
  const int ni = m.ni();
  double theta = std::numeric_limits<double>::infinity();
  auto eval_dir = [&](const Vec& xi) {
    Mat B = symbol_B(m, U, xi);
    Mat b2 = B.block(ni, ni, m.r, m.r);
    Eigen::ComplexEigenSolver<CMat> es(b2.cast<cplx>(), false);
    double mr = es.eigenvalues().real().minCoeff();
    theta = std::min(theta, mr / xi.squaredNorm());
  };
  if (m.d == 1) {
    eval_dir(Vec::Ones(1));
  } else if (m.d == 2) {
    for (int i = 0; i < samples; ++i) {
      double a = 2 * M_PI * i / samples;
      Vec xi(2);
      xi << std::cos(a), std::sin(a);
      eval_dir(xi);
    }
  } else {
    const int nt = std::max(4, samples / 8);
    for (int i = 0; i <= nt; ++i) {
      double th = M_PI * i / nt;
      for (int k = 0; k < 2 * nt; ++k) {
        double ph = M_PI * k / nt;
        Vec xi = Vec::Zero(m.d);
        xi(0) = std::cos(th);
        xi(1) = std::sin(th) * std::cos(ph);
        xi(2) = std::sin(th) * std::sin(ph);
        eval_dir(xi);
      }
    }
  }
  return theta;
}

namespace {

Vec newton_rh(const Model& m, const Vec& Um, double s, Vec U, bool* ok) {
  *ok = false;
  const double scale = 1.0 + Um.norm();
  for (int it = 0; it < 60; ++it) {
    Vec G;
    try {
      G = rh_residual(m, Um, U, s);
    } catch (const DomainError&) {
      return U;
    }
    if (G.norm() <= 1e-13 * scale) {
      *ok = true;
      return U;
    }
    Mat J = s * Mat::Identity(m.n, m.n) - flux_jacobian(m, U, 0);
    Vec dU = J.fullPivLu().solve(-G);
    double t = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 30; ++ls) {
      Vec Ut = U + t * dU;
      try {
        Vec Gt = rh_residual(m, Um, Ut, s);
        if (Gt.norm() < (1 - 1e-4 * t) * G.norm() || Gt.norm() <= 1e-13 * scale) {
          U = Ut;
          accepted = true;
          break;
        }
      } catch (const DomainError&) {
      }
      t *= 0.5;
    }
    if (!accepted) return U;
  }
  Vec G = rh_residual(m, Um, U, s);
  *ok = G.norm() <= 1e-10 * scale;
  return U;
}

struct Family {
  int index;
  double a;
  Vec r;
};

// Characteristic family p with a_p(U-) just above s.
Family pick_family(const Model& m, const Vec& Um, double s) {
  Mat A = flux_jacobian(m, Um, 0);
  Eigen::EigenSolver<Mat> es(A);
  std::vector<int> idx(m.n);
  for (int i = 0; i < m.n; ++i) idx[i] = i;
  Vec ev = es.eigenvalues().real();
  std::sort(idx.begin(), idx.end(), [&](int a, int b) { return ev(a) < ev(b); });
  int best = -1;
  for (int k = 0; k < m.n; ++k) {
    int i = idx[k];
    if (ev(i) > s && (best < 0 || ev(i) < ev(idx[best]))) best = k;
  }
  if (best < 0) throw NumericalFailure("no-connection", "no characteristic speed exceeds the shock speed");
  Vec r = es.eigenvectors().col(idx[best]).real();
  r.normalize();
  return {best, ev(idx[best]), r};
}

double family_speed(const Model& m, const Vec& U, int k) {
  Mat A = flux_jacobian(m, U, 0);
  Eigen::EigenSolver<Mat> es(A, false);
  std::vector<double> ev(m.n);
  for (int i = 0; i < m.n; ++i) ev[i] = es.eigenvalues()(i).real();
  std::sort(ev.begin(), ev.end());
  return ev[k];
}

Vec solve_speed(const Model& m, const Vec& Um, double s, const Vec& seed) {
  const double scale = 1.0 + Um.norm();
  if (seed.size() == m.n) {
    bool ok;
    Vec U = newton_rh(m, Um, s, seed, &ok);
    if (!ok) throw NumericalFailure("no-connection", "Newton from the supplied seed diverged");
    if ((U - Um).norm() <= 1e-8 * scale)
      throw NumericalFailure("not-a-shock", "Newton converged to the trivial branch U+ = U-");
    return U;
  }
  Family fam = pick_family(m, Um, s);
  // Weak-shock seed: U+ = U- + t r_p with s ~ a_p + t (grad a_p . r_p) / 2, then march s.
  const double h = 1e-4 * scale;
  Vec Up = Um + h * fam.r, Ud = Um - h * fam.r;
  double dadt = (family_speed(m, Up, fam.index) - family_speed(m, Ud, fam.index)) / (2 * h);
  if (std::abs(dadt) < 1e-12) throw NumericalFailure("no-connection", "linearly degenerate family; no Lax branch");
  const int steps = 40;
  // Secant predictor along the branch; reusing the previous point alone can land where s - A is singular.
  Vec U, Uprev = Um;
  for (int k = 1; k <= steps; ++k) {
    double sk = fam.a + (s - fam.a) * k / steps;
    Vec guess;
    if (k == 1) guess = Um + 2 * (sk - fam.a) / dadt * fam.r;
    else guess = 2 * U - Uprev;
    bool ok;
    Vec Un = newton_rh(m, Um, sk, guess, &ok);
    if (!ok || (Un - Um).norm() <= 1e-10 * scale)
      throw NumericalFailure("no-connection", "Hugoniot continuation lost the nontrivial branch");
    Uprev = k == 1 ? Um : U;
    U = Un;
  }
  return U;
}

}  // namespace

ShockData make_shock(const Model& m, const Vec& Um, const Vec& Up, double s) {
  Vec res = rh_residual(m, Um, Up, s);
  const double scale = 1.0 + Um.norm() + Up.norm();
  if (res.norm() > 1e-8 * scale)
    throw NumericalFailure("rh", "Rankine-Hugoniot residual " + std::to_string(res.norm()) + " too large");
  if ((Up - Um).norm() <= 1e-10 * scale) throw NumericalFailure("not-a-shock", "equal endstates: not a shock");
  ShockData sd;
  sd.Um = Um;
  sd.Up = Up;
  sd.s_original = s;
  sd.frame = frame_shift(m, s);
  sd.cert = profile::classify_shock(sd);
  return sd;
}

ShockData hugoniot_solve(const Model& m, const Vec& Um, const HugoniotConstraint& c) {
  check_admissible(m, Um);
  double s = 0.0;
  Vec Up;
  switch (c.kind) {
    case HugoniotConstraint::Speed:
      s = c.value;
      Up = solve_speed(m, Um, s, c.seed);
      break;
    case HugoniotConstraint::Mach: {
      Mat A = flux_jacobian(m, Um, 0);
      Eigen::EigenSolver<Mat> es(A, false);
      Vec ev = es.eigenvalues().real();
      double amax = ev.maxCoeff(), amin = ev.minCoeff();
      double u1 = 0.5 * (amax + amin), cs = 0.5 * (amax - amin);
      s = u1 - c.value * cs;
      Up = solve_speed(m, Um, s, c.seed);
      break;
    }
    case HugoniotConstraint::Component: {
      // Unknowns: U+ with component fixed, plus s.
      Vec U = c.seed.size() == m.n ? c.seed : Um;
      U(c.component) = c.value;
      double sk = 0.0;
      {
        Vec dU = U - Um;
        Vec dF = flux(m, 0, U) - flux(m, 0, Um);
        sk = dU.squaredNorm() > 0 ? dU.dot(dF) / dU.squaredNorm() : 0.0;
      }
      bool ok = false;
      for (int it = 0; it < 80; ++it) {
        Vec G = rh_residual(m, Um, U, sk);
        if (G.norm() <= 1e-13 * (1 + Um.norm())) {
          ok = true;
          break;
        }
        Mat J(m.n, m.n);
        Mat Ju = sk * Mat::Identity(m.n, m.n) - flux_jacobian(m, U, 0);
        for (int col = 0, jc = 0; col < m.n; ++col) {
          if (col == c.component) continue;
          J.col(jc++) = Ju.col(col);
        }
        J.col(m.n - 1) = U - Um;
        Vec dz = J.fullPivLu().solve(-G);
        for (int col = 0, jc = 0; col < m.n; ++col) {
          if (col == c.component) continue;
          U(col) += dz(jc++);
        }
        sk += dz(m.n - 1);
      }
      if (!ok) throw NumericalFailure("no-connection", "Hugoniot Newton diverged (component constraint)");
      if ((U - Um).norm() <= 1e-10 * (1 + Um.norm()))
        throw NumericalFailure("not-a-shock", "trivial branch U+ = U- rejected");
      s = sk;
      Up = U;
      break;
    }
  }
  Vec res = rh_residual(m, Um, Up, s);
  if (res.norm() > 1e-10 * (1 + Um.norm())) throw NumericalFailure("no-connection", "RH residual above 1e-10");
  return make_shock(m, Um, Up, s);
}

}  // namespace vss::model
