#include <cmath>

#include "vss/model.hpp"

namespace vss::models {

Model burgers(int d, const json& params) {
  Model m;
  m.name = "burgers";
  m.d = d;
  m.n = 1;
  m.r = 1;
  m.params = params.is_object() ? params : json::object();
  const double q = m.params.value("transverse_quadratic", 1.0);
  std::vector<double> c(d, 0.0);
  if (m.params.contains("transverse_linear")) {
    auto arr = m.params["transverse_linear"];
    for (int j = 1; j < d && j - 1 < static_cast<int>(arr.size()); ++j) c[j] = arr[j - 1].get<double>();
  }
  m.params["transverse_quadratic"] = q;
  m.flux = [q, c](int j, const Vec& U) {
    Vec f(1);
    const double u = U(0);
    f(0) = (j == 0) ? 0.5 * u * u : q * 0.5 * u * u + c[j] * u;
    return f;
  };
  m.flux_jac = [q, c](int j, const Vec& U) {
    Mat J(1, 1);
    J(0, 0) = (j == 0) ? U(0) : q * U(0) + c[j];
    return J;
  };
  m.viscosity = [](int j, int k, const Vec&) { return Mat::Constant(1, 1, j == k ? 1.0 : 0.0); };
  m.symmetrizer = [](const Vec&) { return Mat::Identity(1, 1); };
  return m;
}

Model isentropic(const json& params) {
  Model m;
  m.name = "isentropic";
  m.d = 1;
  m.n = 2;
  m.r = 1;
  m.params = params.is_object() ? params : json::object();
  const double a = m.params.value("a", 1.0);
  const double g = m.params.value("gamma", 1.4);
  const double mu = m.params.value("mu", 1.0);
  m.params["a"] = a;
  m.params["gamma"] = g;
  m.params["mu"] = mu;
  auto p = [a, g](double v) { return a * std::pow(v, -g); };
  auto dp = [a, g](double v) { return -g * a * std::pow(v, -g - 1); };
  m.admissible = [](const Vec& U) { return U(0) > 0.0; };
  m.flux = [p](int, const Vec& U) {
    Vec f(2);
    f << -U(1), p(U(0));
    return f;
  };
  m.flux_jac = [dp](int, const Vec& U) {
    Mat J(2, 2);
    J << 0.0, -1.0, dp(U(0)), 0.0;
    return J;
  };
  m.viscosity = [mu](int, int, const Vec& U) {
    Mat B = Mat::Zero(2, 2);
    B(1, 1) = mu / U(0);
    return B;
  };
  m.symmetrizer = [dp](const Vec& W) {
    Mat S = Mat::Identity(2, 2);
    S(0, 0) = -dp(W(0));
    return S;
  };
  return m;
}

Thermo ns_thermo(const json& params, double rho, double T) {
  const double R = params.value("R", 1.0);
  const double g = params.value("gamma", 1.4);
  const double cv = R / (g - 1.0);
  const std::string eos = params.value("eos", std::string("ideal"));
  Thermo t{};
  if (eos == "vdw") {
    const double a = params.value("a_vdw", 0.0), b = params.value("b_vdw", 0.0);
    const double q = 1.0 - b * rho;
    t.p = rho * R * T / q - a * rho * rho;
    t.p_rho = R * T / (q * q) - 2 * a * rho;
    t.p_T = rho * R / q;
    t.e = cv * T - a * rho;
    t.e_rho = -a;
    t.e_T = cv;
  } else {
    t.p = rho * R * T;
    t.p_rho = R * T;
    t.p_T = rho * R;
    t.e = cv * T;
    t.e_rho = 0.0;
    t.e_T = cv;
  }
  return t;
}

double ns_sound_speed(const json& params, const Vec& W) {
  const int d = static_cast<int>(W.size()) - 2;
  const double rho = W(0), T = W(d + 1);
  Thermo t = ns_thermo(params, rho, T);
  return std::sqrt(t.p_rho + T * t.p_T * t.p_T / (rho * rho * t.e_T));
}

Vec ns_state(const json& params, double rho, const Vec& u, double T) {
  const int d = static_cast<int>(u.size());
  Thermo t = ns_thermo(params, rho, T);
  Vec U(d + 2);
  U(0) = rho;
  U.segment(1, d) = rho * u;
  U(d + 1) = rho * (t.e + 0.5 * u.squaredNorm());
  return U;
}

Model navier_stokes(int d, const json& params) {
  Model m;
  m.name = "navier-stokes-ideal";
  m.d = d;
  m.n = d + 2;
  m.r = d + 1;
  json P = params.is_object() ? params : json::object();
  if (!P.contains("R")) P["R"] = 1.0;
  if (!P.contains("gamma")) P["gamma"] = 1.4;
  if (!P.contains("mu")) P["mu"] = 1.0;
  if (!P.contains("lambda")) P["lambda"] = -2.0 / 3.0 * P["mu"].get<double>();
  if (!P.contains("kappa")) P["kappa"] = 1.0;
  if (!P.contains("eos")) P["eos"] = "ideal";
  m.params = P;
  const double mu = P["mu"], lam = P["lambda"], kap = P["kappa"];
  const double bv = P.value("b_vdw", 0.0);
  const bool vdw = P["eos"] == "vdw";
  const int n = m.n;

  auto to_w = [P, d, n](const Vec& U) {
    Vec W(n);
    const double rho = U(0);
    Vec u = U.segment(1, d) / rho;
    const double e = U(d + 1) / rho - 0.5 * u.squaredNorm();
    Thermo t0 = ns_thermo(P, rho, 0.0);
    W(0) = rho;
    W.segment(1, d) = u;
    W(d + 1) = (e - t0.e) / t0.e_T;
    return W;
  };
  auto from_w = [P, d](const Vec& W) { return ns_state(P, W(0), W.segment(1, d), W(d + 1)); };
  auto du_dw = [P, d, n](const Vec& W) {
    const double rho = W(0), T = W(d + 1);
    Vec u = W.segment(1, d);
    Thermo t = ns_thermo(P, rho, T);
    Mat J = Mat::Zero(n, n);
    J(0, 0) = 1.0;
    for (int i = 0; i < d; ++i) {
      J(1 + i, 0) = u(i);
      J(1 + i, 1 + i) = rho;
    }
    J(d + 1, 0) = t.e + 0.5 * u.squaredNorm() + rho * t.e_rho;
    for (int l = 0; l < d; ++l) J(d + 1, 1 + l) = rho * u(l);
    J(d + 1, d + 1) = rho * t.e_T;
    return J;
  };
  auto dF_dw = [P, d, n](int j, const Vec& W) {
    const double rho = W(0), T = W(d + 1);
    Vec u = W.segment(1, d);
    Thermo t = ns_thermo(P, rho, T);
    Mat J = Mat::Zero(n, n);
    J(0, 0) = u(j);
    J(0, 1 + j) = rho;
    for (int i = 0; i < d; ++i) {
      J(1 + i, 0) = u(j) * u(i) + (i == j ? t.p_rho : 0.0);
      for (int l = 0; l < d; ++l) J(1 + i, 1 + l) = rho * ((j == l ? u(i) : 0.0) + (i == l ? u(j) : 0.0));
      J(1 + i, d + 1) = (i == j) ? t.p_T : 0.0;
    }
    const double H = rho * t.e + 0.5 * rho * u.squaredNorm() + t.p;
    J(d + 1, 0) = (t.e + rho * t.e_rho + 0.5 * u.squaredNorm() + t.p_rho) * u(j);
    for (int l = 0; l < d; ++l) J(d + 1, 1 + l) = rho * u(l) * u(j) + (j == l ? H : 0.0);
    J(d + 1, d + 1) = (rho * t.e_T + t.p_T) * u(j);
    return J;
  };
  auto C_w = [d, n, mu, lam, kap](int j, int k, const Vec& W) {
    Vec u = W.segment(1, d);
    Mat C = Mat::Zero(n, n);
    for (int i = 0; i < d; ++i)
      for (int l = 0; l < d; ++l)
        C(1 + i, 1 + l) = mu * ((j == k && i == l) ? 1.0 : 0.0) + mu * ((i == k && j == l) ? 1.0 : 0.0) +
                          lam * ((i == j && k == l) ? 1.0 : 0.0);
    for (int l = 0; l < d; ++l)
      C(d + 1, 1 + l) = mu * ((j == k ? u(l) : 0.0) + (j == l ? u(k) : 0.0)) + lam * (k == l ? u(j) : 0.0);
    C(d + 1, d + 1) = (j == k) ? kap : 0.0;
    return C;
  };

  m.to_w = to_w;
  m.from_w = from_w;
  m.du_dw = du_dw;
  m.admissible = [to_w, vdw, bv](const Vec& U) {
    if (!(U(0) > 0.0)) return false;
    if (vdw && bv * U(0) >= 1.0) return false;
    Vec W = to_w(U);
    return W(W.size() - 1) > 0.0;
  };
  m.flux = [P, d, n, to_w](int j, const Vec& U) {
    Vec W = to_w(U);
    const double rho = W(0), T = W(d + 1);
    Vec u = W.segment(1, d);
    Thermo t = ns_thermo(P, rho, T);
    Vec f(n);
    f(0) = rho * u(j);
    f.segment(1, d) = rho * u(j) * u;
    f(1 + j) += t.p;
    f(d + 1) = (rho * (t.e + 0.5 * u.squaredNorm()) + t.p) * u(j);
    return f;
  };
  m.flux_jac = [to_w, du_dw, dF_dw](int j, const Vec& U) {
    Vec W = to_w(U);
    return Mat(dF_dw(j, W) * du_dw(W).inverse());
  };
  m.viscosity = [to_w, du_dw, C_w](int j, int k, const Vec& U) {
    Vec W = to_w(U);
    return Mat(C_w(j, k, W) * du_dw(W).inverse());
  };
  m.symmetrizer = [P, d, n](const Vec& W) {
    const double rho = W(0), T = W(d + 1);
    Thermo t = ns_thermo(P, rho, T);
    Mat S = Mat::Zero(n, n);
    // For p_rho <= 0 the continuity row is divided by p_rho (cutoff form); symmetry is then lost.
    S(0, 0) = t.p_rho > 0.0 ? t.p_rho / rho : 1.0 / rho;
    for (int i = 0; i < d; ++i) S(1 + i, 1 + i) = rho;
    S(d + 1, d + 1) = rho * t.e_T / T;
    return S;
  };
  return m;
}

Model linear(const std::vector<Mat>& A, const std::vector<std::vector<Mat>>& B, int r) {
  Model m;
  m.name = "linear";
  m.d = static_cast<int>(A.size());
  m.n = static_cast<int>(A[0].rows());
  m.r = r;
  m.flux = [A](int j, const Vec& U) { return Vec(A[j] * U); };
  m.flux_jac = [A](int j, const Vec&) { return A[j]; };
  m.viscosity = [B](int j, int k, const Vec&) { return B[j][k]; };
  return m;
}

Model boundary_root_toy(const json& params) {
  Model m;
  m.name = "boundary-root-toy";
  m.d = 2;
  m.n = 2;
  m.r = 2;
  m.params = params.is_object() ? params : json::object();
  const double w1 = m.params.value("w1", 3.0), b = m.params.value("b", 1.0);
  const double w2 = m.params.value("w2", 2.0 * b);
  m.params["w1"] = w1;
  m.params["b"] = b;
  m.params["w2"] = w2;
  // h(-1) = 1, h(1) = 0 and h' vanishes at both: the endstate Jacobians are exactly A^1 and A^2.
  auto h = [](double u) { return (1 - u) * (1 - u) * (2 + u) / 4; };
  auto dh = [](double u) { return (-2 * (1 - u) * (2 + u) + (1 - u) * (1 - u)) / 4; };
  m.flux = [=](int j, const Vec& U) {
    Vec f(2);
    if (j == 0) {
      f << 0.5 * U(0) * U(0), 2 * U(1);
    } else {
      f << b * U(1) + h(U(0)) * w1, b * U(0) + h(U(0)) * w2;
    }
    return f;
  };
  m.flux_jac = [=](int j, const Vec& U) {
    Mat J(2, 2);
    if (j == 0) J << U(0), 0, 0, 2;
    else J << dh(U(0)) * w1, b, b + dh(U(0)) * w2, 0;
    return J;
  };
  m.viscosity = [](int j, int k, const Vec&) { return j == k ? Mat(Mat::Identity(2, 2)) : Mat(Mat::Zero(2, 2)); };
  m.symmetrizer = [](const Vec&) { return Mat::Identity(2, 2); };
  return m;
}

Model from_json(const json& def) {
  if (!def.is_object() || !def.contains("name")) throw std::invalid_argument("model definition needs a \"name\"");
  const std::string name = def["name"].get<std::string>();
  const int d = def.value("d", 1);
  const json params = def.value("params", json::object());
  Model m;
  if (name == "burgers") m = burgers(d, params);
  else if (name == "isentropic") {
    if (d != 1) throw std::invalid_argument("isentropic model is one-dimensional");
    m = isentropic(params);
  } else if (name == "navier-stokes-ideal") m = navier_stokes(d, params);
  else if (name == "boundary-root-toy") {
    if (d != 2) throw std::invalid_argument("boundary-root-toy is two-dimensional");
    m = boundary_root_toy(params);
  } else throw std::invalid_argument("unknown model id \"" + name + "\"");
  if (def.contains("n") && def["n"].get<int>() != m.n) throw std::invalid_argument("model n mismatch");
  if (def.contains("r") && def["r"].get<int>() != m.r) throw std::invalid_argument("model r mismatch");
  return m;
}

}  // namespace vss::models
