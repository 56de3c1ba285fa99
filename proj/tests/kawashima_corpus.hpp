#pragma once

#include <Eigen/Eigenvalues>
#include <random>
#include <vector>

#include "vss/structure.hpp"

namespace corpus {

using vss::Mat;

struct Case {
  Mat A0, At, Bt;  // symmetrizer, symmetric A~, B~ = blockdiag(0, b~)
  bool planted = false;
  Mat A() const { return A0.ldlt().solve(At); }
  Mat B() const { return A0.ldlt().solve(Bt); }
};

// Random symmetrizable 4x4 pairs; roughly one in three has an eigenvector of A planted in ker B~.
inline std::vector<Case> make(int count, unsigned seed) {
  std::mt19937 gen(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  auto rnd = [&](int n) {
    Mat M(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) M(i, j) = g(gen);
    return M;
  };
  std::vector<Case> out;
  for (int k = 0; k < count; ++k) {
    Case c;
    Mat M = rnd(4);
    c.A0 = M * M.transpose() + 0.5 * Mat::Identity(4, 4);
    Mat S = rnd(4);
    c.At = 0.5 * (S + S.transpose());
    Mat b = rnd(3);
    c.Bt = Mat::Zero(4, 4);
    c.Bt.bottomRightCorner(3, 3) = b * b.transpose() + 0.1 * Mat::Identity(3, 3);
    c.planted = k % 3 == 2;
    if (c.planted) {
      // A~ e1 = mu A0~ e1 makes e1 (which spans ker B~) an eigenvector of A.
      const double mu = g(gen);
      c.At.col(0) = mu * c.A0.col(0);
      c.At.row(0) = c.At.col(0).transpose();
    }
    out.push_back(c);
  }
  return out;
}

// Independent (K0) oracle: smallest |B~ v| / |v| over the eigenvectors v of A.
inline double kernel_defect(const Case& c) {
  Eigen::EigenSolver<Mat> es(c.A());
  double best = 1e300;
  for (int i = 0; i < 4; ++i) {
    Eigen::VectorXcd v = es.eigenvectors().col(i);
    best = std::min(best, (c.Bt.cast<std::complex<double>>() * v).norm() / v.norm());
  }
  return best;
}

}  // namespace corpus
