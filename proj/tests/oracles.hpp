#pragma once

// Independent reference implementations used as test oracles. They share no
// code with the library beyond plain data types.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

inline std::vector<std::complex<double>> dsrf(const std::vector<double>& omegas, double c0,
                                              const std::vector<double>& cks, const std::vector<double>& zetas) {
  std::vector<std::complex<double>> out;
  for (double w : omegas) {
    std::complex<double> h(c0, 0.0);
    for (std::size_t k = 0; k < cks.size(); ++k) h += cks[k] / std::complex<double>(1.0, w / zetas[k]);
    out.push_back(h);
  }
  return out;
}

inline double lasso_value(const Eigen::VectorXd& x, const Eigen::MatrixXd& D, const Eigen::VectorXd& a, double l1,
                          double l2) {
  return 0.5 * (x - D * a).squaredNorm() + l1 * a.lpNorm<1>() + 0.5 * l2 * a.squaredNorm();
}

// Global elastic-net minimum by enumerating every sign pattern in {-1, 0, +1}^K
// and keeping the sign-consistent closed-form solutions.
inline Eigen::VectorXd lasso_enumerate(const Eigen::VectorXd& x, const Eigen::MatrixXd& D, double l1, double l2) {
  const int K = static_cast<int>(D.cols());
  int patterns = 1;
  for (int k = 0; k < K; ++k) patterns *= 3;
  Eigen::VectorXd best = Eigen::VectorXd::Zero(K);
  double best_val = lasso_value(x, D, best, l1, l2);
  for (int p = 1; p < patterns; ++p) {
    std::vector<int> idx;
    std::vector<double> sg;
    int code = p;
    for (int k = 0; k < K; ++k, code /= 3) {
      const int s = code % 3;
      if (s == 0) continue;
      idx.push_back(k);
      sg.push_back(s == 1 ? 1.0 : -1.0);
    }
    const int m = static_cast<int>(idx.size());
    Eigen::MatrixXd S(D.rows(), m);
    Eigen::VectorXd sv(m);
    for (int j = 0; j < m; ++j) {
      S.col(j) = D.col(idx[j]);
      sv[j] = sg[j];
    }
    Eigen::MatrixXd G = S.transpose() * S + l2 * Eigen::MatrixXd::Identity(m, m);
    Eigen::VectorXd aS = G.fullPivLu().solve(S.transpose() * x - l1 * sv);
    bool ok = true;
    for (int j = 0; j < m; ++j) ok = ok && aS[j] * sv[j] > 0.0;
    if (!ok) continue;
    Eigen::VectorXd a = Eigen::VectorXd::Zero(K);
    for (int j = 0; j < m; ++j) a[idx[j]] = aS[j];
    const double v = lasso_value(x, D, a, l1, l2);
    if (v < best_val) {
      best_val = v;
      best = a;
    }
  }
  return best;
}

// Joint single-atom choice: the atom whose span leaves the smallest summed
// squared residual over both signals. Lowest index wins ties.
inline int jomp_single_atom(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const Eigen::MatrixXd& D) {
  int best = -1;
  double best_err = std::numeric_limits<double>::infinity();
  for (int k = 0; k < D.cols(); ++k) {
    const Eigen::VectorXd d = D.col(k);
    const double dd = d.squaredNorm();
    if (dd == 0.0) continue;
    const double err = (a - d * (d.dot(a) / dd)).squaredNorm() + (b - d * (d.dot(b) / dd)).squaredNorm();
    if (err < best_err - 1e-12) {
      best_err = err;
      best = k;
    }
  }
  return best;
}

// Pairwise AUC: P(score_target > score_false) + 0.5 P(equal).
inline double mann_whitney_auc(const std::vector<double>& scores, const std::vector<bool>& is_target) {
  double wins = 0.0, pairs = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!is_target[i]) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (is_target[j]) continue;
      pairs += 1.0;
      if (scores[i] > scores[j]) wins += 1.0;
      else if (scores[i] == scores[j]) wins += 0.5;
    }
  }
  return wins / pairs;
}

inline Eigen::MatrixXd random_atoms(std::mt19937_64& rng, int L, int K, double norm) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXd D(L, K);
  for (int k = 0; k < K; ++k) {
    for (int i = 0; i < L; ++i) D(i, k) = n(rng);
    D.col(k) *= norm / D.col(k).norm();
  }
  return D;
}

inline Eigen::VectorXd random_vector(std::mt19937_64& rng, int L, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Eigen::VectorXd v(L);
  for (int i = 0; i < L; ++i) v[i] = n(rng);
  return v;
}

}  // namespace oracle
