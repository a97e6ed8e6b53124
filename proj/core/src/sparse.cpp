#include "tdefumi/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include "tdefumi/errors.hpp"

namespace tdefumi {
namespace {

void check_dims(const FeatureVector& x, const Eigen::MatrixXd& atoms) {
  if (x.size() != atoms.rows())
    throw InvalidParameter("signal dimension " + std::to_string(x.size()) +
                           " does not match dictionary dimension " + std::to_string(atoms.rows()));
  if (atoms.cols() == 0) throw InvalidParameter("dictionary is empty");
}

double soft_threshold(double v, double t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}

std::vector<Eigen::Index> support_of(const Eigen::VectorXd& w) {
  std::vector<Eigen::Index> s;
  for (Eigen::Index k = 0; k < w.size(); ++k)
    if (w[k] != 0.0) s.push_back(k);
  return s;
}

Eigen::MatrixXd columns(const Eigen::MatrixXd& atoms, const std::vector<Eigen::Index>& idx) {
  Eigen::MatrixXd out(atoms.rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t j = 0; j < idx.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = atoms.col(idx[j]);
  return out;
}

// Least-squares coefficients of x on the given columns. Returns false when the
// columns are numerically rank deficient.
bool least_squares(const Eigen::MatrixXd& atoms, const std::vector<Eigen::Index>& idx,
                   const FeatureVector& x, Eigen::VectorXd& coef) {
  const Eigen::MatrixXd sub = columns(atoms, idx);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(sub);
  qr.setThreshold(1e-10);
  if (qr.rank() < sub.cols()) return false;
  coef = qr.solve(x);
  return true;
}

}  // namespace

SparseCode SparseCode::from_weights(Eigen::VectorXd w) {
  SparseCode c;
  c.weights = std::move(w);
  c.active_set = support_of(c.weights);
  return c;
}

void SolverConfig::validate() const {
  if (!(lambda1 >= 0.0) || !(lambda2 >= 0.0)) throw InvalidParameter("lambda1 and lambda2 must be >= 0");
  if (!(tolerance > 0.0)) throw InvalidParameter("solver tolerance must be > 0");
  if (max_iters < 1) throw InvalidParameter("max_iters must be >= 1");
  if (max_atoms < 0) throw InvalidParameter("max_atoms must be >= 0");
  if (!(confidence_cap > 0.0)) throw InvalidParameter("confidence cap must be > 0");
}

SparseCode matching_pursuit(const FeatureVector& x, const Dictionary& dict, const SolverConfig& cfg) {
  cfg.validate();
  const Eigen::MatrixXd& D = dict.atoms();
  check_dims(x, D);
  const Eigen::VectorXd norms = D.colwise().norm();

  Eigen::VectorXd w = Eigen::VectorXd::Zero(D.cols());
  FeatureVector r = x;
  int it = 0;
  for (; it < cfg.max_atoms; ++it) {
    const double rn = r.norm();
    if (rn <= cfg.tolerance) break;
    const Eigen::VectorXd corr = D.transpose() * r;
    Eigen::Index best = -1;
    double best_score = 0.0;
    for (Eigen::Index k = 0; k < D.cols(); ++k) {
      if (norms[k] == 0.0) continue;
      const double score = std::abs(corr[k]) / norms[k];
      if (score > best_score) {
        best_score = score;
        best = k;
      }
    }
    if (best < 0 || best_score <= 1e-14 * rn) break;
    const double coef = corr[best] / (norms[best] * norms[best]);
    w[best] += coef;
    r -= coef * D.col(best);
  }
  SparseCode code = SparseCode::from_weights(std::move(w));
  code.residual_norm = r.norm();
  code.iterations = it;
  return code;
}

SparseCode omp(const FeatureVector& x, const Dictionary& dict, const SolverConfig& cfg) {
  cfg.validate();
  const Eigen::MatrixXd& D = dict.atoms();
  check_dims(x, D);
  const Eigen::VectorXd norms = D.colwise().norm();

  std::vector<Eigen::Index> selected;
  std::vector<bool> used(static_cast<std::size_t>(D.cols()), false);
  Eigen::VectorXd coef;
  FeatureVector r = x;
  int it = 0;
  for (; it < cfg.max_atoms; ++it) {
    const double rn = r.norm();
    if (rn <= cfg.tolerance) break;
    const Eigen::VectorXd corr = D.transpose() * r;
    Eigen::Index best = -1;
    double best_score = 0.0;
    for (Eigen::Index k = 0; k < D.cols(); ++k) {
      if (used[static_cast<std::size_t>(k)] || norms[k] == 0.0) continue;
      const double score = std::abs(corr[k]) / norms[k];
      if (score > best_score) {
        best_score = score;
        best = k;
      }
    }
    if (best < 0 || best_score <= 1e-14 * rn) break;

    std::vector<Eigen::Index> trial = selected;
    trial.push_back(best);
    Eigen::VectorXd trial_coef;
    // A rank-deficient active set drops the newest atom and stops.
    if (!least_squares(D, trial, x, trial_coef)) break;
    selected = std::move(trial);
    used[static_cast<std::size_t>(best)] = true;
    coef = std::move(trial_coef);
    r = x - columns(D, selected) * coef;
  }

  Eigen::VectorXd w = Eigen::VectorXd::Zero(D.cols());
  for (std::size_t j = 0; j < selected.size(); ++j) w[selected[j]] = coef[static_cast<Eigen::Index>(j)];
  SparseCode code = SparseCode::from_weights(std::move(w));
  code.residual_norm = r.norm();
  code.iterations = it;
  return code;
}

double jomp_confidence(double residual_a, double residual_b, double cap) {
  auto inv = [cap](double r) { return r > 0.0 ? std::min(1.0 / r, cap) : cap; };
  return 0.5 * (inv(residual_a) + inv(residual_b));
}

JompResult jomp(const FeatureVector& xa, const FeatureVector& xb, const Dictionary& dict,
                const SolverConfig& cfg) {
  cfg.validate();
  const Eigen::MatrixXd& D = dict.atoms();
  check_dims(xa, D);
  check_dims(xb, D);
  const Eigen::Index L = D.rows();

  std::vector<Eigen::Index> selected;
  std::vector<bool> used(static_cast<std::size_t>(D.cols()), false);
  Eigen::MatrixXd basis(L, 0);  // orthonormal basis of the selected atoms
  FeatureVector ra = xa, rb = xb;
  Eigen::VectorXd ca, cb;
  int it = 0;
  for (; it < cfg.max_atoms; ++it) {
    if (ra.norm() <= cfg.tolerance && rb.norm() <= cfg.tolerance) break;
    Eigen::Index best = -1;
    double best_gain = 0.0;
    Eigen::VectorXd best_dir;
    for (Eigen::Index k = 0; k < D.cols(); ++k) {
      if (used[static_cast<std::size_t>(k)]) continue;
      const double dn = D.col(k).norm();
      if (dn == 0.0) continue;
      Eigen::VectorXd dp = D.col(k);
      if (basis.cols() > 0) {
        dp -= basis * (basis.transpose() * dp);
        dp -= basis * (basis.transpose() * dp);
      }
      const double pn = dp.norm();
      if (pn <= 1e-10 * dn) continue;
      dp /= pn;
      const double pa = dp.dot(ra), pb = dp.dot(rb);
      // Reduction in ||ra||^2 + ||rb||^2 from refitting both signals with atom k added.
      const double gain = pa * pa + pb * pb;
      if (gain > best_gain) {
        best_gain = gain;
        best = k;
        best_dir = std::move(dp);
      }
    }
    if (best < 0) break;
    selected.push_back(best);
    used[static_cast<std::size_t>(best)] = true;
    basis.conservativeResize(Eigen::NoChange, basis.cols() + 1);
    basis.col(basis.cols() - 1) = best_dir;
    if (!least_squares(D, selected, xa, ca) || !least_squares(D, selected, xb, cb)) {
      selected.pop_back();
      basis.conservativeResize(Eigen::NoChange, basis.cols() - 1);
      if (!selected.empty()) {
        least_squares(D, selected, xa, ca);
        least_squares(D, selected, xb, cb);
      }
      break;
    }
    const Eigen::MatrixXd sub = columns(D, selected);
    ra = xa - sub * ca;
    rb = xb - sub * cb;
  }

  Eigen::VectorXd wa = Eigen::VectorXd::Zero(D.cols()), wb = Eigen::VectorXd::Zero(D.cols());
  for (std::size_t j = 0; j < selected.size(); ++j) {
    wa[selected[j]] = ca[static_cast<Eigen::Index>(j)];
    wb[selected[j]] = cb[static_cast<Eigen::Index>(j)];
  }
  JompResult out;
  out.a = SparseCode::from_weights(std::move(wa));
  out.b = SparseCode::from_weights(std::move(wb));
  // Report the shared support even where a coefficient happens to be zero.
  std::vector<Eigen::Index> shared = selected;
  std::sort(shared.begin(), shared.end());
  out.a.active_set = shared;
  out.b.active_set = shared;
  out.a.residual_norm = ra.norm();
  out.b.residual_norm = rb.norm();
  out.a.iterations = out.b.iterations = it;
  out.confidence = jomp_confidence(out.a.residual_norm, out.b.residual_norm, cfg.confidence_cap);
  return out;
}

double lasso_objective(const FeatureVector& x, const Eigen::MatrixXd& atoms,
                       const Eigen::VectorXd& weights, double lambda1, double lambda2) {
  return 0.5 * (x - atoms * weights).squaredNorm() + lambda1 * weights.lpNorm<1>() +
         0.5 * lambda2 * weights.squaredNorm();
}

Eigen::VectorXd elastic_net_on_support(const FeatureVector& x, const Eigen::MatrixXd& atoms,
                                       const std::vector<Eigen::Index>& support,
                                       const Eigen::VectorXd& signs, double lambda1, double lambda2) {
  check_dims(x, atoms);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(atoms.cols());
  if (support.empty()) return w;
  if (signs.size() != static_cast<Eigen::Index>(support.size()))
    throw InvalidParameter("one sign per support index is required");
  const Eigen::MatrixXd sub = columns(atoms, support);
  Eigen::MatrixXd g = sub.transpose() * sub;
  g.diagonal().array() += lambda2;
  const Eigen::VectorXd rhs = sub.transpose() * x - lambda1 * signs;
  const Eigen::VectorXd a = g.ldlt().solve(rhs);
  for (std::size_t j = 0; j < support.size(); ++j) w[support[j]] = a[static_cast<Eigen::Index>(j)];
  return w;
}

LassoSolver::LassoSolver(Eigen::MatrixXd atoms, const SolverConfig& cfg)
    : atoms_(std::move(atoms)), cfg_(cfg) {
  cfg_.validate();
  if (atoms_.cols() == 0) throw InvalidParameter("dictionary is empty");
  gram_ = atoms_.transpose() * atoms_;
}

SparseCode LassoSolver::solve(const FeatureVector& x) const {
  check_dims(x, atoms_);
  const Eigen::Index K = atoms_.cols();
  const double l1 = cfg_.lambda1, l2 = cfg_.lambda2;
  const Eigen::VectorXd c = atoms_.transpose() * x;

  Eigen::VectorXd a = Eigen::VectorXd::Zero(K);
  Eigen::VectorXd grad = c;  // D^T (x - D a)
  bool converged = false;
  int sweep = 0;
  while (sweep < cfg_.max_iters) {
    ++sweep;
    double max_change = 0.0;
    for (Eigen::Index k = 0; k < K; ++k) {
      const double denom = gram_(k, k) + l2;
      if (denom <= 0.0) continue;
      const double rho = grad[k] + gram_(k, k) * a[k];
      const double next = soft_threshold(rho, l1) / denom;
      const double delta = next - a[k];
      if (delta != 0.0) {
        grad.noalias() -= gram_.col(k) * delta;
        a[k] = next;
        max_change = std::max(max_change, std::abs(delta));
      }
    }
    if (max_change < cfg_.tolerance) {
      converged = true;
      break;
    }
  }

  // Exact solve on the converged support; kept only if it satisfies the
  // optimality conditions and does not raise the objective.
  std::vector<Eigen::Index> support = support_of(a);
  if (!support.empty()) {
    Eigen::VectorXd signs(static_cast<Eigen::Index>(support.size()));
    Eigen::MatrixXd g(signs.size(), signs.size());
    Eigen::VectorXd rhs(signs.size());
    for (Eigen::Index i = 0; i < signs.size(); ++i) {
      signs[i] = a[support[static_cast<std::size_t>(i)]] > 0.0 ? 1.0 : -1.0;
      rhs[i] = c[support[static_cast<std::size_t>(i)]] - l1 * signs[i];
      for (Eigen::Index j = 0; j < signs.size(); ++j)
        g(i, j) = gram_(support[static_cast<std::size_t>(i)], support[static_cast<std::size_t>(j)]);
      g(i, i) += l2;
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(g);
    if (ldlt.info() == Eigen::Success && ldlt.isPositive() && ldlt.rcond() > 1e-12) {
      const Eigen::VectorXd sol = ldlt.solve(rhs);
      bool ok = sol.allFinite();
      for (Eigen::Index i = 0; ok && i < sol.size(); ++i) ok = sol[i] * signs[i] > 0.0;
      if (ok) {
        Eigen::VectorXd cand = Eigen::VectorXd::Zero(K);
        for (Eigen::Index i = 0; i < sol.size(); ++i) cand[support[static_cast<std::size_t>(i)]] = sol[i];
        const Eigen::VectorXd cgrad = c - gram_ * cand;
        for (Eigen::Index k = 0; ok && k < K; ++k)
          if (cand[k] == 0.0) ok = std::abs(cgrad[k]) <= l1 * (1.0 + 1e-9) + 1e-12;
        if (ok && lasso_objective(x, atoms_, cand, l1, l2) <= lasso_objective(x, atoms_, a, l1, l2) + 1e-12)
          a = cand;
      }
    }
  }

  SparseCode code = SparseCode::from_weights(std::move(a));
  code.residual_norm = (x - atoms_ * code.weights).norm();
  code.iterations = sweep;
  code.converged = converged;
  return code;
}

SparseCode lasso(const FeatureVector& x, const Eigen::MatrixXd& atoms, const SolverConfig& cfg) {
  return LassoSolver(atoms, cfg).solve(x);
}

SparseCode lasso(const FeatureVector& x, const Dictionary& dict, const SolverConfig& cfg) {
  return lasso(x, dict.atoms(), cfg);
}

SparseCode sparse_code_latent(const FeatureVector& x, const Dictionary& dict, Hypothesis z,
                              const SolverConfig& cfg, double ridge) {
  SolverConfig c = cfg;
  c.lambda2 = ridge;
  if (z == Hypothesis::kTarget) return lasso(x, dict.atoms(), c);

  SparseCode sub = lasso(x, Eigen::MatrixXd(dict.nontarget_atoms()), c);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(dict.size());
  w.tail(dict.nontarget_count()) = sub.weights;
  SparseCode code = SparseCode::from_weights(std::move(w));
  code.residual_norm = sub.residual_norm;
  code.iterations = sub.iterations;
  code.converged = sub.converged;
  return code;
}

}  // namespace tdefumi
