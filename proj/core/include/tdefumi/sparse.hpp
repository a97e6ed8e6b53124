#pragma once

#include <vector>

#include <Eigen/Core>

#include "tdefumi/dictionary.hpp"
#include "tdefumi/dsrf.hpp"

namespace tdefumi {

struct SparseCode {
  Eigen::VectorXd weights;
  std::vector<Eigen::Index> active_set;  // ascending indices with nonzero weight
  double residual_norm = 0.0;
  int iterations = 0;
  bool converged = true;

  static SparseCode from_weights(Eigen::VectorXd w);
};

struct SolverConfig {
  double lambda1 = 0.1;
  double lambda2 = 0.0;
  int max_iters = 10000;
  double tolerance = 1e-8;
  int max_atoms = 1;                 // pursuit sparsity level
  double confidence_cap = 1e6;       // ceiling on 1/residual in JOMP confidence

  void validate() const;
};

// Greedy matching pursuit. An atom may be selected more than once; max_atoms
// bounds the number of iterations.
SparseCode matching_pursuit(const FeatureVector& x, const Dictionary& dict, const SolverConfig& cfg);

// Orthogonal matching pursuit with a least-squares refit on the active set.
SparseCode omp(const FeatureVector& x, const Dictionary& dict, const SolverConfig& cfg);

struct JompResult {
  SparseCode a;
  SparseCode b;
  double confidence = 0.0;
};

// Joint OMP over two signals sharing one active set. Each greedy step picks
// the single atom minimizing the summed squared residuals of both signals
// after per-signal least-squares refits.
JompResult jomp(const FeatureVector& xa, const FeatureVector& xb, const Dictionary& dict,
                const SolverConfig& cfg);

// Mean of the inverse residual norms, each inverse capped at cap.
double jomp_confidence(double residual_a, double residual_b, double cap);

// argmin 0.5||x - D a||^2 + lambda1 ||a||_1 + 0.5 lambda2 ||a||^2 by cyclic
// coordinate descent, followed by an exact solve on the converged support.
SparseCode lasso(const FeatureVector& x, const Dictionary& dict, const SolverConfig& cfg);
SparseCode lasso(const FeatureVector& x, const Eigen::MatrixXd& atoms, const SolverConfig& cfg);

// Lasso against one fixed atom matrix with the Gram matrix computed once.
// Results are identical to lasso() for the same inputs.
class LassoSolver {
 public:
  LassoSolver(Eigen::MatrixXd atoms, const SolverConfig& cfg);

  SparseCode solve(const FeatureVector& x) const;
  const Eigen::MatrixXd& atoms() const { return atoms_; }

 private:
  Eigen::MatrixXd atoms_;
  Eigen::MatrixXd gram_;
  SolverConfig cfg_;
};

// Elastic-net solution restricted to a fixed support and sign pattern:
// a_S = (D_S^T D_S + lambda2 I)^-1 (D_S^T x - lambda1 sign_S). Weights outside
// the support are zero. Used to differentiate codes with the support held fixed.
Eigen::VectorXd elastic_net_on_support(const FeatureVector& x, const Eigen::MatrixXd& atoms,
                                       const std::vector<Eigen::Index>& support,
                                       const Eigen::VectorXd& signs, double lambda1, double lambda2);

enum class Hypothesis : int { kBackground = 0, kTarget = 1 };

// Latent-gated sparse coding. kTarget codes over every atom; kBackground codes
// over the non-target atoms only and leaves target weights at exactly zero.
// cfg.lambda2 is ignored: the ridge is `ridge`, zero unless a caller needs it
// for a well-conditioned implicit gradient.
SparseCode sparse_code_latent(const FeatureVector& x, const Dictionary& dict, Hypothesis z,
                              const SolverConfig& cfg, double ridge = 0.0);

double lasso_objective(const FeatureVector& x, const Eigen::MatrixXd& atoms,
                       const Eigen::VectorXd& weights, double lambda1, double lambda2);

}  // namespace tdefumi
