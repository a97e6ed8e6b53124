#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "tdefumi/dictionary.hpp"
#include "tdefumi/dsrf.hpp"
#include "tdefumi/sparse.hpp"

namespace tdefumi {

enum class BagLabel { kNegative, kPositive };

// Multiple-instance training unit: the points gathered around one alarm.
struct Bag {
  std::string bag_id;
  BagLabel label = BagLabel::kNegative;
  std::vector<FeatureVector> points;
  std::string lane_id;
  double position_m = 0.0;
};

// P(z = 0 | x) and P(z = 1 | x). p0 + p1 == 1.
struct LatentPosterior {
  double p0 = 1.0;
  double p1 = 0.0;
};

// Linear scorer on sparse codes: y = w . alpha + psi.
struct Classifier {
  Eigen::VectorXd w;
  double psi = 0.0;

  double apply(const Eigen::VectorXd& alpha) const { return w.dot(alpha) + psi; }
};

struct TrainConfig {
  double u = 0.05;            // weight of the atom-to-mean regularizer
  double v = 1e-3;            // classifier ridge
  double s = 1e-2;            // atom smoothness weight
  double lambda = 0.1;        // l1 weight of every sparse code
  double beta = 5.0;          // posterior scale
  double epsilon = 1.0;       // target-point reweighting factor
  int target_atoms = 2;
  int nontarget_atoms = 8;
  int batch_size = 32;
  int epochs = 100;
  double rho0 = 0.1;          // learning rate rho_t = rho0 / (1 + t / t0)
  double t0 = 0.0;            // 0 selects the number of minibatches per epoch
  std::uint64_t seed = 1;
  double tolerance = 1e-6;    // stop when no parameter moves more than this in an epoch
  double lambda2_stab = 1e-4; // ridge inside the active-set Gram inverse of the dictionary gradient
  double code_ridge = 0.0;    // l2 term of the latent codes
  int solver_max_iters = 10000;
  double solver_tolerance = 1e-8;

  void validate() const;
  // Solver settings for the latent and test-time codes.
  SolverConfig solver() const;
};

struct EfumiDiagnosticConfig {
  std::vector<double> gammas;  // one sparsity weight per non-target atom
  double u = 0.05;
  double beta = 5.0;
};

struct DataStats {
  FeatureVector mu0;             // mean of every training point
  std::size_t n_target = 0;      // points in positive bags
  std::size_t n_background = 0;  // points in negative bags
};

DataStats compute_stats(const std::vector<Bag>& bags);

// alpha under both latent hypotheses. `target` is left empty when the point's
// target probability is zero.
struct LatentCodes {
  SparseCode background;  // z = 0, target weights exactly zero
  SparseCode target;      // z = 1, every atom
};

using PosteriorTable = std::vector<std::vector<LatentPosterior>>;  // [bag][point]
using CodeTable = std::vector<std::vector<LatentCodes>>;           // [bag][point]

LatentPosterior latent_posterior(const FeatureVector& x, const Dictionary& dict, const TrainConfig& cfg,
                                 BagLabel label);

// epsilon * N_M / N_T for points of positive bags, 1 for background points.
double delta_n(bool is_target_point, const DataStats& stats, double epsilon);

// Posterior-weighted squared classification error of one point (no regularizers).
double expected_point_loss(const FeatureVector& x, const Dictionary& dict, const Classifier& clf,
                           const LatentPosterior& post, double delta, const TrainConfig& cfg);
double expected_point_loss(const LatentCodes& codes, const Classifier& clf, const LatentPosterior& post,
                           double delta, double u);

PosteriorTable compute_posteriors(const std::vector<Bag>& bags, const Dictionary& dict, const TrainConfig& cfg);
CodeTable compute_codes(const std::vector<Bag>& bags, const Dictionary& dict, const PosteriorTable& posteriors,
                        const TrainConfig& cfg);

// Re-solves every code exactly on its current support and sign pattern against
// `dict`, with ridge cfg.code_ridge. Used to evaluate the objective with the
// active sets held fixed.
CodeTable recode_on_support(const std::vector<Bag>& bags, const Dictionary& dict, const CodeTable& codes,
                            const TrainConfig& cfg);

// Regularizer part of the objective: atom-to-mean, classifier ridge, smoothness.
double regularizer(const Eigen::MatrixXd& atoms, const Classifier& clf, const TrainConfig& cfg,
                   const DataStats& stats);

// Full objective: sum of expected point losses plus regularizers. This
// overload runs the E-step and the latent coding itself.
double objective(const std::vector<Bag>& bags, const Dictionary& dict, const Classifier& clf,
                 const TrainConfig& cfg, const DataStats& stats);
double objective(const std::vector<Bag>& bags, const Dictionary& dict, const Classifier& clf,
                 const PosteriorTable& posteriors, const CodeTable& codes, const TrainConfig& cfg,
                 const DataStats& stats);

// Expected reconstruction objective of the multiple-instance dictionary model
// (a quantity to maximize). Diagnostic only.
double efumi_objective(const std::vector<Bag>& bags, const Dictionary& dict, const CodeTable& codes,
                       const PosteriorTable& posteriors, const EfumiDiagnosticConfig& diag,
                       const DataStats& stats);

struct PointRef {
  std::size_t bag = 0;
  std::size_t point = 0;
};

struct Gradients {
  Eigen::MatrixXd dict;
  Eigen::VectorXd w;
  double psi = 0.0;
};

// Gradient of the loss over `batch` plus reg_weight times the regularizer
// gradient. The dictionary block differentiates each code implicitly on its
// active set with ridge cfg.lambda2_stab.
Gradients gradients(const std::vector<Bag>& bags, const std::vector<PointRef>& batch, const Dictionary& dict,
                    const Classifier& clf, const PosteriorTable& posteriors, const CodeTable& codes,
                    const TrainConfig& cfg, const DataStats& stats, double reg_weight = 1.0);

// Rescales atoms with norm above one onto the unit sphere.
Dictionary project_unit_ball(const Dictionary& dict);
void project_unit_ball(Eigen::MatrixXd& atoms);

struct Model {
  FrequencyGrid grid;
  Dictionary dictionary;
  Classifier classifier;
  TrainConfig config;
  DataStats stats;
  std::vector<double> objective_log;  // objective after each epoch
};

// Target atoms from DSRF atoms at log-spaced relaxation frequencies; non-target
// atoms from randomly drawn negative-bag points, perturbed by 1% noise and
// scaled to unit norm.
Dictionary initial_dictionary(const std::vector<Bag>& bags, const FrequencyGrid& grid, const TrainConfig& cfg);

Model train(const std::vector<Bag>& bags, const TrainConfig& cfg, const FrequencyGrid& grid);

// Test-time score: lasso over the whole dictionary, then the linear classifier.
double classify(const FeatureVector& x, const Model& model);

enum class Pooling { kMax, kMean };
double classify_alarm(const std::vector<FeatureVector>& points, const Model& model, Pooling pooling = Pooling::kMax);

}  // namespace tdefumi
