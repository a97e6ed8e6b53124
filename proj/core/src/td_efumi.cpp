#include "tdefumi/td_efumi.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <Eigen/Cholesky>

#include "tdefumi/errors.hpp"
#include "tdefumi/scene.hpp"

namespace tdefumi {

void TrainConfig::validate() const {
  if (!(u >= 0.0 && u < 1.0)) throw InvalidParameter("u must lie in [0, 1)");
  if (!(v > 0.0)) throw InvalidParameter("v must be > 0");
  if (!(s >= 0.0)) throw InvalidParameter("s must be >= 0");
  if (!(lambda > 0.0)) throw InvalidParameter("lambda must be > 0");
  if (!(beta > 0.0)) throw InvalidParameter("beta must be > 0");
  if (!(epsilon > 0.0)) throw InvalidParameter("epsilon must be > 0");
  if (target_atoms < 1 || nontarget_atoms < 1) throw InvalidParameter("need T >= 1 and M >= 1 atoms");
  if (batch_size < 1) throw InvalidParameter("batch_size must be >= 1");
  if (epochs < 0) throw InvalidParameter("epochs must be >= 0");
  if (!(rho0 > 0.0) || !(t0 >= 0.0)) throw InvalidParameter("need rho0 > 0 and t0 >= 0");
  if (!(tolerance > 0.0)) throw InvalidParameter("tolerance must be > 0");
  if (!(lambda2_stab >= 0.0) || !(code_ridge >= 0.0)) throw InvalidParameter("ridges must be >= 0");
}

SolverConfig TrainConfig::solver() const {
  SolverConfig c;
  c.lambda1 = lambda;
  c.lambda2 = 0.0;
  c.max_iters = solver_max_iters;
  c.tolerance = solver_tolerance;
  return c;
}

DataStats compute_stats(const std::vector<Bag>& bags) {
  DataStats st;
  std::size_t n = 0;
  for (const auto& bag : bags) {
    for (const auto& x : bag.points) {
      if (st.mu0.size() == 0) st.mu0 = FeatureVector::Zero(x.size());
      if (x.size() != st.mu0.size()) throw InvalidParameter("all points must share one dimension");
      st.mu0 += x;
      ++n;
    }
    (bag.label == BagLabel::kPositive ? st.n_target : st.n_background) += bag.points.size();
  }
  if (n > 0) st.mu0 /= static_cast<double>(n);
  return st;
}

LatentPosterior latent_posterior(const FeatureVector& x, const Dictionary& dict, const TrainConfig& cfg,
                                 BagLabel label) {
  if (label == BagLabel::kNegative) return {1.0, 0.0};
  const SparseCode a = sparse_code_latent(x, dict, Hypothesis::kBackground, cfg.solver(), cfg.code_ridge);
  const double p0 = std::exp(-cfg.beta * a.residual_norm * a.residual_norm);
  return {p0, 1.0 - p0};
}

double delta_n(bool is_target_point, const DataStats& stats, double epsilon) {
  if (!is_target_point) return 1.0;
  if (stats.n_target == 0) throw InvalidParameter("no target points: N_T is zero");
  return epsilon * static_cast<double>(stats.n_background) / static_cast<double>(stats.n_target);
}

double expected_point_loss(const LatentCodes& codes, const Classifier& clf, const LatentPosterior& post,
                           double delta, double u) {
  double acc = 0.0;
  if (post.p0 > 0.0) {
    const double e = clf.apply(codes.background.weights);
    acc += post.p0 * e * e;
  }
  if (post.p1 > 0.0) {
    const double e = 1.0 - clf.apply(codes.target.weights);
    acc += post.p1 * e * e;
  }
  return 0.5 * (1.0 - u) * delta * acc;
}

double expected_point_loss(const FeatureVector& x, const Dictionary& dict, const Classifier& clf,
                           const LatentPosterior& post, double delta, const TrainConfig& cfg) {
  LatentCodes codes;
  const SolverConfig sc = cfg.solver();
  if (post.p0 > 0.0) codes.background = sparse_code_latent(x, dict, Hypothesis::kBackground, sc, cfg.code_ridge);
  if (post.p1 > 0.0) codes.target = sparse_code_latent(x, dict, Hypothesis::kTarget, sc, cfg.code_ridge);
  return expected_point_loss(codes, clf, post, delta, cfg.u);
}

namespace {

// Codes every point of a table against one dictionary with shared Gram matrices.
class LatentCoder {
 public:
  LatentCoder(const Dictionary& dict, const TrainConfig& cfg)
      : target_count_(dict.target_count()),
        size_(dict.size()),
        full_(dict.atoms(), ridge(cfg)),
        background_(Eigen::MatrixXd(dict.nontarget_atoms()), ridge(cfg)) {}

  SparseCode background(const FeatureVector& x) const {
    SparseCode sub = background_.solve(x);
    Eigen::VectorXd w = Eigen::VectorXd::Zero(size_);
    w.tail(sub.weights.size()) = sub.weights;
    SparseCode code = SparseCode::from_weights(std::move(w));
    code.residual_norm = sub.residual_norm;
    code.iterations = sub.iterations;
    code.converged = sub.converged;
    return code;
  }
  SparseCode target(const FeatureVector& x) const { return full_.solve(x); }

 private:
  static SolverConfig ridge(const TrainConfig& cfg) {
    SolverConfig c = cfg.solver();
    c.lambda2 = cfg.code_ridge;
    return c;
  }
  Eigen::Index target_count_;
  Eigen::Index size_;
  LassoSolver full_;
  LassoSolver background_;
};

void check_bags(const std::vector<Bag>& bags, Eigen::Index dim) {
  for (const auto& bag : bags)
    for (const auto& x : bag.points)
      if (x.size() != dim) throw InvalidParameter("point dimension does not match the dictionary");
}

double delta_for(const Bag& bag, const DataStats& stats, double epsilon) {
  return delta_n(bag.label == BagLabel::kPositive, stats, epsilon);
}

}  // namespace

PosteriorTable compute_posteriors(const std::vector<Bag>& bags, const Dictionary& dict, const TrainConfig& cfg) {
  check_bags(bags, dict.dim());
  const LatentCoder coder(dict, cfg);
  PosteriorTable table(bags.size());
  for (std::size_t b = 0; b < bags.size(); ++b) {
    table[b].resize(bags[b].points.size());
    if (bags[b].label == BagLabel::kNegative) continue;
    for (std::size_t n = 0; n < bags[b].points.size(); ++n) {
      const double r = coder.background(bags[b].points[n]).residual_norm;
      const double p0 = std::exp(-cfg.beta * r * r);
      table[b][n] = {p0, 1.0 - p0};
    }
  }
  return table;
}

CodeTable compute_codes(const std::vector<Bag>& bags, const Dictionary& dict, const PosteriorTable& posteriors,
                        const TrainConfig& cfg) {
  check_bags(bags, dict.dim());
  const LatentCoder coder(dict, cfg);
  CodeTable table(bags.size());
  for (std::size_t b = 0; b < bags.size(); ++b) {
    table[b].resize(bags[b].points.size());
    for (std::size_t n = 0; n < bags[b].points.size(); ++n) {
      const auto& x = bags[b].points[n];
      const auto& post = posteriors[b][n];
      if (post.p0 > 0.0) table[b][n].background = coder.background(x);
      if (post.p1 > 0.0) table[b][n].target = coder.target(x);
    }
  }
  return table;
}

CodeTable recode_on_support(const std::vector<Bag>& bags, const Dictionary& dict, const CodeTable& codes,
                            const TrainConfig& cfg) {
  auto redo = [&](const FeatureVector& x, const SparseCode& c) {
    if (c.weights.size() == 0) return c;
    Eigen::VectorXd signs(static_cast<Eigen::Index>(c.active_set.size()));
    for (std::size_t j = 0; j < c.active_set.size(); ++j)
      signs[static_cast<Eigen::Index>(j)] = c.weights[c.active_set[j]] > 0.0 ? 1.0 : -1.0;
    SparseCode out = SparseCode::from_weights(
        elastic_net_on_support(x, dict.atoms(), c.active_set, signs, cfg.lambda, cfg.code_ridge));
    out.active_set = c.active_set;
    out.residual_norm = (x - dict.atoms() * out.weights).norm();
    return out;
  };
  CodeTable out(codes.size());
  for (std::size_t b = 0; b < codes.size(); ++b) {
    out[b].resize(codes[b].size());
    for (std::size_t n = 0; n < codes[b].size(); ++n) {
      out[b][n].background = redo(bags[b].points[n], codes[b][n].background);
      out[b][n].target = redo(bags[b].points[n], codes[b][n].target);
    }
  }
  return out;
}

namespace {

// Squared first differences inside the real block and inside the imaginary block.
double smoothness(const Eigen::MatrixXd& atoms) {
  if (atoms.rows() % 2 != 0) throw InvalidParameter("atom dimension must be even (stacked real/imag)");
  const Eigen::Index n = atoms.rows() / 2;
  double acc = 0.0;
  for (Eigen::Index k = 0; k < atoms.cols(); ++k)
    for (Eigen::Index block = 0; block < 2; ++block)
      for (Eigen::Index l = 1; l < n; ++l) {
        const double d = atoms(block * n + l, k) - atoms(block * n + l - 1, k);
        acc += d * d;
      }
  return acc;
}

// Gradient of 0.5 * smoothness: the blockwise second-difference operator.
Eigen::MatrixXd smoothness_gradient(const Eigen::MatrixXd& atoms) {
  const Eigen::Index n = atoms.rows() / 2;
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(atoms.rows(), atoms.cols());
  for (Eigen::Index k = 0; k < atoms.cols(); ++k)
    for (Eigen::Index block = 0; block < 2; ++block)
      for (Eigen::Index l = 1; l < n; ++l) {
        const Eigen::Index i = block * n + l;
        const double d = atoms(i, k) - atoms(i - 1, k);
        g(i, k) += d;
        g(i - 1, k) -= d;
      }
  return g;
}

}  // namespace

double regularizer(const Eigen::MatrixXd& atoms, const Classifier& clf, const TrainConfig& cfg,
                   const DataStats& stats) {
  double mean_term = 0.0;
  for (Eigen::Index k = 0; k < atoms.cols(); ++k) mean_term += (atoms.col(k) - stats.mu0).squaredNorm();
  return 0.5 * cfg.u * mean_term + 0.5 * cfg.v * clf.w.squaredNorm() + 0.5 * cfg.s * smoothness(atoms);
}

double objective(const std::vector<Bag>& bags, const Dictionary& dict, const Classifier& clf,
                 const PosteriorTable& posteriors, const CodeTable& codes, const TrainConfig& cfg,
                 const DataStats& stats) {
  if (clf.w.size() != dict.size()) throw InvalidParameter("classifier length does not match the dictionary");
  double loss = 0.0;
  for (std::size_t b = 0; b < bags.size(); ++b) {
    const double delta = delta_for(bags[b], stats, cfg.epsilon);
    for (std::size_t n = 0; n < bags[b].points.size(); ++n)
      loss += expected_point_loss(codes[b][n], clf, posteriors[b][n], delta, cfg.u);
  }
  return loss + regularizer(dict.atoms(), clf, cfg, stats);
}

double objective(const std::vector<Bag>& bags, const Dictionary& dict, const Classifier& clf,
                 const TrainConfig& cfg, const DataStats& stats) {
  const PosteriorTable post = compute_posteriors(bags, dict, cfg);
  const CodeTable codes = compute_codes(bags, dict, post, cfg);
  return objective(bags, dict, clf, post, codes, cfg, stats);
}

double efumi_objective(const std::vector<Bag>& bags, const Dictionary& dict, const CodeTable& codes,
                       const PosteriorTable& posteriors, const EfumiDiagnosticConfig& diag,
                       const DataStats& stats) {
  const Eigen::Index T = dict.target_count(), M = dict.nontarget_count();
  if (static_cast<Eigen::Index>(diag.gammas.size()) != M)
    throw InvalidParameter("need one gamma per non-target atom");
  const Eigen::MatrixXd& D = dict.atoms();

  double recon = 0.0;
  Eigen::VectorXd weight_sums = Eigen::VectorXd::Zero(M);
  for (std::size_t b = 0; b < bags.size(); ++b) {
    for (std::size_t n = 0; n < bags[b].points.size(); ++n) {
      const auto& x = bags[b].points[n];
      const auto& post = posteriors[b][n];
      const auto& c = codes[b][n];
      if (post.p0 > 0.0) {
        recon += post.p0 * (x - D.rightCols(M) * c.background.weights.tail(M)).squaredNorm();
        weight_sums += post.p0 * c.background.weights.tail(M);
      }
      if (post.p1 > 0.0) {
        recon += post.p1 * (x - D * c.target.weights).squaredNorm();
        weight_sums += post.p1 * c.target.weights.tail(M);
      }
    }
  }
  double mean_term = 0.0;
  for (Eigen::Index k = 0; k < T + M; ++k) mean_term += (D.col(k) - stats.mu0).squaredNorm();
  double sparsity = 0.0;
  for (Eigen::Index m = 0; m < M; ++m) sparsity += diag.gammas[static_cast<std::size_t>(m)] * weight_sums[m];
  return -0.5 * (1.0 - diag.u) * recon - 0.5 * diag.u * mean_term - sparsity;
}

Gradients gradients(const std::vector<Bag>& bags, const std::vector<PointRef>& batch, const Dictionary& dict,
                    const Classifier& clf, const PosteriorTable& posteriors, const CodeTable& codes,
                    const TrainConfig& cfg, const DataStats& stats, double reg_weight) {
  const Eigen::MatrixXd& D = dict.atoms();
  const Eigen::Index K = D.cols();
  if (clf.w.size() != K) throw InvalidParameter("classifier length does not match the dictionary");

  Gradients g{Eigen::MatrixXd::Zero(D.rows(), K), Eigen::VectorXd::Zero(K), 0.0};

  auto accumulate = [&](const FeatureVector& x, const SparseCode& code, double target, double weight) {
    const double e = clf.apply(code.weights) - target;
    g.w += weight * e * code.weights;
    g.psi += weight * e;
    const auto& act = code.active_set;
    if (act.empty() || e == 0.0) return;
    const auto m = static_cast<Eigen::Index>(act.size());
    Eigen::MatrixXd sub(D.rows(), m);
    Eigen::VectorXd alpha(m), grad_alpha(m);
    for (Eigen::Index j = 0; j < m; ++j) {
      sub.col(j) = D.col(act[static_cast<std::size_t>(j)]);
      alpha[j] = code.weights[act[static_cast<std::size_t>(j)]];
      grad_alpha[j] = weight * e * clf.w[act[static_cast<std::size_t>(j)]];
    }
    if (grad_alpha.isZero(0.0)) return;
    Eigen::MatrixXd gram = sub.transpose() * sub;
    gram.diagonal().array() += cfg.lambda2_stab;
    const Eigen::VectorXd beta = gram.ldlt().solve(grad_alpha);
    const Eigen::VectorXd residual = x - sub * alpha;
    const Eigen::VectorXd d_beta = sub * beta;
    for (Eigen::Index j = 0; j < m; ++j)
      g.dict.col(act[static_cast<std::size_t>(j)]) += residual * beta[j] - d_beta * alpha[j];
  };

  for (const auto& ref : batch) {
    const Bag& bag = bags[ref.bag];
    const auto& x = bag.points[ref.point];
    const auto& post = posteriors[ref.bag][ref.point];
    const auto& c = codes[ref.bag][ref.point];
    const double base = (1.0 - cfg.u) * delta_for(bag, stats, cfg.epsilon);
    if (post.p0 > 0.0) accumulate(x, c.background, 0.0, base * post.p0);
    if (post.p1 > 0.0) accumulate(x, c.target, 1.0, base * post.p1);
  }

  if (reg_weight != 0.0) {
    Eigen::MatrixXd reg = cfg.s * smoothness_gradient(D);
    for (Eigen::Index k = 0; k < K; ++k) reg.col(k) += cfg.u * (D.col(k) - stats.mu0);
    g.dict += reg_weight * reg;
    g.w += reg_weight * cfg.v * clf.w;
  }
  return g;
}

void project_unit_ball(Eigen::MatrixXd& atoms) {
  for (Eigen::Index k = 0; k < atoms.cols(); ++k) {
    const double n = atoms.col(k).norm();
    if (n > 1.0) atoms.col(k) /= n;
  }
}

Dictionary project_unit_ball(const Dictionary& dict) {
  Eigen::MatrixXd atoms = dict.atoms();
  project_unit_ball(atoms);
  return Dictionary(std::move(atoms), dict.target_count());
}

Dictionary initial_dictionary(const std::vector<Bag>& bags, const FrequencyGrid& grid, const TrainConfig& cfg) {
  const auto L = static_cast<Eigen::Index>(2 * grid.size());
  const Eigen::Index T = cfg.target_atoms, M = cfg.nontarget_atoms;
  Eigen::MatrixXd atoms(L, T + M);

  // Relaxation frequencies at the centers of T equal log-width slices of the band.
  const double lo = std::log(grid.front()), span = std::log(grid.back()) - lo;
  for (Eigen::Index t = 0; t < T; ++t) {
    const double zeta = std::exp(lo + span * (static_cast<double>(t) + 0.5) / static_cast<double>(T));
    FeatureVector a = stack_complex(dsrf_atom(grid, zeta));
    atoms.col(t) = a / a.norm();
  }

  std::vector<const FeatureVector*> pool;
  for (const auto& bag : bags)
    if (bag.label == BagLabel::kNegative)
      for (const auto& x : bag.points) pool.push_back(&x);
  if (pool.empty()) throw InvalidParameter("need at least one negative bag to seed background atoms");

  std::mt19937_64 rng(derive_seed(cfg.seed, 1));
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<std::size_t> order(pool.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);
  for (Eigen::Index m = 0; m < M; ++m) {
    FeatureVector a = *pool[order[static_cast<std::size_t>(m) % order.size()]];
    if (a.size() != L) throw InvalidParameter("point dimension does not match the frequency grid");
    const double scale = 0.01 * a.norm() / std::sqrt(static_cast<double>(L));
    for (Eigen::Index i = 0; i < L; ++i) a[i] += scale * normal(rng);
    double n = a.norm();
    if (n == 0.0) {
      for (Eigen::Index i = 0; i < L; ++i) a[i] = normal(rng);
      n = a.norm();
    }
    atoms.col(T + m) = a / n;
  }
  return Dictionary(std::move(atoms), T);
}

Model train(const std::vector<Bag>& bags, const TrainConfig& cfg, const FrequencyGrid& grid) {
  cfg.validate();
  std::size_t positives = 0, negatives = 0;
  for (const auto& bag : bags) {
    if (bag.points.empty()) throw InvalidParameter("bag '" + bag.bag_id + "' has no points");
    (bag.label == BagLabel::kPositive ? positives : negatives)++;
  }
  if (positives == 0) throw InvalidParameter("training needs at least one positive bag");
  if (negatives == 0) throw InvalidParameter("training needs at least one negative bag");

  Model model;
  model.grid = grid;
  model.config = cfg;
  model.stats = compute_stats(bags);
  Dictionary dict = initial_dictionary(bags, grid, cfg);
  check_bags(bags, dict.dim());
  Classifier clf{Eigen::VectorXd::Zero(dict.size()), 0.0};

  std::vector<PointRef> refs;
  for (std::size_t b = 0; b < bags.size(); ++b)
    for (std::size_t n = 0; n < bags[b].points.size(); ++n) refs.push_back({b, n});
  const auto total = static_cast<double>(refs.size());
  const std::size_t batch = static_cast<std::size_t>(cfg.batch_size);
  const std::size_t batches = (refs.size() + batch - 1) / batch;
  const double t0 = cfg.t0 > 0.0 ? cfg.t0 : static_cast<double>(batches);

  std::mt19937_64 rng(derive_seed(cfg.seed, 2));
  CodeTable codes(bags.size());
  for (std::size_t b = 0; b < bags.size(); ++b) codes[b].resize(bags[b].points.size());

  Eigen::MatrixXd atoms = dict.atoms();
  long step = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const PosteriorTable post = compute_posteriors(bags, dict, cfg);
    std::shuffle(refs.begin(), refs.end(), rng);
    const Eigen::MatrixXd atoms_before = atoms;
    const Classifier clf_before = clf;

    for (std::size_t start = 0; start < refs.size(); start += batch) {
      const std::vector<PointRef> mb(refs.begin() + static_cast<std::ptrdiff_t>(start),
                                     refs.begin() + static_cast<std::ptrdiff_t>(std::min(start + batch, refs.size())));
      const LatentCoder coder(dict, cfg);
      for (const auto& r : mb) {
        const auto& x = bags[r.bag].points[r.point];
        auto& c = codes[r.bag][r.point];
        const auto& p = post[r.bag][r.point];
        if (p.p0 > 0.0) c.background = coder.background(x);
        if (p.p1 > 0.0) c.target = coder.target(x);
      }
      const double n_mb = static_cast<double>(mb.size());
      const Gradients g = gradients(bags, mb, dict, clf, post, codes, cfg, model.stats, n_mb / total);
      const double rho = cfg.rho0 / (1.0 + static_cast<double>(step) / t0);
      atoms -= (rho / n_mb) * g.dict;
      clf.w -= (rho / n_mb) * g.w;
      clf.psi -= (rho / n_mb) * g.psi;
      project_unit_ball(atoms);
      if (!atoms.allFinite() || !clf.w.allFinite() || !std::isfinite(clf.psi))
        throw TrainingDiverged("non-finite parameters at epoch " + std::to_string(epoch));
      dict = Dictionary(atoms, cfg.target_atoms);
      ++step;
    }

    const CodeTable all_codes = compute_codes(bags, dict, post, cfg);
    const double f = objective(bags, dict, clf, post, all_codes, cfg, model.stats);
    if (!std::isfinite(f)) throw TrainingDiverged("objective is not finite at epoch " + std::to_string(epoch));
    model.objective_log.push_back(f);

    const double change = std::max({(atoms - atoms_before).cwiseAbs().maxCoeff(),
                                    (clf.w - clf_before.w).cwiseAbs().maxCoeff(),
                                    std::abs(clf.psi - clf_before.psi)});
    if (change < cfg.tolerance) break;
  }

  model.dictionary = std::move(dict);
  model.classifier = std::move(clf);
  return model;
}

double classify(const FeatureVector& x, const Model& model) {
  if (x.size() != model.dictionary.dim()) throw InvalidParameter("point dimension does not match the model");
  const SparseCode a = lasso(x, model.dictionary.atoms(), model.config.solver());
  return model.classifier.apply(a.weights);
}

double classify_alarm(const std::vector<FeatureVector>& points, const Model& model, Pooling pooling) {
  if (points.empty()) throw InvalidParameter("cannot classify an empty alarm");
  const LassoSolver solver(model.dictionary.atoms(), model.config.solver());
  double best = -std::numeric_limits<double>::infinity(), sum = 0.0;
  for (const auto& x : points) {
    if (x.size() != model.dictionary.dim()) throw InvalidParameter("point dimension does not match the model");
    const double y = model.classifier.apply(solver.solve(x).weights);
    best = std::max(best, y);
    sum += y;
  }
  return pooling == Pooling::kMax ? best : sum / static_cast<double>(points.size());
}

}  // namespace tdefumi
