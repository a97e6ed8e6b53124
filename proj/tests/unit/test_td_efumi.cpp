#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "instances.hpp"
#include "oracles.hpp"
#include "tdefumi/errors.hpp"
#include "tdefumi/td_efumi.hpp"

using namespace tdefumi;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// Stand-alone objective: posterior-weighted squared errors over z in {0, 1}
// plus the atom-to-mean, classifier ridge and blockwise smoothness terms.
double reference_objective(const inst::SmallProblem& p, const CodeTable& codes) {
  const auto& D = p.dict.atoms();
  double total = 0.0;
  for (std::size_t b = 0; b < p.bags.size(); ++b) {
    const bool positive = p.bags[b].label == BagLabel::kPositive;
    const double delta = positive ? p.cfg.epsilon * double(p.stats.n_background) / double(p.stats.n_target) : 1.0;
    for (std::size_t n = 0; n < p.bags[b].points.size(); ++n) {
      const auto& q = p.post[b][n];
      double e0 = 0.0, e1 = 0.0;
      if (q.p0 > 0) e0 = p.clf.w.dot(codes[b][n].background.weights) + p.clf.psi;
      if (q.p1 > 0) e1 = 1.0 - p.clf.w.dot(codes[b][n].target.weights) - p.clf.psi;
      total += 0.5 * (1 - p.cfg.u) * delta * (q.p0 * e0 * e0 + q.p1 * e1 * e1);
    }
  }
  const int half = static_cast<int>(D.rows()) / 2;
  for (int k = 0; k < D.cols(); ++k) {
    total += 0.5 * p.cfg.u * (D.col(k) - p.stats.mu0).squaredNorm();
    for (int blk = 0; blk < 2; ++blk)
      for (int l = 1; l < half; ++l) total += 0.5 * p.cfg.s * std::pow(D(blk * half + l, k) - D(blk * half + l - 1, k), 2);
  }
  return total + 0.5 * p.cfg.v * p.clf.w.squaredNorm();
}

}  // namespace

TEST_CASE("posterior for a perfectly reconstructed positive point") {
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(4, 3);
  const Dictionary d(a, 1);
  TrainConfig cfg;
  cfg.lambda = 1e-12;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(4);
  x[1] = 2.0;
  const auto q = latent_posterior(x, d, cfg, BagLabel::kPositive);
  CHECK_THAT(q.p0, WithinAbs(1.0, 1e-10));
  CHECK_THAT(q.p1, WithinAbs(0.0, 1e-10));
  const auto zero = latent_posterior(Eigen::VectorXd::Zero(4), d, cfg, BagLabel::kPositive);
  CHECK(zero.p0 == 1.0);
  CHECK(zero.p1 == 0.0);
}

TEST_CASE("negative-bag points are background with certainty") {
  std::mt19937_64 rng(1);
  const Dictionary d(oracle::random_atoms(rng, 6, 4, 1.0), 1);
  TrainConfig cfg;
  for (int i = 0; i < 10; ++i) {
    const auto q = latent_posterior(oracle::random_vector(rng, 6, 5.0), d, cfg, BagLabel::kNegative);
    CHECK(q.p0 == 1.0);
    CHECK(q.p1 == 0.0);
  }
}

TEST_CASE("posterior is one half at beta = ln 2 / r^2") {
  std::mt19937_64 rng(2);
  const Dictionary d(oracle::random_atoms(rng, 6, 4, 1.0), 2);
  TrainConfig cfg;
  for (int i = 0; i < 10; ++i) {
    const Eigen::VectorXd x = oracle::random_vector(rng, 6);
    const double r = sparse_code_latent(x, d, Hypothesis::kBackground, cfg.solver()).residual_norm;
    cfg.beta = std::log(2.0) / (r * r);
    const auto q = latent_posterior(x, d, cfg, BagLabel::kPositive);
    CHECK_THAT(q.p0, WithinAbs(0.5, 1e-12));
    CHECK_THAT(q.p1, WithinAbs(0.5, 1e-12));
  }
}

TEST_CASE("delta weighting") {
  DataStats st;
  st.n_background = 50;
  st.n_target = 25;
  CHECK(delta_n(true, st, 1.0) == 2.0);
  CHECK(delta_n(false, st, 1.0) == 1.0);
  st.n_background = st.n_target;
  CHECK(delta_n(true, st, 0.5) == 0.5);
  st.n_target = 0;
  CHECK_THROWS_AS(delta_n(true, st, 1.0), InvalidParameter);
}

TEST_CASE("expected point loss") {
  LatentCodes codes;
  codes.background = SparseCode::from_weights(Eigen::VectorXd::Zero(3));
  codes.target = SparseCode::from_weights(Eigen::VectorXd::Zero(3));
  Classifier clf{Eigen::VectorXd::Zero(3), 0.0};
  CHECK_THAT(expected_point_loss(codes, clf, {0.0, 1.0}, 2.0, 0.1), WithinAbs(0.9 * 2.0 / 2.0, 1e-15));
  CHECK(expected_point_loss(codes, clf, {1.0, 0.0}, 2.0, 0.1) == 0.0);

  std::mt19937_64 rng(3);
  for (int i = 0; i < 20; ++i) {
    const Dictionary d(oracle::random_atoms(rng, 8, 5, 0.9), 2);
    TrainConfig cfg;
    cfg.lambda = 0.05;
    const Eigen::VectorXd x = oracle::random_vector(rng, 8);
    clf = {oracle::random_vector(rng, 5), 0.2};
    const double p0 = std::uniform_real_distribution<double>(0, 1)(rng);
    const double delta = 1.7;
    const auto a0 = sparse_code_latent(x, d, Hypothesis::kBackground, cfg.solver());
    const auto a1 = sparse_code_latent(x, d, Hypothesis::kTarget, cfg.solver());
    const double hard0 = 0.5 * (1 - cfg.u) * delta * std::pow(clf.apply(a0.weights), 2);
    const double hard1 = 0.5 * (1 - cfg.u) * delta * std::pow(1 - clf.apply(a1.weights), 2);
    CHECK_THAT(expected_point_loss(x, d, clf, {p0, 1 - p0}, delta, cfg),
               WithinAbs(p0 * hard0 + (1 - p0) * hard1, 1e-12));
  }
}

TEST_CASE("objective matches a stand-alone evaluator") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto p = inst::small_problem(seed);
    CHECK_THAT(objective(p.bags, p.dict, p.clf, p.post, p.codes, p.cfg, p.stats),
               WithinRel(reference_objective(p, p.codes), 1e-12));
  }
}

TEST_CASE("objective without regularizers is the summed point loss") {
  auto p = inst::small_problem(4);
  p.cfg.u = p.cfg.v = p.cfg.s = 0.0;
  double sum = 0.0;
  for (std::size_t b = 0; b < p.bags.size(); ++b)
    for (std::size_t n = 0; n < p.bags[b].points.size(); ++n)
      sum += expected_point_loss(p.codes[b][n], p.clf, p.post[b][n],
                                 delta_n(p.bags[b].label == BagLabel::kPositive, p.stats, p.cfg.epsilon), 0.0);
  CHECK_THAT(objective(p.bags, p.dict, p.clf, p.post, p.codes, p.cfg, p.stats), WithinRel(sum, 1e-14));
}

TEST_CASE("objective vanishes on a trivial instance") {
  // Zero data, atoms equal to the data mean (zero), flat atoms, w = 0.
  std::vector<Bag> bags{{"a", BagLabel::kNegative, {Eigen::VectorXd::Zero(4)}, "1", 0.0}};
  const Dictionary d(Eigen::MatrixXd::Zero(4, 2), 1);
  TrainConfig cfg;
  const auto st = compute_stats(bags);
  CHECK(objective(bags, d, Classifier{Eigen::VectorXd::Zero(2), 0.0}, cfg, st) == 0.0);
}

TEST_CASE("multiple-instance reconstruction objective") {
  std::vector<Bag> bags{{"a", BagLabel::kNegative, {Eigen::VectorXd::Zero(4)}, "1", 0.0}};
  const auto st = compute_stats(bags);
  const Dictionary d(Eigen::MatrixXd::Zero(4, 3), 1);
  PosteriorTable post{{LatentPosterior{}}};
  CodeTable codes{{LatentCodes{SparseCode::from_weights(Eigen::VectorXd::Zero(3)), {}}}};
  EfumiDiagnosticConfig diag{{0.0, 0.0}, 0.05, 5.0};
  CHECK(efumi_objective(bags, d, codes, post, diag, st) == 0.0);

  // Only the sparsity term survives: weights summing to c give -c.
  codes[0][0].background = SparseCode::from_weights((Eigen::VectorXd(3) << 0.0, 0.75, 0.5).finished());
  diag = {{1.0, 1.0}, 0.0, 5.0};
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(4, 3);
  const Dictionary d2(a, 1);
  CHECK_THAT(efumi_objective(bags, d2, codes, post, diag, st), WithinAbs(-1.25, 1e-15));
}

TEST_CASE("multiple-instance objective matches a stand-alone evaluator") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto p = inst::small_problem(seed);
    EfumiDiagnosticConfig diag{{0.1, 0.2, 0.3, 0.4}, 0.05, 5.0};
    const auto& D = p.dict.atoms();
    double ref = 0.0;
    for (std::size_t b = 0; b < p.bags.size(); ++b)
      for (std::size_t n = 0; n < p.bags[b].points.size(); ++n) {
        const auto& x = p.bags[b].points[n];
        const auto& q = p.post[b][n];
        const auto& c = p.codes[b][n];
        if (q.p0 > 0) {
          ref -= 0.5 * (1 - diag.u) * q.p0 * (x - D * c.background.weights).squaredNorm();
          for (int m = 0; m < 4; ++m) ref -= diag.gammas[m] * q.p0 * c.background.weights[2 + m];
        }
        if (q.p1 > 0) {
          ref -= 0.5 * (1 - diag.u) * q.p1 * (x - D * c.target.weights).squaredNorm();
          for (int m = 0; m < 4; ++m) ref -= diag.gammas[m] * q.p1 * c.target.weights[2 + m];
        }
      }
    for (int k = 0; k < D.cols(); ++k) ref -= 0.5 * diag.u * (D.col(k) - p.stats.mu0).squaredNorm();
    CHECK_THAT(efumi_objective(p.bags, p.dict, p.codes, p.post, diag, p.stats), WithinRel(ref, 1e-12));
  }
}

TEST_CASE("gradient special cases") {
  auto p = inst::small_problem(5);
  // Every point background with certainty and a zero classifier: no loss gradient.
  for (auto& row : p.post)
    for (auto& q : row) q = {1.0, 0.0};
  p.clf.w.setZero();
  p.clf.psi = 0.0;
  p.codes = compute_codes(p.bags, p.dict, p.post, p.cfg);
  auto g = gradients(p.bags, inst::all_points(p.bags), p.dict, p.clf, p.post, p.codes, p.cfg, p.stats);
  CHECK(g.w.isZero(0.0));
  CHECK(g.psi == 0.0);

  // No data in the batch leaves only the ridge.
  p = inst::small_problem(6);
  g = gradients(p.bags, {}, p.dict, p.clf, p.post, p.codes, p.cfg, p.stats);
  CHECK((g.w - p.cfg.v * p.clf.w).cwiseAbs().maxCoeff() == 0.0);
  CHECK(g.psi == 0.0);
}

TEST_CASE("gradients match central finite differences") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto c = inst::check_gradients(inst::small_problem(seed));
    CHECK(c.dict <= 1e-5);
    CHECK(c.w <= 1e-5);
    CHECK(c.psi <= 1e-5);
  }
}

TEST_CASE("small full-batch steps do not increase the objective") {
  for (std::uint64_t seed = 101; seed <= 110; ++seed) {
    const auto trace = inst::descent_trace(inst::small_problem(seed), 10, 1e-4);
    for (std::size_t i = 1; i < trace.size(); ++i) CHECK(trace[i] <= trace[i - 1]);
  }
}

TEST_CASE("unit-ball projection") {
  Eigen::MatrixXd a(2, 3);
  a << 2, 0.3, 0, 0, 0.4, 0;
  project_unit_ball(a);
  CHECK_THAT(a(0, 0), WithinAbs(1.0, 1e-15));
  CHECK(a(0, 1) == 0.3);
  CHECK(a(1, 1) == 0.4);
  CHECK(a.col(2).isZero(0.0));
  Eigen::MatrixXd b = a;
  project_unit_ball(b);
  CHECK(a == b);
}

TEST_CASE("training on separable bags") {
  const auto grid = FrequencyGrid::default_grid();
  const auto bags = inst::separable_bags(7, grid);
  TrainConfig cfg;
  const Model m = train(bags, cfg, grid);
  CHECK(inst::bag_accuracy(bags, m) == 1.0);
  for (Eigen::Index k = 0; k < m.dictionary.size(); ++k) CHECK(m.dictionary.atom(k).norm() <= 1.0 + 1e-9);
  CHECK(m.objective_log.size() <= 100);

  const Model again = train(bags, cfg, grid);
  CHECK(again.dictionary.atoms() == m.dictionary.atoms());
  CHECK(again.classifier.w == m.classifier.w);
  CHECK(again.classifier.psi == m.classifier.psi);
  CHECK(again.objective_log == m.objective_log);

  // A clean target signature scores above every background point.
  const FeatureVector t = stack_complex(dsrf_atom(grid, 5e3));
  double worst_bg = -1e300;
  for (const auto& bag : bags)
    if (bag.label == BagLabel::kNegative)
      for (const auto& x : bag.points) worst_bg = std::max(worst_bg, classify(x, m));
  CHECK(classify(0.8 * t / t.norm(), m) > worst_bg);
}

TEST_CASE("zero epochs returns the initialization") {
  const auto grid = FrequencyGrid::default_grid();
  const auto bags = inst::separable_bags(8, grid);
  TrainConfig cfg;
  cfg.epochs = 0;
  const Model m = train(bags, cfg, grid);
  CHECK(m.dictionary.atoms() == initial_dictionary(bags, grid, cfg).atoms());
  CHECK(m.classifier.w.isZero(0.0));
  CHECK(m.classifier.psi == 0.0);
  CHECK(m.objective_log.empty());
}

TEST_CASE("posteriors stay normalized and negative bags stay background during training") {
  const auto grid = FrequencyGrid::default_grid();
  const auto bags = inst::separable_bags(9, grid);
  TrainConfig cfg;
  cfg.epochs = 5;
  const Model m = train(bags, cfg, grid);
  const auto post = compute_posteriors(bags, m.dictionary, cfg);
  for (std::size_t b = 0; b < bags.size(); ++b)
    for (const auto& q : post[b]) {
      CHECK_THAT(q.p0 + q.p1, WithinAbs(1.0, 1e-15));
      if (bags[b].label == BagLabel::kNegative) CHECK(q.p1 == 0.0);
    }
}

TEST_CASE("classification basics") {
  const auto grid = FrequencyGrid::default_grid();
  Model m;
  m.grid = grid;
  std::mt19937_64 rng(10);
  m.dictionary = Dictionary(oracle::random_atoms(rng, 42, 6, 1.0), 2);
  m.classifier = {Eigen::VectorXd::Zero(6), 0.37};
  const Eigen::VectorXd x = oracle::random_vector(rng, 42);
  CHECK(classify(x, m) == 0.37);
  m.classifier.w = oracle::random_vector(rng, 6);
  m.config.lambda = 1e6;
  CHECK(classify(x, m) == 0.37);
  m.config.lambda = 0.05;

  CHECK(classify_alarm({x}, m) == classify(x, m));
  CHECK(classify_alarm({x, x, x}, m, Pooling::kMean) == classify(x, m));

  // Permuting the atoms together with w leaves the score unchanged.
  Model p = m;
  std::vector<int> perm{1, 0, 5, 4, 3, 2};
  Eigen::MatrixXd atoms(42, 6);
  for (int j = 0; j < 6; ++j) {
    atoms.col(j) = m.dictionary.atom(perm[j]);
    p.classifier.w[j] = m.classifier.w[perm[j]];
  }
  p.dictionary = Dictionary(atoms, 2);
  for (int i = 0; i < 5; ++i) {
    const Eigen::VectorXd y = oracle::random_vector(rng, 42);
    CHECK_THAT(classify(y, p), WithinAbs(classify(y, m), 1e-8));
  }
  CHECK_THROWS_AS(classify_alarm({}, m), InvalidParameter);
}

TEST_CASE("alarm pooling") {
  // Two orthogonal points scoring 0 and 1.
  Model m;
  m.dictionary = Dictionary(Eigen::MatrixXd::Identity(4, 2), 1);
  m.classifier = {(Eigen::VectorXd(2) << 1.0, 0.0).finished(), 0.0};
  m.config.lambda = 1e-9;
  Eigen::VectorXd a = Eigen::VectorXd::Zero(4), b = Eigen::VectorXd::Zero(4);
  a[0] = 1.0 + 1e-9;
  b[1] = 1.0;
  CHECK_THAT(classify_alarm({a, b}, m, Pooling::kMax), WithinAbs(1.0, 1e-12));
  CHECK_THAT(classify_alarm({a, b}, m, Pooling::kMean), WithinAbs(0.5, 1e-12));
}

TEST_CASE("training input validation") {
  const auto grid = FrequencyGrid::default_grid();
  auto bags = inst::separable_bags(1, grid);
  TrainConfig cfg;
  cfg.lambda = 0.0;
  CHECK_THROWS_AS(train(bags, cfg, grid), InvalidParameter);
  std::vector<Bag> only_negative;
  for (const auto& b : bags)
    if (b.label == BagLabel::kNegative) only_negative.push_back(b);
  CHECK_THROWS_AS(train(only_negative, TrainConfig{}, grid), InvalidParameter);
}
