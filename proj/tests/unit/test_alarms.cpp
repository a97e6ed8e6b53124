#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>

#include "tdefumi/alarms.hpp"
#include "tdefumi/errors.hpp"
#include "tdefumi/pipeline.hpp"

using namespace tdefumi;

namespace {

Lane flat_lane(std::size_t n, double value, double spacing = 0.05) {
  Lane lane;
  lane.lane_id = "L";
  lane.grid = FrequencyGrid::default_grid();
  for (std::size_t i = 0; i < n; ++i)
    lane.samples.push_back({static_cast<double>(i) * spacing,
                            ComplexSpectrum::Constant(static_cast<Eigen::Index>(lane.grid.size()), value)});
  return lane;
}

ConfidenceMap map_of(std::vector<double> pos, std::vector<double> conf) {
  return ConfidenceMap{"L", std::move(pos), std::move(conf)};
}

}  // namespace

TEST_CASE("prescreen boundaries and the zero lane") {
  const Lane lane = flat_lane(40, 0.0);
  const auto dict = prescreen_dictionary(lane.grid, 30);
  SolverConfig cfg;
  const auto map = prescreen(lane, dict, 5, cfg);
  REQUIRE(map.size() == 40);
  for (std::size_t i = 0; i < 40; ++i) {
    if (i < 5 || i >= 35)
      CHECK(map.confidences[i] == 0.0);
    else
      CHECK(map.confidences[i] == cfg.confidence_cap);
  }
  CHECK_THROWS_AS(prescreen(flat_lane(10, 0.0), dict, 5, cfg), InvalidParameter);
}

TEST_CASE("a buried target raises the prescreener confidence") {
  SceneConfig s;
  s.lane_length_m = 20.0;
  s.noise_sigma = 0.05;
  s.drift_amplitude = 0.0;
  s.lanes.push_back({"noise", {}, {}});
  s.lanes.push_back({"target", {{ObjectType::kHMT, 10.0, {0.0, {1.5}, {5e3}}, 0.15}}, {}});
  const auto scene = simulate_scene(s);
  const auto dict = prescreen_dictionary(s.grid, 30);
  auto peak = [&](const Lane& l) {
    const auto m = prescreen(l, dict, 5, SolverConfig{});
    return *std::max_element(m.confidences.begin(), m.confidences.end());
  };
  CHECK(peak(scene.lanes[1]) > peak(scene.lanes[0]));
}

TEST_CASE("thresholding") {
  const auto m = map_of({0, 1, 2, 3, 4, 5}, {0.0, 3.0, 1.0, 4.0, 2.0, 0.0});
  CHECK(threshold_confidences(m, 0.0) == std::vector<double>{1, 2, 3, 4});
  CHECK(threshold_confidences(m, 10.0).empty());
  CHECK(threshold_confidences(m, 2.5) == std::vector<double>{1, 3});  // median of non-boundary values
  CHECK(top_fraction_threshold(m, 0.5) == 3.0);
  CHECK(top_fraction_threshold(m, 1.0) == 1.0);
  CHECK_THROWS_AS(top_fraction_threshold(m, 0.0), InvalidParameter);
}

TEST_CASE("mean shift modes") {
  const auto one = mean_shift({1.0, 1.1, 1.2}, 0.25);
  REQUIRE(one.size() == 1);
  CHECK(one[0] == Catch::Approx(1.1).epsilon(1e-12));
  const auto two = mean_shift({1.0, 1.1, 1.2, 5.0, 5.1}, 0.25);
  REQUIRE(two.size() == 2);
  CHECK(two[0] == Catch::Approx(1.1));
  CHECK(two[1] == Catch::Approx(5.05));
  CHECK_THROWS_AS(mean_shift({}, 0.25), InvalidParameter);
  CHECK_THROWS_AS(mean_shift({1.0}, 0.0), InvalidParameter);
}

TEST_CASE("mean shift covers every input and ignores order") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n(0.0, 0.08);
  std::vector<double> pts;
  for (double c : {2.0, 4.5, 4.9, 9.0, 13.0})
    for (int i = 0; i < 12; ++i) pts.push_back(c + n(rng));
  const auto modes = mean_shift(pts, 0.25);
  for (double p : pts) {
    double d = 1e9;
    for (double m : modes) d = std::min(d, std::abs(m - p));
    CHECK(d <= 0.25);
  }
  std::shuffle(pts.begin(), pts.end(), rng);
  CHECK(mean_shift(pts, 0.25) == modes);
}

TEST_CASE("lane mean subtraction") {
  const Lane c = lane_mean_subtract(flat_lane(10, 3.0));
  for (const auto& s : c.samples) CHECK(s.spectrum.isZero(1e-15));

  SceneConfig sc = table1_scene(2);
  const auto lane = simulate_lane(sc, 0).first;
  const Lane once = lane_mean_subtract(lane), twice = lane_mean_subtract(once);
  ComplexSpectrum mean = ComplexSpectrum::Zero(static_cast<Eigen::Index>(lane.grid.size()));
  for (const auto& s : once.samples) mean += s.spectrum;
  CHECK(mean.cwiseAbs().maxCoeff() / static_cast<double>(once.size()) < 1e-12);
  for (std::size_t i = 0; i < lane.size(); ++i) CHECK((once.samples[i].spectrum - twice.samples[i].spectrum).cwiseAbs().maxCoeff() < 1e-12);
  for (std::size_t i : {0u, 10u, 500u}) {
    const auto d0 = (lane.samples[i + 1].spectrum - lane.samples[i].spectrum).eval();
    const auto d1 = (once.samples[i + 1].spectrum - once.samples[i].spectrum).eval();
    CHECK((d0 - d1).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("alarm extraction") {
  const Lane lane = flat_lane(100, 1.0);
  ConfidenceMap m{"L", {}, {}};
  for (std::size_t i = 0; i < lane.size(); ++i) {
    m.positions.push_back(lane.samples[i].position_m);
    m.confidences.push_back(static_cast<double>(i));
  }
  const auto one = extract_alarms(lane, {1.0}, 0.01, m);
  REQUIRE(one.size() == 1);
  CHECK(one[0].points.size() == 1);
  CHECK(one[0].rows == std::vector<std::size_t>{20});

  const auto alarms = extract_alarms(lane, {1.0, 2.0}, 0.25, m);
  REQUIRE(alarms.size() == 2);
  for (const auto& a : alarms) {
    CHECK(a.points.size() == 11);
    for (auto r : a.rows) CHECK(std::abs(lane.samples[r].position_m - a.position_m) <= 0.25 + 1e-9);
  }
  CHECK(alarms[0].rows.back() < alarms[1].rows.front());
  CHECK(alarms[0].prescreener_confidence == 25.0);

  std::vector<double> skipped;
  CHECK(extract_alarms(lane, {100.0}, 0.25, m, &skipped).empty());
  CHECK(skipped == std::vector<double>{100.0});
}

TEST_CASE("alarm labeling") {
  std::vector<Alarm> alarms(4);
  for (auto& a : alarms) a.lane_id = "1";
  alarms[0].position_m = 5.0;
  alarms[1].position_m = 20.0;
  alarms[2].position_m = 30.1;
  alarms[3].position_m = 40.0;
  const std::vector<GroundTruthObject> gt{{"1", 5.0, ObjectType::kHMT}, {"1", 30.0, ObjectType::kLMT},
                                          {"1", 30.3, ObjectType::kNMT}, {"1", 40.0, ObjectType::kCL},
                                          {"2", 20.0, ObjectType::kHMT}};
  const auto l = label_alarms(alarms, gt, 0.25);
  CHECK(l[0].label == AlarmLabel::kTarget);
  CHECK(l[0].matched_type == ObjectType::kHMT);
  CHECK(l[1].label == AlarmLabel::kFalseAlarm);
  CHECK(l[2].label == AlarmLabel::kTarget);
  CHECK(l[2].matched_type == ObjectType::kLMT);
  CHECK(l[3].label == AlarmLabel::kFalseAlarm);

  auto reversed = alarms;
  std::reverse(reversed.begin(), reversed.end());
  auto gt_rev = gt;
  std::reverse(gt_rev.begin(), gt_rev.end());
  const auto r = label_alarms(reversed, gt_rev, 0.25);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(r[3 - i].label == l[i].label);
    CHECK(r[3 - i].matched_position_m == l[i].matched_position_m);
  }
}

TEST_CASE("alarm pipeline on a simulated lane") {
  const auto scene = table1_scene(1);
  const auto [lane, gt] = simulate_lane(scene, 0);
  AlarmConfig cfg;
  const auto out = generate_alarms(lane, gt, cfg);
  CHECK_FALSE(out.alarms.empty());
  for (const auto& a : out.alarms) {
    CHECK(a.label != AlarmLabel::kUnlabeled);
    for (auto r : a.rows) CHECK(std::abs(lane.samples[r].position_m - a.position_m) <= cfg.radius_m + 1e-9);
    CHECK(a.points.size() == a.rows.size());
  }
  cfg.offset = 0;
  CHECK_THROWS_AS(generate_alarms(lane, gt, cfg), InvalidParameter);
}

TEST_CASE("default scene alarm population is on the reference scale") {
  // Reference tables: 218 alarms, 109 of them false.
  const auto scene = table1_scene(1);
  const auto sim = simulate_scene(scene);
  std::size_t total = 0, false_alarms = 0;
  for (const auto& lane : sim.lanes) {
    const auto out = generate_alarms(lane, sim.ground_truth, AlarmConfig{});
    total += out.alarms.size();
    for (const auto& a : out.alarms) false_alarms += a.label == AlarmLabel::kFalseAlarm;
  }
  CHECK(std::abs(static_cast<double>(total) - 218.0) <= 0.3 * 218.0);
  CHECK(std::abs(static_cast<double>(false_alarms) - 109.0) <= 0.3 * 109.0);
}
