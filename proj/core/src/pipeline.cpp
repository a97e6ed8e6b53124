#include "tdefumi/pipeline.hpp"

#include <cmath>

#include "tdefumi/errors.hpp"

namespace tdefumi {

void AlarmConfig::validate() const {
  if (offset < 1) throw InvalidParameter("offset must be >= 1");
  if (!tau && !(threshold_fraction > 0.0 && threshold_fraction <= 1.0))
    throw InvalidParameter("threshold_fraction must be in (0, 1]");
  if (tau && !std::isfinite(*tau)) throw InvalidParameter("tau must be finite");
  if (!(bandwidth_m > 0.0)) throw InvalidParameter("bandwidth must be > 0");
  if (!(radius_m > 0.0)) throw InvalidParameter("radius must be > 0");
  if (!(halo_m > 0.0)) throw InvalidParameter("halo must be > 0");
  if (zeta_count < 1) throw InvalidParameter("zeta_count must be >= 1");
  jomp.validate();
}

Dictionary prescreen_dictionary(const FrequencyGrid& grid, int zeta_count) {
  return build_dsrf_dictionary(grid, log_spaced_zetas(grid, zeta_count));
}

LaneAlarms generate_alarms(const Lane& lane, const std::vector<GroundTruthObject>& gt, const AlarmConfig& cfg) {
  cfg.validate();
  LaneAlarms out;
  const Dictionary dict = prescreen_dictionary(lane.grid, cfg.zeta_count);
  out.map = prescreen(lane, dict, cfg.offset, cfg.jomp);
  out.tau = cfg.tau ? *cfg.tau : top_fraction_threshold(out.map, cfg.threshold_fraction);
  out.centroids = mean_shift(threshold_confidences(out.map, out.tau), cfg.bandwidth_m);
  out.centered = lane_mean_subtract(lane);
  out.alarms = label_alarms(extract_alarms(out.centered, out.centroids, cfg.radius_m, out.map), gt, cfg.halo_m);
  return out;
}

std::vector<Bag> to_bags(const std::vector<Alarm>& alarms) {
  std::vector<Bag> bags;
  for (std::size_t i = 0; i < alarms.size(); ++i) {
    const Alarm& a = alarms[i];
    if (a.label == AlarmLabel::kUnlabeled) continue;
    Bag b;
    b.bag_id = a.lane_id + ":" + std::to_string(i);
    b.label = a.label == AlarmLabel::kTarget ? BagLabel::kPositive : BagLabel::kNegative;
    b.points = a.points;
    b.lane_id = a.lane_id;
    b.position_m = a.position_m;
    bags.push_back(std::move(b));
  }
  return bags;
}

CrossValidation cross_validate(const std::vector<Alarm>& alarms, const TrainConfig& cfg, const FrequencyGrid& grid,
                               Pooling pooling) {
  std::vector<std::string> lane_ids;
  for (const auto& a : alarms) lane_ids.push_back(a.lane_id);
  const auto folds = make_folds(lane_ids);

  CrossValidation cv;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    std::vector<Alarm> train_alarms;
    for (const auto& a : alarms)
      if (a.lane_id != folds[f].test_lane_id) train_alarms.push_back(a);
    TrainConfig fold_cfg = cfg;
    fold_cfg.seed = derive_seed(cfg.seed, f);
    Model model = train(to_bags(train_alarms), fold_cfg, grid);
    for (const auto& a : alarms) {
      if (a.lane_id != folds[f].test_lane_id) continue;
      cv.scored.push_back({a, classify_alarm(a.points, model, pooling)});
      cv.fold_of.push_back(f);
    }
    cv.models.push_back(std::move(model));
  }
  return cv;
}

}  // namespace tdefumi
