#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tdefumi/alarms.hpp"
#include "tdefumi/evaluation.hpp"
#include "tdefumi/scene.hpp"
#include "tdefumi/td_efumi.hpp"

namespace tdefumi {

struct AlarmConfig {
  int offset = 5;
  double threshold_fraction = 0.15;   // used when tau is unset
  std::optional<double> tau;          // absolute confidence threshold
  double bandwidth_m = 0.25;
  double radius_m = 0.25;
  double halo_m = 0.25;
  int zeta_count = 30;                // prescreen dictionary size
  SolverConfig jomp;                  // max_atoms = 1 by default

  void validate() const;
};

struct LaneAlarms {
  ConfidenceMap map;
  double tau = 0.0;
  std::vector<double> centroids;
  std::vector<Alarm> alarms;  // labeled against ground truth
  Lane centered;              // lane after mean subtraction
};

Dictionary prescreen_dictionary(const FrequencyGrid& grid, int zeta_count);

LaneAlarms generate_alarms(const Lane& lane, const std::vector<GroundTruthObject>& gt, const AlarmConfig& cfg);

// One bag per labeled alarm: positive for target alarms, negative for false alarms.
std::vector<Bag> to_bags(const std::vector<Alarm>& alarms);

struct CrossValidation {
  std::vector<ScoredAlarm> scored;     // every alarm, scored by the model that did not see its lane
  std::vector<std::size_t> fold_of;    // fold index of each scored alarm
  std::vector<Model> models;           // one per fold
};

// Lane-based cross-validation. Fold f trains with seed derive_seed(cfg.seed, f).
CrossValidation cross_validate(const std::vector<Alarm>& alarms, const TrainConfig& cfg, const FrequencyGrid& grid,
                               Pooling pooling = Pooling::kMax);

}  // namespace tdefumi
