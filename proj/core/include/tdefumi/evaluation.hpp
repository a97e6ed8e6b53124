#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tdefumi/alarms.hpp"
#include "tdefumi/scene.hpp"

namespace tdefumi {

struct Fold {
  std::string test_lane_id;
  std::vector<std::string> train_lane_ids;
};

// One fold per distinct lane id (first-appearance order); each trains on every
// other lane. Throws InvalidParameter with fewer than two lanes.
std::vector<Fold> make_folds(const std::vector<std::string>& lane_ids);

// Indices of alarms kept after removing non-target alarms within halo_m of a
// clutter object on the same lane.
std::vector<std::size_t> clutter_free_indices(const std::vector<Alarm>& alarms,
                                              const std::vector<GroundTruthObject>& gt, double halo_m);
std::vector<Alarm> ignore_clutter(const std::vector<Alarm>& alarms, const std::vector<GroundTruthObject>& gt,
                                  double halo_m);

struct RocPoint {
  double threshold = 0.0;
  double pd = 0.0;
  double far = 0.0;
};

// Alarm-level ROC. Thresholds run from +inf through every distinct score
// (descending) to -inf; FAR is the fraction of false alarms retained.
struct RocCurve {
  std::vector<RocPoint> points;
  double auc = 0.0;
  std::size_t targets = 0;
  std::size_t false_alarms = 0;

  // Highest PD reachable with FAR <= far.
  double pd_at_far(double far) const;
};

RocCurve roc(const std::vector<double>& scores, const std::vector<bool>& is_target);

// An alarm with both detector outputs attached.
struct ScoredAlarm {
  Alarm alarm;
  double score = 0.0;
};

struct SubsetCurves {
  std::string name;  // "HMT", "LMT", ...
  RocCurve prescreener;
  RocCurve classifier;
};

struct ComparisonReport {
  RocCurve prescreener;
  RocCurve classifier;
  std::vector<double> far_grid;
  std::vector<double> pd_prescreener;  // at far_grid
  std::vector<double> pd_classifier;
  std::vector<SubsetCurves> subsets;
  std::vector<std::string> notices;              // e.g. omitted subsets
  std::vector<GroundTruthObject> undetected;     // non-clutter objects without a target alarm
  std::size_t clutter_removed = 0;

  double auc_difference() const { return classifier.auc - prescreener.auc; }
};

struct ReportOptions {
  bool ignore_clutter = true;
  double halo_m = 0.25;
  std::vector<double> far_grid = {0.0, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
};

// Prescreener-vs-classifier comparison on one alarm population, with HMT-only
// and LMT-only subset curves (target alarms filtered by matched object type,
// every false alarm kept). Alarms are (re)labeled against gt.
ComparisonReport compare_report(const std::vector<ScoredAlarm>& alarms, const std::vector<GroundTruthObject>& gt,
                                const ReportOptions& options = {});

// Largest vertical gap between two ROC curves over the union of their FAR breakpoints.
double max_vertical_gap(const RocCurve& a, const RocCurve& b);

// Number of distinct non-clutter objects that have a target alarm scoring at or
// above the loosest threshold admitting at most `false_alarm_budget` false alarms.
std::size_t objects_detected_within_budget(const std::vector<ScoredAlarm>& alarms, bool use_classifier,
                                           std::size_t false_alarm_budget);
// Distinct non-clutter objects with any target alarm.
std::size_t detectable_objects(const std::vector<ScoredAlarm>& alarms);

}  // namespace tdefumi
