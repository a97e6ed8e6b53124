#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tdefumi/dictionary.hpp"
#include "tdefumi/scene.hpp"
#include "tdefumi/sparse.hpp"

namespace tdefumi {

// Prescreener output for one lane. Boundary samples (no neighbour pair) carry
// confidence exactly 0; every evaluated sample has confidence > 0.
struct ConfidenceMap {
  std::string lane_id;
  std::vector<double> positions;
  std::vector<double> confidences;

  std::size_t size() const { return positions.size(); }
};

enum class AlarmLabel { kTarget, kFalseAlarm, kUnlabeled };

std::string to_string(AlarmLabel l);
AlarmLabel parse_alarm_label(const std::string& s);

struct Alarm {
  std::string lane_id;
  double position_m = 0.0;
  std::vector<FeatureVector> points;  // lane-mean-subtracted samples within the radius
  std::vector<std::size_t> rows;      // lane row index of each point
  double prescreener_confidence = 0.0;
  AlarmLabel label = AlarmLabel::kUnlabeled;
  // Nearest non-clutter object within the labeling halo, when labeled target.
  std::optional<ObjectType> matched_type;
  std::optional<double> matched_position_m;
};

// JOMP confidence at every sample i from the pair (i - offset, i + offset).
// Both samples are scaled to unit norm first so residuals are relative to the
// signal energy; all-zero samples stay zero.
ConfidenceMap prescreen(const Lane& lane, const Dictionary& dict, int offset, const SolverConfig& cfg);

// Positions with confidence >= tau, excluding boundary samples.
std::vector<double> threshold_confidences(const ConfidenceMap& map, double tau);

// Threshold that keeps the top `fraction` of the non-boundary confidences.
double top_fraction_threshold(const ConfidenceMap& map, double fraction);

// Flat-kernel mean shift on 1-D positions. Modes within bandwidth / 2 of each
// other merge onto the lowest one. Returns sorted centroids.
std::vector<double> mean_shift(std::vector<double> positions, double bandwidth);

// Subtracts the per-frequency complex mean of the lane from every sample.
Lane lane_mean_subtract(const Lane& lane);

// One alarm per centroid with every sample of `lane` within radius_m. Centroids
// without samples are skipped and appended to `skipped` when given.
std::vector<Alarm> extract_alarms(const Lane& lane, const std::vector<double>& centroids, double radius_m,
                                  const ConfidenceMap& map, std::vector<double>* skipped = nullptr);

// Target when within halo_m of any non-clutter object on the same lane,
// otherwise false alarm.
std::vector<Alarm> label_alarms(std::vector<Alarm> alarms, const std::vector<GroundTruthObject>& gt,
                                double halo_m);

}  // namespace tdefumi
