#include "tdefumi/alarms.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "tdefumi/errors.hpp"

namespace tdefumi {

std::string to_string(AlarmLabel l) {
  switch (l) {
    case AlarmLabel::kTarget: return "target";
    case AlarmLabel::kFalseAlarm: return "false_alarm";
    case AlarmLabel::kUnlabeled: return "unlabeled";
  }
  return "?";
}

AlarmLabel parse_alarm_label(const std::string& s) {
  if (s == "target") return AlarmLabel::kTarget;
  if (s == "false_alarm") return AlarmLabel::kFalseAlarm;
  if (s == "unlabeled") return AlarmLabel::kUnlabeled;
  throw FormatError("unknown alarm label '" + s + "'");
}

ConfidenceMap prescreen(const Lane& lane, const Dictionary& dict, int offset, const SolverConfig& cfg) {
  if (offset < 1) throw InvalidParameter("prescreen offset must be >= 1");
  const std::size_t off = static_cast<std::size_t>(offset);
  if (lane.size() <= 2 * off) throw InvalidParameter("lane is too short for the prescreen offset");

  std::vector<FeatureVector> unit(lane.size());
  for (std::size_t i = 0; i < lane.size(); ++i) {
    unit[i] = lane.feature(i);
    const double n = unit[i].norm();
    if (n > 0.0) unit[i] /= n;
  }

  ConfidenceMap map;
  map.lane_id = lane.lane_id;
  map.positions.resize(lane.size());
  map.confidences.assign(lane.size(), 0.0);
  for (std::size_t i = 0; i < lane.size(); ++i) {
    map.positions[i] = lane.samples[i].position_m;
    if (i < off || i + off >= lane.size()) continue;
    map.confidences[i] = jomp(unit[i - off], unit[i + off], dict, cfg).confidence;
  }
  return map;
}

std::vector<double> threshold_confidences(const ConfidenceMap& map, double tau) {
  if (!std::isfinite(tau)) throw InvalidParameter("threshold must be finite");
  std::vector<double> out;
  for (std::size_t i = 0; i < map.size(); ++i)
    if (map.confidences[i] > 0.0 && map.confidences[i] >= tau) out.push_back(map.positions[i]);
  return out;
}

double top_fraction_threshold(const ConfidenceMap& map, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw InvalidParameter("fraction must lie in (0, 1]");
  std::vector<double> c;
  for (double v : map.confidences)
    if (v > 0.0) c.push_back(v);
  if (c.empty()) return 0.0;
  std::sort(c.begin(), c.end(), std::greater<>());
  const auto keep = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(c.size())));
  return c[std::clamp<std::size_t>(keep, 1, c.size()) - 1];
}

std::vector<double> mean_shift(std::vector<double> positions, double bandwidth) {
  if (!(bandwidth > 0.0)) throw InvalidParameter("bandwidth must be > 0");
  if (positions.empty()) throw InvalidParameter("mean shift needs at least one position");
  std::sort(positions.begin(), positions.end());

  auto window_mean = [&](double p) {
    const auto lo = std::lower_bound(positions.begin(), positions.end(), p - bandwidth);
    const auto hi = std::upper_bound(positions.begin(), positions.end(), p + bandwidth);
    return std::accumulate(lo, hi, 0.0) / static_cast<double>(hi - lo);
  };

  std::vector<double> modes;
  modes.reserve(positions.size());
  for (double start : positions) {
    double p = start;
    for (int it = 0; it < 1000; ++it) {
      const double next = window_mean(p);
      const double shift = std::abs(next - p);
      p = next;
      if (shift < 1e-6) break;
    }
    modes.push_back(p);
  }
  std::sort(modes.begin(), modes.end());
  std::vector<double> centroids;
  for (double m : modes)
    if (centroids.empty() || m - centroids.back() > 0.5 * bandwidth) centroids.push_back(m);
  return centroids;
}

Lane lane_mean_subtract(const Lane& lane) {
  if (lane.samples.empty()) throw InvalidParameter("cannot mean-subtract an empty lane");
  ComplexSpectrum mean = ComplexSpectrum::Zero(lane.samples.front().spectrum.size());
  for (const auto& s : lane.samples) mean += s.spectrum;
  mean /= static_cast<double>(lane.samples.size());
  Lane out = lane;
  for (auto& s : out.samples) s.spectrum -= mean;
  return out;
}

std::vector<Alarm> extract_alarms(const Lane& lane, const std::vector<double>& centroids, double radius_m,
                                  const ConfidenceMap& map, std::vector<double>* skipped) {
  if (!(radius_m > 0.0)) throw InvalidParameter("alarm radius must be > 0");
  constexpr double slack = 1e-9;
  std::vector<Alarm> alarms;
  for (double c : centroids) {
    Alarm a;
    a.lane_id = lane.lane_id;
    a.position_m = c;
    for (std::size_t i = 0; i < lane.size(); ++i) {
      if (std::abs(lane.samples[i].position_m - c) <= radius_m + slack) {
        a.points.push_back(lane.feature(i));
        a.rows.push_back(i);
      }
    }
    if (a.points.empty()) {
      if (skipped) skipped->push_back(c);
      continue;
    }
    for (std::size_t i = 0; i < map.size(); ++i)
      if (std::abs(map.positions[i] - c) <= radius_m + slack)
        a.prescreener_confidence = std::max(a.prescreener_confidence, map.confidences[i]);
    alarms.push_back(std::move(a));
  }
  return alarms;
}

std::vector<Alarm> label_alarms(std::vector<Alarm> alarms, const std::vector<GroundTruthObject>& gt, double halo_m) {
  if (!(halo_m > 0.0)) throw InvalidParameter("halo must be > 0");
  for (auto& a : alarms) {
    a.label = AlarmLabel::kFalseAlarm;
    a.matched_type.reset();
    a.matched_position_m.reset();
    double best = halo_m;
    for (const auto& o : gt) {
      if (o.lane_id != a.lane_id || o.type == ObjectType::kCL) continue;
      const double d = std::abs(o.position_m - a.position_m);
      // Ties go to the lower position so the result does not depend on gt order.
      const bool better = !a.matched_position_m || d < best ||
                          (d == best && o.position_m < *a.matched_position_m);
      if (d <= halo_m && better) {
        best = d;
        a.label = AlarmLabel::kTarget;
        a.matched_type = o.type;
        a.matched_position_m = o.position_m;
      }
    }
  }
  return alarms;
}

}  // namespace tdefumi
