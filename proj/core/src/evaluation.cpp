#include "tdefumi/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <utility>

#include "tdefumi/errors.hpp"

namespace tdefumi {

std::vector<Fold> make_folds(const std::vector<std::string>& lane_ids) {
  std::vector<std::string> lanes;
  for (const auto& id : lane_ids)
    if (std::find(lanes.begin(), lanes.end(), id) == lanes.end()) lanes.push_back(id);
  if (lanes.size() < 2) throw InvalidParameter("cross validation needs at least two lanes");
  std::vector<Fold> folds;
  for (const auto& test : lanes) {
    Fold f{test, {}};
    for (const auto& other : lanes)
      if (other != test) f.train_lane_ids.push_back(other);
    folds.push_back(std::move(f));
  }
  return folds;
}

std::vector<std::size_t> clutter_free_indices(const std::vector<Alarm>& alarms,
                                              const std::vector<GroundTruthObject>& gt, double halo_m) {
  if (!(halo_m > 0.0)) throw InvalidParameter("halo must be > 0");
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < alarms.size(); ++i) {
    const Alarm& a = alarms[i];
    bool near_clutter = false;
    if (a.label != AlarmLabel::kTarget)
      for (const auto& o : gt)
        if (o.type == ObjectType::kCL && o.lane_id == a.lane_id && std::abs(o.position_m - a.position_m) <= halo_m)
          near_clutter = true;
    if (!near_clutter) keep.push_back(i);
  }
  return keep;
}

std::vector<Alarm> ignore_clutter(const std::vector<Alarm>& alarms, const std::vector<GroundTruthObject>& gt,
                                  double halo_m) {
  std::vector<Alarm> out;
  for (std::size_t i : clutter_free_indices(alarms, gt, halo_m)) out.push_back(alarms[i]);
  return out;
}

double RocCurve::pd_at_far(double far) const {
  double best = 0.0;
  for (const auto& p : points)
    if (p.far <= far + 1e-12) best = std::max(best, p.pd);
  return best;
}

RocCurve roc(const std::vector<double>& scores, const std::vector<bool>& is_target) {
  if (scores.size() != is_target.size()) throw InvalidParameter("scores and labels differ in length");
  RocCurve c;
  for (bool t : is_target) (t ? c.targets : c.false_alarms)++;
  if (c.targets == 0 || c.false_alarms == 0) throw InvalidParameter("ROC needs both target and false-alarm labels");
  for (double s : scores)
    if (std::isnan(s)) throw InvalidParameter("ROC scores must not be NaN");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  const double nt = static_cast<double>(c.targets), nf = static_cast<double>(c.false_alarms);
  c.points.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double s = scores[order[i]];
    // Equal scores cross the threshold together.
    while (i < order.size() && scores[order[i]] == s) {
      (is_target[order[i]] ? tp : fp)++;
      ++i;
    }
    c.points.push_back({s, static_cast<double>(tp) / nt, static_cast<double>(fp) / nf});
  }
  c.points.push_back({-std::numeric_limits<double>::infinity(), 1.0, 1.0});

  for (std::size_t i = 1; i < c.points.size(); ++i)
    c.auc += 0.5 * (c.points[i].far - c.points[i - 1].far) * (c.points[i].pd + c.points[i - 1].pd);
  return c;
}

double max_vertical_gap(const RocCurve& a, const RocCurve& b) {
  std::set<double> fars;
  for (const auto& p : a.points) fars.insert(p.far);
  for (const auto& p : b.points) fars.insert(p.far);
  double gap = 0.0;
  for (double f : fars) gap = std::max(gap, std::abs(a.pd_at_far(f) - b.pd_at_far(f)));
  return gap;
}

namespace {

struct Population {
  std::vector<double> pre, cls;
  std::vector<bool> target;
};

Population population(const std::vector<ScoredAlarm>& alarms, const std::vector<std::size_t>& idx,
                      const std::optional<ObjectType>& only) {
  Population p;
  for (std::size_t i : idx) {
    const Alarm& a = alarms[i].alarm;
    if (a.label == AlarmLabel::kUnlabeled) continue;
    const bool t = a.label == AlarmLabel::kTarget;
    if (t && only && a.matched_type != only) continue;
    p.pre.push_back(a.prescreener_confidence);
    p.cls.push_back(alarms[i].score);
    p.target.push_back(t);
  }
  return p;
}

bool has_both(const Population& p) {
  const auto t = std::count(p.target.begin(), p.target.end(), true);
  return t > 0 && t < static_cast<long>(p.target.size());
}

}  // namespace

ComparisonReport compare_report(const std::vector<ScoredAlarm>& input, const std::vector<GroundTruthObject>& gt,
                                const ReportOptions& options) {
  std::vector<Alarm> bare;
  for (const auto& s : input) bare.push_back(s.alarm);
  bare = label_alarms(std::move(bare), gt, options.halo_m);
  std::vector<ScoredAlarm> alarms = input;
  for (std::size_t i = 0; i < alarms.size(); ++i) alarms[i].alarm = bare[i];

  std::vector<std::size_t> idx;
  if (options.ignore_clutter) {
    idx = clutter_free_indices(bare, gt, options.halo_m);
  } else {
    idx.resize(alarms.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
  }

  ComparisonReport r;
  r.clutter_removed = alarms.size() - idx.size();
  const Population all = population(alarms, idx, std::nullopt);
  if (!has_both(all)) throw InvalidParameter("report needs both target and false-alarm alarms");
  r.prescreener = roc(all.pre, all.target);
  r.classifier = roc(all.cls, all.target);
  r.far_grid = options.far_grid;
  for (double f : r.far_grid) {
    r.pd_prescreener.push_back(r.prescreener.pd_at_far(f));
    r.pd_classifier.push_back(r.classifier.pd_at_far(f));
  }

  for (ObjectType t : {ObjectType::kHMT, ObjectType::kLMT}) {
    const Population sub = population(alarms, idx, t);
    if (!has_both(sub)) {
      r.notices.push_back(to_string(t) + "-only curve omitted: no " + to_string(t) + " target alarms");
      continue;
    }
    r.subsets.push_back({to_string(t), roc(sub.pre, sub.target), roc(sub.cls, sub.target)});
  }

  for (const auto& o : gt) {
    if (o.type == ObjectType::kCL) continue;
    bool found = false;
    for (const auto& a : bare)
      if (a.label == AlarmLabel::kTarget && a.lane_id == o.lane_id && a.matched_position_m == o.position_m)
        found = true;
    if (!found) r.undetected.push_back(o);
  }
  return r;
}

std::size_t detectable_objects(const std::vector<ScoredAlarm>& alarms) {
  std::set<std::pair<std::string, double>> objs;
  for (const auto& s : alarms)
    if (s.alarm.label == AlarmLabel::kTarget && s.alarm.matched_position_m)
      objs.insert({s.alarm.lane_id, *s.alarm.matched_position_m});
  return objs.size();
}

std::size_t objects_detected_within_budget(const std::vector<ScoredAlarm>& alarms, bool use_classifier,
                                           std::size_t false_alarm_budget) {
  auto score = [&](const ScoredAlarm& s) { return use_classifier ? s.score : s.alarm.prescreener_confidence; };
  std::vector<double> fa_scores;
  for (const auto& s : alarms)
    if (s.alarm.label == AlarmLabel::kFalseAlarm) fa_scores.push_back(score(s));
  std::sort(fa_scores.begin(), fa_scores.end(), std::greater<>());

  // Loosest threshold with at most `budget` false alarms at or above it.
  double threshold = -std::numeric_limits<double>::infinity();
  if (fa_scores.size() > false_alarm_budget) {
    const double blocked = fa_scores[false_alarm_budget];
    threshold = std::nextafter(blocked, std::numeric_limits<double>::infinity());
  }
  std::set<std::pair<std::string, double>> objs;
  for (const auto& s : alarms)
    if (s.alarm.label == AlarmLabel::kTarget && s.alarm.matched_position_m && score(s) >= threshold)
      objs.insert({s.alarm.lane_id, *s.alarm.matched_position_m});
  return objs.size();
}

}  // namespace tdefumi
