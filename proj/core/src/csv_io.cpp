#include "tdefumi/csv_io.hpp"

#include <cstdio>
#include <istream>
#include <ostream>

#include "tdefumi/errors.hpp"
#include "tdefumi/text.hpp"

namespace tdefumi::csv {
namespace {

bool comment_value(const std::string& line, const std::string& key, std::string& value) {
  const std::string prefix = "# " + key + ":";
  if (line.rfind(prefix, 0) != 0) return false;
  value = std::string(text::trim(std::string_view(line).substr(prefix.size())));
  return true;
}

void expect_header(std::istream& is, const std::string& header, long& line) {
  std::string raw;
  while (std::getline(is, raw)) {
    ++line;
    const auto t = text::trim(raw);
    if (t.empty() || t.front() == '#') continue;
    if (t != header) throw FormatError("expected header '" + header + "'", line);
    return;
  }
  throw FormatError("missing header '" + header + "'", line);
}

}  // namespace

void write_lane(std::ostream& os, const Lane& lane) {
  os << "# freqs_rad_s: ";
  for (std::size_t i = 0; i < lane.grid.size(); ++i) os << (i ? "," : "") << text::fmt(lane.grid.omegas()[i]);
  os << "\n# lane_id: " << lane.lane_id << "\n";
  for (const auto& s : lane.samples) {
    os << text::fmt(s.position_m);
    for (Eigen::Index f = 0; f < s.spectrum.size(); ++f) os << ',' << text::fmt(s.spectrum[f].real());
    for (Eigen::Index f = 0; f < s.spectrum.size(); ++f) os << ',' << text::fmt(s.spectrum[f].imag());
    os << '\n';
  }
}

Lane read_lane(std::istream& is, const std::string& fallback_lane_id) {
  Lane lane;
  lane.lane_id = fallback_lane_id;
  std::string raw, value;
  long line = 0;
  bool have_grid = false;
  while (std::getline(is, raw)) {
    ++line;
    const std::string t(text::trim(raw));
    if (t.empty()) continue;
    if (t.front() == '#') {
      if (comment_value(t, "freqs_rad_s", value)) {
        std::vector<double> w;
        for (const auto& f : text::split(value, ',')) w.push_back(text::to_double(f, "frequency", line));
        try {
          lane.grid = FrequencyGrid(std::move(w));
        } catch (const InvalidParameter& e) {
          throw FormatError(e.what(), line);
        }
        have_grid = true;
      } else if (comment_value(t, "lane_id", value)) {
        lane.lane_id = value;
      }
      continue;
    }
    if (!have_grid) throw FormatError("lane file must start with '# freqs_rad_s:'", line);
    const auto cells = text::split(t, ',');
    const std::size_t n = lane.grid.size();
    if (cells.size() != 1 + 2 * n)
      throw FormatError("expected " + std::to_string(1 + 2 * n) + " columns, found " + std::to_string(cells.size()),
                        line);
    LaneSample s;
    s.position_m = text::to_double(cells[0], "position_m", line);
    s.spectrum.resize(static_cast<Eigen::Index>(n));
    for (std::size_t f = 0; f < n; ++f)
      s.spectrum[static_cast<Eigen::Index>(f)] = {text::to_double(cells[1 + f], "real part", line),
                                                  text::to_double(cells[1 + n + f], "imaginary part", line)};
    lane.samples.push_back(std::move(s));
  }
  if (!have_grid) throw FormatError("lane file has no frequency header");
  try {
    lane.validate();
  } catch (const InvalidParameter& e) {
    throw FormatError(e.what());
  }
  return lane;
}

void write_ground_truth(std::ostream& os, const std::vector<GroundTruthObject>& gt) {
  os << "lane_id,position_m,object_type\n";
  for (const auto& o : gt) os << o.lane_id << ',' << text::fmt(o.position_m) << ',' << to_string(o.type) << '\n';
}

std::vector<GroundTruthObject> read_ground_truth(std::istream& is) {
  long line = 0;
  expect_header(is, "lane_id,position_m,object_type", line);
  std::vector<GroundTruthObject> gt;
  std::string raw;
  while (std::getline(is, raw)) {
    ++line;
    const auto t = text::trim(raw);
    if (t.empty() || t.front() == '#') continue;
    const auto c = text::split(t, ',');
    if (c.size() != 3) throw FormatError("ground truth rows need 3 columns", line);
    try {
      gt.push_back({c[0], text::to_double(c[1], "position_m", line), parse_object_type(c[2])});
    } catch (const FormatError& e) {
      if (e.line() >= 0) throw;
      throw FormatError(e.what(), line);
    }
  }
  return gt;
}

void write_confidence_map(std::ostream& os, const ConfidenceMap& map) {
  os << "# lane_id: " << map.lane_id << "\nposition_m,confidence\n";
  for (std::size_t i = 0; i < map.size(); ++i)
    os << text::fmt(map.positions[i]) << ',' << text::fmt(map.confidences[i]) << '\n';
}

ConfidenceMap read_confidence_map(std::istream& is, const std::string& fallback_lane_id) {
  ConfidenceMap map;
  map.lane_id = fallback_lane_id;
  std::string raw, value;
  long line = 0;
  bool header = false;
  while (std::getline(is, raw)) {
    ++line;
    const std::string t(text::trim(raw));
    if (t.empty()) continue;
    if (t.front() == '#') {
      if (comment_value(t, "lane_id", value)) map.lane_id = value;
      continue;
    }
    if (!header) {
      if (t != "position_m,confidence") throw FormatError("expected header 'position_m,confidence'", line);
      header = true;
      continue;
    }
    const auto c = text::split(t, ',');
    if (c.size() != 2) throw FormatError("confidence rows need 2 columns", line);
    const double p = text::to_double(c[0], "position_m", line), v = text::to_double(c[1], "confidence", line);
    if (!map.positions.empty() && !(p > map.positions.back()))
      throw FormatError("positions must be strictly increasing", line);
    if (!(v >= 0.0) || !std::isfinite(v)) throw FormatError("confidence must be finite and >= 0", line);
    map.positions.push_back(p);
    map.confidences.push_back(v);
  }
  if (!header) throw FormatError("missing header 'position_m,confidence'");
  return map;
}

void write_alarms(std::ostream& alarms_os, std::ostream& points_os, const std::vector<Alarm>& alarms) {
  alarms_os << "lane_id,position_m,prescreener_conf,label\n";
  points_os << "alarm_index,lane_id,row_index\n";
  for (std::size_t i = 0; i < alarms.size(); ++i) {
    const Alarm& a = alarms[i];
    alarms_os << a.lane_id << ',' << text::fmt(a.position_m) << ',' << text::fmt(a.prescreener_confidence) << ','
              << to_string(a.label) << '\n';
    for (std::size_t r : a.rows) points_os << i << ',' << a.lane_id << ',' << r << '\n';
  }
}

std::vector<Alarm> read_alarms(std::istream& alarms_is, std::istream& points_is,
                               const std::map<std::string, Lane>& centered_lanes) {
  std::vector<Alarm> alarms;
  long line = 0;
  expect_header(alarms_is, "lane_id,position_m,prescreener_conf,label", line);
  std::string raw;
  while (std::getline(alarms_is, raw)) {
    ++line;
    const auto t = text::trim(raw);
    if (t.empty() || t.front() == '#') continue;
    const auto c = text::split(t, ',');
    if (c.size() != 4) throw FormatError("alarm rows need 4 columns", line);
    Alarm a;
    a.lane_id = c[0];
    a.position_m = text::to_double(c[1], "position_m", line);
    a.prescreener_confidence = text::to_double(c[2], "prescreener_conf", line);
    try {
      a.label = parse_alarm_label(c[3]);
    } catch (const FormatError& e) {
      throw FormatError(e.what(), line);
    }
    alarms.push_back(std::move(a));
  }

  line = 0;
  expect_header(points_is, "alarm_index,lane_id,row_index", line);
  while (std::getline(points_is, raw)) {
    ++line;
    const auto t = text::trim(raw);
    if (t.empty() || t.front() == '#') continue;
    const auto c = text::split(t, ',');
    if (c.size() != 3) throw FormatError("alarm point rows need 3 columns", line);
    const auto idx = text::to_int(c[0], "alarm_index", line);
    const auto row = text::to_int(c[2], "row_index", line);
    if (idx < 0 || static_cast<std::size_t>(idx) >= alarms.size()) throw FormatError("alarm_index out of range", line);
    Alarm& a = alarms[static_cast<std::size_t>(idx)];
    if (c[1] != a.lane_id) throw FormatError("lane_id does not match the alarm", line);
    const auto lane = centered_lanes.find(a.lane_id);
    if (lane == centered_lanes.end()) throw FormatError("no lane data for lane '" + a.lane_id + "'", line);
    if (row < 0 || static_cast<std::size_t>(row) >= lane->second.size()) throw FormatError("row_index out of range", line);
    a.rows.push_back(static_cast<std::size_t>(row));
    a.points.push_back(lane->second.feature(static_cast<std::size_t>(row)));
  }
  for (std::size_t i = 0; i < alarms.size(); ++i)
    if (alarms[i].points.empty()) throw FormatError("alarm " + std::to_string(i) + " has no points");
  return alarms;
}

void write_scores(std::ostream& os, const std::vector<ScoredAlarm>& alarms) {
  os << "alarm_index,lane_id,position_m,prescreener_conf,score,label\n";
  for (std::size_t i = 0; i < alarms.size(); ++i) {
    const Alarm& a = alarms[i].alarm;
    os << i << ',' << a.lane_id << ',' << text::fmt(a.position_m) << ',' << text::fmt(a.prescreener_confidence) << ','
       << text::fmt(alarms[i].score) << ',' << to_string(a.label) << '\n';
  }
}

std::vector<ScoredAlarm> read_scores(std::istream& is) {
  long line = 0;
  expect_header(is, "alarm_index,lane_id,position_m,prescreener_conf,score,label", line);
  std::vector<ScoredAlarm> out;
  std::string raw;
  while (std::getline(is, raw)) {
    ++line;
    const auto t = text::trim(raw);
    if (t.empty() || t.front() == '#') continue;
    const auto c = text::split(t, ',');
    if (c.size() != 6) throw FormatError("score rows need 6 columns", line);
    ScoredAlarm s;
    s.alarm.lane_id = c[1];
    s.alarm.position_m = text::to_double(c[2], "position_m", line);
    s.alarm.prescreener_confidence = text::to_double(c[3], "prescreener_conf", line);
    s.score = text::to_double(c[4], "score", line);
    try {
      s.alarm.label = parse_alarm_label(c[5]);
    } catch (const FormatError& e) {
      throw FormatError(e.what(), line);
    }
    out.push_back(std::move(s));
  }
  return out;
}

void write_roc(std::ostream& os, const RocCurve& curve) {
  os << "threshold,pd,far\n";
  for (const auto& p : curve.points) os << text::fmt(p.threshold) << ',' << text::fmt(p.pd) << ',' << text::fmt(p.far) << '\n';
}

std::vector<RocPoint> read_roc(std::istream& is) {
  long line = 0;
  expect_header(is, "threshold,pd,far", line);
  std::vector<RocPoint> pts;
  std::string raw;
  while (std::getline(is, raw)) {
    ++line;
    const auto t = text::trim(raw);
    if (t.empty() || t.front() == '#') continue;
    const auto c = text::split(t, ',');
    if (c.size() != 3) throw FormatError("ROC rows need 3 columns", line);
    RocPoint p{text::to_double(c[0], "threshold", line), text::to_double(c[1], "pd", line),
               text::to_double(c[2], "far", line)};
    if (p.pd < 0.0 || p.pd > 1.0 || p.far < 0.0 || p.far > 1.0) throw FormatError("pd and far must lie in [0, 1]", line);
    pts.push_back(p);
  }
  if (pts.empty()) throw FormatError("ROC file has no points");
  return pts;
}

void write_report_text(std::ostream& os, const ComparisonReport& r) {
  char buf[160];
  os << "Prescreener vs classifier (alarm-level ROC)\n";
  os << "  targets: " << r.classifier.targets << "  false alarms: " << r.classifier.false_alarms
     << "  clutter alarms removed: " << r.clutter_removed << "\n";
  std::snprintf(buf, sizeof buf, "  AUC prescreener %.4f  classifier %.4f  difference %+.4f\n", r.prescreener.auc,
                r.classifier.auc, r.auc_difference());
  os << buf << "\n     FAR   PD(pre)   PD(cls)\n";
  for (std::size_t i = 0; i < r.far_grid.size(); ++i) {
    std::snprintf(buf, sizeof buf, "  %6.3f  %8.4f  %8.4f\n", r.far_grid[i], r.pd_prescreener[i], r.pd_classifier[i]);
    os << buf;
  }
  for (const auto& s : r.subsets) {
    std::snprintf(buf, sizeof buf, "  %s-only: targets %zu  AUC prescreener %.4f  classifier %.4f\n", s.name.c_str(),
                  s.classifier.targets, s.prescreener.auc, s.classifier.auc);
    os << buf;
  }
  for (const auto& n : r.notices) os << "  notice: " << n << "\n";
  os << "  objects without a target alarm: " << r.undetected.size() << "\n";
  for (const auto& o : r.undetected)
    os << "    lane " << o.lane_id << "  " << text::fmt(o.position_m) << " m  " << to_string(o.type) << "\n";
}

void write_report_csv(std::ostream& os, const ComparisonReport& r) {
  os << "section,key,prescreener,classifier\n";
  os << "auc,all," << text::fmt(r.prescreener.auc) << ',' << text::fmt(r.classifier.auc) << '\n';
  for (const auto& s : r.subsets)
    os << "auc," << s.name << ',' << text::fmt(s.prescreener.auc) << ',' << text::fmt(s.classifier.auc) << '\n';
  for (std::size_t i = 0; i < r.far_grid.size(); ++i)
    os << "pd_at_far," << text::fmt(r.far_grid[i]) << ',' << text::fmt(r.pd_prescreener[i]) << ','
       << text::fmt(r.pd_classifier[i]) << '\n';
  os << "count,targets," << r.prescreener.targets << ',' << r.classifier.targets << '\n';
  os << "count,false_alarms," << r.prescreener.false_alarms << ',' << r.classifier.false_alarms << '\n';
  os << "count,undetected_objects," << r.undetected.size() << ',' << r.undetected.size() << '\n';
}

}  // namespace tdefumi::csv
