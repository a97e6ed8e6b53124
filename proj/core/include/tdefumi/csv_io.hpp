#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "tdefumi/alarms.hpp"
#include "tdefumi/evaluation.hpp"
#include "tdefumi/scene.hpp"

namespace tdefumi::csv {

// Lane file: "# freqs_rad_s: f1,...,fN", "# lane_id: <id>", then rows
// position_m,re_1..re_N,im_1..im_N.
void write_lane(std::ostream& os, const Lane& lane);
Lane read_lane(std::istream& is, const std::string& fallback_lane_id = "");

// Header lane_id,position_m,object_type.
void write_ground_truth(std::ostream& os, const std::vector<GroundTruthObject>& gt);
std::vector<GroundTruthObject> read_ground_truth(std::istream& is);

// "# lane_id: <id>" then header position_m,confidence.
void write_confidence_map(std::ostream& os, const ConfidenceMap& map);
ConfidenceMap read_confidence_map(std::istream& is, const std::string& fallback_lane_id = "");

// Alarm file (lane_id,position_m,prescreener_conf,label) plus a sidecar listing
// the lane rows of every alarm (alarm_index,lane_id,row_index).
void write_alarms(std::ostream& alarms_os, std::ostream& points_os, const std::vector<Alarm>& alarms);
// Points are rebuilt from the rows of the lane-mean-subtracted lanes, keyed by lane id.
std::vector<Alarm> read_alarms(std::istream& alarms_is, std::istream& points_is,
                               const std::map<std::string, Lane>& centered_lanes);

// alarm_index,lane_id,position_m,prescreener_conf,score,label
void write_scores(std::ostream& os, const std::vector<ScoredAlarm>& alarms);
std::vector<ScoredAlarm> read_scores(std::istream& is);

// threshold,pd,far
void write_roc(std::ostream& os, const RocCurve& curve);
std::vector<RocPoint> read_roc(std::istream& is);

void write_report_text(std::ostream& os, const ComparisonReport& r);
void write_report_csv(std::ostream& os, const ComparisonReport& r);

}  // namespace tdefumi::csv
