#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tdefumi/csv_io.hpp"
#include "tdefumi/errors.hpp"
#include "tdefumi/model_io.hpp"
#include "tdefumi/pipeline.hpp"
#include "tdefumi/svg_plot.hpp"

namespace fs = std::filesystem;
using namespace tdefumi;

namespace {

// I/O problems are runtime failures (exit 2), unlike malformed contents.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::ifstream open_in(const fs::path& p) {
  std::ifstream is(p);
  if (!is) throw IoError("cannot read " + p.string());
  return is;
}

std::ofstream open_out(const fs::path& p) {
  if (p.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(p.parent_path(), ec);
  }
  std::ofstream os(p, std::ios::binary);
  if (!os) throw IoError("cannot write " + p.string());
  return os;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create directory " + dir.string());
}

void echo_config(const CLI::App& sub, const fs::path& path) {
  auto os = open_out(path);
  os << "# resolved " << sub.get_name() << " configuration\n" << sub.config_to_str(true, false);
}

// Files named <prefix><id>.csv in dir, sorted by name.
std::vector<std::pair<std::string, fs::path>> list_files(const fs::path& dir, const std::string& prefix) {
  if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());
  std::vector<std::pair<std::string, fs::path>> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    const std::string name = e.path().filename().string();
    if (e.is_regular_file() && name.rfind(prefix, 0) == 0 && e.path().extension() == ".csv")
      out.push_back({name.substr(prefix.size(), name.size() - prefix.size() - 4), e.path()});
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Lane> read_lanes(const fs::path& dir) {
  std::vector<Lane> lanes;
  for (const auto& [id, path] : list_files(dir, "lane_")) {
    auto is = open_in(path);
    try {
      lanes.push_back(csv::read_lane(is, id));
    } catch (const FormatError& e) {
      throw FormatError(path.string() + ": " + e.what());
    }
  }
  if (lanes.empty()) throw InvalidParameter("no lane_*.csv files in " + dir.string());
  return lanes;
}

std::vector<GroundTruthObject> read_truth(const fs::path& p) {
  auto is = open_in(p);
  return csv::read_ground_truth(is);
}

std::vector<Alarm> read_alarm_set(const fs::path& alarm_dir, const fs::path& lane_dir) {
  std::map<std::string, Lane> centered;
  for (const auto& lane : read_lanes(lane_dir)) centered[lane.lane_id] = lane_mean_subtract(lane);
  auto a = open_in(alarm_dir / "alarms.csv");
  auto p = open_in(alarm_dir / "alarm_points.csv");
  return csv::read_alarms(a, p, centered);
}

std::vector<std::string> split_ids(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string t; std::getline(ss, t, ',');)
    if (!t.empty()) out.push_back(t);
  return out;
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
  std::string scene_path, preset = "table1", out;
  std::uint64_t seed = 1;
};

void run_simulate(const CLI::App& sub, const SimulateArgs& a) {
  SceneConfig scene;
  if (!a.scene_path.empty()) {
    auto is = open_in(a.scene_path);
    scene = read_scene_config(is);
  } else {
    scene = a.preset == "lmt" ? lmt_dominant_scene(a.seed) : table1_scene(a.seed);
  }
  const SimulatedScene sim = simulate_scene(scene);
  const fs::path out(a.out);
  ensure_dir(out);
  {
    auto os = open_out(out / "scene.cfg");
    write_scene_config(os, scene);
  }
  for (const auto& lane : sim.lanes) {
    auto os = open_out(out / ("lane_" + lane.lane_id + ".csv"));
    csv::write_lane(os, lane);
  }
  auto os = open_out(out / "ground_truth.csv");
  csv::write_ground_truth(os, sim.ground_truth);
  echo_config(sub, out / "simulate.config");
  std::cout << "simulated " << sim.lanes.size() << " lanes, " << sim.ground_truth.size() << " objects\n";
}

struct PrescreenArgs {
  std::string lanes, out;
  int offset = 5, zetas = 30, atoms = 1;
};

void run_prescreen(const CLI::App& sub, const PrescreenArgs& a) {
  const fs::path out(a.out);
  ensure_dir(out);
  SolverConfig jomp;
  jomp.max_atoms = a.atoms;
  for (const auto& lane : read_lanes(a.lanes)) {
    const ConfidenceMap map = prescreen(lane, prescreen_dictionary(lane.grid, a.zetas), a.offset, jomp);
    auto os = open_out(out / ("confidence_" + lane.lane_id + ".csv"));
    csv::write_confidence_map(os, map);
  }
  echo_config(sub, out / "prescreen.config");
}

struct AlarmArgs {
  std::string lanes, maps, truth, out;
  double fraction = AlarmConfig{}.threshold_fraction;
  std::optional<double> tau;
  double bandwidth = 0.25, radius = 0.25, halo = 0.25;
};

void run_alarms(const CLI::App& sub, const AlarmArgs& a) {
  AlarmConfig cfg;
  cfg.threshold_fraction = a.fraction;
  cfg.tau = a.tau;
  cfg.bandwidth_m = a.bandwidth;
  cfg.radius_m = a.radius;
  cfg.halo_m = a.halo;
  cfg.validate();
  const auto gt = read_truth(a.truth);
  std::vector<Alarm> all;
  for (const auto& lane : read_lanes(a.lanes)) {
    auto is = open_in(fs::path(a.maps) / ("confidence_" + lane.lane_id + ".csv"));
    const ConfidenceMap map = csv::read_confidence_map(is, lane.lane_id);
    if (map.size() != lane.size()) throw InvalidParameter("confidence map of lane " + lane.lane_id + " does not match the lane");
    const double tau = cfg.tau ? *cfg.tau : top_fraction_threshold(map, cfg.threshold_fraction);
    const auto centroids = mean_shift(threshold_confidences(map, tau), cfg.bandwidth_m);
    auto alarms = label_alarms(extract_alarms(lane_mean_subtract(lane), centroids, cfg.radius_m, map), gt, cfg.halo_m);
    all.insert(all.end(), alarms.begin(), alarms.end());
  }
  const fs::path out(a.out);
  ensure_dir(out);
  auto as = open_out(out / "alarms.csv");
  auto ps = open_out(out / "alarm_points.csv");
  csv::write_alarms(as, ps, all);
  echo_config(sub, out / "alarms.config");
  std::size_t t = 0;
  for (const auto& x : all) t += x.label == AlarmLabel::kTarget;
  std::cout << all.size() << " alarms (" << t << " target, " << all.size() - t << " false)\n";
}

struct TrainArgs {
  std::string alarms, lanes, out, exclude, only;
  std::optional<int> fold;
  TrainConfig cfg;
};

void add_train_options(CLI::App* sub, TrainArgs& a) {
  TrainConfig& c = a.cfg;
  sub->add_option("--lambda", c.lambda, "l1 weight of the sparse codes")->capture_default_str();
  sub->add_option("--rho0", c.rho0, "initial learning rate")->capture_default_str();
  sub->add_option("--t0", c.t0, "learning-rate decay constant (0: minibatches per epoch)")->capture_default_str();
  sub->add_option("--epochs", c.epochs)->capture_default_str();
  sub->add_option("--batch-size", c.batch_size)->capture_default_str();
  sub->add_option("--beta", c.beta, "posterior scale")->capture_default_str();
  sub->add_option("--epsilon", c.epsilon)->capture_default_str();
  sub->add_option("--u", c.u, "atom-to-mean regularizer weight")->capture_default_str();
  sub->add_option("--v", c.v, "classifier ridge")->capture_default_str();
  sub->add_option("--s", c.s, "atom smoothness weight")->capture_default_str();
  sub->add_option("--target-atoms", c.target_atoms)->capture_default_str();
  sub->add_option("--nontarget-atoms", c.nontarget_atoms)->capture_default_str();
  sub->add_option("--tolerance", c.tolerance)->capture_default_str();
  sub->add_option("--seed", c.seed)->capture_default_str();
}

void run_train(const CLI::App& sub, TrainArgs a) {
  auto alarms = read_alarm_set(a.alarms, a.lanes);
  const auto only = split_ids(a.only), exclude = split_ids(a.exclude);
  std::vector<Alarm> kept;
  for (auto& x : alarms) {
    if (!only.empty() && std::find(only.begin(), only.end(), x.lane_id) == only.end()) continue;
    if (std::find(exclude.begin(), exclude.end(), x.lane_id) != exclude.end()) continue;
    kept.push_back(std::move(x));
  }
  if (a.fold) a.cfg.seed = derive_seed(a.cfg.seed, static_cast<std::uint64_t>(*a.fold));
  const auto bags = to_bags(kept);
  if (bags.empty()) throw InvalidParameter("no labeled alarms left for training");
  const Model model = train(bags, a.cfg, read_lanes(a.lanes).front().grid);
  {
    auto os = open_out(a.out);
    save_model(os, model);
  }
  echo_config(sub, a.out + ".config");
  std::cout << "trained on " << bags.size() << " bags, " << model.objective_log.size() << " epochs\n";
}

struct ClassifyArgs {
  std::string model, alarms, lanes, out, only, pooling = "max";
};

void run_classify(const CLI::App& sub, const ClassifyArgs& a) {
  const Model model = load_model(a.model);
  const auto only = split_ids(a.only);
  const Pooling pooling = a.pooling == "mean" ? Pooling::kMean : Pooling::kMax;
  std::vector<ScoredAlarm> scored;
  for (auto& x : read_alarm_set(a.alarms, a.lanes)) {
    if (!only.empty() && std::find(only.begin(), only.end(), x.lane_id) == only.end()) continue;
    const double s = classify_alarm(x.points, model, pooling);
    scored.push_back({std::move(x), s});
  }
  auto os = open_out(a.out);
  csv::write_scores(os, scored);
  echo_config(sub, a.out + ".config");
}

struct ScoreArgs {
  std::vector<std::string> scores;
  std::string truth, out;
  bool ignore_clutter = true;
  double halo = 0.25;
};

void run_score(const CLI::App& sub, const ScoreArgs& a) {
  std::vector<ScoredAlarm> all;
  for (const auto& p : a.scores) {
    auto is = open_in(p);
    auto part = csv::read_scores(is);
    all.insert(all.end(), part.begin(), part.end());
  }
  ReportOptions opt;
  opt.ignore_clutter = a.ignore_clutter;
  opt.halo_m = a.halo;
  const ComparisonReport r = compare_report(all, read_truth(a.truth), opt);
  const fs::path out(a.out);
  ensure_dir(out);
  auto write = [&](const std::string& name, const RocCurve& c) {
    auto os = open_out(out / name);
    csv::write_roc(os, c);
  };
  write("roc_prescreener.csv", r.prescreener);
  write("roc_classifier.csv", r.classifier);
  for (const auto& s : r.subsets) {
    write("roc_" + s.name + "_prescreener.csv", s.prescreener);
    write("roc_" + s.name + "_classifier.csv", s.classifier);
  }
  {
    auto os = open_out(out / "report.txt");
    csv::write_report_text(os, r);
  }
  auto os = open_out(out / "report.csv");
  csv::write_report_csv(os, r);
  echo_config(sub, out / "score.config");
  csv::write_report_text(std::cout, r);
}

struct PlotArgs {
  std::vector<std::string> rocs;
  std::string out, title = "ROC";
};

void run_plot(const CLI::App& sub, const PlotArgs& a) {
  std::vector<NamedCurve> curves;
  for (const auto& p : a.rocs) {
    auto is = open_in(p);
    try {
      curves.push_back({fs::path(p).stem().string(), csv::read_roc(is)});
    } catch (const FormatError& e) {
      throw FormatError(p + ": " + e.what());
    }
  }
  auto os = open_out(a.out);
  write_roc_svg(os, curves, a.title);
  echo_config(sub, a.out + ".config");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"TD-eFUMI landmine alarm classification pipeline"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "tdefumi 0.1.0");

  SimulateArgs sim;
  auto* s_sim = app.add_subcommand("simulate", "Simulate lanes and ground truth");
  s_sim->add_option("--scene", sim.scene_path, "scene config file (default: built-in preset)")->check(CLI::ExistingFile);
  s_sim->add_option("--preset", sim.preset, "built-in scene when --scene is absent")
      ->check(CLI::IsMember({"table1", "lmt"}))
      ->capture_default_str();
  s_sim->add_option("--seed", sim.seed, "seed of the built-in scene")->capture_default_str();
  s_sim->add_option("--out", sim.out, "output directory")->required();

  PrescreenArgs pre;
  auto* s_pre = app.add_subcommand("prescreen", "JOMP confidence maps for every lane");
  s_pre->add_option("--lanes", pre.lanes, "directory with lane_*.csv")->required();
  s_pre->add_option("--out", pre.out, "output directory")->required();
  s_pre->add_option("--offset", pre.offset, "samples ahead/behind")->check(CLI::PositiveNumber)->capture_default_str();
  s_pre->add_option("--zetas", pre.zetas, "DSRF dictionary size")->check(CLI::PositiveNumber)->capture_default_str();
  s_pre->add_option("--jomp-atoms", pre.atoms, "JOMP sparsity level")->check(CLI::PositiveNumber)->capture_default_str();

  AlarmArgs al;
  auto* s_al = app.add_subcommand("alarms", "Threshold, cluster and label alarms");
  s_al->add_option("--lanes", al.lanes, "directory with lane_*.csv")->required();
  s_al->add_option("--maps", al.maps, "directory with confidence_*.csv")->required();
  s_al->add_option("--truth", al.truth, "ground-truth CSV")->required();
  s_al->add_option("--out", al.out, "output directory")->required();
  auto* frac = s_al->add_option("--threshold-fraction", al.fraction, "keep this top fraction of confidences per lane")
                   ->capture_default_str();
  s_al->add_option("--tau", al.tau, "absolute confidence threshold")->excludes(frac);
  s_al->add_option("--bandwidth", al.bandwidth)->capture_default_str();
  s_al->add_option("--radius", al.radius)->capture_default_str();
  s_al->add_option("--halo", al.halo)->capture_default_str();

  TrainArgs tr;
  auto* s_tr = app.add_subcommand("train", "Train a TD-eFUMI model on labeled alarms");
  s_tr->add_option("--alarms", tr.alarms, "alarm directory")->required();
  s_tr->add_option("--lanes", tr.lanes, "directory with lane_*.csv")->required();
  s_tr->add_option("--out", tr.out, "model file")->required();
  s_tr->add_option("--exclude-lanes", tr.exclude, "comma-separated lanes left out");
  s_tr->add_option("--lanes-only", tr.only, "comma-separated lanes to train on");
  s_tr->add_option("--fold", tr.fold, "derive the training seed from --seed and this fold index");
  add_train_options(s_tr, tr);

  ClassifyArgs cl;
  auto* s_cl = app.add_subcommand("classify", "Score alarms with a saved model");
  s_cl->add_option("--model", cl.model)->required()->check(CLI::ExistingFile);
  s_cl->add_option("--alarms", cl.alarms, "alarm directory")->required();
  s_cl->add_option("--lanes", cl.lanes, "directory with lane_*.csv")->required();
  s_cl->add_option("--lanes-only", cl.only, "comma-separated lanes to score");
  s_cl->add_option("--pooling", cl.pooling)->check(CLI::IsMember({"max", "mean"}))->capture_default_str();
  s_cl->add_option("--out", cl.out, "scores CSV")->required();

  ScoreArgs sc;
  auto* s_sc = app.add_subcommand("score", "ROC curves and report for scored alarms");
  s_sc->add_option("--scores", sc.scores, "scores CSV files")->required()->expected(1, -1);
  s_sc->add_option("--truth", sc.truth, "ground-truth CSV")->required();
  s_sc->add_option("--out", sc.out, "output directory")->required();
  s_sc->add_flag("--ignore-clutter,!--keep-clutter", sc.ignore_clutter, "drop false alarms near clutter")
      ->capture_default_str();
  s_sc->add_option("--halo", sc.halo)->capture_default_str();

  PlotArgs pl;
  auto* s_pl = app.add_subcommand("plot", "Overlay ROC CSVs in one SVG");
  s_pl->add_option("--roc", pl.rocs, "ROC CSV files")->required()->expected(1, -1);
  s_pl->add_option("--out", pl.out, "SVG file")->required();
  s_pl->add_option("--title", pl.title)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (*s_sim) run_simulate(*s_sim, sim);
    else if (*s_pre) run_prescreen(*s_pre, pre);
    else if (*s_al) run_alarms(*s_al, al);
    else if (*s_tr) run_train(*s_tr, tr);
    else if (*s_cl) run_classify(*s_cl, cl);
    else if (*s_sc) run_score(*s_sc, sc);
    else if (*s_pl) run_plot(*s_pl, pl);
  } catch (const InvalidParameter& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
