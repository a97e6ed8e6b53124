#include "tdefumi/scene.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

#include "tdefumi/errors.hpp"
#include "tdefumi/text.hpp"

namespace tdefumi {

std::string to_string(ObjectType t) {
  switch (t) {
    case ObjectType::kHMT: return "HMT";
    case ObjectType::kLMT: return "LMT";
    case ObjectType::kNMT: return "NMT";
    case ObjectType::kCL: return "CL";
  }
  return "?";
}

ObjectType parse_object_type(const std::string& s) {
  if (s == "HMT") return ObjectType::kHMT;
  if (s == "LMT") return ObjectType::kLMT;
  if (s == "NMT") return ObjectType::kNMT;
  if (s == "CL") return ObjectType::kCL;
  throw FormatError("unknown object type '" + s + "'");
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

void Lane::validate() const {
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].spectrum.size() != static_cast<Eigen::Index>(grid.size()))
      throw InvalidParameter("lane sample spectrum length does not match the frequency grid");
    if (i > 0 && !(samples[i].position_m > samples[i - 1].position_m))
      throw InvalidParameter("lane positions must be strictly increasing");
  }
  if (samples.size() > 2) {
    const double step = samples[1].position_m - samples[0].position_m;
    for (std::size_t i = 2; i < samples.size(); ++i)
      if (std::abs(samples[i].position_m - samples[i - 1].position_m - step) > 1e-9)
        throw InvalidParameter("lane samples must be uniformly spaced");
  }
}

void SceneConfig::validate() const {
  if (!(noise_sigma >= 0.0) || !(drift_amplitude >= 0.0))
    throw InvalidParameter("noise and drift amplitudes must be >= 0");
  if (!(sample_spacing_m > 0.0) || !(lane_length_m > 0.0) || !(drift_length_m > 0.0))
    throw InvalidParameter("sample spacing, lane length and drift length must be > 0");
  for (const auto& lane : lanes) {
    if (lane.lane_id.empty()) throw InvalidParameter("lane id must not be empty");
    for (const auto& o : lane.objects) {
      if (!(o.sigma_m > 0.0)) throw InvalidParameter("object extent must be > 0");
      o.params.validate();
    }
    for (const auto& a : lane.anomalies) {
      if (!(a.sigma_m > 0.0)) throw InvalidParameter("anomaly extent must be > 0");
      a.params.validate();
    }
  }
}

ComplexSpectrum soil_response(const FrequencyGrid& grid) {
  const double lo = std::log(grid.front()), span = std::log(grid.back()) - lo;
  ComplexSpectrum s(static_cast<Eigen::Index>(grid.size()));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double t = (std::log(grid.omegas()[i]) - lo) / span;
    s[static_cast<Eigen::Index>(i)] = {1.0 - 0.3 * t, -0.25};
  }
  return s / stack_complex(s).norm();
}

namespace {

double gain(double p, double center, double sigma) {
  const double d = p - center;
  return std::exp(-d * d / (2.0 * sigma * sigma));
}

}  // namespace

std::pair<Lane, std::vector<GroundTruthObject>> simulate_lane(const SceneConfig& scene,
                                                              std::size_t lane_index) {
  scene.validate();
  if (lane_index >= scene.lanes.size()) throw InvalidParameter("lane index out of range");
  const LaneScene& ls = scene.lanes[lane_index];
  const FrequencyGrid& grid = scene.grid;
  const auto n_freq = static_cast<Eigen::Index>(grid.size());

  std::mt19937_64 rng(derive_seed(scene.seed, lane_index));
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  // Drift envelope: three slow undulations around 1.
  struct Wave { double period, phase, amp; };
  std::vector<Wave> waves;
  for (int j = 0; j < 3; ++j)
    waves.push_back({scene.drift_length_m * (1.0 + 4.0 * unif(rng)), 2.0 * std::numbers::pi * unif(rng),
                     0.5 * (0.3 + 0.7 * unif(rng)) / 3.0});
  const ComplexSpectrum soil = soil_response(grid);

  std::vector<ComplexSpectrum> object_resp, anomaly_resp;
  for (const auto& o : ls.objects)
    object_resp.push_back(o.type == ObjectType::kNMT ? ComplexSpectrum::Zero(n_freq)
                                                     : dsrf_response(grid, o.params));
  for (const auto& a : ls.anomalies) anomaly_resp.push_back(dsrf_response(grid, a.params));

  Lane lane;
  lane.lane_id = ls.lane_id;
  lane.grid = grid;
  const auto count = static_cast<std::size_t>(std::floor(scene.lane_length_m / scene.sample_spacing_m + 1e-9)) + 1;
  lane.samples.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double p = static_cast<double>(i) * scene.sample_spacing_m;
    ComplexSpectrum s = ComplexSpectrum::Zero(n_freq);
    for (std::size_t k = 0; k < ls.objects.size(); ++k)
      s += gain(p, ls.objects[k].position_m, ls.objects[k].sigma_m) * object_resp[k];
    for (std::size_t k = 0; k < ls.anomalies.size(); ++k)
      s += gain(p, ls.anomalies[k].position_m, ls.anomalies[k].sigma_m) * anomaly_resp[k];
    if (scene.drift_amplitude > 0.0) {
      double env = 1.0;
      for (const auto& w : waves) env += w.amp * std::sin(2.0 * std::numbers::pi * p / w.period + w.phase);
      s += scene.drift_amplitude * env * soil;
    }
    if (scene.noise_sigma > 0.0)
      for (Eigen::Index f = 0; f < n_freq; ++f)
        s[f] += std::complex<double>(scene.noise_sigma * normal(rng), scene.noise_sigma * normal(rng));
    lane.samples.push_back({p, std::move(s)});
  }

  std::vector<GroundTruthObject> gt;
  for (const auto& o : ls.objects) gt.push_back({ls.lane_id, o.position_m, o.type});
  return {std::move(lane), std::move(gt)};
}

SimulatedScene simulate_scene(const SceneConfig& scene) {
  if (scene.lanes.empty()) throw InvalidParameter("scene has no lanes");
  SimulatedScene out;
  for (std::size_t i = 0; i < scene.lanes.size(); ++i) {
    auto [lane, gt] = simulate_lane(scene, i);
    out.lanes.push_back(std::move(lane));
    out.ground_truth.insert(out.ground_truth.end(), gt.begin(), gt.end());
  }
  return out;
}

namespace {

double log_uniform(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
  return std::exp(u(rng));
}

// DSRF parameters scaled so the stacked response has l2 norm `amplitude`.
DsrfParams scaled_params(const FrequencyGrid& grid, std::vector<double> zetas, std::vector<double> mix,
                         double amplitude) {
  DsrfParams p{0.0, std::move(mix), std::move(zetas)};
  const double n = stack_complex(dsrf_response(grid, p)).norm();
  for (double& c : p.cks) c *= amplitude / n;
  return p;
}

DsrfParams draw_params(std::mt19937_64& rng, const FrequencyGrid& grid, ObjectType type) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  switch (type) {
    case ObjectType::kHMT: {
      const double z1 = log_uniform(rng, 2.5e3, 1.2e4);
      const double z2 = z1 * (1.5 + 1.5 * u(rng));
      const double f = 0.6 + 0.3 * u(rng);
      return scaled_params(grid, {z1, z2}, {f, 1.0 - f}, 1.2 + 1.2 * u(rng));
    }
    case ObjectType::kLMT:
      return scaled_params(grid, {log_uniform(rng, 9e4, 3.5e5)}, {1.0}, 0.35 + 0.45 * u(rng));
    case ObjectType::kNMT:
      return {};
    case ObjectType::kCL:
      return scaled_params(grid, {log_uniform(rng, 4e3, 3e5)}, {1.0}, 0.3 + 1.2 * u(rng));
  }
  return {};
}

DsrfParams draw_anomaly(std::mt19937_64& rng, const FrequencyGrid& grid) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  // Magnetic ground answers with opposite polarity to conductive metal.
  return scaled_params(grid, {log_uniform(rng, 4e3, 3e5)}, {-1.0}, 0.3 + 0.9 * u(rng));
}

}  // namespace

std::vector<ObjectCounts> table1_counts() {
  // Per-lane anomaly counts follow the non-clutter false-alarm scale of the
  // reference alarm tables.
  return {{4, 7, 0, 6, 23}, {4, 10, 0, 4, 18}, {4, 7, 0, 8, 12},
          {6, 6, 3, 0, 17}, {7, 5, 5, 0, 13}, {6, 6, 2, 3, 5}};
}

SceneConfig make_scene(const std::vector<ObjectCounts>& lanes, std::uint64_t seed, const FrequencyGrid& grid) {
  SceneConfig scene;
  scene.grid = grid;
  scene.seed = seed;
  constexpr double margin = 1.5, sigma = 0.15;
  for (std::size_t li = 0; li < lanes.size(); ++li) {
    const ObjectCounts& c = lanes[li];
    std::mt19937_64 rng(derive_seed(seed, 1000 + li));
    std::uniform_real_distribution<double> u(0.0, 1.0);

    std::vector<int> kinds;  // 0..3 object types, 4 anomaly
    kinds.insert(kinds.end(), static_cast<std::size_t>(c.hmt), 0);
    kinds.insert(kinds.end(), static_cast<std::size_t>(c.lmt), 1);
    kinds.insert(kinds.end(), static_cast<std::size_t>(c.nmt), 2);
    kinds.insert(kinds.end(), static_cast<std::size_t>(c.cl), 3);
    kinds.insert(kinds.end(), static_cast<std::size_t>(c.anomalies), 4);
    std::shuffle(kinds.begin(), kinds.end(), rng);

    // One slot per item; jitter keeps neighbours at least min_sep apart.
    const double usable = scene.lane_length_m - 2.0 * margin;
    const double slot = kinds.empty() ? usable : usable / static_cast<double>(kinds.size());
    const double min_sep = std::min(0.9, slot);
    if (slot < 0.6) throw InvalidParameter("too many objects for the lane length");

    LaneScene ls;
    ls.lane_id = std::to_string(li + 1);
    for (std::size_t k = 0; k < kinds.size(); ++k) {
      const double jitter = (u(rng) - 0.5) * (slot - min_sep);
      const double pos = margin + (static_cast<double>(k) + 0.5) * slot + jitter;
      if (kinds[k] == 4) {
        ls.anomalies.push_back({pos, draw_anomaly(rng, grid), sigma});
      } else {
        const auto type = static_cast<ObjectType>(kinds[k]);
        ls.objects.push_back({type, pos, draw_params(rng, grid, type), sigma});
      }
    }
    scene.lanes.push_back(std::move(ls));
  }
  return scene;
}

SceneConfig table1_scene(std::uint64_t seed) { return make_scene(table1_counts(), seed); }

SceneConfig lmt_dominant_scene(std::uint64_t seed) {
  std::vector<ObjectCounts> lanes(6, ObjectCounts{2, 12, 0, 0, 10});
  return make_scene(lanes, seed);
}

// ---------------------------------------------------------------------------
// Key-value scene files.

namespace {

std::string format_params(const DsrfParams& p) {
  std::string s = "c0=" + text::fmt(p.c0) + " terms=";
  for (std::size_t k = 0; k < p.cks.size(); ++k) {
    if (k) s += ';';
    s += text::fmt(p.cks[k]) + "@" + text::fmt(p.zetas[k]);
  }
  return s;
}

DsrfParams parse_params(const std::vector<std::string>& toks, std::size_t first, long line) {
  DsrfParams p;
  for (std::size_t i = first; i < toks.size(); ++i) {
    const std::string& t = toks[i];
    if (t.rfind("c0=", 0) == 0) {
      p.c0 = text::to_double(t.substr(3), "c0", line);
    } else if (t.rfind("terms=", 0) == 0) {
      const std::string body = t.substr(6);
      if (body.empty()) continue;
      for (const auto& term : text::split(body, ';')) {
        const auto at = term.find('@');
        if (at == std::string::npos) throw FormatError("DSRF term must be amp@zeta", line);
        p.cks.push_back(text::to_double(term.substr(0, at), "amplitude", line));
        p.zetas.push_back(text::to_double(term.substr(at + 1), "zeta", line));
      }
    } else {
      throw FormatError("unexpected token '" + t + "'", line);
    }
  }
  return p;
}

std::vector<std::string> tokens(const std::string& s) {
  std::istringstream is(s);
  std::vector<std::string> out;
  for (std::string t; is >> t;) out.push_back(t);
  return out;
}

}  // namespace

void write_scene_config(std::ostream& os, const SceneConfig& scene) {
  os << "# tdefumi scene v1\n";
  os << "seed = " << scene.seed << "\n";
  os << "noise_sigma = " << text::fmt(scene.noise_sigma) << "\n";
  os << "drift_amplitude = " << text::fmt(scene.drift_amplitude) << "\n";
  os << "drift_length_m = " << text::fmt(scene.drift_length_m) << "\n";
  os << "sample_spacing_m = " << text::fmt(scene.sample_spacing_m) << "\n";
  os << "lane_length_m = " << text::fmt(scene.lane_length_m) << "\n";
  os << "freqs_rad_s = ";
  for (std::size_t i = 0; i < scene.grid.size(); ++i) os << (i ? "," : "") << text::fmt(scene.grid.omegas()[i]);
  os << "\n";
  for (const auto& lane : scene.lanes) {
    os << "lane = " << lane.lane_id << "\n";
    for (const auto& o : lane.objects)
      os << "object = " << lane.lane_id << " " << to_string(o.type) << " " << text::fmt(o.position_m) << " "
         << text::fmt(o.sigma_m) << " " << format_params(o.params) << "\n";
    for (const auto& a : lane.anomalies)
      os << "anomaly = " << lane.lane_id << " " << text::fmt(a.position_m) << " " << text::fmt(a.sigma_m) << " "
         << format_params(a.params) << "\n";
  }
}

SceneConfig read_scene_config(std::istream& is) {
  SceneConfig scene;
  std::string raw;
  long line = 0;
  auto find_lane = [&](const std::string& id) -> LaneScene& {
    for (auto& l : scene.lanes)
      if (l.lane_id == id) return l;
    throw FormatError("object references undeclared lane '" + id + "'", line);
  };
  while (std::getline(is, raw)) {
    ++line;
    const auto body = text::trim(raw);
    if (body.empty() || body.front() == '#') continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) throw FormatError("expected key = value", line);
    const std::string key(text::trim(body.substr(0, eq)));
    const std::string value(text::trim(body.substr(eq + 1)));
    if (key == "seed") {
      scene.seed = text::to_uint64(value, "seed", line);
    } else if (key == "noise_sigma") {
      scene.noise_sigma = text::to_double(value, key, line);
    } else if (key == "drift_amplitude") {
      scene.drift_amplitude = text::to_double(value, key, line);
    } else if (key == "drift_length_m") {
      scene.drift_length_m = text::to_double(value, key, line);
    } else if (key == "sample_spacing_m") {
      scene.sample_spacing_m = text::to_double(value, key, line);
    } else if (key == "lane_length_m") {
      scene.lane_length_m = text::to_double(value, key, line);
    } else if (key == "freqs_rad_s") {
      std::vector<double> w;
      for (const auto& f : text::split(value, ',')) w.push_back(text::to_double(f, "frequency", line));
      try {
        scene.grid = FrequencyGrid(std::move(w));
      } catch (const InvalidParameter& e) {
        throw FormatError(e.what(), line);
      }
    } else if (key == "lane") {
      if (value.empty()) throw FormatError("empty lane id", line);
      for (const auto& l : scene.lanes)
        if (l.lane_id == value) throw FormatError("duplicate lane '" + value + "'", line);
      scene.lanes.push_back({value, {}, {}});
    } else if (key == "object") {
      const auto t = tokens(value);
      if (t.size() < 4) throw FormatError("object needs lane, type, position, sigma", line);
      SceneObject o;
      o.type = parse_object_type(t[1]);
      o.position_m = text::to_double(t[2], "position", line);
      o.sigma_m = text::to_double(t[3], "sigma", line);
      o.params = parse_params(t, 4, line);
      find_lane(t[0]).objects.push_back(std::move(o));
    } else if (key == "anomaly") {
      const auto t = tokens(value);
      if (t.size() < 3) throw FormatError("anomaly needs lane, position, sigma", line);
      BackgroundAnomaly a;
      a.position_m = text::to_double(t[1], "position", line);
      a.sigma_m = text::to_double(t[2], "sigma", line);
      a.params = parse_params(t, 3, line);
      find_lane(t[0]).anomalies.push_back(std::move(a));
    } else {
      throw FormatError("unknown key '" + key + "'", line);
    }
  }
  try {
    scene.validate();
  } catch (const InvalidParameter& e) {
    throw FormatError(e.what());
  }
  return scene;
}

}  // namespace tdefumi
