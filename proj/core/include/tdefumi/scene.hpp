#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tdefumi/dsrf.hpp"

namespace tdefumi {

enum class ObjectType { kHMT, kLMT, kNMT, kCL };

std::string to_string(ObjectType t);
// Accepts "HMT", "LMT", "NMT", "CL". Throws FormatError otherwise.
ObjectType parse_object_type(const std::string& s);

struct LaneSample {
  double position_m = 0.0;
  ComplexSpectrum spectrum;
};

// One down-track sweep with uniformly spaced samples.
struct Lane {
  std::string lane_id;
  FrequencyGrid grid;
  std::vector<LaneSample> samples;

  std::size_t size() const { return samples.size(); }
  FeatureVector feature(std::size_t i) const { return stack_complex(samples[i].spectrum); }
  // Throws InvalidParameter unless positions are strictly increasing and
  // uniformly spaced within 1e-9 m and every spectrum matches the grid.
  void validate() const;
};

struct GroundTruthObject {
  std::string lane_id;
  double position_m = 0.0;
  ObjectType type = ObjectType::kHMT;
};

struct SceneObject {
  ObjectType type = ObjectType::kHMT;
  double position_m = 0.0;
  DsrfParams params;
  double sigma_m = 0.15;
};

// Localized geologic response. Not part of ground truth.
struct BackgroundAnomaly {
  double position_m = 0.0;
  DsrfParams params;
  double sigma_m = 0.15;
};

struct LaneScene {
  std::string lane_id;
  std::vector<SceneObject> objects;
  std::vector<BackgroundAnomaly> anomalies;
};

struct SceneConfig {
  FrequencyGrid grid = FrequencyGrid::default_grid();
  std::vector<LaneScene> lanes;
  double noise_sigma = 0.01;      // per real component
  double drift_amplitude = 0.2;   // soil response scale
  double drift_length_m = 2.0;    // shortest drift undulation period
  double sample_spacing_m = 0.05;
  double lane_length_m = 60.0;
  std::uint64_t seed = 1;

  void validate() const;
};

// Simulates lane `lane_index` of the scene. Each sample is the sum of
// Gaussian-weighted DSRF responses of every object and anomaly, a slowly
// varying soil response, and white Gaussian noise. NMT objects contribute no
// signal. Deterministic given the scene seed.
std::pair<Lane, std::vector<GroundTruthObject>> simulate_lane(const SceneConfig& scene,
                                                              std::size_t lane_index = 0);

struct SimulatedScene {
  std::vector<Lane> lanes;
  std::vector<GroundTruthObject> ground_truth;
};
SimulatedScene simulate_scene(const SceneConfig& scene);

// Frequency shape of the background soil response: in-phase part falling
// linearly in log frequency, flat quadrature part.
ComplexSpectrum soil_response(const FrequencyGrid& grid);

struct ObjectCounts {
  int hmt = 0, lmt = 0, nmt = 0, cl = 0, anomalies = 0;
};

// Randomized scene with the given per-lane object counts. Lanes are named
// "1", "2", ... in order.
SceneConfig make_scene(const std::vector<ObjectCounts>& lanes, std::uint64_t seed,
                       const FrequencyGrid& grid = FrequencyGrid::default_grid());

// Six lanes with 31 HMT, 41 LMT, 10 NMT and 11 CL objects.
SceneConfig table1_scene(std::uint64_t seed);
// Six lanes dominated by low-metal targets.
SceneConfig lmt_dominant_scene(std::uint64_t seed);
std::vector<ObjectCounts> table1_counts();

void write_scene_config(std::ostream& os, const SceneConfig& scene);
SceneConfig read_scene_config(std::istream& is);

// splitmix64 step; used to derive independent sub-seeds from one top-level seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace tdefumi
