#pragma once

#include <iosfwd>
#include <string>

#include "tdefumi/td_efumi.hpp"

namespace tdefumi {

// Text model format, header "tdefumi-model v1". Doubles are written with 17
// significant digits so a save/load round trip reproduces scores bit-exactly.
void save_model(std::ostream& os, const Model& model);
Model load_model(std::istream& is);

void save_model(const std::string& path, const Model& model);
Model load_model(const std::string& path);

// key = value lines for every TrainConfig field, in a fixed order.
void write_train_config(std::ostream& os, const TrainConfig& cfg, const std::string& prefix = "");
// Applies one key/value pair; returns false for unknown keys.
bool apply_train_config_key(TrainConfig& cfg, const std::string& key, const std::string& value);

}  // namespace tdefumi
