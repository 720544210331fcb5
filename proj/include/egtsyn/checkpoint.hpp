// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <limits>
#include <string>

#include "egtsyn/model.hpp"

namespace egtsyn {

inline constexpr int kCheckpointFormatVersion = 1;

struct TrainingMetadata {
  int epoch = 0;
  double loss = std::numeric_limits<double>::quiet_NaN();
};

struct Checkpoint {
  model::SynergyModel model;
  TrainingMetadata training;
};

/// JSON document: format tag, format_version, config, training metadata and
/// every parameter as {name, shape, row-major values}. Doubles are written
/// in shortest round-trip form so a reload is bit-exact.
std::string checkpoint_to_string(const model::SynergyModel& model,
                                 const TrainingMetadata& training);
Checkpoint checkpoint_from_string(const std::string& text);

void save_checkpoint(const std::filesystem::path& path, const model::SynergyModel& model,
                     const TrainingMetadata& training);
/// Throws ConfigError on unknown format versions or parameter mismatches and
/// Error when the file cannot be read.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace egtsyn
