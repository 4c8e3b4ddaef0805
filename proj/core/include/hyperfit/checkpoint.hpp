#pragma once

#include <filesystem>
#include <stdexcept>

#include "hyperfit/pnam.hpp"
#include "hyperfit/training.hpp"

namespace hyperfit::io {

struct CheckpointError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr int kCheckpointVersion = 1;

/// Everything needed to resume or audit a step-1 run. Serialization is
/// JSON with shortest-round-trip doubles and sorted keys, so
/// save -> load -> save is byte-identical and predictions survive the
/// round trip to the last bit.
struct Checkpoint {
  int version = kCheckpointVersion;
  pnam::PnamModel model;
  training::TrainConfig config;
  std::vector<training::EpochLoss> history;
  int best_epoch = 0;
};

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& cp);

/// Throws CheckpointError on a version mismatch or a structurally corrupt
/// file.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace hyperfit::io
