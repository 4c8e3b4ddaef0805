#pragma once

#include <filesystem>
#include <stdexcept>
#include <vector>

#include "hyperfit/training.hpp"

namespace hyperfit::io {

struct DatasetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Reads a stress dataset in CSV form:
///
///   # optional provenance/comment lines
///   mode,lambda,p1,p3
///   UE,1.0,0.0,
///   PS,2.0,1.1,0.4
///
/// mode is one of UE/EBE/PS; stresses are MPa; p3 is blank except for PS.
/// Malformed rows raise DatasetError naming the line number.
std::vector<training::StressSample> load_dataset(const std::filesystem::path& path);

void save_dataset(const std::filesystem::path& path, std::span<const training::StressSample> samples,
                  std::string_view header_comment = {});

}  // namespace hyperfit::io
