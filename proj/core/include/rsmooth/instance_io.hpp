#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "rsmooth/instances.hpp"

namespace rsmooth {

/// Sidecar metadata stored next to a matrix dump.
struct InstanceMeta {
  std::string problem;  ///< "spca" or "cm"
  Index m = 0;          ///< SPCA sample count (0 for cm)
  Index n = 0;
  Index r = 0;
  double lambda = 0.0;
  std::uint64_t seed = 0;
  double length = 0.0;  ///< cm domain length (0 for spca)
  std::string hash;     ///< hex FNV-1a of the matrix dump
};

nlohmann::json to_json(const InstanceMeta& meta);
InstanceMeta instance_meta_from_json(const nlohmann::json& j);

/// 64-bit FNV-1a over the shape and the column-major doubles, as 16 hex digits.
std::string matrix_hash(const Matrix& m);

/// Writes `<stem>.bin` (int64 rows, int64 cols, column-major doubles, native
/// byte order) and `<stem>.json`. The hash field of `meta` is filled in.
InstanceMeta save_instance(const std::filesystem::path& stem, const Matrix& data,
                           InstanceMeta meta);

struct LoadedInstance {
  Matrix data;
  InstanceMeta meta;
};

/// Reads both files and throws IntegrityError when the dump does not match the
/// sidecar (hash, shape) or when `expected_seed` differs from the recorded seed.
LoadedInstance load_instance(const std::filesystem::path& stem,
                             std::optional<std::uint64_t> expected_seed = std::nullopt);

}  // namespace rsmooth
