#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "bourne/nn.hpp"
#include "json.hpp"

namespace bourne {

struct OptimizerSnapshot {
  std::int64_t step = 0;
  std::vector<Matrix> first_moments;
  std::vector<Matrix> second_moments;
};

OptimizerSnapshot snapshot(const Adam& adam);

struct CheckpointData {
  std::vector<Parameter> parameters;  // file order
  std::int64_t step = 0;
  float tau = 0.0f;
  nlohmann::json extra;  // free-form, e.g. configs
  std::optional<OptimizerSnapshot> optimizer;
};

// Layout: 8-byte magic, uint64 LE header length, JSON header, then float32 LE
// parameter data in header order, then (if present) first and second moments
// in the same order.
void save_checkpoint(const std::filesystem::path& path,
                     const std::vector<const Parameter*>& parameters, std::int64_t step,
                     float tau, const nlohmann::json& extra,
                     const std::optional<OptimizerSnapshot>& optimizer);

CheckpointData load_checkpoint(const std::filesystem::path& path);

}  // namespace bourne
