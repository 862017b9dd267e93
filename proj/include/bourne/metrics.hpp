#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace bourne {

// Probability that a random positive outranks a random negative; ties count
// one half. Throws InvalidInput unless both classes are present.
double roc_auc(std::span<const double> scores, std::span<const std::uint8_t> labels);

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  bool operator==(const RocPoint&) const = default;
};

// One point per distinct score threshold, from (0,0) to (1,1).
std::vector<RocPoint> roc_curve(std::span<const double> scores,
                                std::span<const std::uint8_t> labels);
double trapezoid_area(const std::vector<RocPoint>& points);

struct PrecisionRecall {
  std::size_t k = 0;
  double precision = 0.0;
  double recall = 0.0;
  bool operator==(const PrecisionRecall&) const = default;
};

// Top k by score; ties at the boundary go to the lower index.
PrecisionRecall precision_recall_at_k(std::span<const double> scores,
                                      std::span<const std::uint8_t> labels, std::size_t k);

struct EvalReport {
  std::string task;  // "node" or "edge"
  double auc = 0.0;
  PrecisionRecall at_positives;          // k = number of true anomalies
  std::optional<PrecisionRecall> at_k;   // user-supplied k
  std::vector<RocPoint> roc_points;
  std::size_t num_scored = 0;
  std::size_t num_skipped = 0;
  nlohmann::json config;

  std::string summary_line() const;
  bool operator==(const EvalReport&) const = default;
};

void to_json(nlohmann::json& j, const EvalReport& r);
void from_json(const nlohmann::json& j, EvalReport& r);

// Objects whose score is absent or non-finite are skipped.
EvalReport evaluate(const std::string& task, std::span<const std::optional<double>> scores,
                    std::span<const std::uint8_t> labels, std::optional<std::size_t> user_k,
                    nlohmann::json config = nlohmann::json::object());

}  // namespace bourne
