#include "bourne/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "bourne/errors.hpp"

namespace bourne {

namespace {

void check_sizes(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  if (scores.size() != labels.size()) throw InvalidInput("scores and labels differ in length");
}

// Indices sorted by descending score, ties by ascending index.
std::vector<std::size_t> ranking(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return order;
}

}  // namespace

double roc_auc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  check_sizes(scores, labels);
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Average ranks over tie groups, then the Mann-Whitney statistic.
  double positive_rank_sum = 0.0;
  std::size_t positives = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t t = i; t < j; ++t) {
      if (labels[order[t]]) {
        positive_rank_sum += avg_rank;
        ++positives;
      }
    }
    i = j;
  }
  const auto negatives = scores.size() - positives;
  if (positives == 0 || negatives == 0) throw InvalidInput("roc_auc needs both classes");
  const double p = static_cast<double>(positives);
  const double n = static_cast<double>(negatives);
  return (positive_rank_sum - p * (p + 1.0) / 2.0) / (p * n);
}

std::vector<RocPoint> roc_curve(std::span<const double> scores,
                                std::span<const std::uint8_t> labels) {
  check_sizes(scores, labels);
  const auto order = ranking(scores);
  const auto positives = static_cast<std::size_t>(std::count_if(
      labels.begin(), labels.end(), [](std::uint8_t l) { return l != 0; }));
  const auto negatives = scores.size() - positives;
  if (positives == 0 || negatives == 0) throw InvalidInput("roc_curve needs both classes");
  std::vector<RocPoint> points{{0.0, 0.0}};
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      if (labels[order[j]]) ++tp;
      else ++fp;
      ++j;
    }
    points.push_back({static_cast<double>(fp) / static_cast<double>(negatives),
                      static_cast<double>(tp) / static_cast<double>(positives)});
    i = j;
  }
  return points;
}

double trapezoid_area(const std::vector<RocPoint>& points) {
  double area = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i) {
    area += (points[i].fpr - points[i - 1].fpr) * (points[i].tpr + points[i - 1].tpr) / 2.0;
  }
  return area;
}

PrecisionRecall precision_recall_at_k(std::span<const double> scores,
                                      std::span<const std::uint8_t> labels, std::size_t k) {
  check_sizes(scores, labels);
  if (k == 0 || k > scores.size()) {
    throw InvalidInput(fmt::format("k={} must lie in [1, {}]", k, scores.size()));
  }
  const auto positives = static_cast<std::size_t>(std::count_if(
      labels.begin(), labels.end(), [](std::uint8_t l) { return l != 0; }));
  if (positives == 0) throw InvalidInput("precision/recall need at least one positive");
  const auto order = ranking(scores);
  std::size_t tp = 0;
  for (std::size_t i = 0; i < k; ++i) tp += labels[order[i]] ? 1 : 0;
  return {k, static_cast<double>(tp) / static_cast<double>(k),
          static_cast<double>(tp) / static_cast<double>(positives)};
}

std::string EvalReport::summary_line() const {
  const auto& pr = at_k ? *at_k : at_positives;
  return fmt::format("task={} auc={:.4f} pre@k={:.4f} rec@k={:.4f} k={}", task, auc, pr.precision,
                     pr.recall, pr.k);
}

namespace {

nlohmann::json pr_json(const PrecisionRecall& p) {
  return {{"k", p.k}, {"precision", p.precision}, {"recall", p.recall}};
}

PrecisionRecall pr_from(const nlohmann::json& j) {
  return {j.at("k").get<std::size_t>(), j.at("precision").get<double>(),
          j.at("recall").get<double>()};
}

}  // namespace

void to_json(nlohmann::json& j, const EvalReport& r) {
  j = nlohmann::json::object();
  j["task"] = r.task;
  j["auc"] = r.auc;
  j["at_num_positives"] = pr_json(r.at_positives);
  j["at_k"] = r.at_k ? pr_json(*r.at_k) : nlohmann::json(nullptr);
  auto& roc = j["roc_points"] = nlohmann::json::array();
  for (const auto& p : r.roc_points) roc.push_back({p.fpr, p.tpr});
  j["num_scored"] = r.num_scored;
  j["num_skipped"] = r.num_skipped;
  j["config"] = r.config;
}

void from_json(const nlohmann::json& j, EvalReport& r) {
  try {
    r.task = j.at("task").get<std::string>();
    r.auc = j.at("auc").get<double>();
    r.at_positives = pr_from(j.at("at_num_positives"));
    r.at_k = j.at("at_k").is_null() ? std::nullopt : std::optional(pr_from(j.at("at_k")));
    r.roc_points.clear();
    for (const auto& p : j.at("roc_points")) {
      r.roc_points.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    }
    r.num_scored = j.at("num_scored").get<std::size_t>();
    r.num_skipped = j.at("num_skipped").get<std::size_t>();
    r.config = j.at("config");
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(fmt::format("malformed evaluation report: {}", e.what()));
  }
}

EvalReport evaluate(const std::string& task, std::span<const std::optional<double>> scores,
                    std::span<const std::uint8_t> labels, std::optional<std::size_t> user_k,
                    nlohmann::json config) {
  if (scores.size() != labels.size()) throw InvalidInput("scores and labels differ in length");
  std::vector<double> kept;
  std::vector<std::uint8_t> kept_labels;
  EvalReport r;
  r.task = task;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (scores[i] && std::isfinite(*scores[i])) {
      kept.push_back(*scores[i]);
      kept_labels.push_back(labels[i] ? 1 : 0);
    } else {
      ++r.num_skipped;
    }
  }
  r.num_scored = kept.size();
  r.auc = roc_auc(kept, kept_labels);
  r.roc_points = roc_curve(kept, kept_labels);
  const auto positives = static_cast<std::size_t>(
      std::count(kept_labels.begin(), kept_labels.end(), std::uint8_t{1}));
  r.at_positives = precision_recall_at_k(kept, kept_labels, positives);
  if (user_k) r.at_k = precision_recall_at_k(kept, kept_labels, *user_k);
  r.config = std::move(config);
  return r;
}

}  // namespace bourne
