#include "bourne/model.hpp"

#include <fmt/format.h>

#include "bourne/errors.hpp"
#include "bourne/random.hpp"

namespace bourne {

namespace {

Parameter scalar(std::string name, float value) {
  return Parameter(std::move(name), Matrix::Constant(1, 1, value));
}

}  // namespace

void ModelConfig::validate() const {
  if (input_dim == 0 || embedding_dim == 0 || predictor_hidden == 0 || layers == 0) {
    throw InvalidInput("model dimensions and layer count must be positive");
  }
}

BourneModel::BourneModel(const ModelConfig& config, std::uint64_t seed) : config_(config) {
  config.validate();
  auto rng = make_rng({seed, stream(Stream::kInit)});
  for (std::size_t l = 0; l < config.layers; ++l) {
    const auto fan_in = l == 0 ? config.input_dim : config.embedding_dim;
    online.gcn_weights.emplace_back(fmt::format("gcn.weight.{}", l),
                                    glorot_uniform(fan_in, config.embedding_dim, rng));
    online.gcn_slopes.push_back(scalar(fmt::format("gcn.prelu.{}", l), config.prelu_init));
  }
  online.predictor_in = Parameter(
      "predictor.weight.0", glorot_uniform(config.embedding_dim, config.predictor_hidden, rng));
  online.predictor_slope = scalar("predictor.prelu", config.prelu_init);
  online.predictor_out = Parameter(
      "predictor.weight.1", glorot_uniform(config.predictor_hidden, config.embedding_dim, rng));
  for (std::size_t l = 0; l < config.layers; ++l) {
    target.hgnn_weights.emplace_back(fmt::format("hgnn.weight.{}", l),
                                     online.gcn_weights[l].value);
    target.hgnn_slopes.push_back(scalar(fmt::format("hgnn.prelu.{}", l), config.prelu_init));
  }
}

std::vector<Parameter*> BourneModel::online_parameters() {
  std::vector<Parameter*> out;
  for (auto& p : online.gcn_weights) out.push_back(&p);
  for (auto& p : online.gcn_slopes) out.push_back(&p);
  out.push_back(&online.predictor_in);
  out.push_back(&online.predictor_slope);
  out.push_back(&online.predictor_out);
  return out;
}

std::vector<Parameter*> BourneModel::target_parameters() {
  std::vector<Parameter*> out;
  for (auto& p : target.hgnn_weights) out.push_back(&p);
  for (auto& p : target.hgnn_slopes) out.push_back(&p);
  return out;
}

std::vector<Parameter*> BourneModel::all_parameters() {
  auto out = online_parameters();
  const auto t = target_parameters();
  out.insert(out.end(), t.begin(), t.end());
  return out;
}

std::vector<const Parameter*> BourneModel::all_parameters() const {
  auto mutable_ptrs = const_cast<BourneModel*>(this)->all_parameters();
  return {mutable_ptrs.begin(), mutable_ptrs.end()};
}

std::vector<EmaLink> BourneModel::ema_links(float tau) const {
  std::vector<EmaLink> links;
  for (std::size_t l = 0; l < online.gcn_weights.size(); ++l) {
    links.push_back({online.gcn_weights[l].name, target.hgnn_weights[l].name, tau});
  }
  return links;
}

void BourneModel::apply_ema(float tau) {
  for (std::size_t l = 0; l < online.gcn_weights.size(); ++l) {
    ema_update(online.gcn_weights[l], target.hgnn_weights[l], tau);
  }
}

}  // namespace bourne
