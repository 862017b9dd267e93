#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "bourne/nn.hpp"

namespace bourne {

struct ModelConfig {
  std::size_t input_dim = 0;           // D
  std::size_t embedding_dim = 128;     // D'
  std::size_t predictor_hidden = 512;
  std::size_t layers = 1;              // encoder depth on both sides
  float prelu_init = 0.25f;

  void validate() const;
};

// Online side: GCN weights, their PReLU slopes, and the two-layer predictor.
struct OnlineParameters {
  std::vector<Parameter> gcn_weights;
  std::vector<Parameter> gcn_slopes;  // 1x1 each
  Parameter predictor_in;
  Parameter predictor_slope;
  Parameter predictor_out;
};

// Target side: HGNN weights tracked by EMA of the GCN weights. The slopes
// keep their initial value unless symmetric roles are enabled.
struct TargetParameters {
  std::vector<Parameter> hgnn_weights;
  std::vector<Parameter> hgnn_slopes;
};

class BourneModel {
 public:
  BourneModel() = default;
  // Glorot-initialized online weights; target weights start as copies.
  BourneModel(const ModelConfig& config, std::uint64_t seed);

  const ModelConfig& config() const { return config_; }

  OnlineParameters online;
  TargetParameters target;

  std::vector<Parameter*> online_parameters();
  std::vector<Parameter*> target_parameters();
  // Online then target, the checkpoint order.
  std::vector<Parameter*> all_parameters();
  std::vector<const Parameter*> all_parameters() const;

  std::vector<EmaLink> ema_links(float tau) const;
  void apply_ema(float tau);

 private:
  ModelConfig config_;
};

}  // namespace bourne
