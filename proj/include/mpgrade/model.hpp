#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mpgrade/volume.hpp"

namespace mpgrade {

struct PoolGrid {
  std::size_t z = 4;
  std::size_t y = 8;
  std::size_t x = 8;

  std::size_t cells() const { return z * y * x; }
  bool operator==(const PoolGrid&) const = default;
};

struct ModelConfig {
  PoolGrid grid;
  std::size_t hidden_width = 64;
  std::size_t num_classes = 2;
  std::uint64_t init_seed = 0;
  std::vector<std::string> channels{"T2W", "ADC", "DWI", "FE"};  // input channels, in order

  std::size_t input_dim() const { return channels.size() * grid.cells(); }
  void validate() const;
};

// Adaptive average pooling of the selected channels onto the grid, scaled by
// 1/255, flattened as [channel, gz, gy, gx].
std::vector<double> pool_volume(const MpMriVolume& vol, const PoolGrid& grid, std::span<const std::string> channels);

// pool -> dense(tanh) -> dense -> softmax. Parameters are one flat vector laid
// out as W1 [H x D], b1 [H], W2 [K x H], b2 [K].
class SurrogateClassifier {
 public:
  // Glorot-uniform weights seeded by cfg.init_seed, zero biases.
  explicit SurrogateClassifier(ModelConfig cfg);

  static SurrogateClassifier zeroed(ModelConfig cfg);

  const ModelConfig& config() const { return cfg_; }
  std::size_t input_dim() const { return cfg_.input_dim(); }
  std::size_t hidden_width() const { return cfg_.hidden_width; }
  std::size_t num_classes() const { return cfg_.num_classes; }
  std::size_t parameter_count() const { return params_.size(); }

  std::span<const double> parameters() const { return params_; }
  // Any mutable access invalidates outstanding forward caches.
  std::span<double> mutable_parameters();
  void set_parameters(std::span<const double> values);
  std::uint64_t version() const { return version_; }

  std::size_t w1_offset() const { return 0; }
  std::size_t b1_offset() const { return cfg_.hidden_width * input_dim(); }
  std::size_t w2_offset() const { return b1_offset() + cfg_.hidden_width; }
  std::size_t b2_offset() const { return w2_offset() + cfg_.num_classes * cfg_.hidden_width; }

 private:
  ModelConfig cfg_;
  std::vector<double> params_;
  std::uint64_t version_;
};

struct ForwardCache {
  std::vector<double> input;
  std::vector<double> hidden;  // tanh activations
  std::vector<double> logits;
  std::vector<double> probs;
  const SurrogateClassifier* model = nullptr;
  std::uint64_t version = 0;
};

ForwardCache forward_features(const SurrogateClassifier& model, std::span<const double> features);
ForwardCache forward(const SurrogateClassifier& model, const MpMriVolume& vol);

// Adds dL/dtheta for one sample to `grad` (same layout as the parameters),
// given dL/dp for that sample's softmax outputs. Throws on a stale cache.
void backward(const SurrogateClassifier& model, const ForwardCache& cache, std::span<const double> d_probs,
              std::span<double> grad);

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::uint64_t step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state, double lr);

}  // namespace mpgrade
