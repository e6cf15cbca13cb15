#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "kspg/image.hpp"
#include "kspg/rng.hpp"

namespace kspg::policy {

/// conv3x3_pool: zero-padded 3x3 conv (no bias) -> instance norm -> ReLU -> 2x2 max-pool.
/// dense: affine map. activation: leaky ReLU, slope 0.01.
enum class LayerKind { conv3x3_pool, dense, activation };

struct LayerSpec {
  LayerKind kind;
  int in = 0;
  int out = 0;

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

struct Architecture {
  int input_height = 0;
  int input_width = 0;
  std::vector<LayerSpec> layers;

  /// Action-space width (output size of the last dense layer).
  int width() const;
  std::size_t parameter_count() const;
  /// Throws InvalidArgument when shapes do not chain.
  void validate() const;

  /// ASCII form, e.g. "in=32x32;conv3x3_pool=1:8;dense=1024:64;leaky_relu;dense=64:32".
  std::string descriptor() const;
  static Architecture parse(const std::string& descriptor);

  /// Two conv blocks 1->8->16, dense 64, leaky ReLU, dense `width`.
  static Architecture desk_default(int image_side, int width);
  /// Small variant for gradient checks: conv 1->2, dense 8, leaky ReLU, dense `width`.
  static Architecture tiny(int image_side, int width);

  friend bool operator==(const Architecture&, const Architecture&) = default;
};

struct GradientBuffer {
  std::vector<double> accum;
  std::int64_t sample_count = 0;

  GradientBuffer() = default;
  explicit GradientBuffer(std::size_t n) : accum(n, 0.0) {}

  void reset();
  void merge(const GradientBuffer& other);
  bool all_finite() const;
};

struct ParamRange {
  std::size_t offset = 0;
  std::size_t size = 0;
};

/// Softmax over unmeasured columns; measured columns get exactly 0.
/// Throws NoActionsAvailable when the mask is full.
std::vector<double> masked_softmax(std::span<const double> logits, const ColumnMask& mask);

/// q independent draws (with replacement) from `policy`.
std::vector<int> sample_actions(std::span<const double> policy, int q, Rng& rng);

class PolicyNetwork {
 public:
  /// Uniform init in +-sqrt(1/fan_in) for every weight and bias.
  PolicyNetwork(Architecture arch, std::uint64_t seed);
  PolicyNetwork(Architecture arch, std::vector<double> parameters);

  const Architecture& architecture() const { return arch_; }
  int width() const { return arch_.width(); }

  std::span<const double> parameters() const { return params_; }
  std::span<double> parameters() { return params_; }
  std::size_t parameter_count() const { return params_.size(); }

  GradientBuffer make_buffer() const { return GradientBuffer(params_.size()); }

  /// Weights (and biases, for dense layers) of layer `index` in arch.layers.
  ParamRange layer_parameters(std::size_t index) const;
  ParamRange final_dense_weights() const;
  ParamRange final_dense_bias() const;

  std::vector<double> logits(const Image& observation) const;

  /// Masked policy over all W columns.
  std::vector<double> forward(const Image& observation, const ColumnMask& mask) const;

  /// buf += weight * grad log pi(action | observation, mask).
  void accumulate_log_prob_gradient(const Image& observation, const ColumnMask& mask, int action,
                                    double weight, GradientBuffer& buf) const;

  /// Sum over i of weights[i] * grad log pi(actions[i]) in a single backward pass.
  void accumulate_log_prob_gradients(const Image& observation, const ColumnMask& mask,
                                     std::span<const int> actions, std::span<const double> weights,
                                     GradientBuffer& buf) const;

 private:
  struct Tape;

  void forward_tape(const Image& observation, Tape& tape) const;
  void backward(const Tape& tape, std::vector<double> grad_logits, std::span<double> grad) const;

  Architecture arch_;
  std::vector<double> params_;
  std::vector<std::size_t> offsets_;
};

}  // namespace kspg::policy
