#pragma once

// Feed-forward classifier: n intermediate blocks (dense -> dropout -> ReLU)
// followed by a final dense layer, trained with softmax cross-entropy and
// an adaptive-moment optimizer. Layer widths shrink geometrically from the
// input width to the number of classes.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace analogy {

enum class Activation : std::uint8_t { kRelu = 0 };

struct NetworkConfig {
  std::uint32_t input_dim = 0;
  std::uint32_t n_blocks = 2;
  double dropout_rate = 0.3;
  Activation activation = Activation::kRelu;
  std::uint32_t output_dim = 2;
  std::uint64_t seed = 0;

  // Throws DataError when the configuration is unusable.
  void validate() const;

  bool operator==(const NetworkConfig&) const = default;
};

// sizes[0] = input_dim, sizes[n_blocks + 1] = output_dim, and in between
// round(input_dim * r^k) with r = (output_dim / input_dim)^(1 / (n_blocks + 1)),
// rounding half away from zero.
std::vector<std::uint32_t> layer_sizes(std::uint32_t input_dim, std::uint32_t n_blocks,
                                       std::uint32_t output_dim = 2);

// Weights plus biases over consecutive layer widths.
std::uint64_t parameter_count(std::span<const std::uint32_t> sizes);

template <typename T>
struct DenseLayer {
  std::uint32_t in = 0;
  std::uint32_t out = 0;
  std::vector<T> weights;  // out x in, row-major
  std::vector<T> bias;     // out

  bool operator==(const DenseLayer&) const = default;
};

template <typename T>
struct Parameters {
  std::vector<DenseLayer<T>> layers;

  static Parameters zeros(std::span<const std::uint32_t> sizes);

  std::size_t size() const;
  std::vector<std::uint32_t> sizes() const;

  template <typename U>
  Parameters<U> cast() const {
    Parameters<U> out;
    for (const auto& l : layers) {
      out.layers.push_back({l.in, l.out, std::vector<U>(l.weights.begin(), l.weights.end()),
                            std::vector<U>(l.bias.begin(), l.bias.end())});
    }
    return out;
  }

  bool operator==(const Parameters&) const = default;
};

// Fan-in scaled uniform weights (limit sqrt(6 / fan_in)), zero biases,
// seeded from config.seed.
Parameters<float> init_parameters(const NetworkConfig& config);

// Dropout mask bit for one unit. Pure function of its arguments, so the
// forward and backward passes (and resumed runs) agree on every mask.
bool dropout_keep(std::uint64_t dropout_seed, std::size_t layer, std::size_t row, std::size_t unit,
                  double rate);

template <typename T>
struct ForwardPass {
  std::size_t rows = 0;
  // inputs[l] is the (rows x layers[l].in) input of dense layer l; for l > 0
  // it is the post-dropout, post-activation output of the previous block.
  std::vector<std::vector<T>> inputs;
  std::vector<T> scores;  // rows x output_dim
};

// `batch` holds rows x input_dim values, row-major. train = true applies
// inverted dropout after every intermediate dense layer.
template <typename T>
ForwardPass<T> forward(const Parameters<T>& params, const NetworkConfig& config,
                       std::span<const T> batch, std::size_t rows, bool train,
                       std::uint64_t dropout_seed);

// Row-wise softmax in double precision.
template <typename T>
std::vector<double> softmax(std::span<const T> scores, std::size_t rows, std::size_t classes);

// Row-wise argmax; ties go to the lower class index.
template <typename T>
std::vector<std::uint32_t> argmax_rows(std::span<const T> scores, std::size_t rows,
                                       std::size_t classes);

template <typename T>
struct LossAndGrad {
  double loss = 0.0;  // mean cross-entropy over the batch
  std::size_t correct = 0;
  Parameters<T> grads;
};

// Throws DivergenceError when the loss is not finite.
template <typename T>
LossAndGrad<T> loss_and_grad(const Parameters<T>& params, const NetworkConfig& config,
                             std::span<const T> batch, std::size_t rows,
                             std::span<const std::uint32_t> labels, bool train,
                             std::uint64_t dropout_seed);

struct AdamHyperparams {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  bool operator==(const AdamHyperparams&) const = default;
};

template <typename T>
struct AdamState {
  std::uint64_t step = 0;
  Parameters<T> first_moment;
  Parameters<T> second_moment;

  static AdamState fresh(const Parameters<T>& like);
  bool operator==(const AdamState&) const = default;
};

// Bias-corrected adaptive-moment update, computed in double per component.
template <typename T>
void adam_step(Parameters<T>& params, AdamState<T>& state, const Parameters<T>& grads,
               const AdamHyperparams& hyper);

struct MetricsRow {
  std::uint32_t checkpoint = 0;
  double loss = 0.0;
  double accuracy = 0.0;

  bool operator==(const MetricsRow&) const = default;
};

struct NetworkCheckpoint {
  static constexpr std::uint16_t kVersion = 1;

  NetworkConfig config;
  AdamHyperparams adam;
  Parameters<float> params;
  AdamState<float> optimizer;
  std::uint32_t segments_completed = 0;
  std::vector<MetricsRow> history;

  bool operator==(const NetworkCheckpoint&) const = default;
};

NetworkCheckpoint fresh_checkpoint(const NetworkConfig& config, const AdamHyperparams& adam = {});

// Convenience: eval-mode or train-mode forward pass in 32-bit.
ForwardPass<float> forward(const NetworkCheckpoint& checkpoint, std::span<const float> batch,
                           std::size_t rows, bool train = false, std::uint64_t dropout_seed = 0);

// "ANCK" | u16 version | config | optimizer hyperparameters | segments
// completed | per-layer row-major f32 weights and biases | optimizer step and
// moments | metrics history | u64 FNV-1a checksum of all preceding bytes.
std::string serialize_checkpoint(const NetworkCheckpoint& checkpoint);
NetworkCheckpoint deserialize_checkpoint(std::string_view bytes);
void checkpoint_save(const NetworkCheckpoint& checkpoint, const std::filesystem::path& path);
NetworkCheckpoint checkpoint_load(const std::filesystem::path& path);

}  // namespace analogy
