#include "analogy/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "analogy/binary_io.hpp"
#include "analogy/error.hpp"
#include "analogy/hash.hpp"
#include "analogy/rng.hpp"

namespace analogy {

void NetworkConfig::validate() const {
  if (input_dim == 0) throw DataError("network input_dim must be positive");
  if (output_dim < 2) throw DataError("network output_dim must be at least 2");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
    throw DataError("dropout rate must lie in [0, 1)");
  }
  if (activation != Activation::kRelu) throw DataError("unsupported activation");
}

std::vector<std::uint32_t> layer_sizes(std::uint32_t input_dim, std::uint32_t n_blocks,
                                       std::uint32_t output_dim) {
  std::vector<std::uint32_t> sizes{input_dim};
  const double ratio = std::pow(static_cast<double>(output_dim) / input_dim, 1.0 / (n_blocks + 1));
  for (std::uint32_t k = 1; k <= n_blocks; ++k) {
    // std::round rounds half away from zero.
    const double width = std::round(input_dim * std::pow(ratio, k));
    sizes.push_back(static_cast<std::uint32_t>(std::max(1.0, width)));
  }
  sizes.push_back(output_dim);
  return sizes;
}

std::uint64_t parameter_count(std::span<const std::uint32_t> sizes) {
  std::uint64_t n = 0;
  for (std::size_t k = 0; k + 1 < sizes.size(); ++k) {
    n += std::uint64_t{sizes[k]} * sizes[k + 1] + sizes[k + 1];
  }
  return n;
}

template <typename T>
Parameters<T> Parameters<T>::zeros(std::span<const std::uint32_t> sizes) {
  Parameters<T> p;
  for (std::size_t k = 0; k + 1 < sizes.size(); ++k) {
    DenseLayer<T> l;
    l.in = sizes[k];
    l.out = sizes[k + 1];
    l.weights.assign(std::size_t{l.in} * l.out, T{0});
    l.bias.assign(l.out, T{0});
    p.layers.push_back(std::move(l));
  }
  return p;
}

template <typename T>
std::size_t Parameters<T>::size() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.weights.size() + l.bias.size();
  return n;
}

template <typename T>
std::vector<std::uint32_t> Parameters<T>::sizes() const {
  std::vector<std::uint32_t> s;
  if (layers.empty()) return s;
  s.push_back(layers.front().in);
  for (const auto& l : layers) s.push_back(l.out);
  return s;
}

Parameters<float> init_parameters(const NetworkConfig& config) {
  config.validate();
  const auto sizes = layer_sizes(config.input_dim, config.n_blocks, config.output_dim);
  auto p = Parameters<float>::zeros(sizes);
  Rng rng(derive_seed(config.seed, "init"));
  for (auto& l : p.layers) {
    const double limit = std::sqrt(6.0 / l.in);
    for (auto& w : l.weights) w = static_cast<float>((2.0 * rng.uniform() - 1.0) * limit);
  }
  return p;
}

bool dropout_keep(std::uint64_t dropout_seed, std::size_t layer, std::size_t row, std::size_t unit,
                  double rate) {
  if (rate <= 0.0) return true;
  const std::uint64_t stream = derive_seed(dropout_seed, layer);
  const std::uint64_t bits = splitmix64(stream ^ (std::uint64_t{row} << 32 | unit));
  return unit_interval(bits) >= rate;
}

namespace {

// Four independent accumulators: fixed summation order, vectorizer friendly.
template <typename T>
T dot(const T* a, const T* b, std::size_t n) {
  T s0{0}, s1{0}, s2{0}, s3{0};
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
  }
  for (; i < n; ++i) s0 += a[i] * b[i];
  return (s0 + s1) + (s2 + s3);
}

template <typename T>
void axpy(T alpha, const T* x, T* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

}  // namespace

template <typename T>
ForwardPass<T> forward(const Parameters<T>& params, const NetworkConfig& config,
                       std::span<const T> batch, std::size_t rows, bool train,
                       std::uint64_t dropout_seed) {
  if (params.layers.empty()) throw DataError("network has no layers");
  const std::size_t in_dim = params.layers.front().in;
  if (batch.size() != rows * in_dim) {
    throw DataError("batch width mismatch: expected " + std::to_string(rows) + " x " +
                    std::to_string(in_dim) + " values, got " + std::to_string(batch.size()));
  }
  ForwardPass<T> pass;
  pass.rows = rows;
  pass.inputs.reserve(params.layers.size());
  pass.inputs.emplace_back(batch.begin(), batch.end());

  const double rate = train ? config.dropout_rate : 0.0;
  const T scale = static_cast<T>(1.0 / (1.0 - rate));

  for (std::size_t li = 0; li < params.layers.size(); ++li) {
    const auto& layer = params.layers[li];
    const std::vector<T>& x = pass.inputs[li];
    std::vector<T> z(rows * layer.out);
    for (std::size_t r = 0; r < rows; ++r) {
      const T* xr = x.data() + r * layer.in;
      T* zr = z.data() + r * layer.out;
      for (std::size_t o = 0; o < layer.out; ++o) {
        zr[o] = layer.bias[o] + dot(xr, layer.weights.data() + o * layer.in, layer.in);
      }
    }
    const bool last = li + 1 == params.layers.size();
    if (last) {
      pass.scores = std::move(z);
      break;
    }
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t o = 0; o < layer.out; ++o) {
        T& v = z[r * layer.out + o];
        if (train && rate > 0.0) {
          v = dropout_keep(dropout_seed, li, r, o, rate) ? v * scale : T{0};
        }
        if (v < T{0}) v = T{0};
      }
    }
    pass.inputs.push_back(std::move(z));
  }
  return pass;
}

template <typename T>
std::vector<double> softmax(std::span<const T> scores, std::size_t rows, std::size_t classes) {
  std::vector<double> p(rows * classes);
  for (std::size_t r = 0; r < rows; ++r) {
    const T* s = scores.data() + r * classes;
    double m = s[0];
    for (std::size_t c = 1; c < classes; ++c) m = std::max(m, static_cast<double>(s[c]));
    double z = 0.0;
    for (std::size_t c = 0; c < classes; ++c) z += std::exp(static_cast<double>(s[c]) - m);
    for (std::size_t c = 0; c < classes; ++c) {
      p[r * classes + c] = std::exp(static_cast<double>(s[c]) - m) / z;
    }
  }
  return p;
}

template <typename T>
std::vector<std::uint32_t> argmax_rows(std::span<const T> scores, std::size_t rows,
                                       std::size_t classes) {
  std::vector<std::uint32_t> out(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const T* s = scores.data() + r * classes;
    std::uint32_t best = 0;
    for (std::uint32_t c = 1; c < classes; ++c) {
      if (s[c] > s[best]) best = c;
    }
    out[r] = best;
  }
  return out;
}

template <typename T>
LossAndGrad<T> loss_and_grad(const Parameters<T>& params, const NetworkConfig& config,
                             std::span<const T> batch, std::size_t rows,
                             std::span<const std::uint32_t> labels, bool train,
                             std::uint64_t dropout_seed) {
  if (labels.size() != rows) throw DataError("label count does not match batch rows");
  if (rows == 0) throw DataError("empty batch");
  auto pass = forward(params, config, batch, rows, train, dropout_seed);
  const std::size_t classes = params.layers.back().out;
  for (auto y : labels) {
    if (y >= classes) throw DataError("label " + std::to_string(y) + " out of range");
  }

  LossAndGrad<T> res;
  res.grads = Parameters<T>::zeros(params.sizes());

  const auto probs = softmax<T>(pass.scores, rows, classes);
  const auto pred = argmax_rows<T>(pass.scores, rows, classes);
  std::vector<T> delta(rows * classes);
  double loss = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    const T* s = pass.scores.data() + r * classes;
    double m = s[0];
    for (std::size_t c = 1; c < classes; ++c) m = std::max(m, static_cast<double>(s[c]));
    double z = 0.0;
    for (std::size_t c = 0; c < classes; ++c) z += std::exp(static_cast<double>(s[c]) - m);
    loss += m + std::log(z) - static_cast<double>(s[labels[r]]);
    if (pred[r] == labels[r]) ++res.correct;
    for (std::size_t c = 0; c < classes; ++c) {
      const double target = c == labels[r] ? 1.0 : 0.0;
      delta[r * classes + c] = static_cast<T>((probs[r * classes + c] - target) / rows);
    }
  }
  res.loss = loss / rows;
  if (!std::isfinite(res.loss)) throw DivergenceError("training loss is not finite");

  const double rate = train ? config.dropout_rate : 0.0;
  const T scale = static_cast<T>(1.0 / (1.0 - rate));

  for (std::size_t li = params.layers.size(); li-- > 0;) {
    const auto& layer = params.layers[li];
    auto& g = res.grads.layers[li];
    const std::vector<T>& x = pass.inputs[li];
    for (std::size_t r = 0; r < rows; ++r) {
      const T* xr = x.data() + r * layer.in;
      const T* dr = delta.data() + r * layer.out;
      for (std::size_t o = 0; o < layer.out; ++o) {
        if (dr[o] == T{0}) continue;
        axpy(dr[o], xr, g.weights.data() + o * layer.in, layer.in);
        g.bias[o] += dr[o];
      }
    }
    if (li == 0) break;
    // Back through the previous block's ReLU and dropout: a unit passes
    // gradient (times the dropout scale) exactly when its output is positive.
    std::vector<T> dx(rows * layer.in, T{0});
    for (std::size_t r = 0; r < rows; ++r) {
      const T* dr = delta.data() + r * layer.out;
      T* dxr = dx.data() + r * layer.in;
      for (std::size_t o = 0; o < layer.out; ++o) {
        if (dr[o] == T{0}) continue;
        axpy(dr[o], layer.weights.data() + o * layer.in, dxr, layer.in);
      }
      const T* xr = x.data() + r * layer.in;
      for (std::size_t i = 0; i < layer.in; ++i) dxr[i] = xr[i] > T{0} ? dxr[i] * scale : T{0};
    }
    delta = std::move(dx);
  }
  return res;
}

template <typename T>
AdamState<T> AdamState<T>::fresh(const Parameters<T>& like) {
  AdamState<T> s;
  s.first_moment = Parameters<T>::zeros(like.sizes());
  s.second_moment = Parameters<T>::zeros(like.sizes());
  return s;
}

template <typename T>
void adam_step(Parameters<T>& params, AdamState<T>& state, const Parameters<T>& grads,
               const AdamHyperparams& h) {
  if (grads.sizes() != params.sizes() || state.first_moment.sizes() != params.sizes()) {
    throw DataError("optimizer step: gradient or moment shapes do not match the parameters");
  }
  ++state.step;
  const double c1 = 1.0 - std::pow(h.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(h.beta2, static_cast<double>(state.step));
  auto update = [&](std::vector<T>& p, std::vector<T>& m, std::vector<T>& v, const std::vector<T>& g) {
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double gi = g[i];
      const double mi = h.beta1 * m[i] + (1.0 - h.beta1) * gi;
      const double vi = h.beta2 * v[i] + (1.0 - h.beta2) * gi * gi;
      m[i] = static_cast<T>(mi);
      v[i] = static_cast<T>(vi);
      const double step = h.learning_rate * (mi / c1) / (std::sqrt(vi / c2) + h.epsilon);
      p[i] = static_cast<T>(p[i] - step);
    }
  };
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    update(params.layers[l].weights, state.first_moment.layers[l].weights,
           state.second_moment.layers[l].weights, grads.layers[l].weights);
    update(params.layers[l].bias, state.first_moment.layers[l].bias,
           state.second_moment.layers[l].bias, grads.layers[l].bias);
  }
}

NetworkCheckpoint fresh_checkpoint(const NetworkConfig& config, const AdamHyperparams& adam) {
  NetworkCheckpoint ck;
  ck.config = config;
  ck.adam = adam;
  ck.params = init_parameters(config);
  ck.optimizer = AdamState<float>::fresh(ck.params);
  return ck;
}

ForwardPass<float> forward(const NetworkCheckpoint& ck, std::span<const float> batch,
                           std::size_t rows, bool train, std::uint64_t dropout_seed) {
  return forward<float>(ck.params, ck.config, batch, rows, train, dropout_seed);
}

// ---------------------------------------------------------------------------

namespace {

constexpr std::string_view kCheckpointMagic = "ANCK";

void write_params(ByteWriter& w, const Parameters<float>& p) {
  for (const auto& l : p.layers) {
    w.f32s(l.weights);
    w.f32s(l.bias);
  }
}

void read_params(ByteReader& r, Parameters<float>& p) {
  for (auto& l : p.layers) {
    r.f32s(l.weights);
    r.f32s(l.bias);
  }
}

bool all_finite(const Parameters<float>& p) {
  for (const auto& l : p.layers) {
    for (float w : l.weights) {
      if (!std::isfinite(w)) return false;
    }
    for (float b : l.bias) {
      if (!std::isfinite(b)) return false;
    }
  }
  return true;
}

}  // namespace

std::string serialize_checkpoint(const NetworkCheckpoint& ck) {
  ByteWriter w;
  w.bytes(kCheckpointMagic);
  w.u16(NetworkCheckpoint::kVersion);
  w.u32(ck.config.input_dim);
  w.u32(ck.config.n_blocks);
  w.u32(ck.config.output_dim);
  w.u8(static_cast<std::uint8_t>(ck.config.activation));
  w.f64(ck.config.dropout_rate);
  w.u64(ck.config.seed);
  w.f64(ck.adam.learning_rate);
  w.f64(ck.adam.beta1);
  w.f64(ck.adam.beta2);
  w.f64(ck.adam.epsilon);
  w.u32(ck.segments_completed);
  w.u32(static_cast<std::uint32_t>(ck.params.layers.size()));
  for (const auto& l : ck.params.layers) {
    w.u32(l.out);
    w.u32(l.in);
  }
  write_params(w, ck.params);
  w.u64(ck.optimizer.step);
  write_params(w, ck.optimizer.first_moment);
  write_params(w, ck.optimizer.second_moment);
  w.u32(static_cast<std::uint32_t>(ck.history.size()));
  for (const auto& m : ck.history) {
    w.u32(m.checkpoint);
    w.f64(m.loss);
    w.f64(m.accuracy);
  }
  const std::uint64_t sum = fnv1a64(w.data());
  w.u64(sum);
  return w.take();
}

NetworkCheckpoint deserialize_checkpoint(std::string_view bytes) {
  if (bytes.size() < 4 || bytes.substr(0, 4) != kCheckpointMagic) {
    throw FormatError("checkpoint: bad magic (expected ANCK)");
  }
  if (bytes.size() < 6 + 8) throw FormatError("checkpoint: truncated header");
  ByteReader r(bytes.substr(0, bytes.size() - 8), "checkpoint");
  r.bytes(4);
  const auto version = r.u16();
  if (version != NetworkCheckpoint::kVersion) {
    throw FormatError("checkpoint: unsupported version " + std::to_string(version) + " (expected " +
                      std::to_string(NetworkCheckpoint::kVersion) + ")");
  }
  ByteReader trailer(bytes.substr(bytes.size() - 8), "checkpoint checksum");
  if (trailer.u64() != fnv1a64(bytes.substr(0, bytes.size() - 8))) {
    throw FormatError("checkpoint: checksum mismatch (file truncated or corrupted)");
  }

  NetworkCheckpoint ck;
  ck.config.input_dim = r.u32();
  ck.config.n_blocks = r.u32();
  ck.config.output_dim = r.u32();
  ck.config.activation = static_cast<Activation>(r.u8());
  ck.config.dropout_rate = r.f64();
  ck.config.seed = r.u64();
  try {
    ck.config.validate();
  } catch (const DataError& e) {
    throw FormatError(std::string("checkpoint: invalid config: ") + e.what());
  }
  ck.adam.learning_rate = r.f64();
  ck.adam.beta1 = r.f64();
  ck.adam.beta2 = r.f64();
  ck.adam.epsilon = r.f64();
  ck.segments_completed = r.u32();

  const auto expected = layer_sizes(ck.config.input_dim, ck.config.n_blocks, ck.config.output_dim);
  const auto n_layers = r.u32();
  if (n_layers + 1 != expected.size()) throw FormatError("checkpoint: layer count does not match config");
  std::vector<std::uint32_t> sizes;
  for (std::uint32_t l = 0; l < n_layers; ++l) {
    const auto out = r.u32();
    const auto in = r.u32();
    if (in != expected[l] || out != expected[l + 1]) {
      throw FormatError("checkpoint: layer " + std::to_string(l) + " shape does not chain");
    }
    if (l == 0) sizes.push_back(in);
    sizes.push_back(out);
  }
  ck.params = Parameters<float>::zeros(sizes);
  read_params(r, ck.params);
  ck.optimizer = AdamState<float>::fresh(ck.params);
  ck.optimizer.step = r.u64();
  read_params(r, ck.optimizer.first_moment);
  read_params(r, ck.optimizer.second_moment);
  const auto n_hist = r.u32();
  for (std::uint32_t i = 0; i < n_hist; ++i) {
    MetricsRow m;
    m.checkpoint = r.u32();
    m.loss = r.f64();
    m.accuracy = r.f64();
    ck.history.push_back(m);
  }
  if (r.remaining() != 0) throw FormatError("checkpoint: trailing bytes");
  if (!all_finite(ck.params)) throw FormatError("checkpoint: non-finite parameters");
  return ck;
}

void checkpoint_save(const NetworkCheckpoint& ck, const std::filesystem::path& path) {
  write_file_bytes(path, serialize_checkpoint(ck));
}

NetworkCheckpoint checkpoint_load(const std::filesystem::path& path) {
  return deserialize_checkpoint(read_file_bytes(path));
}

#define ANALOGY_INSTANTIATE(T)                                                                   \
  template struct Parameters<T>;                                                                 \
  template struct AdamState<T>;                                                                  \
  template ForwardPass<T> forward<T>(const Parameters<T>&, const NetworkConfig&,                 \
                                     std::span<const T>, std::size_t, bool, std::uint64_t);      \
  template std::vector<double> softmax<T>(std::span<const T>, std::size_t, std::size_t);         \
  template std::vector<std::uint32_t> argmax_rows<T>(std::span<const T>, std::size_t,            \
                                                     std::size_t);                               \
  template LossAndGrad<T> loss_and_grad<T>(const Parameters<T>&, const NetworkConfig&,           \
                                           std::span<const T>, std::size_t,                      \
                                           std::span<const std::uint32_t>, bool, std::uint64_t); \
  template void adam_step<T>(Parameters<T>&, AdamState<T>&, const Parameters<T>&,                \
                             const AdamHyperparams&);

ANALOGY_INSTANTIATE(float)
ANALOGY_INSTANTIATE(double)

#undef ANALOGY_INSTANTIATE

}  // namespace analogy
