#include "confdiff/model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "confdiff/error.hpp"

namespace confdiff {

std::string_view to_string(ModelKind kind) noexcept {
  return kind == ModelKind::linear ? "linear" : "mlp";
}

ModelKind parse_model_kind(std::string_view name) {
  if (name == "linear") return ModelKind::linear;
  if (name == "mlp") return ModelKind::mlp;
  throw InvalidInput("unknown model kind '" + std::string(name) + "'");
}

void ModelSpec::validate() const {
  if (input_dim == 0) throw InvalidInput("model input dimension must be positive");
  if (kind == ModelKind::mlp) {
    if (hidden_widths.empty()) throw InvalidInput("mlp needs at least one hidden layer");
    for (std::size_t w : hidden_widths) {
      if (w == 0) throw InvalidInput("hidden widths must be positive");
    }
  }
}

ModelParams::ModelParams(std::vector<LayerShape> layers) : layers_(std::move(layers)) {
  std::size_t total = 0;
  for (const LayerShape& s : layers_) {
    offsets_.push_back(total);
    total += s.out * s.in + s.out;
  }
  values_.assign(total, 0.0);
}

std::span<double> ModelParams::weights(std::size_t layer) {
  const LayerShape s = layers_.at(layer);
  return std::span<double>(values_).subspan(offsets_[layer], s.out * s.in);
}

std::span<const double> ModelParams::weights(std::size_t layer) const {
  const LayerShape s = layers_.at(layer);
  return std::span<const double>(values_).subspan(offsets_[layer], s.out * s.in);
}

std::span<double> ModelParams::bias(std::size_t layer) {
  const LayerShape s = layers_.at(layer);
  return std::span<double>(values_).subspan(offsets_[layer] + s.out * s.in, s.out);
}

std::span<const double> ModelParams::bias(std::size_t layer) const {
  const LayerShape s = layers_.at(layer);
  return std::span<const double>(values_).subspan(offsets_[layer] + s.out * s.in, s.out);
}

std::vector<LayerShape> layer_shapes(const ModelSpec& spec) {
  spec.validate();
  std::vector<LayerShape> shapes;
  std::size_t in = spec.input_dim;
  if (spec.kind == ModelKind::mlp) {
    for (std::size_t w : spec.hidden_widths) {
      shapes.push_back({in, w});
      in = w;
    }
  }
  shapes.push_back({in, 1});
  return shapes;
}

ModelParams init_model(const ModelSpec& spec, Rng& rng) {
  ModelParams params(layer_shapes(spec));
  for (std::size_t l = 0; l < params.layers().size(); ++l) {
    const LayerShape s = params.layers()[l];
    const double limit = std::sqrt(6.0 / static_cast<double>(s.in + s.out));
    for (double& w : params.weights(l)) w = rng.uniform(-limit, limit);
  }
  return params;
}

ModelParams init_model(const ModelSpec& spec) {
  Rng rng(spec.init_seed);
  return init_model(spec, rng);
}

double forward(const ModelParams& params, std::span<const double> x, ForwardCache& cache) {
  const auto layers = params.layers();
  if (layers.empty()) throw InvalidState("model has no layers");
  if (x.size() != params.input_dim()) {
    throw InvalidInput("input has dimension " + std::to_string(x.size()) + ", model expects " +
                       std::to_string(params.input_dim()));
  }
  if (cache.shapes.size() != layers.size() || !std::equal(layers.begin(), layers.end(), cache.shapes.begin())) {
    cache.shapes.assign(layers.begin(), layers.end());
    cache.inputs.resize(layers.size());
    cache.pre.resize(layers.size());
    for (std::size_t l = 0; l < layers.size(); ++l) {
      cache.inputs[l].resize(layers[l].in);
      cache.pre[l].resize(layers[l].out);
    }
  }
  std::copy(x.begin(), x.end(), cache.inputs[0].begin());
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const LayerShape s = layers[l];
    const double* w = params.weights(l).data();
    const double* b = params.bias(l).data();
    const double* in = cache.inputs[l].data();
    double* pre = cache.pre[l].data();
    for (std::size_t o = 0; o < s.out; ++o) {
      const double* row = w + o * s.in;
      double acc = b[o];
      for (std::size_t i = 0; i < s.in; ++i) acc += row[i] * in[i];
      pre[o] = acc;
    }
    if (l + 1 < layers.size()) {
      double* next = cache.inputs[l + 1].data();
      for (std::size_t o = 0; o < s.out; ++o) next[o] = pre[o] > 0.0 ? pre[o] : 0.0;
    }
  }
  return cache.pre.back()[0];
}

double score(const ModelParams& params, std::span<const double> x) {
  thread_local ForwardCache cache;
  return forward(params, x, cache);
}

void backward(const ModelParams& params, const ForwardCache& cache, double upstream,
              std::span<double> grad) {
  const auto layers = params.layers();
  if (cache.shapes.size() != layers.size() || !std::equal(layers.begin(), layers.end(), cache.shapes.begin())) {
    throw InvalidState("forward cache does not match the model shape");
  }
  if (grad.size() != params.parameter_count()) throw InvalidInput("gradient buffer has the wrong size");
  if (upstream == 0.0) return;

  thread_local Vector delta;
  thread_local Vector delta_in;
  delta.assign(1, upstream);

  for (std::size_t l = layers.size(); l-- > 0;) {
    const LayerShape s = layers[l];
    double* gw = grad.data() + params.offset(l);
    double* gb = gw + s.out * s.in;
    const double* in = cache.inputs[l].data();
    for (std::size_t o = 0; o < s.out; ++o) {
      const double d = delta[o];
      if (d == 0.0) continue;
      double* grow = gw + o * s.in;
      for (std::size_t i = 0; i < s.in; ++i) grow[i] += d * in[i];
      gb[o] += d;
    }
    if (l == 0) break;
    const double* w = params.weights(l).data();
    const double* pre_below = cache.pre[l - 1].data();
    delta_in.assign(s.in, 0.0);
    for (std::size_t o = 0; o < s.out; ++o) {
      const double d = delta[o];
      if (d == 0.0) continue;
      const double* row = w + o * s.in;
      for (std::size_t i = 0; i < s.in; ++i) delta_in[i] += row[i] * d;
    }
    for (std::size_t i = 0; i < s.in; ++i) {
      if (!(pre_below[i] > 0.0)) delta_in[i] = 0.0;
    }
    delta.swap(delta_in);
  }
}

Vector backward(const ModelParams& params, const ForwardCache& cache, double upstream) {
  Vector grad(params.parameter_count(), 0.0);
  backward(params, cache, upstream, grad);
  return grad;
}

namespace {

constexpr char kMagic[8] = {'C', 'D', 'M', 'O', 'D', 'E', 'L', '1'};

void put_u64(std::ostream& out, std::uint64_t v) {
  unsigned char buf[8];
  for (int k = 0; k < 8; ++k) buf[k] = static_cast<unsigned char>(v >> (8 * k));
  out.write(reinterpret_cast<const char*>(buf), 8);
}

std::uint64_t get_u64(std::istream& in) {
  unsigned char buf[8];
  if (!in.read(reinterpret_cast<char*>(buf), 8)) throw InvalidInput("truncated checkpoint");
  std::uint64_t v = 0;
  for (int k = 0; k < 8; ++k) v |= static_cast<std::uint64_t>(buf[k]) << (8 * k);
  return v;
}

}  // namespace

void write_checkpoint(std::ostream& out, const ModelParams& params) {
  out.write(kMagic, sizeof kMagic);
  put_u64(out, params.layers().size());
  for (const LayerShape& s : params.layers()) {
    put_u64(out, s.in);
    put_u64(out, s.out);
  }
  put_u64(out, params.parameter_count());
  for (double v : params.values()) put_u64(out, std::bit_cast<std::uint64_t>(v));
}

ModelParams read_checkpoint(std::istream& in) {
  char magic[8];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof magic) != 0) {
    throw InvalidInput("not a model checkpoint");
  }
  const std::uint64_t count = get_u64(in);
  if (count == 0 || count > 1024) throw InvalidInput("implausible layer count in checkpoint");
  std::vector<LayerShape> layers;
  for (std::uint64_t l = 0; l < count; ++l) {
    const std::uint64_t fan_in = get_u64(in);
    const std::uint64_t fan_out = get_u64(in);
    layers.push_back({static_cast<std::size_t>(fan_in), static_cast<std::size_t>(fan_out)});
  }
  ModelParams params(std::move(layers));
  if (get_u64(in) != params.parameter_count()) throw InvalidInput("checkpoint parameter count mismatch");
  for (double& v : params.values()) v = std::bit_cast<double>(get_u64(in));
  return params;
}

void save_checkpoint(const std::string& path, const ModelParams& params) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot open '" + path + "' for writing");
  write_checkpoint(out, params);
}

ModelParams load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open '" + path + "' for reading");
  return read_checkpoint(in);
}

}  // namespace confdiff
