#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "confdiff/rng.hpp"
#include "confdiff/types.hpp"

namespace confdiff {

enum class ModelKind { linear, mlp };

std::string_view to_string(ModelKind kind) noexcept;
ModelKind parse_model_kind(std::string_view name);

struct ModelSpec {
  ModelKind kind = ModelKind::mlp;
  std::size_t input_dim = 0;
  std::vector<std::size_t> hidden_widths{64, 64, 64};  // ignored for linear
  std::uint64_t init_seed = 0;

  void validate() const;
};

struct LayerShape {
  std::size_t in = 0;
  std::size_t out = 0;

  friend bool operator==(const LayerShape&, const LayerShape&) = default;
};

/// Affine layers stored in one flat vector. Layer l occupies a row-major
/// out x in weight block followed by its out biases. Hidden layers are
/// followed by ReLU; the last layer has a single output and no activation.
class ModelParams {
 public:
  ModelParams() = default;
  explicit ModelParams(std::vector<LayerShape> layers);

  std::span<const LayerShape> layers() const noexcept { return layers_; }
  std::size_t input_dim() const noexcept { return layers_.empty() ? 0 : layers_.front().in; }
  std::size_t parameter_count() const noexcept { return values_.size(); }
  /// Start of layer `layer` in the flat vector.
  std::size_t offset(std::size_t layer) const { return offsets_.at(layer); }

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }

  std::span<double> weights(std::size_t layer);
  std::span<const double> weights(std::size_t layer) const;
  std::span<double> bias(std::size_t layer);
  std::span<const double> bias(std::size_t layer) const;

  friend bool operator==(const ModelParams&, const ModelParams&) = default;

 private:
  std::vector<LayerShape> layers_;
  std::vector<std::size_t> offsets_;
  Vector values_;
};

std::vector<LayerShape> layer_shapes(const ModelSpec& spec);

/// Glorot-uniform weights, zero biases.
ModelParams init_model(const ModelSpec& spec, Rng& rng);
/// Same, seeded from spec.init_seed.
ModelParams init_model(const ModelSpec& spec);

/// Intermediate values from a forward pass, consumed by backward.
struct ForwardCache {
  std::vector<LayerShape> shapes;
  std::vector<Vector> inputs;  // input to each layer (post-ReLU for l > 0)
  std::vector<Vector> pre;     // affine output of each layer
};

/// Score g(x). Fills `cache` for a later backward call.
double forward(const ModelParams& params, std::span<const double> x, ForwardCache& cache);

/// Score without keeping the cache.
double score(const ModelParams& params, std::span<const double> x);

/// grad += upstream * d score / d params. Throws InvalidState if the cache
/// was produced by a model of a different shape.
void backward(const ModelParams& params, const ForwardCache& cache, double upstream,
              std::span<double> grad);

Vector backward(const ModelParams& params, const ForwardCache& cache, double upstream);

// Checkpoint: little-endian binary.
//   bytes 0-7   magic "CDMODEL1"
//   u64         layer count L
//   L x (u64 in, u64 out)
//   u64         parameter count P
//   P x f64     flat parameter vector
void write_checkpoint(std::ostream& out, const ModelParams& params);
ModelParams read_checkpoint(std::istream& in);
void save_checkpoint(const std::string& path, const ModelParams& params);
ModelParams load_checkpoint(const std::string& path);

}  // namespace confdiff
