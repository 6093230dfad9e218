#pragma once

// Model families built from the autodiff layers: the 1D CNN regressor, the
// domain-adversarial model and its two signal-reconstructing variants.
//
// Stage pattern (kernels, kernel size, stride):
//   extractor      32/5/5, 64/5/5, 128/4/4, 256/4/4
//   estimator      512/3/3, 10240/3/3, flatten, linear -> M
//   discriminator  512/3/3, 1024/3/3, flatten, linear -> 2
//   reconstructor  4 x (upsample, conv k3 s1) with 128, 64, 32, 1 kernels
// The CNN is the extractor followed by the estimator.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <spdlog/spdlog.h>

#include "gprda/error.hpp"
#include "gprda/io.hpp"
#include "gprda/nn/ops.hpp"
#include "gprda/nn/optim.hpp"
#include "gprda/nn/tensor.hpp"

namespace gprda {

enum class ModelKind { cnn, dann, phydann1, phydann2 };

inline std::string to_string(ModelKind k) {
  switch (k) {
    case ModelKind::cnn: return "cnn";
    case ModelKind::dann: return "dann";
    case ModelKind::phydann1: return "phydann1";
    case ModelKind::phydann2: return "phydann2";
  }
  return "?";
}

inline ModelKind parse_model_kind(const std::string& s) {
  if (s == "cnn") return ModelKind::cnn;
  if (s == "dann") return ModelKind::dann;
  if (s == "phydann1") return ModelKind::phydann1;
  if (s == "phydann2") return ModelKind::phydann2;
  throw ConfigError("unknown model kind '" + s + "'");
}

/// One row of the per-layer shape table (batch dimension omitted).
struct LayerShape {
  std::string network;
  std::string layer;
  std::size_t kernels = 0;
  std::size_t kernel_size = 0;
  std::size_t stride = 0;
  nn::Shape input;
  nn::Shape output;
  std::string activation;
};

struct ConvLayer {
  nn::Tensor weight;  // [Cout, Cin, K]
  nn::Tensor bias;    // [Cout]
  std::size_t stride = 1;
  std::size_t padding = 0;
  bool leaky = true;

  nn::Tensor forward(const nn::Tensor& x, double slope) const {
    auto y = nn::conv1d(x, weight, bias, stride, padding);
    return leaky ? nn::leaky_relu(y, slope) : y;
  }
};

struct LinearLayer {
  nn::Tensor weight;  // [Out, In]
  nn::Tensor bias;    // [Out]
  bool leaky = false;

  nn::Tensor forward(const nn::Tensor& x, double slope) const {
    auto y = nn::linear(x, weight, bias);
    return leaky ? nn::leaky_relu(y, slope) : y;
  }
};

struct ArchitectureOptions {
  double leaky_slope = 0.01;
  std::uint64_t seed = 0;
};

class Model {
 public:
  ModelKind kind = ModelKind::cnn;
  std::size_t input_length = 0;   // N
  std::size_t outputs = 0;        // M
  double slope = 0.01;
  std::uint64_t seed = 0;
  nn::ParameterStore store;
  std::vector<ConvLayer> extractor;
  std::vector<ConvLayer> estimator_convs;
  LinearLayer estimator_head;
  std::vector<ConvLayer> discriminator_convs;
  LinearLayer discriminator_head;
  std::optional<LinearLayer> embed1, embed2;  // variant 2 parameter embedding
  std::vector<std::size_t> upsample_lengths;
  std::vector<ConvLayer> reconstructor;
  std::vector<LayerShape> shapes;
  nn::Shape feature_shape;  // [C_f, L_f]

  bool has_discriminator() const { return kind != ModelKind::cnn; }
  bool has_reconstructor() const { return kind == ModelKind::phydann1 || kind == ModelKind::phydann2; }

  /// x [B, 1, N] -> features [B, C_f, L_f]
  nn::Tensor features(const nn::Tensor& x) const {
    auto h = x;
    for (const auto& c : extractor) h = c.forward(h, slope);
    return h;
  }

  /// features -> [B, M]
  nn::Tensor estimate(const nn::Tensor& f) const {
    auto h = f;
    for (const auto& c : estimator_convs) h = c.forward(h, slope);
    return estimator_head.forward(nn::flatten(h), slope);
  }

  /// features -> domain logits [B, 2]; the gradient reversal sits at the input.
  nn::Tensor domain_logits(const nn::Tensor& f, double lambda) const {
    if (!has_discriminator()) throw ConfigError("model has no domain discriminator");
    auto h = nn::grl(f, lambda);
    for (const auto& c : discriminator_convs) h = c.forward(h, slope);
    return discriminator_head.forward(nn::flatten(h), slope);
  }

  /// Reconstructed trace [B, 1, N]. Variant 2 fuses `params` ([B, M]) into the
  /// features first; variant 1 ignores it.
  nn::Tensor reconstruct(const nn::Tensor& f, const nn::Tensor& params) const {
    if (!has_reconstructor()) throw ConfigError("model has no signal reconstructor");
    auto h = f;
    if (kind == ModelKind::phydann2) {
      auto e = embed2->forward(embed1->forward(params, slope), slope);
      h = nn::sum_fuse(h, e);
    }
    for (std::size_t i = 0; i < reconstructor.size(); ++i) {
      h = nn::upsample_linear(h, upsample_lengths[i]);
      h = reconstructor[i].forward(h, slope);
    }
    return h;
  }

  void log_shapes() const {
    spdlog::debug("{} model, N={}, M={}, {} parameters", to_string(kind), input_length, outputs, store.count());
    for (const auto& s : shapes) {
      spdlog::debug("  {:<14} {:<12} in {:<14} out {:<14} {}", s.network, s.layer, nn::shape_string(s.input),
                    nn::shape_string(s.output), s.activation);
    }
  }
};

namespace detail {

struct Builder {
  Model& m;
  std::mt19937_64 rng;

  ConvLayer conv(const std::string& network, const std::string& name, const std::string& group, std::size_t cin,
                 std::size_t cout, std::size_t k, std::size_t s, std::size_t pad, bool leaky, std::size_t in_len,
                 std::size_t& out_len) {
    ConvLayer c;
    c.weight = m.store.add(name + ".weight", group, {cout, cin, k});
    c.bias = m.store.add(name + ".bias", group, {cout});
    c.stride = s;
    c.padding = pad;
    c.leaky = leaky;
    nn::kaiming_uniform(c.weight, cin * k, leaky ? m.slope : 1.0, rng);
    out_len = nn::conv_output_length(in_len, k, s, pad);
    m.shapes.push_back({network, "conv", cout, k, s, {cin, in_len}, {cout, out_len}, leaky ? "leaky_relu" : "linear"});
    return c;
  }

  LinearLayer linear(const std::string& network, const std::string& name, const std::string& group,
                     std::size_t in, std::size_t out, bool leaky) {
    LinearLayer l;
    l.weight = m.store.add(name + ".weight", group, {out, in});
    l.bias = m.store.add(name + ".bias", group, {out});
    l.leaky = leaky;
    nn::kaiming_uniform(l.weight, in, leaky ? m.slope : 1.0, rng);
    m.shapes.push_back({network, "linear", 0, 0, 0, {in}, {out}, leaky ? "leaky_relu" : "linear"});
    return l;
  }

  /// Conv head stages followed by flatten and a linear output. A stage whose
  /// input is shorter than its kernel collapses the remaining length
  /// (kernel = stride = input length), which only happens below full scale.
  void head(const std::string& network, const std::string& prefix, const std::string& group,
            const std::vector<std::pair<std::size_t, std::size_t>>& stages, std::size_t outputs,
            std::vector<ConvLayer>& convs, LinearLayer& fc) {
    std::size_t c = m.feature_shape[0], len = m.feature_shape[1];
    for (std::size_t i = 0; i < stages.size(); ++i) {
      auto [cout, k] = stages[i];
      std::size_t s = k;
      if (len < k) k = s = len;
      std::size_t out_len = 0;
      convs.push_back(conv(network, prefix + ".conv" + std::to_string(i + 1), group, c, cout, k, s, 0, true, len,
                           out_len));
      c = cout;
      len = out_len;
    }
    m.shapes.push_back({network, "flatten", 0, 0, 0, {c, len}, {c * len}, ""});
    fc = linear(network, prefix + ".fc", group, c * len, outputs, false);
  }
};

}  // namespace detail

/// Published reconstructor upsampling chain at full scale.
inline constexpr std::size_t kFullScaleLength = 6560;

inline Model build_model(ModelKind kind, std::size_t n, std::size_t m, const ArchitectureOptions& opt = {}) {
  if (m == 0) throw ConfigError("model needs at least one output");
  Model model;
  model.kind = kind;
  model.input_length = n;
  model.outputs = m;
  model.slope = opt.leaky_slope;
  model.seed = opt.seed;
  detail::Builder b{model, std::mt19937_64(opt.seed)};

  const std::size_t ext[4][3] = {{32, 5, 5}, {64, 5, 5}, {128, 4, 4}, {256, 4, 4}};
  std::vector<std::size_t> encoder_inputs;
  std::size_t c = 1, len = n;
  for (std::size_t i = 0; i < 4; ++i) {
    encoder_inputs.push_back(len);
    std::size_t out_len = 0;
    try {
      model.extractor.push_back(b.conv("extractor", "extractor.conv" + std::to_string(i + 1), "extractor", c,
                                       ext[i][0], ext[i][1], ext[i][2], 0, true, len, out_len));
    } catch (const ShapeError& e) {
      throw ShapeError("input length " + std::to_string(n) + " is too short for the feature extractor: " + e.what());
    }
    c = ext[i][0];
    len = out_len;
  }
  model.feature_shape = {c, len};

  b.head("estimator", "estimator", "estimator", {{512, 3}, {10240, 3}}, m, model.estimator_convs,
         model.estimator_head);
  if (model.has_discriminator()) {
    b.head("discriminator", "discriminator", "discriminator", {{512, 3}, {1024, 3}}, 2, model.discriminator_convs,
           model.discriminator_head);
  }
  if (model.has_reconstructor()) {
    if (kind == ModelKind::phydann2) {
      model.embed1 = b.linear("reconstructor", "reconstructor.embed1", "reconstructor", m, 64, true);
      model.embed2 = b.linear("reconstructor", "reconstructor.embed2", "reconstructor", 64, c, false);
      model.shapes.push_back({"reconstructor", "sum_fuse", 0, 0, 0, {c, len}, {c, len}, ""});
    }
    if (n == kFullScaleLength) {
      model.upsample_lengths = {41, 164, 821, n};
    } else {
      model.upsample_lengths.assign(encoder_inputs.rbegin(), encoder_inputs.rend());
    }
    const std::size_t rec_channels[4] = {128, 64, 32, 1};
    for (std::size_t i = 0; i < 4; ++i) {
      const std::size_t up = model.upsample_lengths[i];
      model.shapes.push_back({"reconstructor", "upsample", 0, 0, 0, {c, len}, {c, up}, ""});
      std::size_t out_len = 0;
      model.reconstructor.push_back(b.conv("reconstructor", "reconstructor.conv" + std::to_string(i + 1),
                                           "reconstructor", c, rec_channels[i], 3, 1, 1, i < 3, up, out_len));
      c = rec_channels[i];
      len = out_len;
    }
  }
  return model;
}

inline Model build_cnn(std::size_t n, std::size_t m, const ArchitectureOptions& opt = {}) {
  return build_model(ModelKind::cnn, n, m, opt);
}

inline Model build_dann(std::size_t n, std::size_t m, const ArchitectureOptions& opt = {}) {
  return build_model(ModelKind::dann, n, m, opt);
}

inline Model build_phydann(int variant, std::size_t n, std::size_t m, const ArchitectureOptions& opt = {}) {
  if (variant != 1 && variant != 2) throw ConfigError("reconstructor variant must be 1 or 2");
  return build_model(variant == 1 ? ModelKind::phydann1 : ModelKind::phydann2, n, m, opt);
}

// ---------------------------------------------------------------------------
// Checkpoints: manifest.json-style description plus an f64 blob of every
// parameter in declaration order.

inline io::Json checkpoint_manifest(const Model& model, const io::Json& extra = io::Json::object()) {
  io::Json layers = io::Json::array();
  for (const auto& p : model.store.params()) {
    layers.push_back({{"name", p.name}, {"group", p.group}, {"shape", p.tensor.shape()}});
  }
  io::Json j{{"kind", to_string(model.kind)},
             {"input_length", model.input_length},
             {"outputs", model.outputs},
             {"leaky_slope", model.slope},
             {"init", "kaiming_uniform_fan_in"},
             {"init_seed", model.seed},
             {"upsample_lengths", model.upsample_lengths},
             {"weights_file", "weights.f64"},
             {"weights_format", "f64le, parameters in declaration order"},
             {"parameters", layers}};
  for (auto it = extra.begin(); it != extra.end(); ++it) j[it.key()] = it.value();
  return j;
}

inline void save_checkpoint(const std::filesystem::path& dir, const Model& model,
                            const io::Json& extra = io::Json::object()) {
  io::write_json(dir / "checkpoint.json", checkpoint_manifest(model, extra));
  io::write_f64(dir / "weights.f64", model.store.flat_values());
}

inline Model load_checkpoint(const std::filesystem::path& dir) {
  if (!std::filesystem::exists(dir / "checkpoint.json")) {
    throw DependencyError("missing checkpoint " + (dir / "checkpoint.json").string());
  }
  const auto j = io::read_json(dir / "checkpoint.json");
  ArchitectureOptions opt;
  opt.leaky_slope = j.at("leaky_slope").get<double>();
  opt.seed = j.at("init_seed").get<std::uint64_t>();
  auto model = build_model(parse_model_kind(j.at("kind").get<std::string>()),
                           j.at("input_length").get<std::size_t>(), j.at("outputs").get<std::size_t>(), opt);
  const auto w = io::read_f64(dir / j.at("weights_file").get<std::string>());
  if (w.size() != model.store.count()) throw IoError("checkpoint " + dir.string() + ": weight count mismatch");
  std::size_t off = 0;
  for (auto& p : model.store.params()) {
    auto v = p.tensor.mutable_values();
    std::copy(w.begin() + static_cast<std::ptrdiff_t>(off), w.begin() + static_cast<std::ptrdiff_t>(off + v.size()),
              v.begin());
    off += v.size();
  }
  return model;
}

}  // namespace gprda
