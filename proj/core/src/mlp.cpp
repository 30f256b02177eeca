#include "rofso/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

#include "rofso/text_io.hpp"

namespace rofso {

namespace {

constexpr const char* kCheckpointMagic = "rofso-mlp-checkpoint 1";

double activate(Activation a, double x) {
  return a == Activation::relu ? (x > 0.0 ? x : 0.0) : std::tanh(x);
}

// derivative expressed through pre- and post-activation values
double activate_slope(Activation a, double pre, double post) {
  return a == Activation::relu ? (pre > 0.0 ? 1.0 : 0.0) : 1.0 - post * post;
}

}  // namespace

std::string to_string(Activation a) { return a == Activation::relu ? "relu" : "tanh"; }

Activation activation_from_string(const std::string& name) {
  if (name == "relu") return Activation::relu;
  if (name == "tanh") return Activation::tanh;
  throw std::invalid_argument("unknown activation '" + name + "'");
}

void MlpSpec::validate() const {
  if (layer_sizes.size() < 2) {
    throw std::invalid_argument("MlpSpec: need at least an input and an output layer");
  }
  if (std::any_of(layer_sizes.begin(), layer_sizes.end(), [](std::size_t n) { return n == 0; })) {
    throw std::invalid_argument("MlpSpec: layer sizes must be positive");
  }
}

std::size_t parameter_count(const MlpSpec& spec) {
  std::size_t q = 0;
  for (std::size_t l = 0; l + 1 < spec.layer_sizes.size(); ++l) {
    q += spec.layer_sizes[l + 1] * (spec.layer_sizes[l] + 1);
  }
  return q;
}

std::vector<DenseLayer> unpack(const MlpSpec& spec, const MlpParams& params) {
  spec.validate();
  if (params.theta.size() != parameter_count(spec)) {
    throw std::invalid_argument("unpack: parameter vector length does not match spec");
  }
  std::vector<DenseLayer> layers(spec.layers());
  auto it = params.theta.begin();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    auto& layer = layers[l];
    layer.in = spec.layer_sizes[l];
    layer.out = spec.layer_sizes[l + 1];
    layer.weights.assign(it, it + static_cast<std::ptrdiff_t>(layer.in * layer.out));
    it += static_cast<std::ptrdiff_t>(layer.in * layer.out);
    layer.bias.assign(it, it + static_cast<std::ptrdiff_t>(layer.out));
    it += static_cast<std::ptrdiff_t>(layer.out);
  }
  return layers;
}

MlpParams pack(std::span<const DenseLayer> layers) {
  MlpParams params;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& layer = layers[l];
    if (layer.weights.size() != layer.in * layer.out || layer.bias.size() != layer.out) {
      throw std::invalid_argument("pack: layer " + std::to_string(l) + " has inconsistent shape");
    }
    if (l > 0 && layers[l - 1].out != layer.in) {
      throw std::invalid_argument("pack: layer " + std::to_string(l) + " does not chain");
    }
    params.theta.insert(params.theta.end(), layer.weights.begin(), layer.weights.end());
    params.theta.insert(params.theta.end(), layer.bias.begin(), layer.bias.end());
  }
  return params;
}

MlpParams init_params(const MlpSpec& spec, Rng& rng) {
  spec.validate();
  MlpParams params;
  params.theta.reserve(parameter_count(spec));
  for (std::size_t l = 0; l < spec.layers(); ++l) {
    const std::size_t in = spec.layer_sizes[l];
    const std::size_t out = spec.layer_sizes[l + 1];
    const double stddev = std::sqrt(2.0 / static_cast<double>(in));
    for (std::size_t k = 0; k < in * out; ++k) {
      params.theta.push_back(stddev * rng.normal());
    }
    params.theta.insert(params.theta.end(), out, 0.0);
  }
  return params;
}

ForwardCache forward(const MlpParams& params, const MlpSpec& spec, std::span<const double> x) {
  ForwardCache cache;
  forward_into(params, spec, x, cache);
  return cache;
}

void forward_into(const MlpParams& params, const MlpSpec& spec, std::span<const double> x,
                  ForwardCache& cache) {
  if (x.size() != spec.inputs()) {
    throw std::invalid_argument("forward: input has length " + std::to_string(x.size()) +
                                ", network expects " + std::to_string(spec.inputs()));
  }
  if (params.theta.size() != parameter_count(spec)) {
    throw std::invalid_argument("forward: parameter vector length does not match spec");
  }
  const std::size_t layers = spec.layers();
  cache.pre.resize(layers);
  cache.post.resize(layers + 1);
  cache.post[0].assign(x.begin(), x.end());

  const double* w = params.theta.data();
  for (std::size_t l = 0; l < layers; ++l) {
    const std::size_t in = spec.layer_sizes[l];
    const std::size_t out = spec.layer_sizes[l + 1];
    const double* bias = w + in * out;
    const auto& input = cache.post[l];
    auto& pre = cache.pre[l];
    auto& post = cache.post[l + 1];
    pre.resize(out);
    post.resize(out);
    const bool hidden = l + 1 < layers;
    for (std::size_t o = 0; o < out; ++o) {
      double acc = bias[o];
      const double* row = w + o * in;
      for (std::size_t i = 0; i < in; ++i) acc += row[i] * input[i];
      pre[o] = acc;
      post[o] = hidden ? activate(spec.hidden, acc) : acc;
    }
    w = bias + out;
  }
}

void backward_accumulate(const MlpParams& params, const MlpSpec& spec, const ForwardCache& cache,
                         std::span<const double> d_output, std::span<double> grad, double scale) {
  const std::size_t layers = spec.layers();
  const std::size_t q = parameter_count(spec);
  if (cache.pre.size() != layers || cache.post.size() != layers + 1) {
    throw std::invalid_argument("backward: cache depth does not match spec");
  }
  for (std::size_t l = 0; l <= layers; ++l) {
    if (cache.post[l].size() != spec.layer_sizes[l] ||
        (l > 0 && cache.pre[l - 1].size() != spec.layer_sizes[l])) {
      throw std::invalid_argument("backward: stale cache, layer widths differ from spec");
    }
  }
  if (d_output.size() != spec.outputs()) {
    throw std::invalid_argument("backward: output gradient has wrong length");
  }
  if (params.theta.size() != q || grad.size() != q) {
    throw std::invalid_argument("backward: parameter or gradient length does not match spec");
  }

  // offsets of each layer's block in theta
  std::vector<std::size_t> offset(layers);
  std::size_t pos = 0;
  for (std::size_t l = 0; l < layers; ++l) {
    offset[l] = pos;
    pos += spec.layer_sizes[l + 1] * (spec.layer_sizes[l] + 1);
  }

  std::vector<double> delta(d_output.begin(), d_output.end());  // dL/d pre of current layer
  for (double& v : delta) v *= scale;
  std::vector<double> upstream;
  for (std::size_t l = layers; l-- > 0;) {
    const std::size_t in = spec.layer_sizes[l];
    const std::size_t out = spec.layer_sizes[l + 1];
    const double* w = params.theta.data() + offset[l];
    double* gw = grad.data() + offset[l];
    double* gb = gw + in * out;
    const auto& input = cache.post[l];

    for (std::size_t o = 0; o < out; ++o) {
      const double d = delta[o];
      if (d == 0.0) continue;
      double* grow = gw + o * in;
      for (std::size_t i = 0; i < in; ++i) grow[i] += d * input[i];
      gb[o] += d;
    }
    if (l == 0) break;

    upstream.assign(in, 0.0);
    for (std::size_t o = 0; o < out; ++o) {
      const double d = delta[o];
      if (d == 0.0) continue;
      const double* row = w + o * in;
      for (std::size_t i = 0; i < in; ++i) upstream[i] += row[i] * d;
    }
    const auto& pre = cache.pre[l - 1];
    for (std::size_t i = 0; i < in; ++i) {
      upstream[i] *= activate_slope(spec.hidden, pre[i], input[i]);
    }
    delta.swap(upstream);
  }
}

std::vector<double> backward(const MlpParams& params, const MlpSpec& spec,
                             const ForwardCache& cache, std::span<const double> d_output) {
  std::vector<double> grad(parameter_count(spec), 0.0);
  backward_accumulate(params, spec, cache, d_output, grad);
  return grad;
}

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt) {
  ckpt.spec.validate();
  out << kCheckpointMagic << '\n';
  out << "layers=";
  for (std::size_t l = 0; l < ckpt.spec.layer_sizes.size(); ++l) {
    out << (l ? "," : "") << ckpt.spec.layer_sizes[l];
  }
  out << "\nactivation=" << to_string(ckpt.spec.hidden) << '\n';
  for (const auto& [key, value] : ckpt.metadata) {
    if (key.find_first_of("=\n") != std::string::npos || value.find('\n') != std::string::npos) {
      throw std::invalid_argument("write_checkpoint: metadata entry '" + key + "' not encodable");
    }
    out << "meta." << key << '=' << value << '\n';
  }
  out << "nets=" << ckpt.nets.size() << '\n';
  const std::size_t q = parameter_count(ckpt.spec);
  for (std::size_t n = 0; n < ckpt.nets.size(); ++n) {
    if (ckpt.nets[n].theta.size() != q) {
      throw std::invalid_argument("write_checkpoint: network " + std::to_string(n) +
                                  " does not match spec");
    }
    out << "theta," << n;
    for (double v : ckpt.nets[n].theta) out << ',' << format_double(v);
    out << '\n';
  }
  if (!out) throw std::runtime_error("write_checkpoint: stream error");
}

Checkpoint read_checkpoint(std::istream& in) {
  auto fail = [](const std::string& why) -> Checkpoint {
    throw std::runtime_error("read_checkpoint: " + why);
  };
  std::string line;
  if (!std::getline(in, line) || trim(line) != kCheckpointMagic) return fail("bad header");

  Checkpoint ckpt;
  std::size_t nets = 0;
  bool have_layers = false;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) return fail("malformed line '" + line + "'");
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    if (key == "layers") {
      ckpt.spec.layer_sizes.clear();
      for (const auto& f : split_list(value)) {
        ckpt.spec.layer_sizes.push_back(static_cast<std::size_t>(parse_integer(f)));
      }
      have_layers = true;
    } else if (key == "activation") {
      ckpt.spec.hidden = activation_from_string(value);
    } else if (key.rfind("meta.", 0) == 0) {
      ckpt.metadata[key.substr(5)] = value;
    } else if (key == "nets") {
      nets = static_cast<std::size_t>(parse_integer(value));
      break;
    } else {
      return fail("unknown key '" + key + "'");
    }
  }
  if (!have_layers) return fail("missing layers");
  ckpt.spec.validate();

  const std::size_t q = parameter_count(ckpt.spec);
  ckpt.nets.resize(nets);
  for (std::size_t n = 0; n < nets; ++n) {
    if (!std::getline(in, line)) return fail("truncated, expected " + std::to_string(nets) + " nets");
    const auto fields = split_list(line);
    if (fields.size() != q + 2 || fields[0] != "theta" ||
        parse_integer(fields[1]) != static_cast<long long>(n)) {
      return fail("bad theta row " + std::to_string(n));
    }
    ckpt.nets[n].theta.reserve(q);
    for (std::size_t k = 2; k < fields.size(); ++k) {
      ckpt.nets[n].theta.push_back(parse_double(fields[k]));
    }
  }
  return ckpt;
}

}  // namespace rofso
