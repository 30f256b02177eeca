#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "rofso/random.hpp"

namespace rofso {

enum class Activation { relu, tanh };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& name);

/// Layer widths from input to output; hidden layers use `hidden`, the last
/// layer is affine.
struct MlpSpec {
  std::vector<std::size_t> layer_sizes{1, 20, 10, 5, 2};
  Activation hidden = Activation::relu;

  std::size_t inputs() const { return layer_sizes.front(); }
  std::size_t outputs() const { return layer_sizes.back(); }
  std::size_t layers() const { return layer_sizes.size() - 1; }

  /// At least two sizes, all positive. Throws std::invalid_argument.
  void validate() const;

  bool operator==(const MlpSpec&) const = default;
};

/// Total number of weights and biases.
std::size_t parameter_count(const MlpSpec& spec);

/// Flat parameter vector. Layer l contributes its weight matrix in
/// row-major order (out x in), followed by its bias vector (out), for
/// l = 1..L in order.
struct MlpParams {
  std::vector<double> theta;

  bool operator==(const MlpParams&) const = default;
};

/// One unpacked layer.
struct DenseLayer {
  std::size_t in = 0;
  std::size_t out = 0;
  std::vector<double> weights;  ///< row-major, out x in
  std::vector<double> bias;

  bool operator==(const DenseLayer&) const = default;
};

std::vector<DenseLayer> unpack(const MlpSpec& spec, const MlpParams& params);
MlpParams pack(std::span<const DenseLayer> layers);

/// He-scaled Gaussian weights (variance 2 / fan_in) and zero biases.
MlpParams init_params(const MlpSpec& spec, Rng& rng);

/// Pre- and post-activation values of every layer from one forward pass.
struct ForwardCache {
  std::vector<std::vector<double>> pre;   ///< per layer, size out
  std::vector<std::vector<double>> post;  ///< post[0] is the input

  const std::vector<double>& output() const { return post.back(); }
};

/// Throws std::invalid_argument if x has the wrong length.
ForwardCache forward(const MlpParams& params, const MlpSpec& spec, std::span<const double> x);

/// As forward(), reusing the buffers already held by `cache`.
void forward_into(const MlpParams& params, const MlpSpec& spec, std::span<const double> x,
                  ForwardCache& cache);

/// Gradient of <d_output, forward(x)> with respect to theta, added into
/// `grad` scaled by `scale`. ReLU is given slope 0 at the kink.
/// Throws std::invalid_argument when `cache` does not match `spec`.
void backward_accumulate(const MlpParams& params, const MlpSpec& spec, const ForwardCache& cache,
                         std::span<const double> d_output, std::span<double> grad,
                         double scale = 1.0);

std::vector<double> backward(const MlpParams& params, const MlpSpec& spec,
                             const ForwardCache& cache, std::span<const double> d_output);

/// A set of networks sharing one spec, plus free-form string metadata.
/// Text format, values written in shortest round-trip form:
///
///   rofso-mlp-checkpoint 1
///   layers=1,20,10,5,2
///   activation=relu
///   meta.<key>=<value>      (zero or more)
///   nets=<n>
///   theta,<index>,<v0>,<v1>,...   (n lines)
struct Checkpoint {
  MlpSpec spec;
  std::vector<MlpParams> nets;
  std::map<std::string, std::string> metadata;

  bool operator==(const Checkpoint&) const = default;
};

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt);
Checkpoint read_checkpoint(std::istream& in);

}  // namespace rofso
