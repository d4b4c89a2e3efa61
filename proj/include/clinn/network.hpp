#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "clinn/diff/dual.hpp"
#include "clinn/error.hpp"

namespace clinn {

/// Residual Tanh network shape: lift (input_dim -> width), `depth` residual
/// blocks (width -> width), projection (width -> 1).
struct Architecture {
  std::size_t width = 100;
  std::size_t depth = 5;
  std::size_t input_dim = 2;  // d + 1 (space dims plus time)

  std::size_t parameter_count() const {
    return width * input_dim + width + depth * (width * width + width) + width + 1;
  }
  bool operator==(const Architecture&) const = default;
  std::string describe() const;
};

/// Location of one affine map inside the flat parameter vector. Weights are
/// row-major rows x cols, followed elsewhere by `rows` biases.
struct AffineSlice {
  std::size_t weight_offset;
  std::size_t bias_offset;
  std::size_t rows;
  std::size_t cols;
};

/// All weights and biases of the residual network in one flat vector, in
/// checkpoint order: lift W, lift b, then per block W, b, then projection w, b.
class NetworkParams {
 public:
  explicit NetworkParams(const Architecture& arch);
  NetworkParams(const Architecture& arch, std::vector<double> values);

  const Architecture& arch() const noexcept { return arch_; }
  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }

  AffineSlice lift() const;
  AffineSlice block(std::size_t k) const;
  AffineSlice projection() const;

  double& weight(const AffineSlice& s, std::size_t r, std::size_t c) {
    return values_[s.weight_offset + r * s.cols + c];
  }
  double& bias(const AffineSlice& s, std::size_t r) { return values_[s.bias_offset + r]; }

  bool operator==(const NetworkParams&) const = default;

 private:
  Architecture arch_;
  std::vector<double> values_;
};

/// Glorot-uniform weights (+-sqrt(6 / (fan_in + fan_out))), zero biases.
NetworkParams init_params(const Architecture& arch, std::uint64_t seed);

/// Network output at one space-time point (x[, y], t).
double forward(const NetworkParams& params, std::span<const double> point);

struct InputGradient {
  double u = 0.0;
  std::vector<double> du_dx;  // one per space dimension
  double du_dt = 0.0;
};

/// u together with its exact first derivatives with respect to every input.
InputGradient eval_with_input_grads(const NetworkParams& params, std::span<const double> point);

void save_params(const NetworkParams& params, const std::filesystem::path& path);
/// Throws ParseError on malformed files and ShapeMismatch when the header
/// disagrees with the payload or with `expected`.
NetworkParams load_params(const std::filesystem::path& path,
                          const std::optional<Architecture>& expected = std::nullopt);

namespace detail {

inline void check_finite(double v, std::size_t layer) {
  if (!std::isfinite(v)) {
    throw NumericalError("non-finite value in network layer " + std::to_string(layer));
  }
}

}  // namespace detail

/// The forward pass over any scalar pair: P for parameters (double or Var),
/// T for activations (double, Var, Dual<double>, Dual<Var>). Layer index in
/// diagnostics: 0 = lift, k + 1 = block k, depth + 1 = projection.
template <class P, class T>
T forward_generic(const Architecture& arch, std::span<const P> theta, std::span<const T> input) {
  using diff::value_of;
  using std::tanh;
  const std::size_t n = arch.width;
  const std::size_t in = arch.input_dim;
  if (input.size() != in) throw InvalidArgument("forward: point dimension does not match network");
  if (theta.size() != arch.parameter_count()) throw ShapeMismatch("forward: parameter count mismatch");

  std::size_t off = 0;
  std::vector<T> v(n);
  for (std::size_t i = 0; i < n; ++i) {
    T acc = T(theta[n * in + i]);
    for (std::size_t j = 0; j < in; ++j) acc = acc + input[j] * theta[i * in + j];
    detail::check_finite(value_of(acc), 0);
    v[i] = acc;
  }
  off = n * in + n;

  std::vector<T> pre(n);
  for (std::size_t k = 0; k < arch.depth; ++k) {
    const std::size_t bias = off + n * n;
    for (std::size_t i = 0; i < n; ++i) {
      T acc = T(theta[bias + i]);
      for (std::size_t j = 0; j < n; ++j) acc = acc + v[j] * theta[off + i * n + j];
      pre[i] = acc;
    }
    for (std::size_t i = 0; i < n; ++i) {
      v[i] = v[i] + tanh(pre[i]);
      detail::check_finite(value_of(v[i]), k + 1);
    }
    off = bias + n;
  }

  T out = T(theta[off + n]);
  for (std::size_t j = 0; j < n; ++j) out = out + v[j] * theta[off + j];
  detail::check_finite(value_of(out), arch.depth + 1);
  return out;
}

}  // namespace clinn
