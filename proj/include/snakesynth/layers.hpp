#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>

#include "snakesynth/graph.hpp"

namespace snakesynth {

enum class BatchNormMode { train, infer };

/// Running per-channel statistics accumulated by train-mode batch norm.
template <typename T>
struct BatchNormStats {
  explicit BatchNormStats(std::size_t channels) : mean({channels}, T(0)), var({channels}, T(1)) {}

  Tensor<T> mean;
  Tensor<T> var;
  std::uint64_t updates = 0;
  double momentum = 0.99;
};

/// Zero-padding layout used by conv2d ("same") and reused, transposed, by tconv2d.
struct ConvGeometry {
  std::size_t batch = 0;
  std::size_t in_h = 0, in_w = 0, in_c = 0;
  std::size_t out_h = 0, out_w = 0, out_c = 0;
  std::size_t kernel = 0, stride = 1;
  std::size_t pad_top = 0, pad_left = 0;

  std::size_t patch() const { return kernel * kernel * in_c; }
};

/// "Same" geometry: out = ceil(in / stride), padding split with the extra row/column at the end.
ConvGeometry same_conv_geometry(std::size_t batch, std::size_t in_h, std::size_t in_w, std::size_t in_c,
                                std::size_t out_c, std::size_t kernel, std::size_t stride);

namespace ops {

inline constexpr double kLeakySlope = 0.2;
inline constexpr double kBatchNormEps = 1e-3;

/// x [B,K] times w [K,M] plus optional bias [M].
template <typename T>
Var dense(Graph<T>& g, Var x, Var w, std::optional<Var> bias = {});

/// Cross-correlation of x [B,H,W,Cin] with kernel [k,k,Cin,Cout], "same" padding.
template <typename T>
Var conv2d(Graph<T>& g, Var x, Var kernel, std::optional<Var> bias, std::size_t stride);

/// Transposed convolution of x [B,H,W,Cin] with kernel [k,k,Cout,Cin]; output [B,H*s,W*s,Cout].
/// This is the adjoint of conv2d with the same kernel viewed as [k,k,Cout,Cin].
template <typename T>
Var tconv2d(Graph<T>& g, Var x, Var kernel, std::optional<Var> bias, std::size_t stride);

template <typename T>
Var batch_norm(Graph<T>& g, Var x, Var gamma, Var beta, BatchNormStats<T>& stats, BatchNormMode mode,
               double eps = kBatchNormEps);

template <typename T>
Var leaky_relu(Graph<T>& g, Var x, double slope = kLeakySlope);

template <typename T>
Var tanh(Graph<T>& g, Var x);

template <typename T>
Var reshape(Graph<T>& g, Var x, Shape shape);

/// [B, ...] -> [B, prod(...)]
template <typename T>
Var flatten(Graph<T>& g, Var x);

template <typename T>
Var add(Graph<T>& g, Var a, Var b);

template <typename T>
Var sum(Graph<T>& g, Var x);

template <typename T>
Var scale(Graph<T>& g, Var x, double factor);

/// Mean over elements of max(l,0) - l*t + log(1 + exp(-|l|)).
template <typename T>
Var bce_with_logits(Graph<T>& g, Var logits, double target);

/// Scalar form of the same loss.
double bce_with_logits(double logit, double target);

}  // namespace ops
}  // namespace snakesynth
