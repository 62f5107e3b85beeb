#include "snakesynth/layers.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

namespace snakesynth {

ConvGeometry same_conv_geometry(std::size_t batch, std::size_t in_h, std::size_t in_w, std::size_t in_c,
                                std::size_t out_c, std::size_t kernel, std::size_t stride) {
  ConvGeometry geo;
  geo.batch = batch;
  geo.in_h = in_h;
  geo.in_w = in_w;
  geo.in_c = in_c;
  geo.out_c = out_c;
  geo.kernel = kernel;
  geo.stride = stride;
  geo.out_h = (in_h + stride - 1) / stride;
  geo.out_w = (in_w + stride - 1) / stride;
  auto pad_total = [&](std::size_t out, std::size_t in) -> std::size_t {
    const std::size_t need = (out - 1) * stride + kernel;
    return need > in ? need - in : 0;
  };
  geo.pad_top = pad_total(geo.out_h, in_h) / 2;
  geo.pad_left = pad_total(geo.out_w, in_w) / 2;
  return geo;
}

namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatMap = Eigen::Map<RowMat<T>>;
template <typename T>
using ConstMatMap = Eigen::Map<const RowMat<T>>;

// One image [in_h,in_w,in_c] -> rows of receptive fields [out_h*out_w, k*k*in_c].
template <typename T>
void im2col(const T* x, const ConvGeometry& geo, T* cols) {
  const std::size_t c = geo.in_c;
  const std::size_t patch = geo.patch();
  for (std::size_t oy = 0; oy < geo.out_h; ++oy) {
    for (std::size_t ox = 0; ox < geo.out_w; ++ox) {
      T* row = cols + (oy * geo.out_w + ox) * patch;
      for (std::size_t ky = 0; ky < geo.kernel; ++ky) {
        const auto iy = static_cast<std::ptrdiff_t>(oy * geo.stride + ky) - static_cast<std::ptrdiff_t>(geo.pad_top);
        for (std::size_t kx = 0; kx < geo.kernel; ++kx) {
          const auto ix =
              static_cast<std::ptrdiff_t>(ox * geo.stride + kx) - static_cast<std::ptrdiff_t>(geo.pad_left);
          T* dst = row + (ky * geo.kernel + kx) * c;
          if (iy < 0 || ix < 0 || iy >= static_cast<std::ptrdiff_t>(geo.in_h) ||
              ix >= static_cast<std::ptrdiff_t>(geo.in_w)) {
            std::fill(dst, dst + c, T(0));
          } else {
            std::memcpy(dst, x + (static_cast<std::size_t>(iy) * geo.in_w + static_cast<std::size_t>(ix)) * c,
                        c * sizeof(T));
          }
        }
      }
    }
  }
}

// Adjoint of im2col: scatter-adds receptive fields back into the image.
template <typename T>
void col2im_add(const T* cols, const ConvGeometry& geo, T* x) {
  const std::size_t c = geo.in_c;
  const std::size_t patch = geo.patch();
  for (std::size_t oy = 0; oy < geo.out_h; ++oy) {
    for (std::size_t ox = 0; ox < geo.out_w; ++ox) {
      const T* row = cols + (oy * geo.out_w + ox) * patch;
      for (std::size_t ky = 0; ky < geo.kernel; ++ky) {
        const auto iy = static_cast<std::ptrdiff_t>(oy * geo.stride + ky) - static_cast<std::ptrdiff_t>(geo.pad_top);
        if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(geo.in_h)) continue;
        for (std::size_t kx = 0; kx < geo.kernel; ++kx) {
          const auto ix =
              static_cast<std::ptrdiff_t>(ox * geo.stride + kx) - static_cast<std::ptrdiff_t>(geo.pad_left);
          if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(geo.in_w)) continue;
          const T* src = row + (ky * geo.kernel + kx) * c;
          T* dst = x + (static_cast<std::size_t>(iy) * geo.in_w + static_cast<std::size_t>(ix)) * c;
          for (std::size_t ch = 0; ch < c; ++ch) dst[ch] += src[ch];
        }
      }
    }
  }
}

void require_rank(const Shape& shape, std::size_t rank, const char* what) {
  if (shape.size() != rank) {
    throw ShapeError(std::string(what) + " expects rank " + std::to_string(rank) + ", got " + shape_string(shape));
  }
}

void check_kernel(const Shape& kernel, std::size_t stride, const char* what) {
  require_rank(kernel, 4, what);
  if (kernel[0] != kernel[1] || kernel[0] % 2 == 0) {
    throw ShapeError(std::string(what) + " needs a square odd kernel, got " + shape_string(kernel));
  }
  if (stride != 1 && stride != 2) {
    throw ShapeError(std::string(what) + " supports stride 1 or 2, got " + std::to_string(stride));
  }
}

template <typename T>
void check_bias(const Graph<T>& g, std::optional<Var> bias, std::size_t channels, const char* what) {
  if (!bias) return;
  const Shape& s = g.value(*bias).shape();
  if (s.size() != 1 || s[0] != channels) {
    throw ShapeError(std::string(what) + " bias " + shape_string(s) + " does not match " + std::to_string(channels) +
                     " output channels");
  }
}

template <typename T>
void add_channel_bias(Tensor<T>& out, const Tensor<T>& bias) {
  const std::size_t c = bias.size();
  T* o = out.raw();
  for (std::size_t i = 0; i < out.size(); i += c) {
    for (std::size_t ch = 0; ch < c; ++ch) o[i + ch] += bias[ch];
  }
}

template <typename T>
void accumulate_channel_sum(const Tensor<T>& gy, Tensor<T>& gb) {
  const std::size_t c = gb.size();
  for (std::size_t i = 0; i < gy.size(); i += c) {
    for (std::size_t ch = 0; ch < c; ++ch) gb[ch] += gy[i + ch];
  }
}

}  // namespace

namespace ops {

template <typename T>
Var dense(Graph<T>& g, Var x, Var w, std::optional<Var> bias) {
  const Tensor<T>& xv = g.value(x);
  const Tensor<T>& wv = g.value(w);
  if (xv.rank() != 2 || wv.rank() != 2 || xv.dim(1) != wv.dim(0)) {
    throw ShapeError("dense: input " + shape_string(xv.shape()) + " is incompatible with weights " +
                     shape_string(wv.shape()));
  }
  const std::size_t batch = xv.dim(0), in = xv.dim(1), out = wv.dim(1);
  check_bias(g, bias, out, "dense");

  Tensor<T> y({batch, out});
  MatMap<T>(y.raw(), batch, out).noalias() = ConstMatMap<T>(xv.raw(), batch, in) * ConstMatMap<T>(wv.raw(), in, out);
  if (bias) add_channel_bias(y, g.value(*bias));

  std::vector<Var> parents{x, w};
  if (bias) parents.push_back(*bias);
  return g.record(std::move(y), parents, [x, w, bias, batch, in, out](Graph<T>& g, Var self) {
    const Tensor<T>& gy = g.grad_buffer(self);
    ConstMatMap<T> gym(gy.raw(), batch, out);
    if (g.requires_grad(x)) {
      MatMap<T>(g.grad_buffer(x).raw(), batch, in).noalias() +=
          gym * ConstMatMap<T>(g.value(w).raw(), in, out).transpose();
    }
    if (g.requires_grad(w)) {
      MatMap<T>(g.grad_buffer(w).raw(), in, out).noalias() +=
          ConstMatMap<T>(g.value(x).raw(), batch, in).transpose() * gym;
    }
    if (bias && g.requires_grad(*bias)) accumulate_channel_sum(gy, g.grad_buffer(*bias));
  });
}

template <typename T>
Var conv2d(Graph<T>& g, Var x, Var kernel, std::optional<Var> bias, std::size_t stride) {
  const Tensor<T>& xv = g.value(x);
  const Tensor<T>& kv = g.value(kernel);
  require_rank(xv.shape(), 4, "conv2d input");
  check_kernel(kv.shape(), stride, "conv2d");
  if (kv.dim(2) != xv.dim(3)) {
    throw ShapeError("conv2d: input channels of " + shape_string(xv.shape()) + " do not match kernel " +
                     shape_string(kv.shape()));
  }
  const ConvGeometry geo = same_conv_geometry(xv.dim(0), xv.dim(1), xv.dim(2), xv.dim(3), kv.dim(3), kv.dim(0), stride);
  check_bias(g, bias, geo.out_c, "conv2d");

  const std::size_t rows = geo.out_h * geo.out_w;
  const std::size_t in_image = geo.in_h * geo.in_w * geo.in_c;
  Tensor<T> y({geo.batch, geo.out_h, geo.out_w, geo.out_c});
  std::vector<T> cols(rows * geo.patch());
  ConstMatMap<T> km(kv.raw(), geo.patch(), geo.out_c);
  for (std::size_t b = 0; b < geo.batch; ++b) {
    im2col(xv.raw() + b * in_image, geo, cols.data());
    MatMap<T>(y.raw() + b * rows * geo.out_c, rows, geo.out_c).noalias() =
        ConstMatMap<T>(cols.data(), rows, geo.patch()) * km;
  }
  if (bias) add_channel_bias(y, g.value(*bias));

  std::vector<Var> parents{x, kernel};
  if (bias) parents.push_back(*bias);
  return g.record(std::move(y), parents, [x, kernel, bias, geo](Graph<T>& g, Var self) {
    const Tensor<T>& gy = g.grad_buffer(self);
    const std::size_t rows = geo.out_h * geo.out_w;
    const std::size_t in_image = geo.in_h * geo.in_w * geo.in_c;
    ConstMatMap<T> km(g.value(kernel).raw(), geo.patch(), geo.out_c);
    std::vector<T> cols(rows * geo.patch());
    for (std::size_t b = 0; b < geo.batch; ++b) {
      ConstMatMap<T> gym(gy.raw() + b * rows * geo.out_c, rows, geo.out_c);
      if (g.requires_grad(x)) {
        MatMap<T>(cols.data(), rows, geo.patch()).noalias() = gym * km.transpose();
        col2im_add(cols.data(), geo, g.grad_buffer(x).raw() + b * in_image);
      }
      if (g.requires_grad(kernel)) {
        im2col(g.value(x).raw() + b * in_image, geo, cols.data());
        MatMap<T>(g.grad_buffer(kernel).raw(), geo.patch(), geo.out_c).noalias() +=
            ConstMatMap<T>(cols.data(), rows, geo.patch()).transpose() * gym;
      }
    }
    if (bias && g.requires_grad(*bias)) accumulate_channel_sum(gy, g.grad_buffer(*bias));
  });
}

template <typename T>
Var tconv2d(Graph<T>& g, Var x, Var kernel, std::optional<Var> bias, std::size_t stride) {
  const Tensor<T>& xv = g.value(x);
  const Tensor<T>& kv = g.value(kernel);
  require_rank(xv.shape(), 4, "tconv2d input");
  check_kernel(kv.shape(), stride, "tconv2d");
  if (kv.dim(3) != xv.dim(3)) {
    throw ShapeError("tconv2d: input channels of " + shape_string(xv.shape()) + " do not match kernel " +
                     shape_string(kv.shape()));
  }
  // Geometry of the conv2d whose input-gradient this op computes.
  const ConvGeometry geo = same_conv_geometry(xv.dim(0), xv.dim(1) * stride, xv.dim(2) * stride, kv.dim(2),
                                              kv.dim(3), kv.dim(0), stride);
  check_bias(g, bias, geo.in_c, "tconv2d");

  const std::size_t rows = geo.out_h * geo.out_w;
  const std::size_t out_image = geo.in_h * geo.in_w * geo.in_c;
  Tensor<T> y({geo.batch, geo.in_h, geo.in_w, geo.in_c});
  std::vector<T> cols(rows * geo.patch());
  ConstMatMap<T> km(kv.raw(), geo.patch(), geo.out_c);
  for (std::size_t b = 0; b < geo.batch; ++b) {
    MatMap<T>(cols.data(), rows, geo.patch()).noalias() =
        ConstMatMap<T>(xv.raw() + b * rows * geo.out_c, rows, geo.out_c) * km.transpose();
    col2im_add(cols.data(), geo, y.raw() + b * out_image);
  }
  if (bias) add_channel_bias(y, g.value(*bias));

  std::vector<Var> parents{x, kernel};
  if (bias) parents.push_back(*bias);
  return g.record(std::move(y), parents, [x, kernel, bias, geo](Graph<T>& g, Var self) {
    const Tensor<T>& gy = g.grad_buffer(self);
    const std::size_t rows = geo.out_h * geo.out_w;
    const std::size_t out_image = geo.in_h * geo.in_w * geo.in_c;
    ConstMatMap<T> km(g.value(kernel).raw(), geo.patch(), geo.out_c);
    std::vector<T> cols(rows * geo.patch());
    for (std::size_t b = 0; b < geo.batch; ++b) {
      im2col(gy.raw() + b * out_image, geo, cols.data());
      ConstMatMap<T> cm(cols.data(), rows, geo.patch());
      if (g.requires_grad(x)) {
        MatMap<T>(g.grad_buffer(x).raw() + b * rows * geo.out_c, rows, geo.out_c).noalias() += cm * km;
      }
      if (g.requires_grad(kernel)) {
        MatMap<T>(g.grad_buffer(kernel).raw(), geo.patch(), geo.out_c).noalias() +=
            cm.transpose() * ConstMatMap<T>(g.value(x).raw() + b * rows * geo.out_c, rows, geo.out_c);
      }
    }
    if (bias && g.requires_grad(*bias)) accumulate_channel_sum(gy, g.grad_buffer(*bias));
  });
}

template <typename T>
Var batch_norm(Graph<T>& g, Var x, Var gamma, Var beta, BatchNormStats<T>& stats, BatchNormMode mode, double eps) {
  const Tensor<T>& xv = g.value(x);
  require_rank(xv.shape(), 4, "batch_norm input");
  const std::size_t c = xv.dim(3);
  const Tensor<T>& gv = g.value(gamma);
  const Tensor<T>& bv = g.value(beta);
  if (gv.size() != c || bv.size() != c || stats.mean.size() != c) {
    throw ShapeError("batch_norm: input " + shape_string(xv.shape()) + " does not match gamma " +
                     shape_string(gv.shape()) + " / beta " + shape_string(bv.shape()));
  }
  const std::size_t n = xv.size() / c;

  std::vector<double> mean(c, 0.0), var(c, 0.0);
  if (mode == BatchNormMode::train) {
    for (std::size_t i = 0; i < xv.size(); i += c) {
      for (std::size_t ch = 0; ch < c; ++ch) mean[ch] += xv[i + ch];
    }
    for (auto& m : mean) m /= static_cast<double>(n);
    for (std::size_t i = 0; i < xv.size(); i += c) {
      for (std::size_t ch = 0; ch < c; ++ch) {
        const double d = xv[i + ch] - mean[ch];
        var[ch] += d * d;
      }
    }
    for (auto& v : var) v /= static_cast<double>(n);
    const double mom = stats.momentum;
    for (std::size_t ch = 0; ch < c; ++ch) {
      stats.mean[ch] = static_cast<T>(mom * stats.mean[ch] + (1.0 - mom) * mean[ch]);
      stats.var[ch] = static_cast<T>(mom * stats.var[ch] + (1.0 - mom) * var[ch]);
    }
    ++stats.updates;
  } else {
    if (stats.updates == 0) {
      throw GraphError("batch_norm: inference mode needs running statistics, but no training step has run");
    }
    for (std::size_t ch = 0; ch < c; ++ch) {
      mean[ch] = stats.mean[ch];
      var[ch] = stats.var[ch];
    }
  }

  std::vector<T> inv_std(c);
  for (std::size_t ch = 0; ch < c; ++ch) inv_std[ch] = static_cast<T>(1.0 / std::sqrt(var[ch] + eps));
  Tensor<T> xhat(xv.shape());
  Tensor<T> y(xv.shape());
  for (std::size_t i = 0; i < xv.size(); i += c) {
    for (std::size_t ch = 0; ch < c; ++ch) {
      const T h = static_cast<T>((xv[i + ch] - mean[ch])) * inv_std[ch];
      xhat[i + ch] = h;
      y[i + ch] = gv[ch] * h + bv[ch];
    }
  }

  return g.record(std::move(y), {x, gamma, beta},
                  [x, gamma, beta, mode, c, n, xhat = std::move(xhat), inv_std](Graph<T>& g, Var self) {
                    const Tensor<T>& gy = g.grad_buffer(self);
                    const Tensor<T>& gv = g.value(gamma);
                    std::vector<double> sum_dy(c, 0.0), sum_dy_xhat(c, 0.0);
                    for (std::size_t i = 0; i < gy.size(); i += c) {
                      for (std::size_t ch = 0; ch < c; ++ch) {
                        sum_dy[ch] += gy[i + ch];
                        sum_dy_xhat[ch] += static_cast<double>(gy[i + ch]) * xhat[i + ch];
                      }
                    }
                    if (g.requires_grad(gamma)) {
                      Tensor<T>& gg = g.grad_buffer(gamma);
                      for (std::size_t ch = 0; ch < c; ++ch) gg[ch] += static_cast<T>(sum_dy_xhat[ch]);
                    }
                    if (g.requires_grad(beta)) {
                      Tensor<T>& gb = g.grad_buffer(beta);
                      for (std::size_t ch = 0; ch < c; ++ch) gb[ch] += static_cast<T>(sum_dy[ch]);
                    }
                    if (!g.requires_grad(x)) return;
                    Tensor<T>& gx = g.grad_buffer(x);
                    const double count = static_cast<double>(n);
                    for (std::size_t i = 0; i < gy.size(); i += c) {
                      for (std::size_t ch = 0; ch < c; ++ch) {
                        const double scale = static_cast<double>(gv[ch]) * inv_std[ch];
                        if (mode == BatchNormMode::train) {
                          gx[i + ch] += static_cast<T>(
                              scale * (gy[i + ch] - sum_dy[ch] / count - xhat[i + ch] * sum_dy_xhat[ch] / count));
                        } else {
                          gx[i + ch] += static_cast<T>(scale * gy[i + ch]);
                        }
                      }
                    }
                  });
}

template <typename T>
Var leaky_relu(Graph<T>& g, Var x, double slope) {
  const Tensor<T>& xv = g.value(x);
  Tensor<T> y(xv.shape());
  const T s = static_cast<T>(slope);
  for (std::size_t i = 0; i < xv.size(); ++i) y[i] = xv[i] > T(0) ? xv[i] : s * xv[i];
  return g.record(std::move(y), {x}, [x, s](Graph<T>& g, Var self) {
    const Tensor<T>& gy = g.grad_buffer(self);
    const Tensor<T>& xv = g.value(x);
    Tensor<T>& gx = g.grad_buffer(x);
    for (std::size_t i = 0; i < gy.size(); ++i) gx[i] += xv[i] > T(0) ? gy[i] : s * gy[i];
  });
}

template <typename T>
Var tanh(Graph<T>& g, Var x) {
  const Tensor<T>& xv = g.value(x);
  Tensor<T> y(xv.shape());
  for (std::size_t i = 0; i < xv.size(); ++i) y[i] = std::tanh(xv[i]);
  return g.record(std::move(y), {x}, [x](Graph<T>& g, Var self) {
    const Tensor<T>& gy = g.grad_buffer(self);
    const Tensor<T>& yv = g.value(self);
    Tensor<T>& gx = g.grad_buffer(x);
    for (std::size_t i = 0; i < gy.size(); ++i) gx[i] += gy[i] * (T(1) - yv[i] * yv[i]);
  });
}

template <typename T>
Var reshape(Graph<T>& g, Var x, Shape shape) {
  Tensor<T> y = g.value(x).reshaped(std::move(shape));
  return g.record(std::move(y), {x}, [x](Graph<T>& g, Var self) {
    const Tensor<T>& gy = g.grad_buffer(self);
    Tensor<T>& gx = g.grad_buffer(x);
    for (std::size_t i = 0; i < gy.size(); ++i) gx[i] += gy[i];
  });
}

template <typename T>
Var flatten(Graph<T>& g, Var x) {
  const Tensor<T>& xv = g.value(x);
  return reshape(g, x, Shape{xv.dim(0), xv.size() / xv.dim(0)});
}

template <typename T>
Var add(Graph<T>& g, Var a, Var b) {
  const Tensor<T>& av = g.value(a);
  const Tensor<T>& bv = g.value(b);
  if (av.shape() != bv.shape()) {
    throw ShapeError("add: shapes " + shape_string(av.shape()) + " and " + shape_string(bv.shape()) + " differ");
  }
  Tensor<T> y(av.shape());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = av[i] + bv[i];
  return g.record(std::move(y), {a, b}, [a, b](Graph<T>& g, Var self) {
    const Tensor<T>& gy = g.grad_buffer(self);
    for (Var v : {a, b}) {
      if (!g.requires_grad(v)) continue;
      Tensor<T>& gv = g.grad_buffer(v);
      for (std::size_t i = 0; i < gy.size(); ++i) gv[i] += gy[i];
    }
  });
}

template <typename T>
Var sum(Graph<T>& g, Var x) {
  const Tensor<T>& xv = g.value(x);
  double total = 0.0;
  for (T v : xv.data()) total += v;
  return g.record(Tensor<T>({1}, static_cast<T>(total)), {x}, [x](Graph<T>& g, Var self) {
    const T gy = g.grad_buffer(self)[0];
    Tensor<T>& gx = g.grad_buffer(x);
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += gy;
  });
}

template <typename T>
Var scale(Graph<T>& g, Var x, double factor) {
  const Tensor<T>& xv = g.value(x);
  Tensor<T> y(xv.shape());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = static_cast<T>(factor * xv[i]);
  return g.record(std::move(y), {x}, [x, factor](Graph<T>& g, Var self) {
    const Tensor<T>& gy = g.grad_buffer(self);
    Tensor<T>& gx = g.grad_buffer(x);
    for (std::size_t i = 0; i < gy.size(); ++i) gx[i] += static_cast<T>(factor * gy[i]);
  });
}

double bce_with_logits(double logit, double target) {
  return std::max(logit, 0.0) - logit * target + std::log1p(std::exp(-std::abs(logit)));
}

template <typename T>
Var bce_with_logits(Graph<T>& g, Var logits, double target) {
  const Tensor<T>& lv = g.value(logits);
  double total = 0.0;
  for (T l : lv.data()) total += bce_with_logits(static_cast<double>(l), target);
  const double count = static_cast<double>(lv.size());
  return g.record(Tensor<T>({1}, static_cast<T>(total / count)), {logits},
                  [logits, target, count](Graph<T>& g, Var self) {
                    const double gy = g.grad_buffer(self)[0];
                    const Tensor<T>& lv = g.value(logits);
                    Tensor<T>& gl = g.grad_buffer(logits);
                    for (std::size_t i = 0; i < lv.size(); ++i) {
                      const double l = lv[i];
                      const double sigma = l >= 0 ? 1.0 / (1.0 + std::exp(-l)) : std::exp(l) / (1.0 + std::exp(l));
                      gl[i] += static_cast<T>(gy * (sigma - target) / count);
                    }
                  });
}

#define SNAKESYNTH_INSTANTIATE_OPS(T)                                                                       \
  template Var dense<T>(Graph<T>&, Var, Var, std::optional<Var>);                                           \
  template Var conv2d<T>(Graph<T>&, Var, Var, std::optional<Var>, std::size_t);                             \
  template Var tconv2d<T>(Graph<T>&, Var, Var, std::optional<Var>, std::size_t);                            \
  template Var batch_norm<T>(Graph<T>&, Var, Var, Var, BatchNormStats<T>&, BatchNormMode, double);          \
  template Var leaky_relu<T>(Graph<T>&, Var, double);                                                       \
  template Var tanh<T>(Graph<T>&, Var);                                                                     \
  template Var reshape<T>(Graph<T>&, Var, Shape);                                                           \
  template Var flatten<T>(Graph<T>&, Var);                                                                  \
  template Var add<T>(Graph<T>&, Var, Var);                                                                 \
  template Var sum<T>(Graph<T>&, Var);                                                                      \
  template Var scale<T>(Graph<T>&, Var, double);                                                            \
  template Var bce_with_logits<T>(Graph<T>&, Var, double);

SNAKESYNTH_INSTANTIATE_OPS(float)
SNAKESYNTH_INSTANTIATE_OPS(double)

#undef SNAKESYNTH_INSTANTIATE_OPS

}  // namespace ops
}  // namespace snakesynth
