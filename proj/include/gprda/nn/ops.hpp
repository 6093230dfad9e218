#pragma once

// Differentiable operations. Batched layouts: sequences are [B, C, L],
// vectors are [B, F].

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "gprda/error.hpp"
#include "gprda/nn/tensor.hpp"

namespace gprda::nn {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMatrix>;
using ConstMatMap = Eigen::Map<const RowMatrix>;

/// Output length of a 1D convolution: floor((L - K + 2P) / S) + 1.
inline std::size_t conv_output_length(std::size_t length, std::size_t kernel, std::size_t stride,
                                      std::size_t padding = 0) {
  if (kernel == 0 || stride == 0) throw ShapeError("conv1d: kernel and stride must be positive");
  if (length + 2 * padding < kernel) {
    throw ShapeError("conv1d: input length " + std::to_string(length) + " (padding " + std::to_string(padding) +
                     ") is shorter than kernel " + std::to_string(kernel));
  }
  return (length + 2 * padding - kernel) / stride + 1;
}

/// Valid (or zero-padded) cross-correlation.
/// x [B, Cin, L], weight [Cout, Cin, K], bias [Cout] -> [B, Cout, F].
inline Tensor conv1d(const Tensor& x, const Tensor& weight, const Tensor& bias, std::size_t stride,
                     std::size_t padding = 0) {
  if (x.rank() != 3 || weight.rank() != 3 || bias.rank() != 1) {
    throw ShapeError("conv1d: expected x [B,C,L], weight [Cout,Cin,K], bias [Cout]");
  }
  const std::size_t B = x.dim(0), Cin = x.dim(1), L = x.dim(2);
  const std::size_t Cout = weight.dim(0), K = weight.dim(2);
  if (weight.dim(1) != Cin) {
    throw ShapeError("conv1d: input has " + std::to_string(Cin) + " channels, kernel expects " +
                     std::to_string(weight.dim(1)));
  }
  if (bias.dim(0) != Cout) throw ShapeError("conv1d: bias length does not match kernel count");
  const std::size_t F = conv_output_length(L, K, stride, padding);
  const std::size_t rows = Cin * K, cols = B * F;

  auto col = std::make_shared<std::vector<double>>(rows * cols, 0.0);
  const double* xv = x.values().data();
  for (std::size_t ci = 0; ci < Cin; ++ci) {
    for (std::size_t k = 0; k < K; ++k) {
      double* dst = col->data() + (ci * K + k) * cols;
      for (std::size_t b = 0; b < B; ++b) {
        const double* src = xv + (b * Cin + ci) * L;
        for (std::size_t f = 0; f < F; ++f) {
          const std::ptrdiff_t pos = static_cast<std::ptrdiff_t>(f * stride + k) - static_cast<std::ptrdiff_t>(padding);
          if (pos >= 0 && pos < static_cast<std::ptrdiff_t>(L)) dst[b * F + f] = src[pos];
        }
      }
    }
  }
  RowMatrix out_mat = ConstMatMap(weight.values().data(), Cout, rows) * ConstMatMap(col->data(), rows, cols);
  std::vector<double> out(B * Cout * F);
  const double* bv = bias.values().data();
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t co = 0; co < Cout; ++co) {
      const double* src = out_mat.data() + co * cols + b * F;
      double* dst = out.data() + (b * Cout + co) * F;
      for (std::size_t f = 0; f < F; ++f) dst[f] = src[f] + bv[co];
    }
  }
  return make_result({B, Cout, F}, std::move(out), {x, weight, bias},
                     [=](Node& self) {
                       RowMatrix g(Cout, cols);
                       for (std::size_t b = 0; b < B; ++b) {
                         for (std::size_t co = 0; co < Cout; ++co) {
                           const double* src = self.grad.data() + (b * Cout + co) * F;
                           std::copy(src, src + F, g.data() + co * cols + b * F);
                         }
                       }
                       ConstMatMap colm(col->data(), rows, cols);
                       if (double* gw = parent_grad(self, 1)) {
                         MatMap(gw, Cout, rows).noalias() += g * colm.transpose();
                       }
                       if (double* gb = parent_grad(self, 2)) {
                         for (std::size_t co = 0; co < Cout; ++co) gb[co] += g.row(static_cast<Eigen::Index>(co)).sum();
                       }
                       if (double* gx = parent_grad(self, 0)) {
                         const auto& wv = self.parents[1]->value;
                         RowMatrix gcol = ConstMatMap(wv.data(), Cout, rows).transpose() * g;
                         for (std::size_t ci = 0; ci < Cin; ++ci) {
                           for (std::size_t k = 0; k < K; ++k) {
                             const double* src = gcol.data() + (ci * K + k) * cols;
                             for (std::size_t b = 0; b < B; ++b) {
                               double* dst = gx + (b * Cin + ci) * L;
                               for (std::size_t f = 0; f < F; ++f) {
                                 const std::ptrdiff_t pos = static_cast<std::ptrdiff_t>(f * stride + k) -
                                                            static_cast<std::ptrdiff_t>(padding);
                                 if (pos >= 0 && pos < static_cast<std::ptrdiff_t>(L)) dst[pos] += src[b * F + f];
                               }
                             }
                           }
                         }
                       }
                     });
}

/// Fully connected layer. x [B, In], weight [Out, In], bias [Out] -> [B, Out].
inline Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  if (x.rank() != 2 || weight.rank() != 2 || bias.rank() != 1) {
    throw ShapeError("linear: expected x [B,In], weight [Out,In], bias [Out]");
  }
  const std::size_t B = x.dim(0), In = x.dim(1), Out = weight.dim(0);
  if (weight.dim(1) != In) {
    throw ShapeError("linear: input width " + std::to_string(In) + " does not match weight width " +
                     std::to_string(weight.dim(1)));
  }
  if (bias.dim(0) != Out) throw ShapeError("linear: bias length does not match output width");
  RowMatrix y = ConstMatMap(x.values().data(), B, In) * ConstMatMap(weight.values().data(), Out, In).transpose();
  std::vector<double> out(y.data(), y.data() + B * Out);
  const double* bv = bias.values().data();
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t o = 0; o < Out; ++o) out[b * Out + o] += bv[o];
  }
  return make_result({B, Out}, std::move(out), {x, weight, bias}, [=](Node& self) {
    ConstMatMap g(self.grad.data(), B, Out);
    if (double* gx = parent_grad(self, 0)) {
      MatMap(gx, B, In).noalias() += g * ConstMatMap(self.parents[1]->value.data(), Out, In);
    }
    if (double* gw = parent_grad(self, 1)) {
      MatMap(gw, Out, In).noalias() += g.transpose() * ConstMatMap(self.parents[0]->value.data(), B, In);
    }
    if (double* gb = parent_grad(self, 2)) {
      for (std::size_t o = 0; o < Out; ++o) gb[o] += g.col(static_cast<Eigen::Index>(o)).sum();
    }
  });
}

inline Tensor leaky_relu(const Tensor& x, double slope) {
  std::vector<double> out(x.size());
  const auto v = x.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = v[i] > 0.0 ? v[i] : slope * v[i];
  return make_result(x.shape(), std::move(out), {x}, [slope](Node& self) {
    double* gx = parent_grad(self, 0);
    const auto& v = self.parents[0]->value;
    for (std::size_t i = 0; i < v.size(); ++i) gx[i] += (v[i] > 0.0 ? 1.0 : slope) * self.grad[i];
  });
}

/// [B, ...] -> [B, prod(...)]
inline Tensor flatten(const Tensor& x) {
  if (x.rank() < 1) throw ShapeError("flatten: needs a batch dimension");
  const std::size_t B = x.dim(0);
  std::vector<double> out(x.values().begin(), x.values().end());
  return make_result({B, B == 0 ? 0 : x.size() / B}, std::move(out), {x}, [](Node& self) {
    double* gx = parent_grad(self, 0);
    for (std::size_t i = 0; i < self.grad.size(); ++i) gx[i] += self.grad[i];
  });
}

/// Linear interpolation along the last axis with aligned endpoints.
/// x [B, C, L] -> [B, C, out_length].
inline Tensor upsample_linear(const Tensor& x, std::size_t out_length) {
  if (x.rank() != 3) throw ShapeError("upsample_linear: expected [B,C,L]");
  if (out_length == 0) throw ShapeError("upsample_linear: output length must be positive");
  const std::size_t B = x.dim(0), C = x.dim(1), L = x.dim(2);
  std::vector<std::size_t> i0(out_length), i1(out_length);
  std::vector<double> frac(out_length);
  for (std::size_t i = 0; i < out_length; ++i) {
    const double pos = (L == 1 || out_length == 1)
                           ? 0.0
                           : static_cast<double>(i) * static_cast<double>(L - 1) / static_cast<double>(out_length - 1);
    i0[i] = std::min(static_cast<std::size_t>(pos), L - 1);
    i1[i] = std::min(i0[i] + 1, L - 1);
    frac[i] = pos - static_cast<double>(i0[i]);
  }
  std::vector<double> out(B * C * out_length);
  const auto v = x.values();
  for (std::size_t r = 0; r < B * C; ++r) {
    const double* src = v.data() + r * L;
    double* dst = out.data() + r * out_length;
    for (std::size_t i = 0; i < out_length; ++i) dst[i] = (1.0 - frac[i]) * src[i0[i]] + frac[i] * src[i1[i]];
  }
  return make_result({B, C, out_length}, std::move(out), {x}, [=](Node& self) {
    double* gx = parent_grad(self, 0);
    for (std::size_t r = 0; r < B * C; ++r) {
      const double* g = self.grad.data() + r * out_length;
      double* dst = gx + r * L;
      for (std::size_t i = 0; i < out_length; ++i) {
        dst[i0[i]] += (1.0 - frac[i]) * g[i];
        dst[i1[i]] += frac[i] * g[i];
      }
    }
  });
}

/// Feature fusion: a [B, C, L] plus b, where b is [B, C] (broadcast along L)
/// or has the same shape as a.
inline Tensor sum_fuse(const Tensor& a, const Tensor& b) {
  if (a.shape() == b.shape()) {
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.values()[i] + b.values()[i];
    return make_result(a.shape(), std::move(out), {a, b}, [](Node& self) {
      for (std::size_t p = 0; p < 2; ++p) {
        if (double* g = parent_grad(self, p)) {
          for (std::size_t i = 0; i < self.grad.size(); ++i) g[i] += self.grad[i];
        }
      }
    });
  }
  if (a.rank() != 3 || b.rank() != 2 || b.dim(0) != a.dim(0) || b.dim(1) != a.dim(1)) {
    throw ShapeError("sum_fuse: cannot broadcast " + shape_string(b.shape()) + " over " + shape_string(a.shape()));
  }
  const std::size_t B = a.dim(0), C = a.dim(1), L = a.dim(2);
  std::vector<double> out(a.size());
  for (std::size_t r = 0; r < B * C; ++r) {
    for (std::size_t l = 0; l < L; ++l) out[r * L + l] = a.values()[r * L + l] + b.values()[r];
  }
  return make_result(a.shape(), std::move(out), {a, b}, [=](Node& self) {
    if (double* ga = parent_grad(self, 0)) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) ga[i] += self.grad[i];
    }
    if (double* gb = parent_grad(self, 1)) {
      for (std::size_t r = 0; r < B * C; ++r) {
        double s = 0.0;
        for (std::size_t l = 0; l < L; ++l) s += self.grad[r * L + l];
        gb[r] += s;
      }
    }
  });
}

/// Gradient reversal: identity forward, gradient times -lambda backward.
inline Tensor grl(const Tensor& x, double lambda) {
  if (!(lambda >= 0.0)) throw ConfigError("grl: lambda must be >= 0");
  std::vector<double> out(x.values().begin(), x.values().end());
  return make_result(x.shape(), std::move(out), {x}, [lambda](Node& self) {
    double* gx = parent_grad(self, 0);
    for (std::size_t i = 0; i < self.grad.size(); ++i) gx[i] += -lambda * self.grad[i];
  });
}

inline Tensor add(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) throw ShapeError("add: shape mismatch");
  return sum_fuse(a, b);
}

inline Tensor scale(const Tensor& x, double c) {
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = c * x.values()[i];
  return make_result(x.shape(), std::move(out), {x}, [c](Node& self) {
    double* gx = parent_grad(self, 0);
    for (std::size_t i = 0; i < self.grad.size(); ++i) gx[i] += c * self.grad[i];
  });
}

/// Mean over all elements of (pred - target)^2.
inline Tensor mse_loss(const Tensor& pred, const Tensor& target) {
  if (pred.size() != target.size()) {
    throw ShapeError("mse_loss: shapes " + shape_string(pred.shape()) + " and " + shape_string(target.shape()) +
                     " differ");
  }
  if (pred.size() == 0) throw DegenerateInputError("mse_loss: empty input");
  const double n = static_cast<double>(pred.size());
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred.values()[i] - target.values()[i];
    s += d * d;
  }
  return make_result({1}, {s / n}, {pred, target}, [n](Node& self) {
    const auto& p = self.parents[0]->value;
    const auto& t = self.parents[1]->value;
    const double g = self.grad[0];
    if (double* gp = parent_grad(self, 0)) {
      for (std::size_t i = 0; i < p.size(); ++i) gp[i] += 2.0 * (p[i] - t[i]) / n * g;
    }
    if (double* gt = parent_grad(self, 1)) {
      for (std::size_t i = 0; i < p.size(); ++i) gt[i] -= 2.0 * (p[i] - t[i]) / n * g;
    }
  });
}

enum class Domain : int { source = 0, target = 1 };

/// Softmax cross-entropy of two-class logits [B, 2] against one domain label,
/// averaged over the batch. Class 0 is "source".
inline Tensor domain_loss(const Tensor& logits, Domain domain) {
  if (logits.rank() != 2 || logits.dim(1) != 2) throw ShapeError("domain_loss: expected logits [B, 2]");
  const std::size_t B = logits.dim(0);
  if (B == 0) throw DegenerateInputError("domain_loss: empty batch");
  const auto label = static_cast<std::size_t>(domain);
  std::vector<double> prob(B * 2);
  double loss = 0.0;
  const auto v = logits.values();
  for (std::size_t b = 0; b < B; ++b) {
    const double m = std::max(v[2 * b], v[2 * b + 1]);
    const double e0 = std::exp(v[2 * b] - m), e1 = std::exp(v[2 * b + 1] - m);
    const double lse = m + std::log(e0 + e1);
    prob[2 * b] = e0 / (e0 + e1);
    prob[2 * b + 1] = e1 / (e0 + e1);
    loss += lse - v[2 * b + label];
  }
  const double inv_b = 1.0 / static_cast<double>(B);
  return make_result({1}, {loss * inv_b}, {logits}, [=](Node& self) {
    double* g = parent_grad(self, 0);
    for (std::size_t b = 0; b < B; ++b) {
      for (std::size_t c = 0; c < 2; ++c) {
        g[2 * b + c] += (prob[2 * b + c] - (c == label ? 1.0 : 0.0)) * inv_b * self.grad[0];
      }
    }
  });
}

}  // namespace gprda::nn
