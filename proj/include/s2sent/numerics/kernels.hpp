#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <string_view>

#include "s2sent/numerics/tensor.hpp"

namespace s2sent {

enum class Activation { relu, sigmoid, tanh };

inline std::string_view to_string(Activation kind) {
  switch (kind) {
    case Activation::relu: return "relu";
    case Activation::sigmoid: return "sigmoid";
    case Activation::tanh: return "tanh";
  }
  return "?";
}

inline Activation parse_activation(std::string_view name) {
  if (name == "relu") return Activation::relu;
  if (name == "sigmoid") return Activation::sigmoid;
  if (name == "tanh") return Activation::tanh;
  throw ContractError("unknown activation '" + std::string(name) + "'");
}

namespace kernels {

inline void require_matrix(const Tensor& t, const char* what) {
  if (t.rank() != 2) {
    throw DimensionError(std::string(what) + " expects a matrix, got " + shape_string(t.shape()));
  }
}

namespace detail {

// Eight doubles; lowered to whatever vector width the target offers.
typedef double lane8 __attribute__((vector_size(64)));

inline lane8 load8(const double* p) {
  lane8 v;
  __builtin_memcpy(&v, p, sizeof v);
  return v;
}

inline void store8(double* p, lane8 v) { __builtin_memcpy(p, &v, sizeof v); }

}  // namespace detail

/// out += a * b, a [p x q], b [q x s]. Register-blocked over 4 rows x 16
/// columns; each output entry sums its k terms in ascending order.
inline void matmul_accumulate(const Tensor& a, const Tensor& b, Tensor& out) {
  using detail::lane8;
  using detail::load8;
  using detail::store8;
  const std::size_t p = a.dim(0), q = a.dim(1), s = b.dim(1);
  const double* A = a.data().data();
  const double* B = b.data().data();
  double* C = out.data().data();
  std::size_t j0 = 0;
  for (; j0 + 16 <= s; j0 += 16) {
    std::size_t i0 = 0;
    for (; i0 + 4 <= p; i0 += 4) {
      lane8 c00{}, c01{}, c10{}, c11{}, c20{}, c21{}, c30{}, c31{};
      const double* a0 = A + i0 * q;
      const double* a1 = a0 + q;
      const double* a2 = a1 + q;
      const double* a3 = a2 + q;
      for (std::size_t k = 0; k < q; ++k) {
        const lane8 b0 = load8(B + k * s + j0);
        const lane8 b1 = load8(B + k * s + j0 + 8);
        c00 += a0[k] * b0;
        c01 += a0[k] * b1;
        c10 += a1[k] * b0;
        c11 += a1[k] * b1;
        c20 += a2[k] * b0;
        c21 += a2[k] * b1;
        c30 += a3[k] * b0;
        c31 += a3[k] * b1;
      }
      double* r0 = C + i0 * s + j0;
      double* r1 = r0 + s;
      double* r2 = r1 + s;
      double* r3 = r2 + s;
      store8(r0, load8(r0) + c00);
      store8(r0 + 8, load8(r0 + 8) + c01);
      store8(r1, load8(r1) + c10);
      store8(r1 + 8, load8(r1 + 8) + c11);
      store8(r2, load8(r2) + c20);
      store8(r2 + 8, load8(r2 + 8) + c21);
      store8(r3, load8(r3) + c30);
      store8(r3 + 8, load8(r3 + 8) + c31);
    }
    for (; i0 < p; ++i0) {
      lane8 c0{}, c1{};
      const double* arow = A + i0 * q;
      for (std::size_t k = 0; k < q; ++k) {
        c0 += arow[k] * load8(B + k * s + j0);
        c1 += arow[k] * load8(B + k * s + j0 + 8);
      }
      double* r0 = C + i0 * s + j0;
      store8(r0, load8(r0) + c0);
      store8(r0 + 8, load8(r0 + 8) + c1);
    }
  }
  if (j0 < s) {
    for (std::size_t i = 0; i < p; ++i) {
      for (std::size_t j = j0; j < s; ++j) {
        double acc = 0.0;
        for (std::size_t k = 0; k < q; ++k) acc += A[i * q + k] * B[k * s + j];
        C[i * s + j] += acc;
      }
    }
  }
}

inline Tensor transpose(const Tensor& m) {
  require_matrix(m, "transpose");
  const std::size_t r = m.dim(0), c = m.dim(1);
  Tensor t({c, r});
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) t(j, i) = m(i, j);
  return t;
}

namespace detail {

inline double horizontal_sum(lane8 v) {
  return ((v[0] + v[4]) + (v[2] + v[6])) + ((v[1] + v[5]) + (v[3] + v[7]));
}

}  // namespace detail

/// out += a * b^T, a [p x q], b [s x q]. Dot products run in eight
/// interleaved partial sums combined in a fixed order.
inline void matmul_nt_accumulate(const Tensor& a, const Tensor& b, Tensor& out) {
  using detail::lane8;
  using detail::load8;
  const std::size_t p = a.dim(0), q = a.dim(1), s = b.dim(0);
  const double* A = a.data().data();
  const double* B = b.data().data();
  double* C = out.data().data();
  const std::size_t q8 = q - q % 8;
  for (std::size_t i = 0; i < p; ++i) {
    const double* arow = A + i * q;
    std::size_t j = 0;
    for (; j + 4 <= s; j += 4) {
      const double* b0 = B + j * q;
      const double* b1 = b0 + q;
      const double* b2 = b1 + q;
      const double* b3 = b2 + q;
      lane8 s0{}, s1{}, s2{}, s3{};
      for (std::size_t k = 0; k < q8; k += 8) {
        const lane8 av = load8(arow + k);
        s0 += av * load8(b0 + k);
        s1 += av * load8(b1 + k);
        s2 += av * load8(b2 + k);
        s3 += av * load8(b3 + k);
      }
      double t0 = detail::horizontal_sum(s0), t1 = detail::horizontal_sum(s1);
      double t2 = detail::horizontal_sum(s2), t3 = detail::horizontal_sum(s3);
      for (std::size_t k = q8; k < q; ++k) {
        t0 += arow[k] * b0[k];
        t1 += arow[k] * b1[k];
        t2 += arow[k] * b2[k];
        t3 += arow[k] * b3[k];
      }
      double* c = C + i * s + j;
      c[0] += t0;
      c[1] += t1;
      c[2] += t2;
      c[3] += t3;
    }
    for (; j < s; ++j) {
      const double* brow = B + j * q;
      lane8 acc{};
      for (std::size_t k = 0; k < q8; k += 8) acc += load8(arow + k) * load8(brow + k);
      double t = detail::horizontal_sum(acc);
      for (std::size_t k = q8; k < q; ++k) t += arow[k] * brow[k];
      C[i * s + j] += t;
    }
  }
}

/// out += a^T * b, a [p x q], b [p x s].
inline void matmul_tn_accumulate(const Tensor& a, const Tensor& b, Tensor& out) {
  matmul_accumulate(transpose(a), b, out);
}

inline Tensor matmul(const Tensor& a, const Tensor& b) {
  require_matrix(a, "matmul");
  require_matrix(b, "matmul");
  if (a.dim(1) != b.dim(0)) {
    throw DimensionError("matmul inner dimensions differ: " + shape_string(a.shape()) + " x " +
                         shape_string(b.shape()));
  }
  Tensor out({a.dim(0), b.dim(1)});
  matmul_accumulate(a, b, out);
  return out;
}

/// a * b^T.
inline Tensor matmul_nt(const Tensor& a, const Tensor& b) {
  require_matrix(a, "matmul_nt");
  require_matrix(b, "matmul_nt");
  if (a.dim(1) != b.dim(1)) {
    throw DimensionError("matmul_nt inner dimensions differ: " + shape_string(a.shape()) +
                         " x " + shape_string(b.shape()) + "^T");
  }
  Tensor out({a.dim(0), b.dim(0)});
  matmul_nt_accumulate(a, b, out);
  return out;
}

inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline double activate(double x, Activation kind) {
  switch (kind) {
    case Activation::relu: return x > 0.0 ? x : 0.0;
    case Activation::sigmoid: return sigmoid(x);
    case Activation::tanh: return std::tanh(x);
  }
  return x;
}

/// Derivative expressed through the input x and the output y.
inline double activation_slope(double x, double y, Activation kind) {
  switch (kind) {
    case Activation::relu: return x > 0.0 ? 1.0 : 0.0;
    case Activation::sigmoid: return y * (1.0 - y);
    case Activation::tanh: return 1.0 - y * y;
  }
  return 1.0;
}

inline Tensor activation(const Tensor& x, Activation kind) {
  Tensor out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = activate(x[i], kind);
  return out;
}

/// Softmax along `axis` with max subtraction. Any rank; slices are taken with
/// the given axis varying and all others fixed.
inline Tensor softmax_over_axis(const Tensor& x, std::size_t axis) {
  if (axis >= x.rank()) {
    throw ContractError("softmax axis " + std::to_string(axis) + " invalid for shape " +
                        shape_string(x.shape()));
  }
  std::size_t outer = 1, inner = 1;
  for (std::size_t i = 0; i < axis; ++i) outer *= x.dim(i);
  for (std::size_t i = axis + 1; i < x.rank(); ++i) inner *= x.dim(i);
  const std::size_t n = x.dim(axis);
  Tensor out(x.shape());
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t in = 0; in < inner; ++in) {
      const std::size_t base = o * n * inner + in;
      double peak = x[base];
      for (std::size_t k = 1; k < n; ++k) peak = std::max(peak, x[base + k * inner]);
      double total = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        const double e = std::exp(x[base + k * inner] - peak);
        out[base + k * inner] = e;
        total += e;
      }
      for (std::size_t k = 0; k < n; ++k) out[base + k * inner] /= total;
    }
  }
  return out;
}

}  // namespace kernels
}  // namespace s2sent
