#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "s2sent/numerics/graph.hpp"
#include "s2sent/numerics/kernels.hpp"

// Differentiable operations over Graph nodes. Each op computes its value with
// the plain kernels and registers the matching backward rule.
namespace s2sent::ag {

namespace detail {

inline void same_graph(Var a, Var b, const char* op) {
  if (a.graph != b.graph) throw ContractError(std::string(op) + ": operands from different graphs");
}

inline void same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + shape_string(a.shape()) +
                         " vs " + shape_string(b.shape()));
  }
}

inline void axpy(double alpha, const Tensor& x, Tensor& y) {
  const double* src = x.data().data();
  double* dst = y.data().data();
  for (std::size_t i = 0, n = x.size(); i < n; ++i) dst[i] += alpha * src[i];
}

}  // namespace detail

inline Var matmul(Var a, Var b) {
  detail::same_graph(a, b, "matmul");
  Tensor out = kernels::matmul(a.value(), b.value());
  return a.graph->record("matmul", {a.id, b.id}, std::move(out), [](BackwardContext& ctx) {
    const Tensor& g = ctx.grad_output();
    if (ctx.needs(0)) kernels::matmul_nt_accumulate(g, ctx.input(1), ctx.grad(0));
    if (ctx.needs(1)) kernels::matmul_tn_accumulate(ctx.input(0), g, ctx.grad(1));
  });
}

/// a * b^T.
inline Var matmul_nt(Var a, Var b) {
  detail::same_graph(a, b, "matmul_nt");
  Tensor out = kernels::matmul_nt(a.value(), b.value());
  return a.graph->record("matmul_nt", {a.id, b.id}, std::move(out), [](BackwardContext& ctx) {
    const Tensor& g = ctx.grad_output();
    if (ctx.needs(0)) kernels::matmul_accumulate(g, ctx.input(1), ctx.grad(0));
    if (ctx.needs(1)) kernels::matmul_tn_accumulate(g, ctx.input(0), ctx.grad(1));
  });
}

inline Var add(Var a, Var b) {
  detail::same_graph(a, b, "add");
  detail::same_shape(a.value(), b.value(), "add");
  Tensor out = a.value();
  detail::axpy(1.0, b.value(), out);
  return a.graph->record("add", {a.id, b.id}, std::move(out), [](BackwardContext& ctx) {
    if (ctx.needs(0)) detail::axpy(1.0, ctx.grad_output(), ctx.grad(0));
    if (ctx.needs(1)) detail::axpy(1.0, ctx.grad_output(), ctx.grad(1));
  });
}

inline Var sub(Var a, Var b) {
  detail::same_graph(a, b, "sub");
  detail::same_shape(a.value(), b.value(), "sub");
  Tensor out = a.value();
  detail::axpy(-1.0, b.value(), out);
  return a.graph->record("sub", {a.id, b.id}, std::move(out), [](BackwardContext& ctx) {
    if (ctx.needs(0)) detail::axpy(1.0, ctx.grad_output(), ctx.grad(0));
    if (ctx.needs(1)) detail::axpy(-1.0, ctx.grad_output(), ctx.grad(1));
  });
}

/// Elementwise product.
inline Var mul(Var a, Var b) {
  detail::same_graph(a, b, "mul");
  detail::same_shape(a.value(), b.value(), "mul");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b.value()[i];
  return a.graph->record("mul", {a.id, b.id}, std::move(out), [](BackwardContext& ctx) {
    const Tensor& g = ctx.grad_output();
    if (ctx.needs(0)) {
      Tensor& ga = ctx.grad(0);
      const Tensor& bv = ctx.input(1);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bv[i];
    }
    if (ctx.needs(1)) {
      Tensor& gb = ctx.grad(1);
      const Tensor& av = ctx.input(0);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * av[i];
    }
  });
}

/// Elementwise product with a constant mask (dropout).
inline Var mul_const(Var a, Tensor mask) {
  detail::same_shape(a.value(), mask, "mul_const");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= mask[i];
  return a.graph->record("mul_const", {a.id}, std::move(out),
                         [mask = std::move(mask)](BackwardContext& ctx) {
                           const Tensor& g = ctx.grad_output();
                           Tensor& ga = ctx.grad(0);
                           for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * mask[i];
                         });
}

inline Var scale(Var a, double factor) {
  Tensor out = a.value();
  for (double& v : out.data()) v *= factor;
  return a.graph->record("scale", {a.id}, std::move(out), [factor](BackwardContext& ctx) {
    detail::axpy(factor, ctx.grad_output(), ctx.grad(0));
  });
}

/// Adds a constant tensor (positional encodings, fixed offsets).
inline Var add_const(Var a, const Tensor& offset) {
  detail::same_shape(a.value(), offset, "add_const");
  Tensor out = a.value();
  detail::axpy(1.0, offset, out);
  return a.graph->record("add_const", {a.id}, std::move(out), [](BackwardContext& ctx) {
    detail::axpy(1.0, ctx.grad_output(), ctx.grad(0));
  });
}

inline Var reshape(Var a, Shape shape) {
  Tensor out = a.value().reshaped(std::move(shape));
  return a.graph->record("reshape", {a.id}, std::move(out), [](BackwardContext& ctx) {
    detail::axpy(1.0, ctx.grad_output(), ctx.grad(0));
  });
}

/// x [L x D] + bias [D] broadcast over rows.
inline Var add_row(Var x, Var bias) {
  detail::same_graph(x, bias, "add_row");
  const Tensor& xv = x.value();
  kernels::require_matrix(xv, "add_row");
  if (bias.value().size() != xv.dim(1)) {
    throw DimensionError("add_row: bias " + shape_string(bias.shape()) + " vs rows of " +
                         shape_string(xv.shape()));
  }
  Tensor out = xv;
  const std::size_t rows = xv.dim(0), cols = xv.dim(1);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) out(i, j) += bias.value()[j];
  return x.graph->record("add_row", {x.id, bias.id}, std::move(out),
                         [rows, cols](BackwardContext& ctx) {
                           const Tensor& g = ctx.grad_output();
                           if (ctx.needs(0)) detail::axpy(1.0, g, ctx.grad(0));
                           if (ctx.needs(1)) {
                             Tensor& gb = ctx.grad(1);
                             for (std::size_t i = 0; i < rows; ++i)
                               for (std::size_t j = 0; j < cols; ++j) gb[j] += g(i, j);
                           }
                         });
}

/// x [L x D] scaled per column by w [D].
inline Var mul_row(Var x, Var w) {
  detail::same_graph(x, w, "mul_row");
  const Tensor& xv = x.value();
  kernels::require_matrix(xv, "mul_row");
  if (w.value().size() != xv.dim(1)) {
    throw DimensionError("mul_row: weights " + shape_string(w.shape()) + " vs rows of " +
                         shape_string(xv.shape()));
  }
  Tensor out = xv;
  const std::size_t rows = xv.dim(0), cols = xv.dim(1);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) out(i, j) *= w.value()[j];
  return x.graph->record("mul_row", {x.id, w.id}, std::move(out),
                         [rows, cols](BackwardContext& ctx) {
                           const Tensor& g = ctx.grad_output();
                           const Tensor& xv = ctx.input(0);
                           const Tensor& wv = ctx.input(1);
                           if (ctx.needs(0)) {
                             Tensor& gx = ctx.grad(0);
                             for (std::size_t i = 0; i < rows; ++i)
                               for (std::size_t j = 0; j < cols; ++j) gx(i, j) += g(i, j) * wv[j];
                           }
                           if (ctx.needs(1)) {
                             Tensor& gw = ctx.grad(1);
                             for (std::size_t i = 0; i < rows; ++i)
                               for (std::size_t j = 0; j < cols; ++j) gw[j] += g(i, j) * xv(i, j);
                           }
                         });
}

/// x [L x D] scaled per row by g [L].
inline Var mul_col(Var x, Var gate) {
  detail::same_graph(x, gate, "mul_col");
  const Tensor& xv = x.value();
  kernels::require_matrix(xv, "mul_col");
  if (gate.value().size() != xv.dim(0)) {
    throw DimensionError("mul_col: gate " + shape_string(gate.shape()) + " vs columns of " +
                         shape_string(xv.shape()));
  }
  Tensor out = xv;
  const std::size_t rows = xv.dim(0), cols = xv.dim(1);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) out(i, j) *= gate.value()[i];
  return x.graph->record("mul_col", {x.id, gate.id}, std::move(out),
                         [rows, cols](BackwardContext& ctx) {
                           const Tensor& g = ctx.grad_output();
                           const Tensor& xv = ctx.input(0);
                           const Tensor& gv = ctx.input(1);
                           if (ctx.needs(0)) {
                             Tensor& gx = ctx.grad(0);
                             for (std::size_t i = 0; i < rows; ++i)
                               for (std::size_t j = 0; j < cols; ++j) gx(i, j) += g(i, j) * gv[i];
                           }
                           if (ctx.needs(1)) {
                             Tensor& gg = ctx.grad(1);
                             for (std::size_t i = 0; i < rows; ++i)
                               for (std::size_t j = 0; j < cols; ++j) gg[i] += g(i, j) * xv(i, j);
                           }
                         });
}

inline Var activation(Var x, Activation kind) {
  Tensor out = kernels::activation(x.value(), kind);
  return x.graph->record("activation", {x.id}, std::move(out), [kind](BackwardContext& ctx) {
    const Tensor& g = ctx.grad_output();
    const Tensor& xv = ctx.input(0);
    const Tensor& yv = ctx.output();
    Tensor& gx = ctx.grad(0);
    for (std::size_t i = 0; i < g.size(); ++i)
      gx[i] += g[i] * kernels::activation_slope(xv[i], yv[i], kind);
  });
}

inline Var relu(Var x) { return activation(x, Activation::relu); }
inline Var sigmoid(Var x) { return activation(x, Activation::sigmoid); }
inline Var tanh(Var x) { return activation(x, Activation::tanh); }

inline Var softmax(Var x, std::size_t axis) {
  Tensor out = kernels::softmax_over_axis(x.value(), axis);
  const Shape& shape = x.shape();
  std::size_t outer = 1, inner = 1;
  for (std::size_t i = 0; i < axis; ++i) outer *= shape[i];
  for (std::size_t i = axis + 1; i < shape.size(); ++i) inner *= shape[i];
  const std::size_t n = shape[axis];
  return x.graph->record(
      "softmax", {x.id}, std::move(out), [outer, inner, n](BackwardContext& ctx) {
        const Tensor& g = ctx.grad_output();
        const Tensor& y = ctx.output();
        Tensor& gx = ctx.grad(0);
        for (std::size_t o = 0; o < outer; ++o) {
          for (std::size_t in = 0; in < inner; ++in) {
            const std::size_t base = o * n * inner + in;
            double dot = 0.0;
            for (std::size_t k = 0; k < n; ++k) dot += g[base + k * inner] * y[base + k * inner];
            for (std::size_t k = 0; k < n; ++k) {
              const std::size_t idx = base + k * inner;
              gx[idx] += y[idx] * (g[idx] - dot);
            }
          }
        }
      });
}

/// Row-wise layer normalization of x [L x D] with gain and bias [D].
inline Var layer_norm(Var x, Var gain, Var bias, double eps = 1e-5) {
  detail::same_graph(x, gain, "layer_norm");
  detail::same_graph(x, bias, "layer_norm");
  const Tensor& xv = x.value();
  kernels::require_matrix(xv, "layer_norm");
  const std::size_t rows = xv.dim(0), cols = xv.dim(1);
  if (gain.value().size() != cols || bias.value().size() != cols) {
    throw DimensionError("layer_norm: gain/bias must have " + std::to_string(cols) + " entries");
  }
  Tensor normalized(xv.shape());
  std::vector<double> inv_std(rows);
  Tensor out(xv.shape());
  for (std::size_t i = 0; i < rows; ++i) {
    double mean = 0.0;
    for (std::size_t j = 0; j < cols; ++j) mean += xv(i, j);
    mean /= static_cast<double>(cols);
    double var = 0.0;
    for (std::size_t j = 0; j < cols; ++j) var += (xv(i, j) - mean) * (xv(i, j) - mean);
    var /= static_cast<double>(cols);
    inv_std[i] = 1.0 / std::sqrt(var + eps);
    for (std::size_t j = 0; j < cols; ++j) {
      normalized(i, j) = (xv(i, j) - mean) * inv_std[i];
      out(i, j) = normalized(i, j) * gain.value()[j] + bias.value()[j];
    }
  }
  return x.graph->record(
      "layer_norm", {x.id, gain.id, bias.id}, std::move(out),
      [rows, cols, normalized = std::move(normalized),
       inv_std = std::move(inv_std)](BackwardContext& ctx) {
        const Tensor& g = ctx.grad_output();
        const Tensor& gain = ctx.input(1);
        if (ctx.needs(1)) {
          Tensor& gg = ctx.grad(1);
          for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t j = 0; j < cols; ++j) gg[j] += g(i, j) * normalized(i, j);
        }
        if (ctx.needs(2)) {
          Tensor& gb = ctx.grad(2);
          for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t j = 0; j < cols; ++j) gb[j] += g(i, j);
        }
        if (ctx.needs(0)) {
          Tensor& gx = ctx.grad(0);
          const double n = static_cast<double>(cols);
          for (std::size_t i = 0; i < rows; ++i) {
            double sum_dy = 0.0, sum_dy_xhat = 0.0;
            for (std::size_t j = 0; j < cols; ++j) {
              const double dy = g(i, j) * gain[j];
              sum_dy += dy;
              sum_dy_xhat += dy * normalized(i, j);
            }
            for (std::size_t j = 0; j < cols; ++j) {
              const double dy = g(i, j) * gain[j];
              gx(i, j) += inv_std[i] * (dy - sum_dy / n - normalized(i, j) * sum_dy_xhat / n);
            }
          }
        }
      });
}

/// Columns [begin, end) of x [L x D].
inline Var slice_cols(Var x, std::size_t begin, std::size_t end) {
  const Tensor& xv = x.value();
  kernels::require_matrix(xv, "slice_cols");
  if (begin >= end || end > xv.dim(1)) {
    throw ContractError("slice_cols: bad range [" + std::to_string(begin) + ", " +
                        std::to_string(end) + ") for " + shape_string(xv.shape()));
  }
  const std::size_t rows = xv.dim(0), width = end - begin;
  Tensor out({rows, width});
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < width; ++j) out(i, j) = xv(i, begin + j);
  return x.graph->record("slice_cols", {x.id}, std::move(out),
                         [rows, width, begin](BackwardContext& ctx) {
                           const Tensor& g = ctx.grad_output();
                           Tensor& gx = ctx.grad(0);
                           for (std::size_t i = 0; i < rows; ++i)
                             for (std::size_t j = 0; j < width; ++j) gx(i, begin + j) += g(i, j);
                         });
}

inline Var concat_cols(const std::vector<Var>& parts) {
  require(!parts.empty(), "concat_cols: no inputs");
  const std::size_t rows = parts[0].value().dim(0);
  std::vector<NodeId> ids;
  std::vector<std::size_t> offsets;
  std::size_t width = 0;
  for (const Var& p : parts) {
    detail::same_graph(parts[0], p, "concat_cols");
    kernels::require_matrix(p.value(), "concat_cols");
    if (p.value().dim(0) != rows) throw DimensionError("concat_cols: row counts differ");
    ids.push_back(p.id);
    offsets.push_back(width);
    width += p.value().dim(1);
  }
  Tensor out({rows, width});
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const Tensor& pv = parts[k].value();
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < pv.dim(1); ++j) out(i, offsets[k] + j) = pv(i, j);
  }
  return parts[0].graph->record(
      "concat_cols", std::move(ids), std::move(out),
      [rows, offsets = std::move(offsets)](BackwardContext& ctx) {
        const Tensor& g = ctx.grad_output();
        for (std::size_t k = 0; k < offsets.size(); ++k) {
          if (!ctx.needs(k)) continue;
          Tensor& gp = ctx.grad(k);
          const std::size_t w = gp.dim(1);
          for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t j = 0; j < w; ++j) gp(i, j) += g(i, offsets[k] + j);
        }
      });
}

/// Stacks equally sized tensors into rows of a [count x size] matrix.
inline Var stack_rows(const std::vector<Var>& rows) {
  require(!rows.empty(), "stack_rows: no inputs");
  const std::size_t width = rows[0].value().size();
  std::vector<NodeId> ids;
  Tensor out({rows.size(), width});
  for (std::size_t k = 0; k < rows.size(); ++k) {
    detail::same_graph(rows[0], rows[k], "stack_rows");
    if (rows[k].value().size() != width) {
      throw DimensionError("stack_rows: entry " + std::to_string(k) + " has shape " +
                           shape_string(rows[k].shape()) + ", expected " + std::to_string(width) +
                           " values");
    }
    ids.push_back(rows[k].id);
    for (std::size_t j = 0; j < width; ++j) out(k, j) = rows[k].value()[j];
  }
  return rows[0].graph->record("stack_rows", std::move(ids), std::move(out),
                               [width](BackwardContext& ctx) {
                                 const Tensor& g = ctx.grad_output();
                                 for (std::size_t k = 0; k < g.dim(0); ++k) {
                                   if (!ctx.needs(k)) continue;
                                   Tensor& gk = ctx.grad(k);
                                   for (std::size_t j = 0; j < width; ++j) gk[j] += g(k, j);
                                 }
                               });
}

/// Row i of x [L x D] as a [D] vector.
inline Var row(Var x, std::size_t i) {
  const Tensor& xv = x.value();
  kernels::require_matrix(xv, "row");
  if (i >= xv.dim(0)) throw ContractError("row index out of range");
  const std::size_t cols = xv.dim(1);
  std::vector<double> values(xv.row(i).begin(), xv.row(i).end());
  return x.graph->record("row", {x.id}, Tensor::vector(std::move(values)),
                         [i, cols](BackwardContext& ctx) {
                           const Tensor& g = ctx.grad_output();
                           Tensor& gx = ctx.grad(0);
                           for (std::size_t j = 0; j < cols; ++j) gx(i, j) += g[j];
                         });
}

/// Mean of the first `count` rows of x [L x D], as a [D] vector.
inline Var mean_rows(Var x, std::size_t count) {
  const Tensor& xv = x.value();
  kernels::require_matrix(xv, "mean_rows");
  if (count == 0 || count > xv.dim(0)) {
    throw ContractError("mean_rows: count " + std::to_string(count) + " invalid for " +
                        shape_string(xv.shape()));
  }
  const std::size_t cols = xv.dim(1);
  Tensor out({cols});
  for (std::size_t i = 0; i < count; ++i)
    for (std::size_t j = 0; j < cols; ++j) out[j] += xv(i, j);
  const double inv = 1.0 / static_cast<double>(count);
  for (double& v : out.data()) v *= inv;
  return x.graph->record("mean_rows", {x.id}, std::move(out),
                         [count, cols, inv](BackwardContext& ctx) {
                           const Tensor& g = ctx.grad_output();
                           Tensor& gx = ctx.grad(0);
                           for (std::size_t i = 0; i < count; ++i)
                             for (std::size_t j = 0; j < cols; ++j) gx(i, j) += g[j] * inv;
                         });
}

inline Var sum(Var x) {
  double total = 0.0;
  for (double v : x.value().data()) total += v;
  return x.graph->record("sum", {x.id}, Tensor::scalar(total), [](BackwardContext& ctx) {
    const double g = ctx.grad_output()[0];
    for (double& v : ctx.grad(0).data()) v += g;
  });
}

/// Rows of `table` [V x D] selected by ids, as an [L x D] matrix.
inline Var gather_rows(Var table, std::vector<std::size_t> ids) {
  const Tensor& tv = table.value();
  kernels::require_matrix(tv, "gather_rows");
  require(!ids.empty(), "gather_rows: empty id list");
  const std::size_t cols = tv.dim(1);
  Tensor out({ids.size(), cols});
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] >= tv.dim(0)) throw ContractError("gather_rows: id out of range");
    for (std::size_t j = 0; j < cols; ++j) out(i, j) = tv(ids[i], j);
  }
  return table.graph->record("gather_rows", {table.id}, std::move(out),
                             [ids = std::move(ids), cols](BackwardContext& ctx) {
                               const Tensor& g = ctx.grad_output();
                               Tensor& gt = ctx.grad(0);
                               for (std::size_t i = 0; i < ids.size(); ++i)
                                 for (std::size_t j = 0; j < cols; ++j) gt(ids[i], j) += g(i, j);
                             });
}

/// Each row of x [B x D] divided by its Euclidean norm.
inline Var normalize_rows(Var x) {
  const Tensor& xv = x.value();
  kernels::require_matrix(xv, "normalize_rows");
  const std::size_t rows = xv.dim(0), cols = xv.dim(1);
  std::vector<double> norms(rows);
  Tensor out(xv.shape());
  for (std::size_t i = 0; i < rows; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < cols; ++j) s += xv(i, j) * xv(i, j);
    norms[i] = std::sqrt(s);
    if (!(norms[i] > 0.0)) throw ContractError("normalize_rows: zero-norm row " + std::to_string(i));
    for (std::size_t j = 0; j < cols; ++j) out(i, j) = xv(i, j) / norms[i];
  }
  return x.graph->record("normalize_rows", {x.id}, std::move(out),
                         [rows, cols, norms = std::move(norms)](BackwardContext& ctx) {
                           const Tensor& g = ctx.grad_output();
                           const Tensor& y = ctx.output();
                           Tensor& gx = ctx.grad(0);
                           for (std::size_t i = 0; i < rows; ++i) {
                             double dot = 0.0;
                             for (std::size_t j = 0; j < cols; ++j) dot += g(i, j) * y(i, j);
                             for (std::size_t j = 0; j < cols; ++j)
                               gx(i, j) += (g(i, j) - y(i, j) * dot) / norms[i];
                           }
                         });
}

/// Mean over rows i of -log softmax(logits[i])[i] for a square logit matrix.
inline Var cross_entropy_diagonal(Var logits) {
  const Tensor& lv = logits.value();
  kernels::require_matrix(lv, "cross_entropy_diagonal");
  if (lv.dim(0) != lv.dim(1)) {
    throw DimensionError("cross_entropy_diagonal needs a square matrix, got " +
                         shape_string(lv.shape()));
  }
  const Tensor probs = kernels::softmax_over_axis(lv, 1);
  const std::size_t n = lv.dim(0);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t top = 0;
    for (std::size_t k = 1; k < n; ++k)
      if (lv(i, k) > lv(i, top)) top = k;
    const double peak = lv(i, top);
    // log1p keeps the tail when one logit dominates.
    double rest = 0.0;
    for (std::size_t k = 0; k < n; ++k)
      if (k != top) rest += std::exp(lv(i, k) - peak);
    total += (peak - lv(i, i)) + std::log1p(rest);
  }
  const double inv = 1.0 / static_cast<double>(n);
  return logits.graph->record("cross_entropy_diagonal", {logits.id}, Tensor::scalar(total * inv),
                              [probs, n, inv](BackwardContext& ctx) {
                                const double g = ctx.grad_output()[0] * inv;
                                Tensor& gl = ctx.grad(0);
                                for (std::size_t i = 0; i < n; ++i)
                                  for (std::size_t k = 0; k < n; ++k)
                                    gl(i, k) += g * (probs(i, k) - (i == k ? 1.0 : 0.0));
                              });
}

}  // namespace s2sent::ag
