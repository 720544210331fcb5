// SPDX-License-Identifier: Apache-2.0
#include "egtsyn/autodiff.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>

#include "egtsyn/errors.hpp"

namespace egtsyn {

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMajor>;
using MutMap = Eigen::Map<RowMajor>;

ConstMap as_matrix(const Tensor& t) { return ConstMap(t.values().data(), t.rows(), t.cols()); }
MutMap as_matrix(std::span<double> s, std::size_t r, std::size_t c) {
  return MutMap(s.data(), r, c);
}

testing::Fault g_fault = testing::Fault::kNone;

Tape& tape_of(std::span<const Var> vars) {
  if (vars.empty() || vars.front().tape == nullptr) {
    throw ContractError("operation applied to a Var without a tape");
  }
  for (const Var& v : vars) {
    if (v.tape != vars.front().tape) throw ContractError("operation mixes Vars from different tapes");
  }
  return *vars.front().tape;
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (!a.same_shape(b)) {
    throw DimensionError(std::string(op) + ": shape mismatch " + a.shape_string() + " vs " +
                         b.shape_string());
  }
}

}  // namespace

namespace testing {
void set_fault(Fault fault) { g_fault = fault; }
Fault fault() { return g_fault; }
}  // namespace testing

const Tensor& Var::value() const { return tape->value(id); }

Var Tape::constant(Tensor value) {
  Node node;
  node.value = std::move(value);
  nodes_.push_back(std::move(node));
  return Var{this, nodes_.size() - 1};
}

Var Tape::parameter(Tensor& param) {
  Node node;
  node.param = &param;
  node.needs_grad = record_ && param.requires_grad();
  nodes_.push_back(std::move(node));
  return Var{this, nodes_.size() - 1};
}

std::span<double> Tape::grad(std::size_t id) {
  Node& n = nodes_[id];
  if (n.grad.empty()) n.grad.assign(value(id).size(), 0.0);
  return n.grad;
}

Var Tape::push(Tensor value, std::span<const Var> inputs, BackwardFn backward) {
  Node node;
  node.value = std::move(value);
  if (record_) {
    node.needs_grad = std::any_of(inputs.begin(), inputs.end(),
                                  [this](const Var& v) { return nodes_[v.id].needs_grad; });
  }
  if (node.needs_grad) node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  return Var{this, nodes_.size() - 1};
}

void Tape::backward(Var loss) {
  if (loss.tape != this) throw ContractError("backward: loss belongs to a different tape");
  const Tensor& lv = value(loss.id);
  if (lv.rows() != 1 || lv.cols() != 1) {
    throw ContractError("backward: loss must be a scalar, got shape " + lv.shape_string());
  }
  if (!record_) throw ContractError("backward: tape was created without gradient recording");
  for (Node& n : nodes_) n.grad.clear();
  if (!nodes_[loss.id].needs_grad) return;
  grad(loss.id)[0] = 1.0;
  for (std::size_t i = loss.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.needs_grad || n.grad.empty()) continue;
    if (n.backward) n.backward(*this, i);
    if (n.param != nullptr) {
      std::span<double> pg = n.param->grad();
      for (std::size_t k = 0; k < pg.size(); ++k) pg[k] += n.grad[k];
    }
  }
}

Var matmul(Var a, Var b) {
  const Var in[] = {a, b};
  Tape& tape = tape_of(in);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.cols() != bv.rows()) {
    throw DimensionError("matmul: inner dimensions disagree, " + av.shape_string() + " * " +
                         bv.shape_string());
  }
  Tensor out(av.rows(), bv.cols());
  as_matrix(out.values(), out.rows(), out.cols()).noalias() = as_matrix(av) * as_matrix(bv);
  return tape.push(std::move(out), in, [a, b](Tape& t, std::size_t self) {
    const Tensor& av = t.value(a.id);
    const Tensor& bv = t.value(b.id);
    auto dc = as_matrix(t.grad(self), av.rows(), bv.cols());
    if (t.needs_grad(a.id)) {
      as_matrix(t.grad(a.id), av.rows(), av.cols()).noalias() += dc * as_matrix(bv).transpose();
    }
    if (t.needs_grad(b.id)) {
      double f = testing::fault() == testing::Fault::kMatmulBackward ? 0.9 : 1.0;
      as_matrix(t.grad(b.id), bv.rows(), bv.cols()).noalias() +=
          f * (as_matrix(av).transpose() * dc);
    }
  });
}

Var add(Var a, Var b) {
  const Var in[] = {a, b};
  Tape& tape = tape_of(in);
  require_same_shape(a.value(), b.value(), "add");
  Tensor out = a.value();
  const Tensor& bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
  return tape.push(std::move(out), in, [a, b](Tape& t, std::size_t self) {
    std::span<double> g = t.grad(self);
    for (Var v : {a, b}) {
      if (!t.needs_grad(v.id)) continue;
      std::span<double> gi = t.grad(v.id);
      for (std::size_t i = 0; i < g.size(); ++i) gi[i] += g[i];
    }
  });
}

Var add_row(Var x, Var row) {
  const Var in[] = {x, row};
  Tape& tape = tape_of(in);
  const Tensor& rv = row.value();
  if (rv.rows() != 1 || rv.cols() != x.cols()) {
    throw DimensionError("add_row: row " + rv.shape_string() + " cannot broadcast over " +
                         x.value().shape_string());
  }
  Tensor out = x.value();
  for (std::size_t r = 0; r < out.rows(); ++r)
    for (std::size_t c = 0; c < out.cols(); ++c) out(r, c) += rv[c];
  return tape.push(std::move(out), in, [x, row](Tape& t, std::size_t self) {
    std::size_t rows = t.value(x.id).rows();
    std::size_t cols = t.value(x.id).cols();
    std::span<double> g = t.grad(self);
    if (t.needs_grad(x.id)) {
      std::span<double> gx = t.grad(x.id);
      for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
    }
    if (t.needs_grad(row.id)) {
      std::span<double> gr = t.grad(row.id);
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) gr[c] += g[r * cols + c];
    }
  });
}

Var mul(Var a, Var b) {
  const Var in[] = {a, b};
  Tape& tape = tape_of(in);
  require_same_shape(a.value(), b.value(), "mul");
  Tensor out = a.value();
  const Tensor& bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= bv[i];
  return tape.push(std::move(out), in, [a, b](Tape& t, std::size_t self) {
    std::span<double> g = t.grad(self);
    const Tensor& av = t.value(a.id);
    const Tensor& bv = t.value(b.id);
    if (t.needs_grad(a.id)) {
      std::span<double> ga = t.grad(a.id);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bv[i];
    }
    if (t.needs_grad(b.id)) {
      std::span<double> gb = t.grad(b.id);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * av[i];
    }
  });
}

Var scale(Var x, double factor) {
  const Var in[] = {x};
  Tape& tape = tape_of(in);
  Tensor out = x.value();
  for (double& v : out.values()) v *= factor;
  return tape.push(std::move(out), in, [x, factor](Tape& t, std::size_t self) {
    std::span<double> g = t.grad(self);
    std::span<double> gx = t.grad(x.id);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += factor * g[i];
  });
}

Var transpose(Var x) {
  const Var in[] = {x};
  Tape& tape = tape_of(in);
  Tensor out = x.value().transposed();
  return tape.push(std::move(out), in, [x](Tape& t, std::size_t self) {
    std::size_t rows = t.value(x.id).rows();
    std::size_t cols = t.value(x.id).cols();
    std::span<double> g = t.grad(self);
    std::span<double> gx = t.grad(x.id);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < cols; ++c) gx[r * cols + c] += g[c * rows + r];
  });
}

Var relu(Var x) {
  const Var in[] = {x};
  Tape& tape = tape_of(in);
  Tensor out = x.value();
  for (double& v : out.values()) v = v > 0.0 ? v : 0.0;
  return tape.push(std::move(out), in, [x](Tape& t, std::size_t self) {
    const Tensor& xv = t.value(x.id);
    std::span<double> g = t.grad(self);
    std::span<double> gx = t.grad(x.id);
    bool leak = testing::fault() == testing::Fault::kReluBackward;
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (xv[i] > 0.0 || leak) gx[i] += g[i];
    }
  });
}

Var sigmoid(Var x) {
  const Var in[] = {x};
  Tape& tape = tape_of(in);
  Tensor out = x.value();
  for (double& v : out.values()) {
    v = v >= 0.0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
  }
  return tape.push(std::move(out), in, [x](Tape& t, std::size_t self) {
    const Tensor& y = t.value(self);
    std::span<double> g = t.grad(self);
    std::span<double> gx = t.grad(x.id);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * y[i] * (1.0 - y[i]);
  });
}

Var softmax_rows(Var x) {
  const Var in[] = {x};
  Tape& tape = tape_of(in);
  Tensor out = x.value();
  if (out.cols() == 0) throw DimensionError("softmax_rows: input has no columns");
  for (std::size_t r = 0; r < out.rows(); ++r) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < out.cols(); ++c) mx = std::max(mx, out(r, c));
    double total = 0.0;
    for (std::size_t c = 0; c < out.cols(); ++c) {
      out(r, c) = std::exp(out(r, c) - mx);
      total += out(r, c);
    }
    for (std::size_t c = 0; c < out.cols(); ++c) out(r, c) /= total;
  }
  return tape.push(std::move(out), in, [x](Tape& t, std::size_t self) {
    const Tensor& y = t.value(self);
    std::span<double> g = t.grad(self);
    std::span<double> gx = t.grad(x.id);
    for (std::size_t r = 0; r < y.rows(); ++r) {
      double dot = 0.0;
      for (std::size_t c = 0; c < y.cols(); ++c) dot += g[r * y.cols() + c] * y(r, c);
      for (std::size_t c = 0; c < y.cols(); ++c) {
        gx[r * y.cols() + c] += y(r, c) * (g[r * y.cols() + c] - dot);
      }
    }
  });
}

Var dropout(Var x, double rate, bool training, Rng& rng) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw ParameterError("dropout: rate must lie in [0, 1), got " + std::to_string(rate));
  }
  if (!training || rate == 0.0) return x;
  const Var in[] = {x};
  Tape& tape = tape_of(in);
  const double keep_scale = 1.0 / (1.0 - rate);
  std::vector<double> mask(x.value().size());
  for (double& m : mask) m = rng.uniform() < rate ? 0.0 : keep_scale;
  Tensor out = x.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= mask[i];
  return tape.push(std::move(out), in, [x, mask = std::move(mask)](Tape& t, std::size_t self) {
    std::span<double> g = t.grad(self);
    std::span<double> gx = t.grad(x.id);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * mask[i];
  });
}

Var row_max_pool(Var x) {
  const Var in[] = {x};
  Tape& tape = tape_of(in);
  const Tensor& xv = x.value();
  if (xv.rows() == 0) throw DimensionError("row_max_pool: empty graph (zero rows)");
  Tensor out(1, xv.cols());
  std::vector<std::size_t> argmax(xv.cols(), 0);
  for (std::size_t c = 0; c < xv.cols(); ++c) {
    double best = xv(0, c);
    for (std::size_t r = 1; r < xv.rows(); ++r) {
      if (xv(r, c) > best) {
        best = xv(r, c);
        argmax[c] = r;
      }
    }
    out[c] = best;
  }
  return tape.push(std::move(out), in,
                   [x, argmax = std::move(argmax)](Tape& t, std::size_t self) {
                     std::size_t cols = t.value(x.id).cols();
                     std::span<double> g = t.grad(self);
                     std::span<double> gx = t.grad(x.id);
                     for (std::size_t c = 0; c < cols; ++c) gx[argmax[c] * cols + c] += g[c];
                   });
}

namespace {
Var row_linear_pool(Var x, bool mean) {
  const Var in[] = {x};
  Tape& tape = tape_of(in);
  const Tensor& xv = x.value();
  if (xv.rows() == 0) throw DimensionError("row pooling: empty graph (zero rows)");
  const double w = mean ? 1.0 / static_cast<double>(xv.rows()) : 1.0;
  Tensor out(1, xv.cols());
  for (std::size_t r = 0; r < xv.rows(); ++r)
    for (std::size_t c = 0; c < xv.cols(); ++c) out[c] += w * xv(r, c);
  return tape.push(std::move(out), in, [x, w](Tape& t, std::size_t self) {
    std::size_t rows = t.value(x.id).rows();
    std::size_t cols = t.value(x.id).cols();
    std::span<double> g = t.grad(self);
    std::span<double> gx = t.grad(x.id);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < cols; ++c) gx[r * cols + c] += w * g[c];
  });
}
}  // namespace

Var row_sum_pool(Var x) { return row_linear_pool(x, false); }
Var row_mean_pool(Var x) { return row_linear_pool(x, true); }

Var concat_cols(std::span<const Var> parts) {
  Tape& tape = tape_of(parts);
  const std::size_t rows = parts.front().rows();
  std::vector<std::size_t> widths;
  std::size_t total = 0;
  for (const Var& p : parts) {
    if (p.rows() != rows) {
      throw DimensionError("concat_cols: row count mismatch, " + std::to_string(rows) + " vs " +
                           std::to_string(p.rows()));
    }
    widths.push_back(p.cols());
    total += p.cols();
  }
  Tensor out(rows, total);
  std::size_t offset = 0;
  for (const Var& p : parts) {
    const Tensor& pv = p.value();
    for (std::size_t r = 0; r < rows; ++r)
      std::copy_n(&pv.values()[r * pv.cols()], pv.cols(), &out(r, offset));
    offset += pv.cols();
  }
  std::vector<Var> ins(parts.begin(), parts.end());
  return tape.push(std::move(out), parts,
                   [ins, widths, rows, total](Tape& t, std::size_t self) {
                     std::span<double> g = t.grad(self);
                     std::size_t offset = 0;
                     for (std::size_t k = 0; k < ins.size(); ++k) {
                       if (t.needs_grad(ins[k].id)) {
                         std::span<double> gp = t.grad(ins[k].id);
                         for (std::size_t r = 0; r < rows; ++r)
                           for (std::size_t c = 0; c < widths[k]; ++c)
                             gp[r * widths[k] + c] += g[r * total + offset + c];
                       }
                       offset += widths[k];
                     }
                   });
}

Var stack_rows(std::span<const Var> parts) {
  Tape& tape = tape_of(parts);
  const std::size_t cols = parts.front().cols();
  std::vector<std::size_t> offsets;
  std::size_t total = 0;
  for (const Var& p : parts) {
    if (p.cols() != cols) {
      throw DimensionError("stack_rows: column count mismatch, " + std::to_string(cols) +
                           " vs " + std::to_string(p.cols()));
    }
    offsets.push_back(total);
    total += p.value().size();
  }
  std::vector<double> data;
  data.reserve(total);
  for (const Var& p : parts) {
    auto v = p.value().values();
    data.insert(data.end(), v.begin(), v.end());
  }
  Tensor out(cols == 0 ? 0 : total / cols, cols, std::move(data));
  std::vector<Var> ins(parts.begin(), parts.end());
  return tape.push(std::move(out), parts, [ins, offsets](Tape& t, std::size_t self) {
    std::span<double> g = t.grad(self);
    for (std::size_t k = 0; k < ins.size(); ++k) {
      if (!t.needs_grad(ins[k].id)) continue;
      std::span<double> gp = t.grad(ins[k].id);
      for (std::size_t i = 0; i < gp.size(); ++i) gp[i] += g[offsets[k] + i];
    }
  });
}

Var slice_cols(Var x, std::size_t begin, std::size_t count) {
  const Var in[] = {x};
  Tape& tape = tape_of(in);
  const Tensor& xv = x.value();
  if (begin + count > xv.cols()) {
    throw DimensionError("slice_cols: range [" + std::to_string(begin) + ", " +
                         std::to_string(begin + count) + ") exceeds " + xv.shape_string());
  }
  Tensor out(xv.rows(), count);
  for (std::size_t r = 0; r < xv.rows(); ++r)
    for (std::size_t c = 0; c < count; ++c) out(r, c) = xv(r, begin + c);
  return tape.push(std::move(out), in, [x, begin, count](Tape& t, std::size_t self) {
    std::size_t rows = t.value(x.id).rows();
    std::size_t cols = t.value(x.id).cols();
    std::span<double> g = t.grad(self);
    std::span<double> gx = t.grad(x.id);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < count; ++c) gx[r * cols + begin + c] += g[r * count + c];
  });
}

Var gather_rows(Var x, std::span<const std::size_t> indices) {
  const Var in[] = {x};
  Tape& tape = tape_of(in);
  const Tensor& xv = x.value();
  Tensor out(indices.size(), xv.cols());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= xv.rows()) {
      throw DimensionError("gather_rows: index " + std::to_string(indices[i]) +
                           " out of range for " + xv.shape_string());
    }
    std::copy_n(&xv.values()[indices[i] * xv.cols()], xv.cols(), &out(i, 0));
  }
  std::vector<std::size_t> idx(indices.begin(), indices.end());
  return tape.push(std::move(out), in, [x, idx = std::move(idx)](Tape& t, std::size_t self) {
    std::size_t cols = t.value(x.id).cols();
    std::span<double> g = t.grad(self);
    std::span<double> gx = t.grad(x.id);
    for (std::size_t i = 0; i < idx.size(); ++i)
      for (std::size_t c = 0; c < cols; ++c) gx[idx[i] * cols + c] += g[i * cols + c];
  });
}

Var flatten(Var x) {
  const Var in[] = {x};
  Tape& tape = tape_of(in);
  const Tensor& xv = x.value();
  Tensor out(1, xv.size(), std::vector<double>(xv.values().begin(), xv.values().end()));
  return tape.push(std::move(out), in, [x](Tape& t, std::size_t self) {
    std::span<double> g = t.grad(self);
    std::span<double> gx = t.grad(x.id);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
  });
}

Var sum(Var x) {
  const Var in[] = {x};
  Tape& tape = tape_of(in);
  double total = 0.0;
  for (double v : x.value().values()) total += v;
  return tape.push(Tensor(1, 1, total), in, [x](Tape& t, std::size_t self) {
    double g = t.grad(self)[0];
    for (double& v : t.grad(x.id)) v += g;
  });
}

Var layer_norm(Var x, Var gain, Var bias, double eps) {
  const Var in[] = {x, gain, bias};
  Tape& tape = tape_of(in);
  const Tensor& xv = x.value();
  const std::size_t n = xv.cols();
  if (n == 0) throw DimensionError("layer_norm: input has no columns");
  if (gain.rows() != 1 || gain.cols() != n || bias.rows() != 1 || bias.cols() != n) {
    throw DimensionError("layer_norm: gain/bias must be 1x" + std::to_string(n));
  }
  const Tensor& gv = gain.value();
  const Tensor& bv = bias.value();
  Tensor normed(xv.rows(), n);
  std::vector<double> inv_std(xv.rows());
  Tensor out(xv.rows(), n);
  for (std::size_t r = 0; r < xv.rows(); ++r) {
    double mean = 0.0;
    for (std::size_t c = 0; c < n; ++c) mean += xv(r, c);
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t c = 0; c < n; ++c) var += (xv(r, c) - mean) * (xv(r, c) - mean);
    var /= static_cast<double>(n);
    inv_std[r] = 1.0 / std::sqrt(var + eps);
    for (std::size_t c = 0; c < n; ++c) {
      normed(r, c) = (xv(r, c) - mean) * inv_std[r];
      out(r, c) = normed(r, c) * gv[c] + bv[c];
    }
  }
  return tape.push(
      std::move(out), in,
      [x, gain, bias, normed = std::move(normed), inv_std = std::move(inv_std)](
          Tape& t, std::size_t self) {
        const std::size_t rows = normed.rows();
        const std::size_t n = normed.cols();
        const Tensor& gv = t.value(gain.id);
        std::span<double> g = t.grad(self);
        if (t.needs_grad(gain.id)) {
          std::span<double> gg = t.grad(gain.id);
          for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t c = 0; c < n; ++c) gg[c] += g[r * n + c] * normed(r, c);
        }
        if (t.needs_grad(bias.id)) {
          std::span<double> gb = t.grad(bias.id);
          for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t c = 0; c < n; ++c) gb[c] += g[r * n + c];
        }
        if (!t.needs_grad(x.id)) return;
        const bool drop_projection = testing::fault() == testing::Fault::kLayerNormBackward;
        std::span<double> gx = t.grad(x.id);
        std::vector<double> dn(n);
        for (std::size_t r = 0; r < rows; ++r) {
          double mean_dn = 0.0;
          double mean_dn_xhat = 0.0;
          for (std::size_t c = 0; c < n; ++c) {
            dn[c] = g[r * n + c] * gv[c];
            mean_dn += dn[c];
            mean_dn_xhat += dn[c] * normed(r, c);
          }
          mean_dn /= static_cast<double>(n);
          mean_dn_xhat /= static_cast<double>(n);
          if (drop_projection) mean_dn_xhat = 0.0;
          for (std::size_t c = 0; c < n; ++c) {
            gx[r * n + c] += inv_std[r] * (dn[c] - mean_dn - normed(r, c) * mean_dn_xhat);
          }
        }
      });
}

Var bce_loss(Var probabilities, const Tensor& labels) {
  const Var in[] = {probabilities};
  Tape& tape = tape_of(in);
  const Tensor& pv = probabilities.value();
  require_same_shape(pv, labels, "bce_loss");
  if (pv.size() == 0) throw DimensionError("bce_loss: empty batch");
  for (double y : labels.values()) {
    if (y != 0.0 && y != 1.0) {
      throw DataError("bce_loss: label " + std::to_string(y) + " is not 0 or 1");
    }
  }
  const double lo = kProbabilityClamp;
  const double hi = 1.0 - kProbabilityClamp;
  const double inv_n = 1.0 / static_cast<double>(pv.size());
  double total = 0.0;
  for (std::size_t i = 0; i < pv.size(); ++i) {
    double p = std::clamp(pv[i], lo, hi);
    total -= labels[i] * std::log(p) + (1.0 - labels[i]) * std::log(1.0 - p);
  }
  return tape.push(Tensor(1, 1, total * inv_n), in,
                   [probabilities, labels, lo, hi, inv_n](Tape& t, std::size_t self) {
                     const Tensor& pv = t.value(probabilities.id);
                     double g = t.grad(self)[0];
                     std::span<double> gp = t.grad(probabilities.id);
                     for (std::size_t i = 0; i < pv.size(); ++i) {
                       if (pv[i] < lo || pv[i] > hi) continue;
                       double y = labels[i];
                       gp[i] += g * inv_n * (-y / pv[i] + (1.0 - y) / (1.0 - pv[i]));
                     }
                   });
}

Var l2_penalty(std::span<const Var> params, double delta) {
  if (!(delta > 0.0)) {
    throw ParameterError("l2_penalty: delta must be positive, got " + std::to_string(delta));
  }
  Tape& tape = tape_of(params);
  const double coeff = 2.0 / delta;
  double total = 0.0;
  for (const Var& p : params)
    for (double v : p.value().values()) total += v * v;
  std::vector<Var> ins(params.begin(), params.end());
  return tape.push(Tensor(1, 1, coeff * total), params, [ins, coeff](Tape& t, std::size_t self) {
    double g = t.grad(self)[0];
    for (const Var& p : ins) {
      if (!t.needs_grad(p.id)) continue;
      const Tensor& pv = t.value(p.id);
      std::span<double> gp = t.grad(p.id);
      for (std::size_t i = 0; i < gp.size(); ++i) gp[i] += g * 2.0 * coeff * pv[i];
    }
  });
}

}  // namespace egtsyn
