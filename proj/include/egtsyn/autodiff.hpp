// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "egtsyn/tensor.hpp"

namespace egtsyn {

class Tape;

/// Handle to a value recorded on a Tape.
struct Var {
  Tape* tape = nullptr;
  std::size_t id = 0;

  const Tensor& value() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
};

/// Records primitive applications in execution order so that a single reverse
/// sweep distributes gradients.
///
/// Leaves created with `parameter` are bound to an external Tensor; after
/// `backward` their gradient is added to that tensor's grad buffer. A tape
/// constructed with `record = false` keeps values only, which is what
/// evaluation uses.
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, std::size_t self)>;

  explicit Tape(bool record = true) : record_(record) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool recording() const noexcept { return record_; }
  std::size_t size() const noexcept { return nodes_.size(); }

  Var constant(Tensor value);
  Var parameter(Tensor& param);

  const Tensor& value(std::size_t id) const {
    const Node& n = nodes_[id];
    return n.param != nullptr ? *n.param : n.value;
  }
  bool needs_grad(std::size_t id) const { return nodes_[id].needs_grad; }

  /// Gradient buffer of node `id`; allocated on first use during backward.
  std::span<double> grad(std::size_t id);

  /// Appends an op result. `backward` is dropped when no input needs grad.
  Var push(Tensor value, std::span<const Var> inputs, BackwardFn backward);

  /// Reverse sweep from a 1×1 loss. Node gradients are recomputed on every
  /// call; parameter gradients accumulate.
  void backward(Var loss);

 private:
  struct Node {
    Tensor value;
    std::vector<double> grad;
    bool needs_grad = false;
    Tensor* param = nullptr;  // bound leaf; value lives in the parameter
    BackwardFn backward;
  };

  bool record_;
  std::vector<Node> nodes_;
};

// Primitive operations. Each records its backward rule on the input tape.

Var matmul(Var a, Var b);
Var add(Var a, Var b);
/// x (m×n) plus a 1×n row broadcast over every row.
Var add_row(Var x, Var row);
Var mul(Var a, Var b);
Var scale(Var x, double factor);
Var transpose(Var x);
Var relu(Var x);
Var sigmoid(Var x);
Var softmax_rows(Var x);
Var dropout(Var x, double rate, bool training, Rng& rng);

/// Column-wise max over rows; ties route gradient to the lowest row index.
Var row_max_pool(Var x);
Var row_sum_pool(Var x);
Var row_mean_pool(Var x);

/// Horizontal concatenation of parts that share a row count.
Var concat_cols(std::span<const Var> parts);
/// Vertical concatenation of parts that share a column count.
Var stack_rows(std::span<const Var> parts);
Var slice_cols(Var x, std::size_t begin, std::size_t count);
/// Rows of x selected by index; repeated indices are allowed.
Var gather_rows(Var x, std::span<const std::size_t> indices);
/// Row-major reshape of an m×n matrix into 1×(m·n).
Var flatten(Var x);
Var sum(Var x);

Var layer_norm(Var x, Var gain, Var bias, double eps = 1e-5);

/// Mean binary cross-entropy. Probabilities are clamped to [1e-7, 1-1e-7]
/// before the log; labels must be exactly 0 or 1.
Var bce_loss(Var probabilities, const Tensor& labels);

/// (2/delta) times the sum of squares over every tensor in `params`.
Var l2_penalty(std::span<const Var> params, double delta);

inline constexpr double kProbabilityClamp = 1e-7;

namespace testing {
/// Deliberate faults in backward rules, used as negative controls for the
/// gradient checker. Never enabled outside tests and `gradcheck --fault`.
enum class Fault { kNone, kReluBackward, kLayerNormBackward, kMatmulBackward };
void set_fault(Fault fault);
Fault fault();
}  // namespace testing

}  // namespace egtsyn
