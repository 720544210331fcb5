// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "egtsyn/autodiff.hpp"

namespace egtsyn {

struct NamedTensor {
  std::string name;
  Tensor* tensor;
};

struct GradCheckOptions {
  double tolerance = 1e-4;
  double step = 1e-5;
  // Gradients with magnitude below this are compared absolutely; their
  // central difference is dominated by cancellation noise.
  double abs_floor = 1e-6;
  // 0 checks every element; otherwise a seeded sample of this many per tensor.
  std::size_t max_elements_per_tensor = 0;
  std::uint64_t seed = 0;
};

struct ParameterCheck {
  std::string name;
  double max_rel_error = 0.0;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  std::size_t checked = 0;
};

struct GradCheckReport {
  std::vector<ParameterCheck> parameters;
  double tolerance = 0.0;
  bool passed = false;

  const ParameterCheck* worst() const;
};

/// Evaluates a scalar loss on a fresh tape. Must be deterministic.
using LossClosure = std::function<Var(Tape&)>;

/// Compares reverse-mode gradients of `loss` against central differences for
/// every element of every listed tensor. Throws ContractError if two
/// evaluations of the closure disagree.
GradCheckReport grad_check(const LossClosure& loss, const std::vector<NamedTensor>& params,
                           const GradCheckOptions& options = {});

double relative_error(double analytic, double numeric, double abs_floor);

}  // namespace egtsyn
