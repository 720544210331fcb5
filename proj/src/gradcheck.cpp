// SPDX-License-Identifier: Apache-2.0
#include "egtsyn/gradcheck.hpp"

#include <algorithm>
#include <cstring>
#include <cmath>
#include <numeric>

#include "egtsyn/errors.hpp"

namespace egtsyn {

namespace {

double evaluate(const LossClosure& loss) {
  Tape tape(false);
  Var out = loss(tape);
  const Tensor& v = out.value();
  if (v.size() != 1) throw ContractError("grad_check: closure must return a scalar loss");
  return v[0];
}

std::vector<std::size_t> pick_elements(std::size_t size, const GradCheckOptions& options,
                                       Rng& rng) {
  std::vector<std::size_t> idx(size);
  std::iota(idx.begin(), idx.end(), 0);
  if (options.max_elements_per_tensor == 0 || size <= options.max_elements_per_tensor) return idx;
  rng.shuffle(idx);
  idx.resize(options.max_elements_per_tensor);
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace

double relative_error(double analytic, double numeric, double abs_floor) {
  double denom = std::max({std::abs(analytic), std::abs(numeric), abs_floor});
  return std::abs(analytic - numeric) / denom;
}

const ParameterCheck* GradCheckReport::worst() const {
  if (parameters.empty()) return nullptr;
  return &*std::max_element(parameters.begin(), parameters.end(),
                            [](const ParameterCheck& a, const ParameterCheck& b) {
                              return a.max_rel_error < b.max_rel_error;
                            });
}

GradCheckReport grad_check(const LossClosure& loss, const std::vector<NamedTensor>& params,
                           const GradCheckOptions& options) {
  const double first = evaluate(loss);
  const double second = evaluate(loss);
  if (std::memcmp(&first, &second, sizeof(double)) != 0) {
    throw ContractError("grad_check: loss closure is not deterministic (" +
                        std::to_string(first) + " vs " + std::to_string(second) + ")");
  }

  for (const NamedTensor& p : params) {
    if (!p.tensor->requires_grad()) p.tensor->set_requires_grad(true);
    p.tensor->zero_grad();
  }
  {
    Tape tape;
    Var out = loss(tape);
    tape.backward(out);
  }

  Rng rng(options.seed);
  GradCheckReport report;
  report.tolerance = options.tolerance;
  report.passed = true;
  for (const NamedTensor& p : params) {
    ParameterCheck check;
    check.name = p.name;
    std::vector<double> analytic(p.tensor->grad().begin(), p.tensor->grad().end());
    for (std::size_t i : pick_elements(p.tensor->size(), options, rng)) {
      double& w = (*p.tensor)[i];
      const double saved = w;
      w = saved + options.step;
      const double plus = evaluate(loss);
      w = saved - options.step;
      const double minus = evaluate(loss);
      w = saved;
      const double numeric = (plus - minus) / (2.0 * options.step);
      const double err = relative_error(analytic[i], numeric, options.abs_floor);
      ++check.checked;
      if (err > check.max_rel_error || check.checked == 1) {
        check.max_rel_error = err;
        check.worst_index = i;
        check.analytic = analytic[i];
        check.numeric = numeric;
      }
    }
    if (!(check.max_rel_error < options.tolerance)) report.passed = false;
    report.parameters.push_back(std::move(check));
  }
  return report;
}

}  // namespace egtsyn
