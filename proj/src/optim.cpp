// SPDX-License-Identifier: Apache-2.0
#include "egtsyn/optim.hpp"

#include <cmath>

#include "egtsyn/errors.hpp"

namespace egtsyn {

void adam_step(Tensor& param, AdamState& state, const AdamConfig& config) {
  if (!param.requires_grad()) throw ContractError("adam_step: parameter has no grad buffer");
  if (state.m.empty()) {
    state.m.assign(param.size(), 0.0);
    state.v.assign(param.size(), 0.0);
  }
  if (state.m.size() != param.size() || state.v.size() != param.size()) {
    throw DimensionError("adam_step: state buffers do not match parameter shape " +
                         param.shape_string());
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(config.beta1, t);
  const double c2 = 1.0 - std::pow(config.beta2, t);
  std::span<double> w = param.values();
  std::span<const double> g = std::as_const(param).grad();
  for (std::size_t i = 0; i < w.size(); ++i) {
    state.m[i] = config.beta1 * state.m[i] + (1.0 - config.beta1) * g[i];
    state.v[i] = config.beta2 * state.v[i] + (1.0 - config.beta2) * g[i] * g[i];
    const double m_hat = state.m[i] / c1;
    const double v_hat = state.v[i] / c2;
    w[i] -= config.lr * m_hat / (std::sqrt(v_hat) + config.eps);
  }
}

Adam::Adam(std::vector<Tensor*> params, AdamConfig config)
    : params_(std::move(params)), states_(params_.size()), config_(config) {}

void Adam::step() {
  for (std::size_t i = 0; i < params_.size(); ++i) adam_step(*params_[i], states_[i], config_);
}

void Adam::zero_grad() {
  for (Tensor* p : params_) p->zero_grad();
}

}  // namespace egtsyn
