// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "egtsyn/tensor.hpp"

namespace egtsyn {

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// First/second moment buffers for one parameter tensor.
struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::int64_t step = 0;
};

/// One bias-corrected Adam update of `param` using its grad buffer.
void adam_step(Tensor& param, AdamState& state, const AdamConfig& config);

/// Adam over a fixed list of parameters.
class Adam {
 public:
  Adam(std::vector<Tensor*> params, AdamConfig config);

  void step();
  void zero_grad();
  const AdamConfig& config() const { return config_; }

 private:
  std::vector<Tensor*> params_;
  std::vector<AdamState> states_;
  AdamConfig config_;
};

}  // namespace egtsyn
