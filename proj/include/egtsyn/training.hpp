// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "egtsyn/dataset.hpp"
#include "egtsyn/metrics.hpp"
#include "egtsyn/model.hpp"

namespace egtsyn::training {

struct TrainOptions {
  std::size_t epochs = 300;
  std::size_t batch_size = 128;
  double lr = 1e-4;
  double delta = 1e5;  // penalty coefficient is 2/delta
  std::uint64_t seed = 0;
  bool augment = true;  // feed both drug orders of every record

  void validate() const;
};

struct EpochStats {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  std::optional<double> val_loss;
};

/// Called after every epoch; returning false stops training.
using EpochCallback = std::function<bool(const EpochStats&)>;

struct TrainResult {
  std::vector<EpochStats> history;
  double final_loss() const;
};

/// Mini-batch Adam on mean BCE plus the L2 penalty. `train_indices` and
/// `val_indices` index `bundle.records` and must be labeled. Each epoch
/// shuffles the (record, order) stream with a single Rng seeded from
/// options.seed. Throws NumericError when the loss stops being finite.
TrainResult train(model::SynergyModel& model, const data::DatasetBundle& bundle,
                  std::span<const std::size_t> train_indices,
                  std::span<const std::size_t> val_indices, const TrainOptions& options,
                  const EpochCallback& on_epoch = {});

/// Order-symmetrized eval-mode probability per record.
std::vector<double> predict_records(const model::SynergyModel& model,
                                    const data::DatasetBundle& bundle,
                                    std::span<const std::size_t> indices);

/// Mean BCE of the symmetrized probabilities, without the penalty.
double evaluation_loss(const model::SynergyModel& model, const data::DatasetBundle& bundle,
                       std::span<const std::size_t> indices);

/// Full report over labeled records. Throws ProtocolError on an empty set.
metrics::MetricsReport evaluate(const model::SynergyModel& model,
                                const data::DatasetBundle& bundle,
                                std::span<const std::size_t> indices, double threshold = 0.5);

/// Throws ConfigError when the model's cell width differs from the bundle's.
void check_compatible(const model::ModelConfig& config, const data::DatasetBundle& bundle);

/// `epoch,train_loss,val_loss` lines with a header; val_loss empty when absent.
std::string history_to_csv(std::span<const EpochStats> history);

/// Shortest round-trip decimal form.
std::string format_double(double value);

}  // namespace egtsyn::training
