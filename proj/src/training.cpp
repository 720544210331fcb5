// SPDX-License-Identifier: Apache-2.0
#include "egtsyn/training.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>

#include "egtsyn/errors.hpp"
#include "egtsyn/optim.hpp"

namespace egtsyn::training {

namespace {

struct StreamItem {
  std::size_t record;
  bool swapped;
};

std::vector<int> labels_of(const data::DatasetBundle& bundle, std::span<const std::size_t> indices) {
  std::vector<int> labels;
  labels.reserve(indices.size());
  for (std::size_t i : indices) {
    if (i >= bundle.records.size()) {
      throw ContractError("record index " + std::to_string(i) + " out of range");
    }
    const auto& label = bundle.records[i].label;
    if (!label) throw ContractError("record index " + std::to_string(i) + " has no label");
    labels.push_back(*label);
  }
  return labels;
}

}  // namespace

void TrainOptions::validate() const {
  if (batch_size == 0) throw ParameterError("batch size must be positive");
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw ParameterError("learning rate must be finite and >= 0");
  if (!(delta > 0.0)) throw ParameterError("delta must be positive");
}

double TrainResult::final_loss() const {
  return history.empty() ? std::nan("") : history.back().train_loss;
}

void check_compatible(const model::ModelConfig& config, const data::DatasetBundle& bundle) {
  if (config.cell_input_dim != bundle.cell_width()) {
    throw ConfigError("model expects " + std::to_string(config.cell_input_dim) +
                      " expression values per cell line but the data has " +
                      std::to_string(bundle.cell_width()));
  }
}

TrainResult train(model::SynergyModel& model, const data::DatasetBundle& bundle,
                  std::span<const std::size_t> train_indices,
                  std::span<const std::size_t> val_indices, const TrainOptions& options,
                  const EpochCallback& on_epoch) {
  options.validate();
  check_compatible(model.config(), bundle);
  if (train_indices.empty()) throw ProtocolError("training set is empty");
  labels_of(bundle, train_indices);
  labels_of(bundle, val_indices);

  std::vector<StreamItem> stream;
  for (std::size_t i : train_indices) {
    stream.push_back({i, false});
    if (options.augment) stream.push_back({i, true});
  }

  Adam adam(model.parameter_tensors(), AdamConfig{.lr = options.lr});
  Rng rng(options.seed);
  const std::size_t width = bundle.cell_width();
  TrainResult result;

  for (std::size_t epoch = 1; epoch <= options.epochs; ++epoch) {
    rng.shuffle(stream);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < stream.size(); start += options.batch_size) {
      const std::size_t end = std::min(stream.size(), start + options.batch_size);
      std::map<std::size_t, std::size_t> cell_rows;
      std::vector<std::size_t> cell_order;
      std::vector<model::PairInput> batch;
      Tensor labels(end - start, 1);
      for (std::size_t k = start; k < end; ++k) {
        const data::SynergyRecord& r = bundle.records[stream[k].record];
        const std::size_t cell = *bundle.cell_index(r.cell_line);
        auto [it, inserted] = cell_rows.emplace(cell, cell_order.size());
        if (inserted) cell_order.push_back(cell);
        const auto* a = &bundle.drug(r.drug_a).graph;
        const auto* b = &bundle.drug(r.drug_b).graph;
        if (stream[k].swapped) std::swap(a, b);
        batch.push_back({a, b, it->second});
        labels(k - start, 0) = *r.label;
      }
      Tensor cells(cell_order.size(), width);
      for (std::size_t row = 0; row < cell_order.size(); ++row) {
        const auto& expr = bundle.cells[cell_order[row]].expression;
        std::copy(expr.begin(), expr.end(), cells.values().begin() + row * width);
      }

      Tape tape;
      const model::ForwardContext ctx{true, &rng};
      Var probs = model.forward(tape, batch, cells, ctx);
      Var loss = add(bce_loss(probs, labels), model.penalty(tape, options.delta));
      const double value = loss.value()[0];
      if (!std::isfinite(value)) {
        throw NumericError("loss became " + format_double(value) + " at epoch " +
                           std::to_string(epoch) + " (learning rate " +
                           format_double(options.lr) +
                           "); lower --lr or check the inputs for extreme values");
      }
      adam.zero_grad();
      tape.backward(loss);
      adam.step();
      loss_sum += value * static_cast<double>(end - start);
    }

    EpochStats stats{epoch, loss_sum / static_cast<double>(stream.size()), std::nullopt};
    if (!val_indices.empty()) stats.val_loss = evaluation_loss(model, bundle, val_indices);
    result.history.push_back(stats);
    if (on_epoch && !on_epoch(stats)) break;
  }
  return result;
}

std::vector<double> predict_records(const model::SynergyModel& model,
                                    const data::DatasetBundle& bundle,
                                    std::span<const std::size_t> indices) {
  check_compatible(model.config(), bundle);
  std::vector<double> probs;
  probs.reserve(indices.size());
  for (std::size_t i : indices) {
    if (i >= bundle.records.size()) {
      throw ContractError("record index " + std::to_string(i) + " out of range");
    }
    const data::SynergyRecord& r = bundle.records[i];
    probs.push_back(model.predict_pair(bundle.drug(r.drug_a).graph, bundle.drug(r.drug_b).graph,
                                       bundle.cell(r.cell_line).expression));
  }
  return probs;
}

double evaluation_loss(const model::SynergyModel& model, const data::DatasetBundle& bundle,
                       std::span<const std::size_t> indices) {
  if (indices.empty()) throw ProtocolError("cannot compute a loss over an empty set");
  const std::vector<int> labels = labels_of(bundle, indices);
  const std::vector<double> probs = predict_records(model, bundle, indices);
  Tensor y(labels.size(), 1);
  for (std::size_t i = 0; i < labels.size(); ++i) y(i, 0) = labels[i];
  Tape tape(false);
  return bce_loss(tape.constant(Tensor(probs.size(), 1, probs)), y).value()[0];
}

metrics::MetricsReport evaluate(const model::SynergyModel& model,
                                const data::DatasetBundle& bundle,
                                std::span<const std::size_t> indices, double threshold) {
  if (indices.empty()) throw ProtocolError("evaluation set is empty");
  const std::vector<int> labels = labels_of(bundle, indices);
  const std::vector<double> probs = predict_records(model, bundle, indices);
  return metrics::evaluate_scores(labels, probs, threshold);
}

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

std::string history_to_csv(std::span<const EpochStats> history) {
  std::string out = "epoch,train_loss,val_loss\n";
  for (const EpochStats& s : history) {
    out += std::to_string(s.epoch) + "," + format_double(s.train_loss) + "," +
           (s.val_loss ? format_double(*s.val_loss) : "") + "\n";
  }
  return out;
}

}  // namespace egtsyn::training
