// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "egtsyn/autodiff.hpp"
#include "egtsyn/gradcheck.hpp"
#include "egtsyn/molgraph.hpp"

namespace egtsyn::model {

/// Ablation variants. The "E" marks the atom-bond graph branch, the "T" the
/// transformer encoder.
enum class Variant { kEGTSyn, kGTSyn, kEGSyn, kGSyn };

std::string_view variant_name(Variant v);
/// Throws ConfigError for unknown names. Matching is case-insensitive.
Variant parse_variant(std::string_view name);
const std::array<Variant, 4>& all_variants();
bool uses_bond_graph(Variant v);
bool uses_transformer(Variant v);

enum class Pooling { kMax, kSum, kMean };
std::string_view pooling_name(Pooling p);
Pooling parse_pooling(std::string_view name);

struct ModelConfig {
  Variant variant = Variant::kEGTSyn;
  std::size_t gcn_layers = 2;
  std::size_t gcn_hidden = 156;
  std::size_t graph_embed_dim = 128;
  std::size_t attention_heads = 4;
  std::size_t ffn_hidden = 256;
  std::size_t cell_input_dim = 954;
  std::array<std::size_t, 2> cell_hidden{2048, 512};
  std::size_t cell_embed_dim = 256;
  std::array<std::size_t, 2> head_hidden{1024, 256};
  double dropout_rate = 0.2;
  Pooling pooling = Pooling::kMax;
  std::uint64_t seed = 0;

  /// Throws ConfigError on an inconsistent configuration.
  void validate() const;
  /// Graph-level tokens fed to the encoder: 2 with the atom-bond graph, else 1.
  std::size_t token_count() const;
  std::size_t drug_embed_dim() const;
  std::size_t fused_dim() const { return 2 * (drug_embed_dim() + cell_embed_dim); }

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// Tiny widths for gradient checks and fast tests.
ModelConfig tiny_config(Variant variant, std::size_t cell_input_dim = 6, std::uint64_t seed = 0);

struct ForwardContext {
  bool training = false;
  Rng* rng = nullptr;  // required when training with dropout
};

/// One ordered drug pair on one cell line. `cell_row` indexes the cell
/// matrix passed alongside the batch.
struct PairInput {
  const molgraph::DualGraph* drug_a = nullptr;
  const molgraph::DualGraph* drug_b = nullptr;
  std::size_t cell_row = 0;
};

// Building blocks, usable on their own.

/// ReLU(A_norm · H · W).
Var gcn_layer(Var h, Var a_norm, Var w);
/// softmax(Q Kᵀ / sqrt(d)) V with d the width of Q.
Var attention(Var q, Var k, Var v);

struct HeadProjection {
  Var wq, wk, wv;
};
/// Concat(head_1..head_k) W_o with head_i = attention(Q Wq_i, K Wk_i, V Wv_i).
Var multi_head(Var q, Var k, Var v, std::span<const HeadProjection> heads, Var w_o);

/// The synergy classifier for one variant. Parameters are named
/// hierarchically (`cell.fc1.weight`, `egnn.atom.gcn0.weight`, ...); the
/// name set of a variant without a block simply lacks that block's names.
class SynergyModel {
 public:
  /// Builds the variant's blocks and initialises weights from config.seed
  /// (Glorot-uniform weights, zero biases, unit layer-norm gain).
  explicit SynergyModel(ModelConfig config);

  const ModelConfig& config() const { return config_; }

  std::vector<std::string> parameter_names() const;
  bool has_parameter(std::string_view name) const;
  Tensor& parameter(std::string_view name);
  const Tensor& parameter(std::string_view name) const;
  std::vector<NamedTensor> named_parameters();
  std::vector<Tensor*> parameter_tensors();
  /// Total scalar parameter count.
  std::size_t parameter_count() const;

  Var cell_reduce(Tape& tape, Var cells, const ForwardContext& ctx);
  /// Stacked GCN layers for one graph; `branch` is "atom" or "bond".
  Var gcn_stack(Tape& tape, const molgraph::FeatureGraph& graph, std::string_view branch);
  Var pool(Var nodes) const;
  /// Graph-level token sequence (token_count x graph_embed_dim).
  Var egnn(Tape& tape, const molgraph::DualGraph& graph);
  /// Drug embedding (1 x drug_embed_dim).
  Var drug_embedding(Tape& tape, const molgraph::DualGraph& graph);
  /// Probabilities (B x 1) from fused pair representations (B x fused_dim).
  Var classify(Tape& tape, Var fused, const ForwardContext& ctx);

  /// Order-sensitive probabilities for a batch of pairs; `cells` holds one
  /// expression vector per row.
  Var forward(Tape& tape, std::span<const PairInput> batch, const Tensor& cells,
              const ForwardContext& ctx);

  /// L2 penalty over every parameter, bound on `tape`.
  Var penalty(Tape& tape, double delta);

  /// Eval-mode probability for one ordering.
  double predict_ordered(const molgraph::DualGraph& a, const molgraph::DualGraph& b,
                         std::span<const double> cell) const;
  /// Eval-mode probability averaged over both drug orders.
  double predict_pair(const molgraph::DualGraph& a, const molgraph::DualGraph& b,
                      std::span<const double> cell) const;

 private:
  Var bind(Tape& tape, std::string_view name);
  void add_parameter(std::string name, std::size_t rows, std::size_t cols, Rng& rng,
                     double fill_if_not_weight = 0.0, bool glorot = true);

  ModelConfig config_;
  std::vector<std::pair<std::string, Tensor>> params_;
};

}  // namespace egtsyn::model
