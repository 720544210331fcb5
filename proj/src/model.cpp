// SPDX-License-Identifier: Apache-2.0
#include "egtsyn/model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>

#include "egtsyn/errors.hpp"

namespace egtsyn::model {

namespace {

constexpr std::array<Variant, 4> kVariants = {Variant::kEGTSyn, Variant::kGTSyn, Variant::kEGSyn,
                                              Variant::kGSyn};

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string gcn_name(std::string_view branch, std::size_t layer) {
  return "egnn." + std::string(branch) + ".gcn" + std::to_string(layer) + ".weight";
}

std::string head_name(std::size_t head, std::string_view role) {
  return "gtd.attn.head" + std::to_string(head) + "." + std::string(role);
}

}  // namespace

std::string_view variant_name(Variant v) {
  switch (v) {
    case Variant::kEGTSyn: return "EGTSyn";
    case Variant::kGTSyn: return "GTSyn";
    case Variant::kEGSyn: return "EGSyn";
    case Variant::kGSyn: return "GSyn";
  }
  return "?";
}

Variant parse_variant(std::string_view name) {
  for (Variant v : kVariants) {
    if (lower(variant_name(v)) == lower(name)) return v;
  }
  throw ConfigError("unknown variant '" + std::string(name) +
                    "' (expected EGTSyn, GTSyn, EGSyn or GSyn)");
}

const std::array<Variant, 4>& all_variants() { return kVariants; }

bool uses_bond_graph(Variant v) { return v == Variant::kEGTSyn || v == Variant::kEGSyn; }
bool uses_transformer(Variant v) { return v == Variant::kEGTSyn || v == Variant::kGTSyn; }

std::string_view pooling_name(Pooling p) {
  switch (p) {
    case Pooling::kMax: return "max";
    case Pooling::kSum: return "sum";
    case Pooling::kMean: return "mean";
  }
  return "?";
}

Pooling parse_pooling(std::string_view name) {
  for (Pooling p : {Pooling::kMax, Pooling::kSum, Pooling::kMean}) {
    if (lower(name) == pooling_name(p)) return p;
  }
  throw ConfigError("unknown pooling '" + std::string(name) + "' (expected max, sum or mean)");
}

void ModelConfig::validate() const {
  auto positive = [](std::size_t v, const char* what) {
    if (v == 0) throw ConfigError(std::string(what) + " must be positive");
  };
  positive(gcn_layers, "gcn_layers");
  positive(gcn_hidden, "gcn_hidden");
  positive(graph_embed_dim, "graph_embed_dim");
  positive(attention_heads, "attention_heads");
  positive(ffn_hidden, "ffn_hidden");
  positive(cell_input_dim, "cell_input_dim");
  positive(cell_hidden[0], "cell_hidden[0]");
  positive(cell_hidden[1], "cell_hidden[1]");
  positive(cell_embed_dim, "cell_embed_dim");
  positive(head_hidden[0], "head_hidden[0]");
  positive(head_hidden[1], "head_hidden[1]");
  if (graph_embed_dim % attention_heads != 0) {
    throw ConfigError("graph_embed_dim " + std::to_string(graph_embed_dim) +
                      " is not divisible by attention_heads " + std::to_string(attention_heads));
  }
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
    throw ConfigError("dropout_rate must lie in [0, 1)");
  }
}

std::size_t ModelConfig::token_count() const { return uses_bond_graph(variant) ? 2 : 1; }

std::size_t ModelConfig::drug_embed_dim() const {
  return uses_transformer(variant) ? 2 * graph_embed_dim : token_count() * graph_embed_dim;
}

ModelConfig tiny_config(Variant variant, std::size_t cell_input_dim, std::uint64_t seed) {
  ModelConfig c;
  c.variant = variant;
  c.gcn_layers = 2;
  c.gcn_hidden = 8;
  c.graph_embed_dim = 8;
  c.attention_heads = 2;
  c.ffn_hidden = 8;
  c.cell_input_dim = cell_input_dim;
  c.cell_hidden = {8, 6};
  c.cell_embed_dim = 4;
  c.head_hidden = {8, 4};
  c.seed = seed;
  return c;
}

Var gcn_layer(Var h, Var a_norm, Var w) {
  if (a_norm.rows() != h.rows() || a_norm.cols() != h.rows()) {
    throw DimensionError("gcn_layer: adjacency " + a_norm.value().shape_string() +
                         " does not match " + std::to_string(h.rows()) + " nodes");
  }
  return relu(matmul(a_norm, matmul(h, w)));
}

Var attention(Var q, Var k, Var v) {
  const double d = static_cast<double>(q.cols());
  Var scores = scale(matmul(q, transpose(k)), 1.0 / std::sqrt(d));
  return matmul(softmax_rows(scores), v);
}

Var multi_head(Var q, Var k, Var v, std::span<const HeadProjection> heads, Var w_o) {
  if (heads.empty()) throw ConfigError("multi_head: no heads");
  std::vector<Var> outputs;
  outputs.reserve(heads.size());
  for (const HeadProjection& h : heads) {
    outputs.push_back(attention(matmul(q, h.wq), matmul(k, h.wk), matmul(v, h.wv)));
  }
  return matmul(concat_cols(outputs), w_o);
}

SynergyModel::SynergyModel(ModelConfig config) : config_(config) {
  config_.validate();
  Rng rng(config_.seed);
  const ModelConfig& c = config_;

  add_parameter("cell.fc1.weight", c.cell_input_dim, c.cell_hidden[0], rng);
  add_parameter("cell.fc1.bias", 1, c.cell_hidden[0], rng, 0.0, false);
  add_parameter("cell.fc2.weight", c.cell_hidden[0], c.cell_hidden[1], rng);
  add_parameter("cell.fc2.bias", 1, c.cell_hidden[1], rng, 0.0, false);
  add_parameter("cell.fc3.weight", c.cell_hidden[1], c.cell_embed_dim, rng);
  add_parameter("cell.fc3.bias", 1, c.cell_embed_dim, rng, 0.0, false);

  std::vector<std::string> branches{"atom"};
  if (uses_bond_graph(c.variant)) branches.emplace_back("bond");
  for (const std::string& branch : branches) {
    for (std::size_t l = 0; l < c.gcn_layers; ++l) {
      const std::size_t in = l == 0 ? molgraph::kFeatureWidth : c.gcn_hidden;
      const std::size_t out = l + 1 == c.gcn_layers ? c.graph_embed_dim : c.gcn_hidden;
      add_parameter(gcn_name(branch, l), in, out, rng);
    }
  }

  if (uses_transformer(c.variant)) {
    const std::size_t d = c.graph_embed_dim;
    const std::size_t dh = d / c.attention_heads;
    for (std::size_t h = 0; h < c.attention_heads; ++h) {
      add_parameter(head_name(h, "query"), d, dh, rng);
      add_parameter(head_name(h, "key"), d, dh, rng);
      add_parameter(head_name(h, "value"), d, dh, rng);
    }
    add_parameter("gtd.attn.output", d, d, rng);
    add_parameter("gtd.norm.gain", 1, d, rng, 1.0, false);
    add_parameter("gtd.norm.bias", 1, d, rng, 0.0, false);
    add_parameter("gtd.ffn.fc1.weight", d, c.ffn_hidden, rng);
    add_parameter("gtd.ffn.fc1.bias", 1, c.ffn_hidden, rng, 0.0, false);
    add_parameter("gtd.ffn.fc2.weight", c.ffn_hidden, d, rng);
    add_parameter("gtd.ffn.fc2.bias", 1, d, rng, 0.0, false);
    add_parameter("gtd.residual.weight", 2 * c.token_count() * d, 2 * d, rng);
    add_parameter("gtd.residual.bias", 1, 2 * d, rng, 0.0, false);
  }

  add_parameter("head.fc1.weight", c.fused_dim(), c.head_hidden[0], rng);
  add_parameter("head.fc1.bias", 1, c.head_hidden[0], rng, 0.0, false);
  add_parameter("head.fc2.weight", c.head_hidden[0], c.head_hidden[1], rng);
  add_parameter("head.fc2.bias", 1, c.head_hidden[1], rng, 0.0, false);
  add_parameter("head.out.weight", c.head_hidden[1], 1, rng);
  add_parameter("head.out.bias", 1, 1, rng, 0.0, false);
}

void SynergyModel::add_parameter(std::string name, std::size_t rows, std::size_t cols, Rng& rng,
                                 double fill_if_not_weight, bool glorot) {
  Tensor t(rows, cols, fill_if_not_weight);
  if (glorot) {
    const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
    for (double& v : t.values()) v = rng.uniform(-limit, limit);
  }
  t.set_requires_grad(true);
  params_.emplace_back(std::move(name), std::move(t));
}

std::vector<std::string> SynergyModel::parameter_names() const {
  std::vector<std::string> names;
  names.reserve(params_.size());
  for (const auto& [name, t] : params_) names.push_back(name);
  return names;
}

bool SynergyModel::has_parameter(std::string_view name) const {
  return std::any_of(params_.begin(), params_.end(),
                     [name](const auto& p) { return p.first == name; });
}

Tensor& SynergyModel::parameter(std::string_view name) {
  for (auto& [n, t] : params_) {
    if (n == name) return t;
  }
  throw ConfigError("model has no parameter named '" + std::string(name) + "'");
}

const Tensor& SynergyModel::parameter(std::string_view name) const {
  return const_cast<SynergyModel*>(this)->parameter(name);
}

std::vector<NamedTensor> SynergyModel::named_parameters() {
  std::vector<NamedTensor> out;
  for (auto& [n, t] : params_) out.push_back({n, &t});
  return out;
}

std::vector<Tensor*> SynergyModel::parameter_tensors() {
  std::vector<Tensor*> out;
  for (auto& p : params_) out.push_back(&p.second);
  return out;
}

std::size_t SynergyModel::parameter_count() const {
  std::size_t total = 0;
  for (const auto& p : params_) total += p.second.size();
  return total;
}

Var SynergyModel::bind(Tape& tape, std::string_view name) { return tape.parameter(parameter(name)); }

Var SynergyModel::cell_reduce(Tape& tape, Var cells, const ForwardContext& ctx) {
  if (cells.cols() != config_.cell_input_dim) {
    throw DimensionError("cell_reduce: expected " + std::to_string(config_.cell_input_dim) +
                         " expression features, got " + std::to_string(cells.cols()));
  }
  Rng dummy(0);
  Rng& rng = ctx.rng != nullptr ? *ctx.rng : dummy;
  const double rate = config_.dropout_rate;
  Var h = relu(add_row(matmul(cells, bind(tape, "cell.fc1.weight")), bind(tape, "cell.fc1.bias")));
  h = dropout(h, rate, ctx.training, rng);
  h = relu(add_row(matmul(h, bind(tape, "cell.fc2.weight")), bind(tape, "cell.fc2.bias")));
  h = dropout(h, rate, ctx.training, rng);
  return relu(add_row(matmul(h, bind(tape, "cell.fc3.weight")), bind(tape, "cell.fc3.bias")));
}

Var SynergyModel::gcn_stack(Tape& tape, const molgraph::FeatureGraph& graph,
                            std::string_view branch) {
  if (graph.node_count() == 0) throw DataError("gcn_stack: empty graph");
  Var h = tape.constant(graph.node_features);
  Var a = tape.constant(graph.adjacency_norm);
  for (std::size_t l = 0; l < config_.gcn_layers; ++l) {
    h = gcn_layer(h, a, bind(tape, gcn_name(branch, l)));
  }
  return h;
}

Var SynergyModel::pool(Var nodes) const {
  switch (config_.pooling) {
    case Pooling::kMax: return row_max_pool(nodes);
    case Pooling::kSum: return row_sum_pool(nodes);
    case Pooling::kMean: return row_mean_pool(nodes);
  }
  return row_max_pool(nodes);
}

Var SynergyModel::egnn(Tape& tape, const molgraph::DualGraph& graph) {
  std::vector<Var> tokens{pool(gcn_stack(tape, graph.atom_graph, "atom"))};
  if (uses_bond_graph(config_.variant)) {
    tokens.push_back(pool(gcn_stack(tape, graph.atom_bond_graph, "bond")));
  }
  return tokens.size() == 1 ? tokens.front() : stack_rows(tokens);
}

Var SynergyModel::drug_embedding(Tape& tape, const molgraph::DualGraph& graph) {
  Var e = egnn(tape, graph);
  if (!uses_transformer(config_.variant)) return flatten(e);

  std::vector<HeadProjection> heads;
  for (std::size_t h = 0; h < config_.attention_heads; ++h) {
    heads.push_back({bind(tape, head_name(h, "query")), bind(tape, head_name(h, "key")),
                     bind(tape, head_name(h, "value"))});
  }
  Var z = multi_head(e, e, e, heads, bind(tape, "gtd.attn.output"));
  z = layer_norm(z, bind(tape, "gtd.norm.gain"), bind(tape, "gtd.norm.bias"));
  z = relu(add_row(matmul(z, bind(tape, "gtd.ffn.fc1.weight")), bind(tape, "gtd.ffn.fc1.bias")));
  z = add_row(matmul(z, bind(tape, "gtd.ffn.fc2.weight")), bind(tape, "gtd.ffn.fc2.bias"));
  // Long residual: the encoder output travels alongside the raw EGNN tokens.
  const Var joined[] = {flatten(z), flatten(e)};
  return add_row(matmul(concat_cols(joined), bind(tape, "gtd.residual.weight")),
                 bind(tape, "gtd.residual.bias"));
}

Var SynergyModel::classify(Tape& tape, Var fused, const ForwardContext& ctx) {
  if (fused.cols() != config_.fused_dim()) {
    throw ConfigError("classify: fused width " + std::to_string(fused.cols()) +
                      " does not match configured " + std::to_string(config_.fused_dim()));
  }
  Rng dummy(0);
  Rng& rng = ctx.rng != nullptr ? *ctx.rng : dummy;
  const double rate = config_.dropout_rate;
  Var h = relu(add_row(matmul(fused, bind(tape, "head.fc1.weight")), bind(tape, "head.fc1.bias")));
  h = dropout(h, rate, ctx.training, rng);
  h = relu(add_row(matmul(h, bind(tape, "head.fc2.weight")), bind(tape, "head.fc2.bias")));
  h = dropout(h, rate, ctx.training, rng);
  return sigmoid(add_row(matmul(h, bind(tape, "head.out.weight")), bind(tape, "head.out.bias")));
}

Var SynergyModel::forward(Tape& tape, std::span<const PairInput> batch, const Tensor& cells,
                          const ForwardContext& ctx) {
  if (batch.empty()) throw ContractError("forward: empty batch");
  if (ctx.training && config_.dropout_rate > 0.0 && ctx.rng == nullptr) {
    throw ContractError("forward: training with dropout requires an Rng");
  }
  // Each distinct drug is embedded once per batch.
  std::map<const molgraph::DualGraph*, std::size_t> slot;
  std::vector<Var> embeddings;
  std::vector<std::size_t> a_rows, b_rows, c_rows;
  auto drug_row = [&](const molgraph::DualGraph* g) {
    auto [it, inserted] = slot.emplace(g, embeddings.size());
    if (inserted) embeddings.push_back(drug_embedding(tape, *g));
    return it->second;
  };
  for (const PairInput& p : batch) {
    if (p.drug_a == nullptr || p.drug_b == nullptr) throw ContractError("forward: null drug graph");
    if (p.cell_row >= cells.rows()) throw ContractError("forward: cell row out of range");
    a_rows.push_back(drug_row(p.drug_a));
    b_rows.push_back(drug_row(p.drug_b));
    c_rows.push_back(p.cell_row);
  }
  Var drugs = embeddings.size() == 1 ? embeddings.front() : stack_rows(embeddings);
  Var cell_emb = cell_reduce(tape, tape.constant(cells), ctx);
  Var cell_rows = gather_rows(cell_emb, c_rows);
  const Var parts[] = {gather_rows(drugs, a_rows), cell_rows, gather_rows(drugs, b_rows),
                       cell_rows};
  return classify(tape, concat_cols(parts), ctx);
}

Var SynergyModel::penalty(Tape& tape, double delta) {
  std::vector<Var> vars;
  vars.reserve(params_.size());
  for (auto& p : params_) vars.push_back(tape.parameter(p.second));
  return l2_penalty(vars, delta);
}

double SynergyModel::predict_ordered(const molgraph::DualGraph& a, const molgraph::DualGraph& b,
                                     std::span<const double> cell) const {
  // A non-recording tape only reads parameters.
  auto& self = const_cast<SynergyModel&>(*this);
  Tape tape(false);
  const PairInput pair{&a, &b, 0};
  Var p = self.forward(tape, std::span(&pair, 1), Tensor::row(cell), ForwardContext{});
  return p.value()[0];
}

double SynergyModel::predict_pair(const molgraph::DualGraph& a, const molgraph::DualGraph& b,
                                  std::span<const double> cell) const {
  return 0.5 * (predict_ordered(a, b, cell) + predict_ordered(b, a, cell));
}

}  // namespace egtsyn::model
