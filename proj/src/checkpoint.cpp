// SPDX-License-Identifier: Apache-2.0
#include "egtsyn/checkpoint.hpp"

#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

#include "egtsyn/errors.hpp"

namespace egtsyn {

using nlohmann::json;

namespace {

constexpr const char* kFormatTag = "egtsyn-checkpoint";

json config_to_json(const model::ModelConfig& c) {
  return json{{"variant", model::variant_name(c.variant)},
              {"gcn_layers", c.gcn_layers},
              {"gcn_hidden", c.gcn_hidden},
              {"graph_embed_dim", c.graph_embed_dim},
              {"attention_heads", c.attention_heads},
              {"ffn_hidden", c.ffn_hidden},
              {"cell_input_dim", c.cell_input_dim},
              {"cell_hidden", c.cell_hidden},
              {"cell_embed_dim", c.cell_embed_dim},
              {"head_hidden", c.head_hidden},
              {"dropout_rate", c.dropout_rate},
              {"pooling", model::pooling_name(c.pooling)},
              {"seed", c.seed}};
}

model::ModelConfig config_from_json(const json& j) {
  model::ModelConfig c;
  c.variant = model::parse_variant(j.at("variant").get<std::string>());
  c.gcn_layers = j.at("gcn_layers").get<std::size_t>();
  c.gcn_hidden = j.at("gcn_hidden").get<std::size_t>();
  c.graph_embed_dim = j.at("graph_embed_dim").get<std::size_t>();
  c.attention_heads = j.at("attention_heads").get<std::size_t>();
  c.ffn_hidden = j.at("ffn_hidden").get<std::size_t>();
  c.cell_input_dim = j.at("cell_input_dim").get<std::size_t>();
  c.cell_hidden = j.at("cell_hidden").get<std::array<std::size_t, 2>>();
  c.cell_embed_dim = j.at("cell_embed_dim").get<std::size_t>();
  c.head_hidden = j.at("head_hidden").get<std::array<std::size_t, 2>>();
  c.dropout_rate = j.at("dropout_rate").get<double>();
  c.pooling = model::parse_pooling(j.at("pooling").get<std::string>());
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

}  // namespace

std::string checkpoint_to_string(const model::SynergyModel& model,
                                 const TrainingMetadata& training) {
  json params = json::array();
  for (const std::string& name : model.parameter_names()) {
    const Tensor& t = model.parameter(name);
    if (!t.all_finite()) throw NumericError("checkpoint: parameter '" + name + "' is not finite");
    params.push_back(json{{"name", name},
                          {"shape", {t.rows(), t.cols()}},
                          {"values", std::vector<double>(t.values().begin(), t.values().end())}});
  }
  json training_json{{"epoch", training.epoch}};
  training_json["loss"] = std::isfinite(training.loss) ? json(training.loss) : json(nullptr);
  json doc{{"format", kFormatTag},
           {"format_version", kCheckpointFormatVersion},
           {"config", config_to_json(model.config())},
           {"training", training_json},
           {"parameters", params}};
  return doc.dump(1) + "\n";
}

Checkpoint checkpoint_from_string(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("checkpoint is not valid JSON: ") + e.what());
  }
  try {
    if (doc.value("format", std::string()) != kFormatTag) {
      throw ConfigError("not an egtsyn checkpoint (missing format tag)");
    }
    if (!doc.contains("format_version")) throw ConfigError("checkpoint lacks format_version");
    const int version = doc.at("format_version").get<int>();
    if (version != kCheckpointFormatVersion) {
      throw ConfigError("unsupported checkpoint format_version " + std::to_string(version));
    }
    Checkpoint ckpt{model::SynergyModel(config_from_json(doc.at("config"))), {}};
    const json& tr = doc.at("training");
    ckpt.training.epoch = tr.at("epoch").get<int>();
    if (!tr.at("loss").is_null()) ckpt.training.loss = tr.at("loss").get<double>();

    std::set<std::string> seen;
    for (const json& p : doc.at("parameters")) {
      const std::string name = p.at("name").get<std::string>();
      if (!seen.insert(name).second) throw ConfigError("duplicate parameter '" + name + "'");
      if (!ckpt.model.has_parameter(name)) {
        throw ConfigError("checkpoint parameter '" + name + "' is not part of the " +
                          std::string(model::variant_name(ckpt.model.config().variant)) +
                          " architecture");
      }
      Tensor& t = ckpt.model.parameter(name);
      const auto shape = p.at("shape").get<std::array<std::size_t, 2>>();
      const auto values = p.at("values").get<std::vector<double>>();
      if (shape[0] != t.rows() || shape[1] != t.cols() || values.size() != t.size()) {
        throw ConfigError("parameter '" + name + "' has shape (" + std::to_string(shape[0]) + "x" +
                          std::to_string(shape[1]) + ") but the config implies " +
                          t.shape_string());
      }
      std::copy(values.begin(), values.end(), t.values().begin());
    }
    for (const std::string& name : ckpt.model.parameter_names()) {
      if (!seen.count(name)) throw ConfigError("checkpoint is missing parameter '" + name + "'");
    }
    return ckpt;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed checkpoint: ") + e.what());
  }
}

void save_checkpoint(const std::filesystem::path& path, const model::SynergyModel& model,
                     const TrainingMetadata& training) {
  const std::string text = checkpoint_to_string(model, training);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write checkpoint " + path.string());
  out << text;
  if (!out) throw Error("failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open checkpoint " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return checkpoint_from_string(ss.str());
}

}  // namespace egtsyn
