// SPDX-License-Identifier: Apache-2.0
#include "cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "egtsyn/checkpoint.hpp"
#include "egtsyn/dataset.hpp"
#include "egtsyn/errors.hpp"
#include "egtsyn/manifest.hpp"
#include "egtsyn/metrics.hpp"
#include "egtsyn/splits.hpp"
#include "egtsyn/training.hpp"
#include "egtsyn/version.hpp"

namespace egtsyn::cli {

namespace fs = std::filesystem;

namespace {

struct UsageError : Error {
  using Error::Error;
};

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

// Appends `--key value` for every key=value line of the --config file whose
// flag is not already on the command line.
std::vector<std::string> merge_config(std::vector<std::string> args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty()) return args;
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file " + path);
  const std::vector<std::string> given = args;
  auto present = [&](const std::string& flag) {
    return std::any_of(given.begin(), given.end(), [&](const std::string& a) {
      return a == flag || a.rfind(flag + "=", 0) == 0;
    });
  };
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw UsageError(path + ":" + std::to_string(number) + ": expected key=value");
    }
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    const std::string flag = "--" + key;
    if (key.empty() || key == "config" || present(flag)) continue;
    if (value == "false") continue;
    args.push_back(flag);
    if (value == "true") continue;
    std::istringstream words(value);
    for (std::string w; words >> w;) args.push_back(w);
  }
  return args;
}

fs::path sibling(const fs::path& p, std::string_view suffix) {
  return p.parent_path() / (p.stem().string() + std::string(suffix));
}

RunManifest make_manifest(const CLI::App& sub, std::uint64_t seed,
                          const std::vector<std::string>& inputs) {
  RunManifest m;
  m.subcommand = sub.get_name();
  m.seed = seed;
  m.version = std::string(kVersion);
  for (const CLI::Option* opt : sub.get_options()) {
    const std::string name = opt->get_single_name();
    if (name == "help" || name == "h") continue;
    std::string value;
    if (opt->count() > 0) {
      for (const std::string& r : opt->results()) value += (value.empty() ? "" : " ") + r;
    } else {
      value = opt->get_default_str();
    }
    m.flags[name] = value;
  }
  for (const std::string& in : inputs) m.input_digests[in] = file_digest(in);
  return m;
}

data::DatasetBundle load_data(const std::vector<std::string>& files) {
  return data::load_bundle(files.at(0), files.at(1), files.at(2));
}

const data::Fold& pick_fold(const data::SplitPlan& plan, std::size_t k) {
  if (k >= plan.folds.size()) {
    throw UsageError("--fold " + std::to_string(k) + " is out of range; the plan has " +
                     std::to_string(plan.folds.size()) + " folds");
  }
  return plan.folds[k];
}

model::ModelConfig model_config(const std::string& preset, model::Variant variant,
                                std::size_t width, std::uint64_t seed, model::Pooling pooling,
                                double dropout) {
  model::ModelConfig c = preset == "tiny" ? model::tiny_config(variant, width, seed)
                                          : model::ModelConfig{};
  c.variant = variant;
  c.cell_input_dim = width;
  c.seed = seed;
  c.pooling = pooling;
  c.dropout_rate = dropout;
  c.validate();
  return c;
}

std::string safe_name(std::string id) {
  for (char& c : id) {
    if (c == '/' || c == '\\' || c == ':' || c == ' ') c = '_';
  }
  return id;
}

std::vector<std::string> variant_names() {
  std::vector<std::string> names;
  for (model::Variant v : model::all_variants()) names.emplace_back(model::variant_name(v));
  return names;
}

const std::vector<std::string> kProtocols{"kfold", "leave_drug", "leave_tissue",
                                          "leave_combination"};
const std::vector<std::string> kPoolings{"max", "sum", "mean"};
const std::vector<std::string> kPresets{"full", "tiny"};

// Shared model and training flags for train and ablate.
struct ModelFlags {
  std::string preset = "full";
  std::string pooling = "max";
  double dropout = 0.2;
  std::size_t epochs = 300;
  std::size_t batch_size = 128;
  double lr = 1e-4;
  double delta = 1e5;
  bool no_augment = false;

  void add_to(CLI::App* sub) {
    sub->add_option("--preset", preset, "Layer widths: full or tiny")->check(CLI::IsMember(kPresets));
    sub->add_option("--pooling", pooling, "Graph readout: max, sum or mean")
        ->check(CLI::IsMember(kPoolings));
    sub->add_option("--dropout", dropout, "Dropout rate")->check(CLI::Range(0.0, 0.99));
    sub->add_option("--epochs", epochs, "Training epochs");
    sub->add_option("--batch-size", batch_size, "Mini-batch size")->check(CLI::PositiveNumber);
    sub->add_option("--lr", lr, "Adam learning rate")->check(CLI::NonNegativeNumber);
    sub->add_option("--delta", delta, "Penalty scale; the L2 coefficient is 2/delta")
        ->check(CLI::PositiveNumber);
    sub->add_flag("--no-augment", no_augment, "Train on the given drug order only");
  }

  training::TrainOptions options(std::uint64_t seed) const {
    training::TrainOptions o;
    o.epochs = epochs;
    o.batch_size = batch_size;
    o.lr = lr;
    o.delta = delta;
    o.seed = seed;
    o.augment = !no_augment;
    return o;
  }
};

struct FaultGuard {
  explicit FaultGuard(testing::Fault f) { testing::set_fault(f); }
  ~FaultGuard() { testing::set_fault(testing::Fault::kNone); }
  FaultGuard(const FaultGuard&) = delete;
  FaultGuard& operator=(const FaultGuard&) = delete;
};

}  // namespace

GradCheckReport variant_gradcheck(model::Variant variant, std::uint64_t seed, double tolerance) {
  model::SynergyModel net(model::tiny_config(variant, kGradcheckCellWidth, seed));
  const auto ga = molgraph::build_dual_graph(smiles::parse(kGradcheckDrugA), "a");
  const auto gb = molgraph::build_dual_graph(smiles::parse(kGradcheckDrugB), "b");
  Rng rng(seed ^ 0x5851f42d4c957f2dULL);
  Tensor cells(2, kGradcheckCellWidth);
  for (double& v : cells.values()) v = rng.uniform(-1.0, 1.0);
  const model::PairInput batch[] = {{&ga, &gb, 0}, {&gb, &ga, 1}};
  const Tensor labels = Tensor::from_rows({{1.0}, {0.0}});
  const LossClosure loss = [&](Tape& tape) {
    Var probs = net.forward(tape, batch, cells, model::ForwardContext{});
    return add(bce_loss(probs, labels), net.penalty(tape, 10.0));
  };
  GradCheckOptions options;
  options.tolerance = tolerance;
  options.seed = seed;
  return grad_check(loss, net.named_parameters(), options);
}

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Drug-combination synergy classifier over dual molecular graphs", "egtsyn"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  std::string config_file, manifest_path;
  std::uint64_t seed = 0;
  std::vector<std::string> data_files;
  auto add_common = [&](CLI::App* sub) {
    sub->option_defaults()->always_capture_default();
    sub->add_option("--config", config_file, "Flat key=value file; explicit flags win");
    sub->add_option("--manifest", manifest_path, "Where to write the run manifest");
    sub->add_option("--seed", seed, "Seed for every random choice");
  };
  auto add_data = [&](CLI::App* sub) {
    sub->add_option("--data", data_files, "Drug, cell-line and synergy tables")
        ->expected(3)
        ->required();
  };

  // featurize
  std::string drugs_file, out_dir;
  CLI::App* featurize = app.add_subcommand("featurize", "Dump the dual graph of every drug");
  add_common(featurize);
  featurize->add_option("--drugs", drugs_file, "drug_id,smiles table")->required();
  featurize->add_option("--out", out_dir, "Output directory")->required();

  // split
  std::string protocol = "kfold", out_file;
  CLI::App* split = app.add_subcommand("split", "Write the fold plan of a split protocol");
  add_common(split);
  add_data(split);
  split->add_option("--split", protocol, "Protocol")->check(CLI::IsMember(kProtocols));
  split->add_option("--out", out_file, "Plan file (JSON)")->required();

  // train
  std::string variant = "EGTSyn";
  std::size_t fold = 0;
  std::size_t log_every = 0;
  ModelFlags mflags;
  CLI::App* train = app.add_subcommand("train", "Train one variant on one fold");
  add_common(train);
  add_data(train);
  train->add_option("--variant", variant, "EGTSyn, GTSyn, EGSyn or GSyn")
      ->check(CLI::IsMember(variant_names(), CLI::ignore_case));
  train->add_option("--split", protocol, "Protocol")->check(CLI::IsMember(kProtocols));
  train->add_option("--fold", fold, "Fold index (0-based)");
  mflags.add_to(train);
  train->add_option("--log-every", log_every, "Print every N epochs; 0 prints the last only");
  train->add_option("--out", out_file, "Checkpoint file")->required();

  // evaluate
  std::string ckpt_file, report_file, subset = "test";
  double threshold = 0.5;
  CLI::App* evaluate = app.add_subcommand("evaluate", "Score a checkpoint on one fold");
  add_common(evaluate);
  add_data(evaluate);
  evaluate->add_option("--ckpt", ckpt_file, "Checkpoint file")->required();
  evaluate->add_option("--split", protocol, "Protocol")->check(CLI::IsMember(kProtocols));
  evaluate->add_option("--fold", fold, "Fold index (0-based)");
  evaluate->add_option("--subset", subset, "test or train")
      ->check(CLI::IsMember(std::vector<std::string>{"test", "train"}));
  evaluate->add_option("--threshold", threshold, "Decision threshold")->check(CLI::Range(0.0, 1.0));
  evaluate->add_option("--report", report_file, "Report file (JSON); a .csv twin is written too")
      ->required();

  // ablate
  CLI::App* ablate = app.add_subcommand("ablate", "Train and score all four variants");
  add_common(ablate);
  add_data(ablate);
  ablate->add_option("--split", protocol, "Protocol")->check(CLI::IsMember(kProtocols));
  ModelFlags aflags;
  aflags.add_to(ablate);
  ablate->add_option("--out", out_dir, "Output directory")->required();

  // predict
  std::string drug_a, drug_b, cell_id, cells_file;
  CLI::App* predict = app.add_subcommand("predict", "Probability of synergy for one pair");
  add_common(predict);
  predict->add_option("--ckpt", ckpt_file, "Checkpoint file")->required();
  predict->add_option("--drug-a", drug_a, "SMILES of the first drug")->required();
  predict->add_option("--drug-b", drug_b, "SMILES of the second drug")->required();
  predict->add_option("--cell-id", cell_id, "Cell line id")->required();
  predict->add_option("--cells", cells_file, "cell_id,tissue,g1..gD table")->required();

  // gradcheck
  double tolerance = 1e-4;
  std::string fault = "none";
  CLI::App* gradcheck = app.add_subcommand("gradcheck", "Finite-difference check of a variant");
  add_common(gradcheck);
  gradcheck->add_option("--variant", variant, "EGTSyn, GTSyn, EGSyn or GSyn")
      ->check(CLI::IsMember(variant_names(), CLI::ignore_case));
  gradcheck->add_option("--tolerance", tolerance, "Relative error bound")
      ->check(CLI::PositiveNumber);
  gradcheck->add_option("--fault", fault, "Inject a backward-pass fault")
      ->check(CLI::IsMember(std::vector<std::string>{"none", "relu", "layer_norm", "matmul"}))
      ->group("");

  try {
    std::vector<std::string> args = merge_config(raw_args);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  auto write_run_manifest = [&](const CLI::App* sub, const fs::path& fallback,
                                const std::vector<std::string>& inputs) {
    const fs::path path = manifest_path.empty() ? fallback : fs::path(manifest_path);
    if (path.empty()) return;
    write_manifest(path, make_manifest(*sub, seed, inputs));
  };

  try {
    if (featurize->parsed()) {
      write_run_manifest(featurize, fs::path(out_dir) / "manifest.json", {drugs_file});
      const auto rows = data::read_drug_table(drugs_file);
      std::string summary = "drug_id,n_atoms,n_bonds,dual_nodes\n";
      std::string rejects = "drug_id,error\n";
      std::size_t ok = 0, bad = 0;
      for (const auto& row : rows) {
        try {
          const smiles::Molecule mol = smiles::parse(row.smiles);
          const auto graph = molgraph::build_dual_graph(mol, row.id);
          write_file(fs::path(out_dir) / (safe_name(row.id) + ".graph.txt"),
                     molgraph::dump(graph, row.smiles));
          summary += row.id + "," + std::to_string(mol.atoms.size()) + "," +
                     std::to_string(mol.bonds.size()) + "," +
                     std::to_string(graph.atom_bond_graph.node_count()) + "\n";
          ++ok;
        } catch (const Error& e) {
          std::string what = e.what();
          std::replace(what.begin(), what.end(), ',', ';');
          rejects += row.id + "," + what + "\n";
          err << "reject " << row.id << ": " << e.what() << "\n";
          ++bad;
        }
      }
      write_file(fs::path(out_dir) / "summary.csv", summary);
      write_file(fs::path(out_dir) / "rejects.csv", rejects);
      out << "featurized " << ok << " drug(s), rejected " << bad << "\n";
      return bad == 0 ? kExitOk : kExitRuntime;
    }

    if (split->parsed()) {
      write_run_manifest(split, sibling(out_file, ".manifest.json"), data_files);
      const auto bundle = load_data(data_files);
      const auto plan = data::make_split(bundle, data::parse_protocol(protocol), seed);
      for (const auto& w : plan.warnings) err << "warning: " << w << "\n";
      const auto problems = data::audit_split(plan, bundle);
      if (!problems.empty()) throw ContractError("split audit failed: " + problems.front());
      write_file(out_file, data::plan_to_json(plan));
      for (const auto& f : plan.folds) {
        out << f.name << " train " << f.train.size() << " test " << f.test.size() << "\n";
      }
      return kExitOk;
    }

    if (train->parsed()) {
      const fs::path ckpt(out_file);
      write_run_manifest(train, sibling(ckpt, ".manifest.json"), data_files);
      const auto bundle = load_data(data_files);
      for (const auto& r : bundle.rejects) err << "reject " << r << "\n";
      const auto plan = data::make_split(bundle, data::parse_protocol(protocol), seed);
      const data::Fold& f = pick_fold(plan, fold);
      model::SynergyModel net(model_config(mflags.preset, model::parse_variant(variant),
                                           bundle.cell_width(), seed,
                                           model::parse_pooling(mflags.pooling), mflags.dropout));
      const auto result = training::train(
          net, bundle, f.train, f.test, mflags.options(seed), [&](const training::EpochStats& s) {
            if (log_every > 0 && s.epoch % log_every == 0) {
              out << "epoch " << s.epoch << " train_loss " << training::format_double(s.train_loss)
                  << " val_loss "
                  << (s.val_loss ? training::format_double(*s.val_loss) : std::string("-"))
                  << "\n";
            }
            return true;
          });
      write_file(sibling(ckpt, ".history.csv"), training::history_to_csv(result.history));
      save_checkpoint(ckpt, net,
                      TrainingMetadata{static_cast<int>(result.history.size()), result.final_loss()});
      out << "trained " << model::variant_name(net.config().variant) << " on " << f.name << " ("
          << f.train.size() << " records, " << net.parameter_count() << " parameters); final loss "
          << training::format_double(result.final_loss()) << "\n";
      return kExitOk;
    }

    if (evaluate->parsed()) {
      const fs::path report(report_file);
      std::vector<std::string> inputs = data_files;
      inputs.push_back(ckpt_file);
      write_run_manifest(evaluate, sibling(report, ".manifest.json"), inputs);
      const Checkpoint ckpt = load_checkpoint(ckpt_file);
      const auto bundle = load_data(data_files);
      training::check_compatible(ckpt.model.config(), bundle);
      const auto plan = data::make_split(bundle, data::parse_protocol(protocol), seed);
      const data::Fold& f = pick_fold(plan, fold);
      const auto& indices = subset == "train" ? f.train : f.test;
      const auto rep = training::evaluate(ckpt.model, bundle, indices, threshold);
      write_file(report, metrics::report_to_json(rep));
      write_file(sibling(report, ".csv"), metrics::report_to_csv(rep));
      out << metrics::report_to_csv(rep);
      return kExitOk;
    }

    if (ablate->parsed()) {
      const fs::path dir(out_dir);
      write_run_manifest(ablate, dir / "manifest.json", data_files);
      const auto bundle = load_data(data_files);
      const auto plan = data::make_split(bundle, data::parse_protocol(protocol), seed);
      const std::string plan_json = data::plan_to_json(plan);
      write_file(dir / "split.json", plan_json);
      const std::string plan_digest = fnv1a_hex(plan_json);

      const std::vector<std::string> columns{"roc_auc", "pr_auc", "acc", "bacc", "kappa"};
      std::string table = "variant";
      for (const auto& c : columns) table += "," + c;
      table += "\n";
      std::string params = "variant,parameters\n";
      std::string folds_csv = "variant,fold";
      for (const auto& c : columns) folds_csv += "," + c;
      folds_csv += "\n";
      auto cell = [](const std::optional<double>& v) {
        return v ? training::format_double(*v) : std::string("undefined");
      };

      for (model::Variant v : model::all_variants()) {
        const std::string name(model::variant_name(v));
        std::vector<std::vector<std::optional<double>>> per_metric(columns.size());
        std::size_t count = 0;
        for (const data::Fold& f : plan.folds) {
          model::SynergyModel net(model_config(aflags.preset, v, bundle.cell_width(), seed,
                                               model::parse_pooling(aflags.pooling),
                                               aflags.dropout));
          count = net.parameter_count();
          training::train(net, bundle, f.train, {}, aflags.options(seed));
          const auto rep = training::evaluate(net, bundle, f.test);
          const std::optional<double> vals[] = {rep.roc_auc, rep.pr_auc, rep.acc, rep.bacc,
                                                rep.kappa};
          folds_csv += name + "," + f.name;
          for (std::size_t m = 0; m < columns.size(); ++m) {
            per_metric[m].push_back(vals[m]);
            folds_csv += "," + cell(vals[m]);
          }
          folds_csv += "\n";
        }
        table += name;
        for (const auto& values : per_metric) {
          table += "," + metrics::format_aggregate(metrics::aggregate(values));
        }
        table += "\n";
        params += name + "," + std::to_string(count) + "\n";

        RunManifest vm = make_manifest(*ablate, seed, data_files);
        vm.flags["variant"] = name;
        vm.input_digests[(dir / "split.json").string()] = plan_digest;
        write_manifest(dir / (name + ".manifest.json"), vm);
        out << "finished " << name << "\n";
      }
      write_file(dir / "ablation.csv", table);
      write_file(dir / "parameters.csv", params);
      write_file(dir / "folds.csv", folds_csv);
      out << table;
      return kExitOk;
    }

    if (predict->parsed()) {
      write_run_manifest(predict, {}, {ckpt_file, cells_file});
      const Checkpoint ckpt = load_checkpoint(ckpt_file);
      const auto cells = data::read_cell_table(cells_file);
      auto it = std::find_if(cells.begin(), cells.end(),
                             [&](const data::CellLine& c) { return c.id == cell_id; });
      if (it == cells.end()) throw DataError("unknown cell line id '" + cell_id + "'");
      if (it->expression.size() != ckpt.model.config().cell_input_dim) {
        throw ConfigError("checkpoint expects " +
                          std::to_string(ckpt.model.config().cell_input_dim) +
                          " expression values but cell line '" + cell_id + "' has " +
                          std::to_string(it->expression.size()));
      }
      const auto ga = molgraph::build_dual_graph(smiles::parse(drug_a), "drug_a");
      const auto gb = molgraph::build_dual_graph(smiles::parse(drug_b), "drug_b");
      const double p = ckpt.model.predict_pair(ga, gb, it->expression);
      out << std::fixed << std::setprecision(8) << "probability " << p << "\n"
          << "label " << (p >= 0.5 ? 1 : 0) << "\n";
      return kExitOk;
    }

    if (gradcheck->parsed()) {
      write_run_manifest(gradcheck, {}, {});
      const model::Variant v = model::parse_variant(variant);
      testing::Fault f = testing::Fault::kNone;
      if (fault == "relu") f = testing::Fault::kReluBackward;
      if (fault == "layer_norm") f = testing::Fault::kLayerNormBackward;
      if (fault == "matmul") f = testing::Fault::kMatmulBackward;
      FaultGuard guard(f);
      const auto start = std::chrono::steady_clock::now();
      const GradCheckReport report = variant_gradcheck(v, seed, tolerance);
      const double seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      for (const auto& p : report.parameters) {
        out << p.name << " max_rel_error " << p.max_rel_error << " elements " << p.checked << "\n";
      }
      const ParameterCheck* worst = report.worst();
      if (report.passed) {
        out << "PASS " << model::variant_name(v) << " tolerance " << tolerance << " in "
            << seconds << " s\n";
        return kExitOk;
      }
      out << "FAIL " << model::variant_name(v) << ": worst parameter " << worst->name
          << " relative error " << worst->max_rel_error << " at element " << worst->worst_index
          << " (analytic " << worst->analytic << ", numeric " << worst->numeric << ")\n";
      return kExitRuntime;
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const NumericError& e) {
    err << "error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + (argc > 0 ? 1 : 0), argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace egtsyn::cli
