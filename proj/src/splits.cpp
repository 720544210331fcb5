// SPDX-License-Identifier: Apache-2.0
#include "egtsyn/splits.hpp"

#include <algorithm>
#include <json.hpp>
#include <map>
#include <set>

#include "egtsyn/errors.hpp"

namespace egtsyn::data {

namespace {

// Fills train with every labeled record not in test.
void complete_fold(Fold& fold, const std::vector<std::size_t>& labeled) {
  std::sort(fold.test.begin(), fold.test.end());
  std::set_difference(labeled.begin(), labeled.end(), fold.test.begin(), fold.test.end(),
                      std::back_inserter(fold.train));
}

std::string fold_name(std::size_t i) { return "fold" + std::to_string(i); }

}  // namespace

std::string_view protocol_name(Protocol p) {
  switch (p) {
    case Protocol::kKFold: return "kfold";
    case Protocol::kLeaveDrug: return "leave_drug";
    case Protocol::kLeaveTissue: return "leave_tissue";
    case Protocol::kLeaveCombination: return "leave_combination";
  }
  return "?";
}

Protocol parse_protocol(std::string_view name) {
  for (Protocol p : {Protocol::kKFold, Protocol::kLeaveDrug, Protocol::kLeaveTissue,
                     Protocol::kLeaveCombination}) {
    if (protocol_name(p) == name) return p;
  }
  throw ConfigError("unknown split protocol '" + std::string(name) +
                    "' (expected kfold, leave_drug, leave_tissue or leave_combination)");
}

SplitPlan kfold_split(const DatasetBundle& bundle, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw ParameterError("kfold_split: k must be at least 2, got " + std::to_string(k));
  const std::vector<std::size_t> labeled = bundle.labeled_indices();
  if (labeled.size() < k) {
    throw ProtocolError("kfold_split: " + std::to_string(labeled.size()) +
                        " labeled records cannot fill " + std::to_string(k) + " folds");
  }
  std::vector<std::size_t> order = labeled;
  Rng rng(seed);
  rng.shuffle(order);
  SplitPlan plan{Protocol::kKFold, seed, std::vector<Fold>(k), {}};
  for (std::size_t i = 0; i < order.size(); ++i) plan.folds[i % k].test.push_back(order[i]);
  for (std::size_t f = 0; f < k; ++f) {
    plan.folds[f].name = fold_name(f);
    complete_fold(plan.folds[f], labeled);
  }
  return plan;
}

SplitPlan leave_drug_out_split(const DatasetBundle& bundle, std::uint64_t seed,
                               std::size_t folds) {
  const std::vector<std::size_t> labeled = bundle.labeled_indices();
  std::set<std::string> drug_set;
  for (std::size_t i : labeled) {
    drug_set.insert(bundle.records[i].drug_a);
    drug_set.insert(bundle.records[i].drug_b);
  }
  if (drug_set.size() < 2) {
    throw ProtocolError("leave_drug_out_split: needs at least 2 distinct drugs, found " +
                        std::to_string(drug_set.size()));
  }
  std::vector<std::string> drugs(drug_set.begin(), drug_set.end());
  Rng rng(seed);
  rng.shuffle(drugs);
  const std::size_t k = std::min(std::max<std::size_t>(folds, 2), drugs.size());
  SplitPlan plan{Protocol::kLeaveDrug, seed, std::vector<Fold>(k), {}};
  for (std::size_t d = 0; d < drugs.size(); ++d) plan.folds[d % k].held_out.push_back(drugs[d]);
  for (std::size_t f = 0; f < k; ++f) {
    Fold& fold = plan.folds[f];
    fold.name = fold_name(f);
    std::sort(fold.held_out.begin(), fold.held_out.end());
    const std::set<std::string> out(fold.held_out.begin(), fold.held_out.end());
    for (std::size_t i : labeled) {
      const SynergyRecord& r = bundle.records[i];
      if (out.count(r.drug_a) || out.count(r.drug_b)) fold.test.push_back(i);
    }
    complete_fold(fold, labeled);
  }
  return plan;
}

SplitPlan leave_tissue_out_split(const DatasetBundle& bundle) {
  std::set<std::string> tissues;
  for (const CellLine& c : bundle.cells) {
    if (c.tissue.empty()) throw DataError("cell line '" + c.id + "' has no tissue tag");
    tissues.insert(c.tissue);
  }
  const std::vector<std::size_t> labeled = bundle.labeled_indices();
  SplitPlan plan{Protocol::kLeaveTissue, 0, {}, {}};
  for (const std::string& tissue : tissues) {
    Fold fold;
    fold.name = tissue;
    fold.held_out = {tissue};
    for (std::size_t i : labeled) {
      if (bundle.cell(bundle.records[i].cell_line).tissue == tissue) fold.test.push_back(i);
    }
    if (fold.test.empty()) {
      plan.warnings.push_back("tissue '" + tissue + "' has no labeled records; fold skipped");
      continue;
    }
    complete_fold(fold, labeled);
    plan.folds.push_back(std::move(fold));
  }
  if (plan.folds.empty()) throw ProtocolError("leave_tissue_out_split: no tissue has labeled records");
  return plan;
}

SplitPlan leave_combination_out_split(const DatasetBundle& bundle, std::uint64_t seed,
                                      std::size_t folds) {
  const std::vector<std::size_t> labeled = bundle.labeled_indices();
  std::set<std::string> key_set;
  for (std::size_t i : labeled) {
    key_set.insert(pair_key(bundle.records[i].drug_a, bundle.records[i].drug_b));
  }
  if (key_set.size() < 2) {
    throw ProtocolError("leave_combination_out_split: needs at least 2 distinct drug pairs, found " +
                        std::to_string(key_set.size()));
  }
  std::vector<std::string> keys(key_set.begin(), key_set.end());
  Rng rng(seed);
  rng.shuffle(keys);
  const std::size_t k = std::min(std::max<std::size_t>(folds, 2), keys.size());
  SplitPlan plan{Protocol::kLeaveCombination, seed, std::vector<Fold>(k), {}};
  for (std::size_t p = 0; p < keys.size(); ++p) plan.folds[p % k].held_out.push_back(keys[p]);
  for (std::size_t f = 0; f < k; ++f) {
    Fold& fold = plan.folds[f];
    fold.name = fold_name(f);
    std::sort(fold.held_out.begin(), fold.held_out.end());
    const std::set<std::string> out(fold.held_out.begin(), fold.held_out.end());
    for (std::size_t i : labeled) {
      if (out.count(pair_key(bundle.records[i].drug_a, bundle.records[i].drug_b))) {
        fold.test.push_back(i);
      }
    }
    complete_fold(fold, labeled);
  }
  return plan;
}

SplitPlan make_split(const DatasetBundle& bundle, Protocol protocol, std::uint64_t seed) {
  switch (protocol) {
    case Protocol::kKFold: return kfold_split(bundle, kDefaultFolds, seed);
    case Protocol::kLeaveDrug: return leave_drug_out_split(bundle, seed);
    case Protocol::kLeaveTissue: return leave_tissue_out_split(bundle);
    case Protocol::kLeaveCombination: return leave_combination_out_split(bundle, seed);
  }
  throw ConfigError("unknown protocol");
}

std::vector<std::string> audit_split(const SplitPlan& plan, const DatasetBundle& bundle) {
  std::vector<std::string> problems;
  const std::vector<std::size_t> labeled = bundle.labeled_indices();
  const std::set<std::size_t> labeled_set(labeled.begin(), labeled.end());

  for (const Fold& fold : plan.folds) {
    const std::string where = "fold '" + fold.name + "': ";
    std::set<std::size_t> train(fold.train.begin(), fold.train.end());
    std::set<std::size_t> test(fold.test.begin(), fold.test.end());
    if (train.size() != fold.train.size() || test.size() != fold.test.size()) {
      problems.push_back(where + "duplicate indices");
    }
    if (test.empty()) problems.push_back(where + "empty test set");
    for (std::size_t i : fold.test) {
      if (train.count(i)) problems.push_back(where + "record " + std::to_string(i) + " in train and test");
    }
    for (std::size_t i : train) {
      if (!labeled_set.count(i)) problems.push_back(where + "unlabeled or invalid record " + std::to_string(i));
    }
    for (std::size_t i : test) {
      if (!labeled_set.count(i)) problems.push_back(where + "unlabeled or invalid record " + std::to_string(i));
    }
    if (train.size() + test.size() != labeled.size()) {
      problems.push_back(where + "train and test do not cover every labeled record");
    }
    if (!problems.empty()) continue;

    const std::set<std::string> held(fold.held_out.begin(), fold.held_out.end());
    auto touches = [&](std::size_t i) {
      const SynergyRecord& r = bundle.records[i];
      switch (plan.protocol) {
        case Protocol::kKFold: return false;
        case Protocol::kLeaveDrug: return held.count(r.drug_a) > 0 || held.count(r.drug_b) > 0;
        case Protocol::kLeaveTissue: return held.count(bundle.cell(r.cell_line).tissue) > 0;
        case Protocol::kLeaveCombination: return held.count(pair_key(r.drug_a, r.drug_b)) > 0;
      }
      return false;
    };
    if (plan.protocol == Protocol::kKFold) continue;
    if (held.empty()) problems.push_back(where + "nothing held out");
    for (std::size_t i : test) {
      if (!touches(i)) problems.push_back(where + "test record " + std::to_string(i) + " is not held out");
    }
    for (std::size_t i : train) {
      if (touches(i)) problems.push_back(where + "train record " + std::to_string(i) + " touches a held-out entity");
    }
  }

  if (plan.protocol == Protocol::kKFold && problems.empty()) {
    std::vector<std::size_t> all_test;
    std::size_t lo = SIZE_MAX, hi = 0;
    for (const Fold& fold : plan.folds) {
      all_test.insert(all_test.end(), fold.test.begin(), fold.test.end());
      lo = std::min(lo, fold.test.size());
      hi = std::max(hi, fold.test.size());
    }
    std::sort(all_test.begin(), all_test.end());
    if (all_test != labeled) problems.push_back("k-fold test sets do not partition the labeled records");
    if (hi - lo > 1) problems.push_back("k-fold test sizes differ by more than one");
  }
  return problems;
}

std::string plan_to_json(const SplitPlan& plan) {
  nlohmann::json folds = nlohmann::json::array();
  for (const Fold& f : plan.folds) {
    folds.push_back({{"name", f.name}, {"held_out", f.held_out}, {"train", f.train}, {"test", f.test}});
  }
  nlohmann::json doc{{"protocol", protocol_name(plan.protocol)},
                     {"seed", plan.seed},
                     {"warnings", plan.warnings},
                     {"folds", folds}};
  return doc.dump(1) + "\n";
}

SplitPlan plan_from_json(const std::string& text) {
  try {
    const auto doc = nlohmann::json::parse(text);
    SplitPlan plan;
    plan.protocol = parse_protocol(doc.at("protocol").get<std::string>());
    plan.seed = doc.at("seed").get<std::uint64_t>();
    plan.warnings = doc.at("warnings").get<std::vector<std::string>>();
    for (const auto& f : doc.at("folds")) {
      plan.folds.push_back({f.at("name").get<std::string>(),
                            f.at("train").get<std::vector<std::size_t>>(),
                            f.at("test").get<std::vector<std::size_t>>(),
                            f.at("held_out").get<std::vector<std::string>>()});
    }
    return plan;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed split plan: ") + e.what());
  }
}

}  // namespace egtsyn::data
