// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "egtsyn/dataset.hpp"

namespace egtsyn::data {

enum class Protocol { kKFold, kLeaveDrug, kLeaveTissue, kLeaveCombination };

std::string_view protocol_name(Protocol p);
/// Accepts kfold, leave_drug, leave_tissue, leave_combination.
Protocol parse_protocol(std::string_view name);

/// One train/test partition. Indices refer to `DatasetBundle::records`;
/// `held_out` names what the fold withholds (drug ids, a tissue, or
/// unordered pair keys), empty for k-fold.
struct Fold {
  std::string name;
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
  std::vector<std::string> held_out;
};

struct SplitPlan {
  Protocol protocol = Protocol::kKFold;
  std::uint64_t seed = 0;
  std::vector<Fold> folds;
  std::vector<std::string> warnings;
};

inline constexpr std::size_t kDefaultFolds = 5;

/// Seeded shuffle of the labeled records, dealt round-robin into k folds.
SplitPlan kfold_split(const DatasetBundle& bundle, std::size_t k = kDefaultFolds,
                      std::uint64_t seed = 0);
/// Drugs dealt into folds; a record is test iff it touches a held-out drug.
SplitPlan leave_drug_out_split(const DatasetBundle& bundle, std::uint64_t seed = 0,
                               std::size_t folds = kDefaultFolds);
/// One fold per tissue that has labeled records.
SplitPlan leave_tissue_out_split(const DatasetBundle& bundle);
/// Unordered drug pairs dealt into folds; all cell lines of a pair move together.
SplitPlan leave_combination_out_split(const DatasetBundle& bundle, std::uint64_t seed = 0,
                                      std::size_t folds = kDefaultFolds);

SplitPlan make_split(const DatasetBundle& bundle, Protocol protocol, std::uint64_t seed);

/// Checks train/test disjointness and the protocol's exclusion property.
/// Returns human-readable violations; empty means the plan is sound.
std::vector<std::string> audit_split(const SplitPlan& plan, const DatasetBundle& bundle);

std::string plan_to_json(const SplitPlan& plan);
SplitPlan plan_from_json(const std::string& text);

}  // namespace egtsyn::data
