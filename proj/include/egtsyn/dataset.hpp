// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "egtsyn/molgraph.hpp"
#include "egtsyn/smiles.hpp"

namespace egtsyn::data {

/// Loewe scores above this are synergistic (label 1).
inline constexpr double kPositiveThreshold = 10.0;
/// Loewe scores below this are antagonistic (label 0).
inline constexpr double kNegativeThreshold = 0.0;

struct DrugEntry {
  std::string id;
  std::string smiles;
  smiles::Molecule molecule;
  molgraph::DualGraph graph;
};

struct CellLine {
  std::string id;
  std::string tissue;
  std::vector<double> expression;
};

struct SynergyRecord {
  std::string drug_a;
  std::string drug_b;
  std::string cell_line;
  double loewe = 0.0;  // NaN when the score is missing
  std::optional<int> label;
};

struct DrugRow {
  std::string id;
  std::string smiles;
};

/// Drugs, cell lines and synergy records with every id resolved. Records
/// that could not be resolved are described in `rejects` and left out.
struct DatasetBundle {
  std::vector<DrugEntry> drugs;
  std::vector<CellLine> cells;
  std::vector<SynergyRecord> records;
  std::vector<std::string> rejects;

  const DrugEntry& drug(std::string_view id) const;
  const CellLine& cell(std::string_view id) const;
  std::optional<std::size_t> drug_index(std::string_view id) const;
  std::optional<std::size_t> cell_index(std::string_view id) const;
  std::size_t cell_width() const;
  /// Indices of records carrying a label, ascending.
  std::vector<std::size_t> labeled_indices() const;

  void reindex();

 private:
  std::unordered_map<std::string, std::size_t> drug_lookup_;
  std::unordered_map<std::string, std::size_t> cell_lookup_;
};

/// Label for one score: 1 above the positive threshold, 0 below the
/// negative threshold, empty inside the noisy band.
std::optional<int> label_for(double loewe);

struct LabelSummary {
  std::size_t positive = 0;
  std::size_t negative = 0;
  std::size_t excluded = 0;
};

/// Sets `label` on every record. Throws DataError when a score is missing.
LabelSummary apply_labels(std::vector<SynergyRecord>& records);

/// Builds a bundle from in-memory tables: SMILES are parsed and featurized,
/// unparsable drugs and records with unresolvable ids are rejected, labels
/// are applied. Duplicate unordered (drug, drug, cell) keys, mixed
/// expression widths and duplicate ids raise IngestionError.
DatasetBundle make_bundle(const std::vector<DrugRow>& drugs, std::vector<CellLine> cells,
                          std::vector<SynergyRecord> records);

/// Reads `drug_id,smiles`, `cell_id,tissue,g1..gD` and
/// `drug_a,drug_b,cell_line,loewe` files. Lines starting with '#' are
/// comments.
DatasetBundle load_bundle(const std::filesystem::path& drug_csv,
                          const std::filesystem::path& cell_csv,
                          const std::filesystem::path& synergy_csv);

std::vector<DrugRow> read_drug_table(const std::filesystem::path& path);
std::vector<CellLine> read_cell_table(const std::filesystem::path& path);
std::vector<SynergyRecord> read_synergy_table(const std::filesystem::path& path);

/// Unordered key "a|b" with a <= b.
std::string pair_key(std::string_view a, std::string_view b);

}  // namespace egtsyn::data
