// SPDX-License-Identifier: Apache-2.0
#include "egtsyn/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "egtsyn/errors.hpp"

namespace egtsyn::data {

namespace {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;
};

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IngestionError("cannot open " + path.string());
  CsvTable table;
  std::string line;
  std::size_t number = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++number;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (!have_header) {
      table.header = split(t);
      have_header = true;
    } else {
      table.rows.push_back(split(t));
      table.line_numbers.push_back(number);
    }
  }
  if (!have_header) throw IngestionError(path.string() + " is empty");
  return table;
}

std::vector<std::size_t> require_columns(const CsvTable& table,
                                         std::initializer_list<std::string_view> names,
                                         const std::filesystem::path& path) {
  std::vector<std::size_t> idx;
  std::vector<std::string> missing;
  for (std::string_view name : names) {
    auto it = std::find(table.header.begin(), table.header.end(), name);
    if (it == table.header.end()) {
      missing.emplace_back(name);
    } else {
      idx.push_back(static_cast<std::size_t>(it - table.header.begin()));
    }
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
    throw IngestionError(path.string() + " is missing column(s): " + list);
  }
  return idx;
}

std::optional<double> parse_double(std::string_view text) {
  if (text.empty()) return std::nullopt;
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

std::string join(const std::vector<std::string>& items, std::size_t limit = 10) {
  std::string out;
  for (std::size_t i = 0; i < items.size() && i < limit; ++i) out += (i ? "; " : "") + items[i];
  if (items.size() > limit) out += "; ... (" + std::to_string(items.size() - limit) + " more)";
  return out;
}

}  // namespace

std::string pair_key(std::string_view a, std::string_view b) {
  return a <= b ? std::string(a) + "|" + std::string(b) : std::string(b) + "|" + std::string(a);
}

std::optional<int> label_for(double loewe) {
  if (std::isnan(loewe)) throw DataError("missing Loewe score");
  if (loewe > kPositiveThreshold) return 1;
  if (loewe < kNegativeThreshold) return 0;
  return std::nullopt;
}

LabelSummary apply_labels(std::vector<SynergyRecord>& records) {
  LabelSummary summary;
  for (SynergyRecord& r : records) {
    if (std::isnan(r.loewe)) {
      throw DataError("record " + r.drug_a + "," + r.drug_b + "," + r.cell_line +
                      " has no Loewe score");
    }
    r.label = label_for(r.loewe);
    if (!r.label) {
      ++summary.excluded;
    } else if (*r.label == 1) {
      ++summary.positive;
    } else {
      ++summary.negative;
    }
  }
  return summary;
}

void DatasetBundle::reindex() {
  drug_lookup_.clear();
  cell_lookup_.clear();
  for (std::size_t i = 0; i < drugs.size(); ++i) drug_lookup_.emplace(drugs[i].id, i);
  for (std::size_t i = 0; i < cells.size(); ++i) cell_lookup_.emplace(cells[i].id, i);
}

std::optional<std::size_t> DatasetBundle::drug_index(std::string_view id) const {
  auto it = drug_lookup_.find(std::string(id));
  if (it == drug_lookup_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> DatasetBundle::cell_index(std::string_view id) const {
  auto it = cell_lookup_.find(std::string(id));
  if (it == cell_lookup_.end()) return std::nullopt;
  return it->second;
}

const DrugEntry& DatasetBundle::drug(std::string_view id) const {
  auto i = drug_index(id);
  if (!i) throw DataError("unknown drug id '" + std::string(id) + "'");
  return drugs[*i];
}

const CellLine& DatasetBundle::cell(std::string_view id) const {
  auto i = cell_index(id);
  if (!i) throw DataError("unknown cell line id '" + std::string(id) + "'");
  return cells[*i];
}

std::size_t DatasetBundle::cell_width() const {
  return cells.empty() ? 0 : cells.front().expression.size();
}

std::vector<std::size_t> DatasetBundle::labeled_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].label) out.push_back(i);
  }
  return out;
}

DatasetBundle make_bundle(const std::vector<DrugRow>& drugs, std::vector<CellLine> cells,
                          std::vector<SynergyRecord> records) {
  DatasetBundle bundle;
  std::set<std::string> drug_ids;
  std::vector<std::string> duplicates;
  for (const DrugRow& row : drugs) {
    if (!drug_ids.insert(row.id).second) {
      duplicates.push_back("drug " + row.id);
      continue;
    }
    try {
      smiles::Molecule mol = smiles::parse(row.smiles);
      molgraph::DualGraph graph = molgraph::build_dual_graph(mol, row.id);
      bundle.drugs.push_back({row.id, row.smiles, std::move(mol), std::move(graph)});
    } catch (const Error& e) {
      bundle.rejects.push_back("drug " + row.id + ": " + e.what());
    }
  }
  std::set<std::string> cell_ids;
  for (const CellLine& c : cells) {
    if (!cell_ids.insert(c.id).second) duplicates.push_back("cell " + c.id);
  }
  if (!duplicates.empty()) throw IngestionError("duplicate ids: " + join(duplicates));
  if (!cells.empty()) {
    std::vector<std::string> bad_width;
    for (const CellLine& c : cells) {
      if (c.expression.size() != cells.front().expression.size()) bad_width.push_back(c.id);
    }
    if (!bad_width.empty()) {
      throw IngestionError("expression width differs from " +
                           std::to_string(cells.front().expression.size()) + " for cell(s): " +
                           join(bad_width));
    }
  }
  bundle.cells = std::move(cells);
  bundle.reindex();

  std::set<std::string> keys;
  std::vector<std::string> duplicate_keys;
  for (SynergyRecord& r : records) {
    std::vector<std::string> problems;
    if (!bundle.drug_index(r.drug_a)) problems.push_back("unknown drug '" + r.drug_a + "'");
    if (!bundle.drug_index(r.drug_b)) problems.push_back("unknown drug '" + r.drug_b + "'");
    if (!bundle.cell_index(r.cell_line)) problems.push_back("unknown cell '" + r.cell_line + "'");
    const std::string desc = r.drug_a + "," + r.drug_b + "," + r.cell_line;
    if (!problems.empty()) {
      bundle.rejects.push_back("record " + desc + ": " + join(problems));
      continue;
    }
    if (!keys.insert(pair_key(r.drug_a, r.drug_b) + "|" + r.cell_line).second) {
      duplicate_keys.push_back(desc);
      continue;
    }
    bundle.records.push_back(std::move(r));
  }
  if (!duplicate_keys.empty()) {
    throw IngestionError("duplicate unordered (drug, drug, cell) records: " + join(duplicate_keys));
  }
  apply_labels(bundle.records);
  return bundle;
}

std::vector<DrugRow> read_drug_table(const std::filesystem::path& path) {
  const CsvTable t = read_csv(path);
  const auto col = require_columns(t, {"drug_id", "smiles"}, path);
  std::vector<DrugRow> rows;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& r = t.rows[i];
    if (r.size() < t.header.size()) {
      throw IngestionError(path.string() + ":" + std::to_string(t.line_numbers[i]) +
                           ": expected " + std::to_string(t.header.size()) + " fields");
    }
    rows.push_back({r[col[0]], r[col[1]]});
  }
  return rows;
}

std::vector<CellLine> read_cell_table(const std::filesystem::path& path) {
  const CsvTable t = read_csv(path);
  const auto col = require_columns(t, {"cell_id", "tissue"}, path);
  if (col[0] != 0 || col[1] != 1 || t.header.size() < 3) {
    throw IngestionError(path.string() + ": header must be cell_id,tissue,g1,...,gD");
  }
  std::vector<CellLine> cells;
  std::vector<std::string> problems;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& r = t.rows[i];
    const std::string where = path.filename().string() + ":" + std::to_string(t.line_numbers[i]);
    if (r.size() != t.header.size()) {
      problems.push_back(where + " has " + std::to_string(r.size()) + " fields, expected " +
                         std::to_string(t.header.size()));
      continue;
    }
    CellLine cell{r[0], r[1], {}};
    for (std::size_t k = 2; k < r.size(); ++k) {
      auto v = parse_double(r[k]);
      if (!v) {
        problems.push_back(where + " column " + t.header[k] + " is not numeric");
        break;
      }
      cell.expression.push_back(*v);
    }
    cells.push_back(std::move(cell));
  }
  if (!problems.empty()) throw IngestionError(join(problems));
  if (cells.empty()) throw IngestionError(path.string() + " has no cell lines");
  return cells;
}

std::vector<SynergyRecord> read_synergy_table(const std::filesystem::path& path) {
  const CsvTable t = read_csv(path);
  const auto col = require_columns(t, {"drug_a", "drug_b", "cell_line", "loewe"}, path);
  std::vector<SynergyRecord> records;
  std::vector<std::string> problems;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& r = t.rows[i];
    const std::string where = path.filename().string() + ":" + std::to_string(t.line_numbers[i]);
    if (r.size() != t.header.size()) {
      problems.push_back(where + " has " + std::to_string(r.size()) + " fields");
      continue;
    }
    SynergyRecord rec{r[col[0]], r[col[1]], r[col[2]], std::numeric_limits<double>::quiet_NaN(), {}};
    if (!r[col[3]].empty()) {
      auto v = parse_double(r[col[3]]);
      if (!v) {
        problems.push_back(where + " loewe '" + r[col[3]] + "' is not numeric");
        continue;
      }
      rec.loewe = *v;
    }
    records.push_back(std::move(rec));
  }
  if (!problems.empty()) throw IngestionError(join(problems));
  if (records.empty()) throw IngestionError(path.string() + " has no records");
  return records;
}

DatasetBundle load_bundle(const std::filesystem::path& drug_csv,
                          const std::filesystem::path& cell_csv,
                          const std::filesystem::path& synergy_csv) {
  const std::vector<DrugRow> drugs = read_drug_table(drug_csv);
  if (drugs.empty()) throw IngestionError(drug_csv.string() + " has no drugs");
  return make_bundle(drugs, read_cell_table(cell_csv), read_synergy_table(synergy_csv));
}

}  // namespace egtsyn::data
