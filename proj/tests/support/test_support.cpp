// SPDX-License-Identifier: Apache-2.0
#include "test_support.hpp"

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <functional>
#include <map>
#include <numeric>
#include <set>

namespace egtsyn::test {

GeneratedSmiles random_smiles(Rng& rng, std::size_t max_atoms, std::size_t max_ring_closures) {
  static const char* const kSymbols[] = {"C", "C", "C", "C", "N", "O", "S", "F", "Cl", "Br"};
  const std::size_t n = 1 + rng.below(max_atoms);
  std::vector<std::string> symbol(n);
  std::vector<std::vector<std::size_t>> children(n);
  std::vector<std::size_t> parent(n, 0);
  std::vector<std::string> bond_to_parent(n);
  for (std::size_t i = 0; i < n; ++i) {
    symbol[i] = kSymbols[rng.below(std::size(kSymbols))];
    if (i == 0) continue;
    parent[i] = rng.below(i);
    children[parent[i]].push_back(i);
    const auto roll = rng.below(10);
    bond_to_parent[i] = roll == 0 ? "=" : roll == 1 ? "#" : "";
  }

  std::set<std::pair<std::size_t, std::size_t>> ring_edges;
  const std::size_t wanted = rng.below(max_ring_closures + 1);
  for (std::size_t attempt = 0; attempt < 20 && ring_edges.size() < wanted && n >= 3; ++attempt) {
    std::size_t u = rng.below(n), v = rng.below(n);
    if (u == v) continue;
    if (u > v) std::swap(u, v);
    if (parent[v] == u) continue;
    ring_edges.emplace(u, v);
  }

  std::vector<std::vector<std::size_t>> ring_partners(n);
  for (auto [u, v] : ring_edges) {
    ring_partners[u].push_back(v);
    ring_partners[v].push_back(u);
  }

  GeneratedSmiles out;
  out.atoms = n;
  out.bonds = (n - 1) + ring_edges.size();
  const bool benzene = rng.below(3) == 0;
  const bool counter_ion = rng.below(4) == 0;

  std::vector<bool> visited(n, false);
  std::map<std::pair<std::size_t, std::size_t>, int> open_digit;
  std::set<int> free_digits{1, 2, 3, 4, 5, 6, 7, 8};
  std::string& s = out.smiles;
  std::function<void(std::size_t)> emit = [&](std::size_t x) {
    visited[x] = true;
    s += symbol[x];
    for (std::size_t partner : ring_partners[x]) {
      const auto key = std::minmax(x, partner);
      auto it = open_digit.find(key);
      if (it != open_digit.end()) {
        s += std::to_string(it->second);
        free_digits.insert(it->second);
        open_digit.erase(it);
      } else {
        const int d = *free_digits.begin();
        free_digits.erase(free_digits.begin());
        open_digit[key] = d;
        s += std::to_string(d);
      }
    }
    if (x == 0 && benzene) s += "(c9ccccc9)";
    for (std::size_t k = 0; k < children[x].size(); ++k) {
      const std::size_t c = children[x][k];
      const bool last = k + 1 == children[x].size();
      if (!last) s += "(";
      s += bond_to_parent[c];
      emit(c);
      if (!last) s += ")";
    }
  };
  emit(0);
  if (benzene) {
    out.atoms += 6;
    out.bonds += 7;
    out.aromatic_atoms += 6;
  }
  if (counter_ion) {
    s += ".[Na+]";
    out.atoms += 1;
  }
  return out;
}

std::vector<std::size_t> random_permutation(Rng& rng, std::size_t n) {
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), 0);
  rng.shuffle(p);
  return p;
}

const std::vector<CorpusEntry>& curated_corpus() {
  static const std::vector<CorpusEntry> corpus{
      {"C", 1, 0, 0, 0},
      {"CC", 2, 1, 0, 0},
      {"O=C=O", 3, 2, 0, 0},
      {"C#N", 2, 1, 0, 0},
      {"c1ccccc1", 6, 6, 6, 6},
      {"C1CC1", 3, 3, 0, 3},
      {"C1CC1C", 4, 4, 0, 3},
      {"CC(=O)O", 4, 3, 0, 0},
      {"CC(=O)Oc1ccccc1C(=O)O", 13, 13, 6, 6},
      {"c1ccc2ccccc2c1", 10, 11, 10, 11},
      {"C1CCC2CCCCC2C1", 10, 11, 0, 11},
      {"c1ccncc1", 6, 6, 6, 6},
      {"o1cccc1", 5, 5, 5, 5},
      {"[NH4+]", 1, 0, 0, 0},
      {"[Na+].[Cl-]", 2, 0, 0, 0},
      {"F/C=C/F", 4, 3, 0, 0},
      {"CC(C)(C)C", 5, 4, 0, 0},
      {"C1CC2CCC1C2", 7, 8, 0, 8},
      {"CN1C=NC2=C1C(=O)N(C(=O)N2C)C", 14, 15, 0, 10},
      {"C%10CC%10", 3, 3, 0, 3},
  };
  return corpus;
}

const std::vector<MalformedEntry>& malformed_corpus() {
  static const std::vector<MalformedEntry> corpus{
      {"C(C", 1, "unclosed branch"},
      {"CC)", 2, "unopened branch"},
      {"C(=O", 1, "unclosed branch after bond"},
      {"((C))", 0, "branch before any atom"},
      {"C1CC", 1, "dangling ring digit"},
      {"c1ccccc1C2", 9, "dangling ring digit"},
      {"C$", 1, "bad symbol"},
      {"CC?C", 2, "bad symbol"},
  };
  return corpus;
}

std::vector<data::DrugRow> toy_drugs(std::size_t n) {
  static const char* const kSmiles[] = {
      "CCO",
      "CC(=O)O",
      "c1ccccc1O",
      "CCN(CC)CC",
      "OC(=O)c1ccccc1",
      "NC1CCCCC1",
      "CC(C)Cc1ccc(cc1)C(C)C(=O)O",
      "O=c1[nH]cc(F)c(=O)[nH]1",
      "ClCCN(CCCl)P1(=O)NCCCO1",
      "Cn1nnc2c(C(N)=O)ncn2c1=O",
  };
  std::vector<data::DrugRow> rows;
  for (std::size_t i = 0; i < n; ++i) {
    rows.push_back({"d" + std::to_string(i), kSmiles[i % std::size(kSmiles)]});
  }
  return rows;
}

data::DatasetBundle separable_bundle(std::size_t cell_width) {
  Rng rng(20240607);
  std::vector<data::CellLine> cells;
  for (const char* id : {"cellA", "cellB"}) {
    data::CellLine c{id, std::string("tissue_") + id, {}};
    for (std::size_t g = 0; g < cell_width; ++g) c.expression.push_back(rng.uniform(-1.0, 1.0));
    cells.push_back(std::move(c));
  }
  std::vector<data::SynergyRecord> records;
  std::size_t k = 0;
  for (std::size_t a = 0; a < 8 && records.size() < 32; ++a) {
    for (std::size_t b = a + 1; b < 8 && records.size() < 32; ++b, ++k) {
      for (std::size_t c = 0; c < 2; ++c) {
        const bool positive = (k % 2 == 0) != (c == 1);
        records.push_back({"d" + std::to_string(a), "d" + std::to_string(b), cells[c].id,
                           positive ? 25.0 : -15.0, std::nullopt});
      }
    }
  }
  return data::make_bundle(toy_drugs(8), std::move(cells), std::move(records));
}

data::DatasetBundle random_bundle(Rng& rng, std::size_t min_labeled) {
  while (true) {
    const std::size_t n_drugs = 3 + rng.below(6);
    const std::size_t n_cells = 2 + rng.below(5);
    const std::size_t n_tissues = 1 + rng.below(3);
    std::vector<data::CellLine> cells;
    for (std::size_t i = 0; i < n_cells; ++i) {
      cells.push_back({"c" + std::to_string(i), "t" + std::to_string(i % n_tissues),
                       {rng.uniform(), rng.uniform(), rng.uniform()}});
    }
    std::vector<data::SynergyRecord> records;
    for (std::size_t a = 0; a < n_drugs; ++a) {
      for (std::size_t b = a + 1; b < n_drugs; ++b) {
        for (std::size_t c = 0; c < n_cells; ++c) {
          if (rng.below(2) == 0) continue;
          std::string x = "d" + std::to_string(a), y = "d" + std::to_string(b);
          if (rng.below(2) == 0) std::swap(x, y);
          records.push_back({x, y, cells[c].id, rng.uniform(-20.0, 30.0), std::nullopt});
        }
      }
    }
    data::DatasetBundle bundle =
        data::make_bundle(toy_drugs(n_drugs), std::move(cells), std::move(records));
    if (bundle.labeled_indices().size() >= min_labeled) return bundle;
  }
}

TempDir::TempDir(const std::string& tag) {
  static std::atomic<int> counter{0};
  path_ = std::filesystem::temp_directory_path() /
          ("egtsyn-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  std::filesystem::remove_all(path_);
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

}  // namespace egtsyn::test
