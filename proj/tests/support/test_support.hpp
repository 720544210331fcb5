// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "egtsyn/dataset.hpp"
#include "egtsyn/tensor.hpp"

namespace egtsyn::test {

/// A generated SMILES string with the atom and bond counts the generator
/// put into it, tracked independently of the parser.
struct GeneratedSmiles {
  std::string smiles;
  std::size_t atoms = 0;
  std::size_t bonds = 0;
  std::size_t aromatic_atoms = 0;
};

/// Random tree of organic-subset atoms with up to `max_ring_closures`
/// extra ring edges, an optional benzene branch and an optional
/// disconnected counter-ion.
GeneratedSmiles random_smiles(Rng& rng, std::size_t max_atoms = 12,
                              std::size_t max_ring_closures = 2);

/// Uniform random permutation of 0..n-1.
std::vector<std::size_t> random_permutation(Rng& rng, std::size_t n);

struct CorpusEntry {
  const char* smiles;
  std::size_t atoms;
  std::size_t bonds;
  std::size_t aromatic_atoms;
  std::size_t ring_bonds;
};

/// Hand-counted molecules.
const std::vector<CorpusEntry>& curated_corpus();

struct MalformedEntry {
  const char* smiles;
  std::size_t offset;  // expected error position
  const char* defect;
};

const std::vector<MalformedEntry>& malformed_corpus();

/// Small drug set with distinct structures, ids d0..d{n-1}.
std::vector<data::DrugRow> toy_drugs(std::size_t n);

/// 32 labeled records over 8 drugs and 2 cell lines. The label is a fixed
/// function of the unordered pair and the cell line, so the set is
/// separable by memorisation.
data::DatasetBundle separable_bundle(std::size_t cell_width = 16);

/// Random bundle with 3..8 drugs, 2..6 cell lines over 1..3 tissues and a
/// random subset of records; at least `min_labeled` records carry labels.
data::DatasetBundle random_bundle(Rng& rng, std::size_t min_labeled = 10);

/// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace egtsyn::test
