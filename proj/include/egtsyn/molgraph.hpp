// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "egtsyn/smiles.hpp"
#include "egtsyn/tensor.hpp"

namespace egtsyn::molgraph {

inline constexpr std::size_t kFeatureWidth = 78;
inline constexpr std::size_t kSymbolSlots = 44;
inline constexpr std::size_t kCountSlots = 11;
inline constexpr std::size_t kBondInformative = 11;

// Atom feature layout: [symbol 44 | degree 11 | total valence 11 | H count 11 | aromatic 1].
inline constexpr std::size_t kDegreeOffset = kSymbolSlots;
inline constexpr std::size_t kValenceOffset = kDegreeOffset + kCountSlots;
inline constexpr std::size_t kHydrogenOffset = kValenceOffset + kCountSlots;
inline constexpr std::size_t kAromaticOffset = kHydrogenOffset + kCountSlots;

// Bond feature layout: [order 4 | direction 3 | conjugated | aromatic | ring | component].
inline constexpr std::size_t kBondDirectionOffset = 4;
inline constexpr std::size_t kBondConjugatedIndex = 7;
inline constexpr std::size_t kBondAromaticIndex = 8;
inline constexpr std::size_t kBondRingIndex = 9;
inline constexpr std::size_t kBondComponentIndex = 10;

/// Symbol alphabet; the last slot collects every symbol not listed.
const std::array<std::string_view, kSymbolSlots>& symbol_alphabet();
std::size_t symbol_slot(std::string_view element);

using FeatureVector = std::array<double, kFeatureWidth>;

FeatureVector featurize_atom(const smiles::Molecule& mol, std::size_t atom_index);
FeatureVector featurize_bond(const smiles::Molecule& mol, std::size_t bond_index);

enum class NodeKind { kAtom, kBond };

struct FeatureGraph {
  Tensor node_features;   // N x 78
  Tensor adjacency_norm;  // N x N
  std::vector<NodeKind> node_kind;
  std::vector<std::pair<std::size_t, std::size_t>> edges;  // undirected, i < j

  std::size_t node_count() const { return node_kind.size(); }
};

struct DualGraph {
  FeatureGraph atom_graph;
  FeatureGraph atom_bond_graph;
  std::string drug_id;
};

/// D^-1/2 (A + I) D^-1/2 with D the row sums of A + I. `adjacency` must be
/// symmetric with a zero diagonal.
Tensor normalize_adjacency(const Tensor& adjacency);

FeatureGraph build_atom_graph(const smiles::Molecule& mol);
FeatureGraph build_atom_bond_graph(const smiles::Molecule& mol);
DualGraph build_dual_graph(const smiles::Molecule& mol, std::string drug_id = {});

/// Plain-text dump of both graphs: node kinds, nonzero feature indices, and
/// edge lists. Used by the `featurize` command and golden-file tests.
std::string dump(const DualGraph& graph, std::string_view smiles);

}  // namespace egtsyn::molgraph
