// SPDX-License-Identifier: Apache-2.0
#include "egtsyn/molgraph.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "egtsyn/errors.hpp"

namespace egtsyn::molgraph {

namespace {

constexpr std::array<std::string_view, kSymbolSlots> kAlphabet = {
    "C",  "N",  "O",  "S",  "F",  "Si", "P",  "Cl", "Br", "Mg", "Na", "Ca", "Fe", "As", "Al",
    "I",  "B",  "V",  "K",  "Tl", "Yb", "Sb", "Sn", "Ag", "Pd", "Co", "Se", "Ti", "Zn", "H",
    "Li", "Ge", "Cu", "Au", "Ni", "Cd", "In", "Mn", "Zr", "Cr", "Pt", "Hg", "Pb", "Unknown"};

std::size_t clamp_count(long value) {
  return static_cast<std::size_t>(std::clamp<long>(value, 0, kCountSlots - 1));
}

FeatureGraph finish(Tensor features, std::vector<NodeKind> kinds,
                    std::vector<std::pair<std::size_t, std::size_t>> edges) {
  const std::size_t n = kinds.size();
  Tensor adjacency(n, n);
  for (auto [i, j] : edges) {
    adjacency(i, j) = 1.0;
    adjacency(j, i) = 1.0;
  }
  FeatureGraph g;
  g.node_features = std::move(features);
  g.adjacency_norm = normalize_adjacency(adjacency);
  g.node_kind = std::move(kinds);
  g.edges = std::move(edges);
  return g;
}

void put_row(Tensor& t, std::size_t row, const FeatureVector& v) {
  std::copy(v.begin(), v.end(), &t(row, 0));
}

}  // namespace

const std::array<std::string_view, kSymbolSlots>& symbol_alphabet() { return kAlphabet; }

std::size_t symbol_slot(std::string_view element) {
  auto it = std::find(kAlphabet.begin(), kAlphabet.end() - 1, element);
  return static_cast<std::size_t>(it - kAlphabet.begin());
}

FeatureVector featurize_atom(const smiles::Molecule& mol, std::size_t atom_index) {
  if (atom_index >= mol.atoms.size()) {
    throw ContractError("featurize_atom: index " + std::to_string(atom_index) + " out of range");
  }
  const smiles::Atom& atom = mol.atoms[atom_index];
  long degree = 0;
  double bond_sum = 0.0;
  for (const smiles::Bond& b : mol.bonds) {
    if (b.a == atom_index || b.b == atom_index) {
      ++degree;
      bond_sum += smiles::bond_valence(b.order);
    }
  }
  const long h = smiles::implicit_hydrogens(mol, atom_index);
  const long valence = static_cast<long>(std::floor(bond_sum)) + h;

  FeatureVector v{};
  v[symbol_slot(atom.element)] = 1.0;
  v[kDegreeOffset + clamp_count(degree)] = 1.0;
  v[kValenceOffset + clamp_count(valence)] = 1.0;
  v[kHydrogenOffset + clamp_count(h)] = 1.0;
  v[kAromaticOffset] = atom.aromatic ? 1.0 : 0.0;
  return v;
}

FeatureVector featurize_bond(const smiles::Molecule& mol, std::size_t bond_index) {
  if (bond_index >= mol.bonds.size()) {
    throw ContractError("featurize_bond: index " + std::to_string(bond_index) + " out of range");
  }
  const smiles::Bond& b = mol.bonds[bond_index];
  FeatureVector v{};
  v[static_cast<std::size_t>(b.order)] = 1.0;
  v[kBondDirectionOffset + static_cast<std::size_t>(b.direction)] = 1.0;
  v[kBondConjugatedIndex] = b.conjugated ? 1.0 : 0.0;
  v[kBondAromaticIndex] = b.order == smiles::BondOrder::kAromatic ? 1.0 : 0.0;
  v[kBondRingIndex] = b.in_ring ? 1.0 : 0.0;
  // Parity of the owning component; the first component encodes as 0.
  v[kBondComponentIndex] = static_cast<double>(mol.components()[b.a] % 2);
  return v;
}

Tensor normalize_adjacency(const Tensor& adjacency) {
  const std::size_t n = adjacency.rows();
  if (adjacency.cols() != n) {
    throw DimensionError("normalize_adjacency: matrix must be square, got " +
                         adjacency.shape_string());
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (adjacency(i, i) != 0.0) throw ContractError("normalize_adjacency: nonzero diagonal");
    for (std::size_t j = i + 1; j < n; ++j) {
      if (adjacency(i, j) != adjacency(j, i)) {
        throw ContractError("normalize_adjacency: adjacency is not symmetric at (" +
                            std::to_string(i) + ", " + std::to_string(j) + ")");
      }
    }
  }
  std::vector<double> inv_sqrt_deg(n);
  for (std::size_t i = 0; i < n; ++i) {
    double deg = 1.0;
    for (std::size_t j = 0; j < n; ++j) deg += adjacency(i, j);
    inv_sqrt_deg[i] = 1.0 / std::sqrt(deg);
  }
  Tensor out(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double a = (i == j ? 1.0 : adjacency(i, j));
      if (a != 0.0) out(i, j) = a * inv_sqrt_deg[i] * inv_sqrt_deg[j];
    }
  }
  return out;
}

FeatureGraph build_atom_graph(const smiles::Molecule& mol) {
  const std::size_t n = mol.atoms.size();
  if (n == 0) throw DataError("build_atom_graph: molecule has no atoms");
  Tensor features(n, kFeatureWidth);
  for (std::size_t i = 0; i < n; ++i) put_row(features, i, featurize_atom(mol, i));
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (const smiles::Bond& b : mol.bonds) edges.emplace_back(std::min(b.a, b.b), std::max(b.a, b.b));
  return finish(std::move(features), std::vector<NodeKind>(n, NodeKind::kAtom), std::move(edges));
}

FeatureGraph build_atom_bond_graph(const smiles::Molecule& mol) {
  const std::size_t n = mol.atoms.size();
  const std::size_t m = mol.bonds.size();
  if (n == 0) throw DataError("build_atom_bond_graph: molecule has no atoms");
  Tensor features(n + m, kFeatureWidth);
  std::vector<NodeKind> kinds(n, NodeKind::kAtom);
  kinds.resize(n + m, NodeKind::kBond);
  for (std::size_t i = 0; i < n; ++i) put_row(features, i, featurize_atom(mol, i));
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t j = 0; j < m; ++j) {
    put_row(features, n + j, featurize_bond(mol, j));
    edges.emplace_back(mol.bonds[j].a, n + j);
    edges.emplace_back(mol.bonds[j].b, n + j);
  }
  return finish(std::move(features), std::move(kinds), std::move(edges));
}

DualGraph build_dual_graph(const smiles::Molecule& mol, std::string drug_id) {
  return DualGraph{build_atom_graph(mol), build_atom_bond_graph(mol), std::move(drug_id)};
}

std::string dump(const DualGraph& graph, std::string_view smiles) {
  std::ostringstream os;
  os << "drug_id " << graph.drug_id << "\n";
  os << "smiles " << smiles << "\n";
  auto write = [&os](std::string_view name, const FeatureGraph& g) {
    os << "graph " << name << " nodes " << g.node_count() << " edges " << g.edges.size() << "\n";
    for (std::size_t i = 0; i < g.node_count(); ++i) {
      os << "node " << i << ' ' << (g.node_kind[i] == NodeKind::kAtom ? "atom" : "bond");
      for (std::size_t k = 0; k < kFeatureWidth; ++k) {
        if (g.node_features(i, k) != 0.0) os << ' ' << k;
      }
      os << "\n";
    }
    for (auto [a, b] : g.edges) os << "edge " << a << ' ' << b << "\n";
  };
  write("atom", graph.atom_graph);
  write("atom_bond", graph.atom_bond_graph);
  return os.str();
}

}  // namespace egtsyn::molgraph
