// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace egtsyn::smiles {

enum class TokenKind {
  kAtom,         // organic-subset atom, e.g. C, Cl, c
  kBracketAtom,  // [..] expression
  kBond,         // - = # : / '\'
  kBranchOpen,
  kBranchClose,
  kRingClosure,  // digit or %nn
  kDot,
};

struct Token {
  TokenKind kind;
  std::string text;
  std::size_t offset;
  int ring_number = -1;  // for kRingClosure
};

/// Splits a SMILES string into tokens. Throws ParseError with the byte offset
/// of the first character that cannot start a token.
std::vector<Token> tokenize(std::string_view smiles);

enum class BondOrder { kSingle, kDouble, kTriple, kAromatic };
enum class BondDirection { kNone, kUp, kDown };

struct Atom {
  std::string element;  // capitalised symbol, e.g. "C", "Cl", "Se"
  bool aromatic = false;
  int formal_charge = 0;
  std::optional<int> explicit_h;  // set for bracket atoms only
  bool bracket = false;
  std::size_t index = 0;
  std::size_t source_order = 0;  // position in the parsed string; kept by permute
};

struct Bond {
  std::size_t a = 0;
  std::size_t b = 0;
  BondOrder order = BondOrder::kSingle;
  BondDirection direction = BondDirection::kNone;
  bool in_ring = false;
  bool conjugated = false;

  std::size_t other(std::size_t atom) const { return atom == a ? b : a; }
};

struct Molecule {
  std::vector<Atom> atoms;
  std::vector<Bond> bonds;
  std::string source;

  std::size_t atom_count() const { return atoms.size(); }
  std::size_t bond_count() const { return bonds.size(); }
  std::size_t aromatic_atom_count() const;
  std::size_t ring_bond_count() const;
  /// Indices of bonds touching each atom, in bond order.
  std::vector<std::vector<std::size_t>> incident_bonds() const;
  /// Connected-component id per atom. Components are numbered by the
  /// earliest source_order among their atoms, so the numbering follows the
  /// written string and does not depend on atom indices.
  std::vector<std::size_t> components() const;
};

/// Parses SMILES into a heavy-atom graph. Ring membership and conjugation
/// flags are filled in before returning.
Molecule parse(std::string_view smiles);

/// Bond order contribution toward valence; aromatic counts 1.5.
double bond_valence(BondOrder order);

struct HydrogenCount {
  int count = 0;
  bool overvalent = false;
};

/// Hydrogens attached to atom `atom_index`: bracket atoms report their
/// explicit count, organic-subset atoms are filled to the smallest default
/// valence that accommodates their bonds.
HydrogenCount hydrogens(const Molecule& mol, std::size_t atom_index);
int implicit_hydrogens(const Molecule& mol, std::size_t atom_index);

/// Per-bond ring flags: a bond is in a ring iff it is not a bridge.
std::vector<bool> ring_membership(const Molecule& mol);

/// Per-bond conjugation flags: aromatic bonds; single bonds whose two
/// endpoints each carry another multiple or aromatic bond; multiple bonds
/// adjacent to such a single bond.
std::vector<bool> conjugation(const Molecule& mol);

/// Relabels atoms so that old atom i becomes new atom perm[i], and reorders
/// bonds by `bond_perm` the same way (empty keeps the bond order). Flags are
/// carried over unchanged.
Molecule permute(const Molecule& mol, const std::vector<std::size_t>& perm,
                 const std::vector<std::size_t>& bond_perm = {});

bool is_known_element(std::string_view symbol);

}  // namespace egtsyn::smiles
