// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <algorithm>

#include "egtsyn/errors.hpp"
#include "egtsyn/smiles.hpp"
#include "test_support.hpp"

namespace egtsyn::smiles {
namespace {

std::vector<TokenKind> kinds(const std::vector<Token>& tokens) {
  std::vector<TokenKind> out;
  for (const Token& t : tokens) out.push_back(t.kind);
  return out;
}

std::size_t error_offset(std::string_view s) {
  try {
    parse(s);
  } catch (const ParseError& e) {
    return e.offset();
  }
  ADD_FAILURE() << "accepted " << s;
  return SIZE_MAX;
}

TEST(Tokenize, Basics) {
  const auto cc = tokenize("CC");
  ASSERT_EQ(cc.size(), 2u);
  EXPECT_EQ(cc[1].offset, 1u);
  EXPECT_EQ(kinds(tokenize("C(Cl)Br")),
            (std::vector<TokenKind>{TokenKind::kAtom, TokenKind::kBranchOpen, TokenKind::kAtom,
                                    TokenKind::kBranchClose, TokenKind::kAtom}));
  EXPECT_EQ(tokenize("C(Cl)Br")[2].text, "Cl");
}

TEST(Tokenize, BracketsRingsAndBonds) {
  const auto t = tokenize("[NH4+]C%12=C/1.c");
  ASSERT_EQ(t.size(), 9u);
  EXPECT_EQ(t[0].kind, TokenKind::kBracketAtom);
  EXPECT_EQ(t[0].text, "[NH4+]");
  EXPECT_EQ(t[2].kind, TokenKind::kRingClosure);
  EXPECT_EQ(t[2].ring_number, 12);
  EXPECT_EQ(t[3].kind, TokenKind::kBond);
  EXPECT_EQ(t[5].text, "/");
  EXPECT_EQ(t[6].ring_number, 1);
  EXPECT_EQ(t[7].kind, TokenKind::kDot);
  EXPECT_EQ(t[8].kind, TokenKind::kAtom);
}

TEST(Tokenize, LexicalErrorsCarryOffsets) {
  try {
    tokenize("C$");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.offset(), 1u);
    EXPECT_NE(std::string(e.what()).find("offset 1"), std::string::npos);
  }
  EXPECT_THROW(tokenize("C[NH4"), ParseError);
  EXPECT_THROW(tokenize("C%1"), ParseError);
}

TEST(Parse, SmallMolecules) {
  const Molecule methane = parse("C");
  EXPECT_EQ(methane.atom_count(), 1u);
  EXPECT_EQ(methane.bond_count(), 0u);

  const Molecule co2 = parse("O=C=O");
  ASSERT_EQ(co2.bond_count(), 2u);
  for (const Bond& b : co2.bonds) EXPECT_EQ(b.order, BondOrder::kDouble);

  const Molecule benzene = parse("c1ccccc1");
  EXPECT_EQ(benzene.aromatic_atom_count(), 6u);
  ASSERT_EQ(benzene.bond_count(), 6u);
  for (const Bond& b : benzene.bonds) {
    EXPECT_EQ(b.order, BondOrder::kAromatic);
    EXPECT_TRUE(b.in_ring);
  }
}

TEST(Parse, CuratedCorpusCounts) {
  for (const auto& e : test::curated_corpus()) {
    SCOPED_TRACE(e.smiles);
    const Molecule m = parse(e.smiles);
    EXPECT_EQ(m.atom_count(), e.atoms);
    EXPECT_EQ(m.bond_count(), e.bonds);
    EXPECT_EQ(m.aromatic_atom_count(), e.aromatic_atoms);
    EXPECT_EQ(m.ring_bond_count(), e.ring_bonds);
  }
}

TEST(Parse, MalformedCorpusOffsets) {
  for (const auto& e : test::malformed_corpus()) {
    SCOPED_TRACE(std::string(e.smiles) + " (" + e.defect + ")");
    EXPECT_EQ(error_offset(e.smiles), e.offset);
  }
}

TEST(Parse, MoreStructuralErrors) {
  EXPECT_EQ(error_offset("=C"), 0u);
  EXPECT_EQ(error_offset("C=#C"), 2u);
  EXPECT_EQ(error_offset("C()"), 2u);  // reported at the closing paren
  EXPECT_THROW(parse("C11"), ParseError);      // self-bond
  EXPECT_THROW(parse("C12CC12"), ParseError);  // duplicate bond
  EXPECT_THROW(parse("C=1CC#1"), ParseError);  // conflicting ring bond symbols
  EXPECT_THROW(parse(".C"), ParseError);
  EXPECT_THROW(parse("C..C"), ParseError);
  EXPECT_THROW(parse("[Xq]"), ParseError);
  EXPECT_THROW(parse(""), ParseError);
}

TEST(Parse, BracketAtomDetails) {
  const Molecule m = parse("[NH4+]");
  ASSERT_EQ(m.atom_count(), 1u);
  EXPECT_EQ(m.atoms[0].element, "N");
  EXPECT_EQ(m.atoms[0].formal_charge, 1);
  EXPECT_EQ(m.atoms[0].explicit_h, 4);
  const Molecule o = parse("[O-]C");
  EXPECT_EQ(o.atoms[0].formal_charge, -1);
  EXPECT_EQ(o.atoms[0].explicit_h, 0);
  const Molecule pyrrole = parse("c1cc[nH]c1");
  EXPECT_TRUE(pyrrole.atoms[3].aromatic);
  EXPECT_EQ(pyrrole.atoms[3].explicit_h, 1);
}

TEST(Parse, RingClosureBondSymbolAndDirections) {
  const Molecule m = parse("C=1CCC1");
  int doubles = 0;
  for (const Bond& b : m.bonds) doubles += b.order == BondOrder::kDouble;
  EXPECT_EQ(doubles, 1);
  const Molecule f = parse("F/C=C\\F");
  EXPECT_EQ(f.bonds[0].direction, BondDirection::kUp);
  EXPECT_EQ(f.bonds[1].direction, BondDirection::kNone);
  EXPECT_EQ(f.bonds[2].direction, BondDirection::kDown);
}

TEST(Parse, ComponentsFollowSourceOrder) {
  const Molecule m = parse("CC.[Na+].O");
  EXPECT_EQ(m.components(), (std::vector<std::size_t>{0, 0, 1, 2}));
  const Molecule p = permute(m, {3, 2, 1, 0});
  EXPECT_EQ(p.components(), (std::vector<std::size_t>{2, 1, 0, 0}));
}

TEST(Hydrogens, DefaultValences) {
  EXPECT_EQ(implicit_hydrogens(parse("C"), 0), 4);
  EXPECT_EQ(implicit_hydrogens(parse("O"), 0), 2);
  EXPECT_EQ(implicit_hydrogens(parse("[NH4+]"), 0), 4);
  EXPECT_EQ(implicit_hydrogens(parse("CC(=O)O"), 1), 0);
  EXPECT_EQ(implicit_hydrogens(parse("C#N"), 0), 1);
  EXPECT_EQ(implicit_hydrogens(parse("c1ccccc1"), 0), 1);
  EXPECT_EQ(implicit_hydrogens(parse("c1ccncc1"), 3), 0);
  EXPECT_EQ(implicit_hydrogens(parse("o1cccc1"), 0), 0);
  // Sulfur steps to its next default valence once the lower one is exceeded.
  EXPECT_EQ(implicit_hydrogens(parse("CS(=O)C"), 1), 0);
  EXPECT_EQ(implicit_hydrogens(parse("CP(C)(C)(C)C"), 1), 0);
}

TEST(Hydrogens, OvervalentFlagged) {
  const HydrogenCount h = hydrogens(parse("FC(F)(F)(F)F"), 1);
  EXPECT_EQ(h.count, 0);
  EXPECT_TRUE(h.overvalent);
  EXPECT_FALSE(hydrogens(parse("CC"), 0).overvalent);
}

TEST(RingMembership, BridgesAreNotRingBonds) {
  EXPECT_EQ(ring_membership(parse("CC")), std::vector<bool>{false});
  EXPECT_EQ(ring_membership(parse("C1CC1")), (std::vector<bool>{true, true, true}));
  const auto flags = ring_membership(parse("C1CC1C"));
  EXPECT_EQ(std::count(flags.begin(), flags.end(), true), 3);
  // Two rings joined by a single bridge bond.
  const auto biphenyl = ring_membership(parse("c1ccccc1-c1ccccc1"));
  EXPECT_EQ(std::count(biphenyl.begin(), biphenyl.end(), false), 1);
}

TEST(Conjugation, Rules) {
  EXPECT_EQ(conjugation(parse("CC")), std::vector<bool>{false});
  for (bool f : conjugation(parse("c1ccccc1"))) EXPECT_TRUE(f);
  EXPECT_EQ(conjugation(parse("C=CC=C")), (std::vector<bool>{true, true, true}));
  EXPECT_EQ(conjugation(parse("C=CCC=C")), (std::vector<bool>{false, false, false, false}));
  const auto acrolein = conjugation(parse("C=CC=O"));
  EXPECT_TRUE(acrolein[1]);
}

TEST(Permute, PreservesStructure) {
  const Molecule m = parse("CC(=O)Oc1ccccc1");
  Rng rng(3);
  const auto perm = test::random_permutation(rng, m.atom_count());
  const Molecule p = permute(m, perm);
  ASSERT_EQ(p.bond_count(), m.bond_count());
  for (std::size_t j = 0; j < m.bond_count(); ++j) {
    EXPECT_EQ(p.bonds[j].a, perm[m.bonds[j].a]);
    EXPECT_EQ(p.bonds[j].order, m.bonds[j].order);
    EXPECT_EQ(p.bonds[j].in_ring, m.bonds[j].in_ring);
  }
  for (std::size_t i = 0; i < m.atom_count(); ++i) {
    EXPECT_EQ(p.atoms[perm[i]].element, m.atoms[i].element);
    EXPECT_EQ(implicit_hydrogens(p, perm[i]), implicit_hydrogens(m, i));
  }
  EXPECT_EQ(ring_membership(p), ring_membership(m));
  EXPECT_THROW(permute(m, {0, 0}), ContractError);
}

TEST(Parse, GeneratedMoleculesMatchGeneratorCounts) {
  Rng rng(77);
  for (int i = 0; i < 300; ++i) {
    const auto gen = test::random_smiles(rng, 15, 3);
    SCOPED_TRACE(gen.smiles);
    const Molecule m = parse(gen.smiles);
    EXPECT_EQ(m.atom_count(), gen.atoms);
    EXPECT_EQ(m.bond_count(), gen.bonds);
    EXPECT_EQ(m.aromatic_atom_count(), gen.aromatic_atoms);
  }
}

TEST(Elements, KnownSymbols) {
  EXPECT_TRUE(is_known_element("C"));
  EXPECT_TRUE(is_known_element("Og"));
  EXPECT_FALSE(is_known_element("Xq"));
}

}  // namespace
}  // namespace egtsyn::smiles
