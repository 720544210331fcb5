// SPDX-License-Identifier: Apache-2.0
#include "egtsyn/smiles.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <map>
#include <numeric>

#include "egtsyn/errors.hpp"

namespace egtsyn::smiles {

namespace {

constexpr std::array<std::string_view, 118> kElements = {
    "H",  "He", "Li", "Be", "B",  "C",  "N",  "O",  "F",  "Ne", "Na", "Mg", "Al", "Si", "P",
    "S",  "Cl", "Ar", "K",  "Ca", "Sc", "Ti", "V",  "Cr", "Mn", "Fe", "Co", "Ni", "Cu", "Zn",
    "Ga", "Ge", "As", "Se", "Br", "Kr", "Rb", "Sr", "Y",  "Zr", "Nb", "Mo", "Tc", "Ru", "Rh",
    "Pd", "Ag", "Cd", "In", "Sn", "Sb", "Te", "I",  "Xe", "Cs", "Ba", "La", "Ce", "Pr", "Nd",
    "Pm", "Sm", "Eu", "Gd", "Tb", "Dy", "Ho", "Er", "Tm", "Yb", "Lu", "Hf", "Ta", "W",  "Re",
    "Os", "Ir", "Pt", "Au", "Hg", "Tl", "Pb", "Bi", "Po", "At", "Rn", "Fr", "Ra", "Ac", "Th",
    "Pa", "U",  "Np", "Pu", "Am", "Cm", "Bk", "Cf", "Es", "Fm", "Md", "No", "Lr", "Rf", "Db",
    "Sg", "Bh", "Hs", "Mt", "Ds", "Rg", "Cn", "Nh", "Fl", "Mc", "Lv", "Ts", "Og"};

// Lowercase symbols allowed for aromatic atoms inside brackets.
constexpr std::array<std::string_view, 8> kAromaticBracket = {"b", "c", "n", "o", "p", "s", "se",
                                                              "as"};

bool is_digit(char c) { return c >= '0' && c <= '9'; }

std::string capitalise(std::string_view s) {
  std::string out(s);
  if (!out.empty()) out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
  return out;
}

struct BondSpec {
  bool explicit_symbol = false;
  BondOrder order = BondOrder::kSingle;
  BondDirection direction = BondDirection::kNone;
  std::size_t offset = 0;

  bool same_as(const BondSpec& o) const { return order == o.order && direction == o.direction; }
};

BondSpec bond_from_symbol(char c, std::size_t offset) {
  BondSpec spec;
  spec.explicit_symbol = true;
  spec.offset = offset;
  switch (c) {
    case '-': break;
    case '=': spec.order = BondOrder::kDouble; break;
    case '#': spec.order = BondOrder::kTriple; break;
    case ':': spec.order = BondOrder::kAromatic; break;
    case '/': spec.direction = BondDirection::kUp; break;
    case '\\': spec.direction = BondDirection::kDown; break;
    default: throw ParseError(std::string("unknown bond symbol '") + c + "'", offset);
  }
  return spec;
}

Atom parse_bracket(std::string_view text, std::size_t offset) {
  // text includes the surrounding brackets.
  std::string_view body = text.substr(1, text.size() - 2);
  const std::size_t base = offset + 1;
  std::size_t i = 0;
  Atom atom;
  atom.bracket = true;
  while (i < body.size() && is_digit(body[i])) ++i;  // isotope, ignored
  if (i >= body.size()) throw ParseError("bracket atom without element symbol", base + i);

  std::string_view rest = body.substr(i);
  if (std::islower(static_cast<unsigned char>(rest[0]))) {
    std::string_view sym;
    for (std::string_view cand : {std::string_view("se"), std::string_view("as")}) {
      if (rest.substr(0, 2) == cand) sym = cand;
    }
    if (sym.empty()) sym = rest.substr(0, 1);
    if (std::find(kAromaticBracket.begin(), kAromaticBracket.end(), sym) ==
        kAromaticBracket.end()) {
      throw ParseError("unknown aromatic symbol '" + std::string(sym) + "'", base + i);
    }
    atom.element = capitalise(sym);
    atom.aromatic = true;
    i += sym.size();
  } else if (std::isupper(static_cast<unsigned char>(rest[0]))) {
    std::string two(rest.substr(0, std::min<std::size_t>(2, rest.size())));
    if (two.size() == 2 && std::islower(static_cast<unsigned char>(two[1])) &&
        is_known_element(two)) {
      atom.element = two;
      i += 2;
    } else if (is_known_element(rest.substr(0, 1))) {
      atom.element = std::string(rest.substr(0, 1));
      i += 1;
    } else {
      throw ParseError("unknown element '" + std::string(rest.substr(0, 1)) + "'", base + i);
    }
  } else {
    throw ParseError(std::string("unexpected character '") + rest[0] + "' in bracket atom",
                     base + i);
  }

  // Chirality is accepted and discarded.
  while (i < body.size() && body[i] == '@') ++i;
  for (std::string_view cls : {"TH", "AL", "SP", "TB", "OH"}) {
    if (body.substr(i, 2) == cls) {
      i += 2;
      while (i < body.size() && is_digit(body[i])) ++i;
      break;
    }
  }

  if (i < body.size() && body[i] == 'H') {
    ++i;
    int h = 1;
    if (i < body.size() && is_digit(body[i])) {
      h = 0;
      while (i < body.size() && is_digit(body[i])) h = h * 10 + (body[i++] - '0');
    }
    atom.explicit_h = h;
  } else {
    atom.explicit_h = 0;
  }

  if (i < body.size() && (body[i] == '+' || body[i] == '-')) {
    const char sign_char = body[i];
    const int sign = sign_char == '+' ? 1 : -1;
    ++i;
    int magnitude = 1;
    if (i < body.size() && is_digit(body[i])) {
      magnitude = 0;
      while (i < body.size() && is_digit(body[i])) magnitude = magnitude * 10 + (body[i++] - '0');
    } else {
      while (i < body.size() && body[i] == sign_char) {
        ++magnitude;
        ++i;
      }
    }
    atom.formal_charge = sign * magnitude;
  }

  if (i < body.size() && body[i] == ':') {
    ++i;
    if (i >= body.size() || !is_digit(body[i])) throw ParseError("atom class without digits", base + i);
    while (i < body.size() && is_digit(body[i])) ++i;
  }
  if (i != body.size()) {
    throw ParseError(std::string("unexpected character '") + body[i] + "' in bracket atom",
                     base + i);
  }
  return atom;
}

Atom organic_atom(std::string_view text) {
  Atom atom;
  if (std::islower(static_cast<unsigned char>(text[0]))) {
    atom.aromatic = true;
    atom.element = capitalise(text);
  } else {
    atom.element = std::string(text);
  }
  return atom;
}

std::vector<int> default_valences(std::string_view element) {
  if (element == "B") return {3};
  if (element == "C") return {4};
  if (element == "N") return {3};
  if (element == "O") return {2};
  if (element == "P") return {3, 5};
  if (element == "S") return {2, 4, 6};
  if (element == "F" || element == "Cl" || element == "Br" || element == "I") return {1};
  return {};
}

}  // namespace

bool is_known_element(std::string_view symbol) {
  return std::find(kElements.begin(), kElements.end(), symbol) != kElements.end();
}

std::vector<Token> tokenize(std::string_view smiles) {
  if (smiles.empty()) throw ParseError("empty SMILES string", 0);
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < smiles.size()) {
    const char c = smiles[i];
    const std::size_t start = i;
    switch (c) {
      case 'B':
      case 'C': {
        const char second = c == 'B' ? 'r' : 'l';
        std::size_t len = (i + 1 < smiles.size() && smiles[i + 1] == second) ? 2 : 1;
        tokens.push_back({TokenKind::kAtom, std::string(smiles.substr(i, len)), start});
        i += len;
        break;
      }
      case 'N': case 'O': case 'P': case 'S': case 'F': case 'I':
      case 'b': case 'c': case 'n': case 'o': case 'p': case 's':
        tokens.push_back({TokenKind::kAtom, std::string(1, c), start});
        ++i;
        break;
      case '[': {
        std::size_t close = smiles.find(']', i);
        if (close == std::string_view::npos) throw ParseError("unterminated bracket atom", start);
        tokens.push_back({TokenKind::kBracketAtom, std::string(smiles.substr(i, close - i + 1)),
                          start});
        i = close + 1;
        break;
      }
      case '-': case '=': case '#': case ':': case '/': case '\\':
        tokens.push_back({TokenKind::kBond, std::string(1, c), start});
        ++i;
        break;
      case '(':
        tokens.push_back({TokenKind::kBranchOpen, "(", start});
        ++i;
        break;
      case ')':
        tokens.push_back({TokenKind::kBranchClose, ")", start});
        ++i;
        break;
      case '.':
        tokens.push_back({TokenKind::kDot, ".", start});
        ++i;
        break;
      case '%': {
        if (i + 2 >= smiles.size() || !is_digit(smiles[i + 1]) || !is_digit(smiles[i + 2])) {
          throw ParseError("'%' must be followed by two digits", start);
        }
        Token t{TokenKind::kRingClosure, std::string(smiles.substr(i, 3)), start};
        t.ring_number = (smiles[i + 1] - '0') * 10 + (smiles[i + 2] - '0');
        tokens.push_back(std::move(t));
        i += 3;
        break;
      }
      default:
        if (is_digit(c)) {
          Token t{TokenKind::kRingClosure, std::string(1, c), start};
          t.ring_number = c - '0';
          tokens.push_back(std::move(t));
          ++i;
          break;
        }
        throw ParseError(std::string("unrecognized character '") + c + "'", start);
    }
  }
  return tokens;
}

Molecule parse(std::string_view smiles) {
  const std::vector<Token> tokens = tokenize(smiles);
  Molecule mol;
  mol.source = std::string(smiles);

  struct OpenRing {
    std::size_t atom;
    BondSpec spec;
    std::size_t offset;
  };
  struct OpenBranch {
    std::optional<std::size_t> atom;
    std::size_t offset;
    bool has_atom = false;
  };

  std::optional<std::size_t> prev;
  std::optional<BondSpec> pending;
  std::vector<OpenBranch> branches;
  std::map<int, OpenRing> rings;

  auto bond_exists = [&mol](std::size_t a, std::size_t b) {
    return std::any_of(mol.bonds.begin(), mol.bonds.end(), [a, b](const Bond& bd) {
      return (bd.a == a && bd.b == b) || (bd.a == b && bd.b == a);
    });
  };
  auto add_bond = [&](std::size_t a, std::size_t b, const std::optional<BondSpec>& spec,
                      std::size_t offset) {
    if (a == b) throw ParseError("ring closure bonds an atom to itself", offset);
    if (bond_exists(a, b)) throw ParseError("duplicate bond between the same atoms", offset);
    Bond bond;
    bond.a = a;
    bond.b = b;
    if (spec && spec->explicit_symbol) {
      bond.order = spec->order;
      bond.direction = spec->direction;
    } else if (mol.atoms[a].aromatic && mol.atoms[b].aromatic) {
      bond.order = BondOrder::kAromatic;
    }
    mol.bonds.push_back(bond);
  };

  for (const Token& tok : tokens) {
    switch (tok.kind) {
      case TokenKind::kAtom:
      case TokenKind::kBracketAtom: {
        Atom atom = tok.kind == TokenKind::kAtom ? organic_atom(tok.text)
                                                 : parse_bracket(tok.text, tok.offset);
        atom.index = mol.atoms.size();
        atom.source_order = atom.index;
        mol.atoms.push_back(std::move(atom));
        const std::size_t idx = mol.atoms.size() - 1;
        if (prev) add_bond(*prev, idx, pending, tok.offset);
        pending.reset();
        prev = idx;
        if (!branches.empty()) branches.back().has_atom = true;
        break;
      }
      case TokenKind::kBond:
        if (!prev) throw ParseError("bond symbol with no preceding atom", tok.offset);
        if (pending) throw ParseError("consecutive bond symbols", tok.offset);
        pending = bond_from_symbol(tok.text[0], tok.offset);
        break;
      case TokenKind::kBranchOpen:
        if (!prev) throw ParseError("branch with no preceding atom", tok.offset);
        if (pending) throw ParseError("bond symbol before '('", pending->offset);
        branches.push_back({prev, tok.offset, false});
        break;
      case TokenKind::kBranchClose:
        if (branches.empty()) throw ParseError("unbalanced ')'", tok.offset);
        if (pending) throw ParseError("bond symbol with no following atom", pending->offset);
        if (!branches.back().has_atom) throw ParseError("empty branch", tok.offset);
        prev = branches.back().atom;
        branches.pop_back();
        break;
      case TokenKind::kRingClosure: {
        if (!prev) throw ParseError("ring-closure digit with no preceding atom", tok.offset);
        auto it = rings.find(tok.ring_number);
        if (it == rings.end()) {
          BondSpec spec = pending.value_or(BondSpec{});
          rings.emplace(tok.ring_number, OpenRing{*prev, spec, tok.offset});
        } else {
          const OpenRing& open = it->second;
          std::optional<BondSpec> spec;
          if (pending && open.spec.explicit_symbol && !pending->same_as(open.spec)) {
            throw ParseError("conflicting bond symbols on ring closure " + tok.text, tok.offset);
          }
          if (pending) {
            spec = pending;
          } else if (open.spec.explicit_symbol) {
            spec = open.spec;
          }
          add_bond(open.atom, *prev, spec, tok.offset);
          rings.erase(it);
        }
        pending.reset();
        break;
      }
      case TokenKind::kDot:
        if (pending) throw ParseError("bond symbol with no following atom", pending->offset);
        if (!prev) throw ParseError("'.' with no preceding atom", tok.offset);
        if (!branches.empty()) throw ParseError("'.' inside a branch", tok.offset);
        prev.reset();
        break;
    }
  }
  if (pending) throw ParseError("bond symbol with no following atom", pending->offset);
  if (!branches.empty()) throw ParseError("unbalanced '('", branches.back().offset);
  if (!rings.empty()) {
    const auto& [number, open] = *rings.begin();
    throw ParseError("unmatched ring-closure digit " + std::to_string(number), open.offset);
  }
  if (!prev && !mol.atoms.empty()) {
    throw ParseError("'.' with no following atom", smiles.size() - 1);
  }

  const std::vector<bool> ring = ring_membership(mol);
  for (std::size_t j = 0; j < mol.bonds.size(); ++j) mol.bonds[j].in_ring = ring[j];
  const std::vector<bool> conj = conjugation(mol);
  for (std::size_t j = 0; j < mol.bonds.size(); ++j) mol.bonds[j].conjugated = conj[j];
  return mol;
}

std::size_t Molecule::aromatic_atom_count() const {
  return static_cast<std::size_t>(
      std::count_if(atoms.begin(), atoms.end(), [](const Atom& a) { return a.aromatic; }));
}

std::size_t Molecule::ring_bond_count() const {
  return static_cast<std::size_t>(
      std::count_if(bonds.begin(), bonds.end(), [](const Bond& b) { return b.in_ring; }));
}

std::vector<std::vector<std::size_t>> Molecule::incident_bonds() const {
  std::vector<std::vector<std::size_t>> inc(atoms.size());
  for (std::size_t j = 0; j < bonds.size(); ++j) {
    inc[bonds[j].a].push_back(j);
    inc[bonds[j].b].push_back(j);
  }
  return inc;
}

std::vector<std::size_t> Molecule::components() const {
  std::vector<std::size_t> parent(atoms.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&parent](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const Bond& b : bonds) {
    std::size_t ra = find(b.a), rb = find(b.b);
    if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
  }
  // Rank roots by (earliest source_order, lowest atom index).
  std::map<std::size_t, std::pair<std::size_t, std::size_t>> first;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    const std::pair<std::size_t, std::size_t> key{atoms[i].source_order, i};
    auto [it, inserted] = first.emplace(find(i), key);
    if (!inserted) it->second = std::min(it->second, key);
  }
  std::vector<std::pair<std::pair<std::size_t, std::size_t>, std::size_t>> order;
  for (const auto& [root, key] : first) order.push_back({key, root});
  std::sort(order.begin(), order.end());
  std::map<std::size_t, std::size_t> ids;
  for (std::size_t k = 0; k < order.size(); ++k) ids[order[k].second] = k;
  std::vector<std::size_t> comp(atoms.size());
  for (std::size_t i = 0; i < atoms.size(); ++i) comp[i] = ids[find(i)];
  return comp;
}

double bond_valence(BondOrder order) {
  switch (order) {
    case BondOrder::kSingle: return 1.0;
    case BondOrder::kDouble: return 2.0;
    case BondOrder::kTriple: return 3.0;
    case BondOrder::kAromatic: return 1.5;
  }
  return 1.0;
}

HydrogenCount hydrogens(const Molecule& mol, std::size_t atom_index) {
  if (atom_index >= mol.atoms.size()) {
    throw ContractError("atom index " + std::to_string(atom_index) + " out of range");
  }
  const Atom& atom = mol.atoms[atom_index];
  if (atom.explicit_h) return {*atom.explicit_h, false};

  double total = 0.0;
  for (const Bond& b : mol.bonds) {
    if (b.a == atom_index || b.b == atom_index) total += bond_valence(b.order);
  }
  const int used = static_cast<int>(std::floor(total));
  const std::vector<int> valences = default_valences(atom.element);
  if (valences.empty()) return {0, false};
  // Aromatic heteroatoms (furan O, thiophene S) exceed their lowest valence
  // under 1.5-per-bond accounting without being over-valent.
  if (atom.aromatic) return {std::max(0, valences.front() - used), false};
  for (int v : valences) {
    if (v >= used) return {v - used, false};
  }
  return {0, true};
}

int implicit_hydrogens(const Molecule& mol, std::size_t atom_index) {
  return hydrogens(mol, atom_index).count;
}

std::vector<bool> ring_membership(const Molecule& mol) {
  const std::size_t n = mol.atoms.size();
  const auto inc = mol.incident_bonds();
  std::vector<bool> bridge(mol.bonds.size(), false);
  std::vector<int> disc(n, -1), low(n, 0);
  int timer = 0;

  struct Frame {
    std::size_t atom;
    std::size_t parent_bond;
    std::size_t next = 0;
  };
  constexpr std::size_t kNoBond = static_cast<std::size_t>(-1);
  for (std::size_t root = 0; root < n; ++root) {
    if (disc[root] != -1) continue;
    std::vector<Frame> stack{{root, kNoBond, 0}};
    disc[root] = low[root] = timer++;
    while (!stack.empty()) {
      Frame& f = stack.back();
      if (f.next < inc[f.atom].size()) {
        const std::size_t bond = inc[f.atom][f.next++];
        if (bond == f.parent_bond) continue;
        const std::size_t to = mol.bonds[bond].other(f.atom);
        if (disc[to] == -1) {
          disc[to] = low[to] = timer++;
          stack.push_back({to, bond, 0});
        } else {
          low[f.atom] = std::min(low[f.atom], disc[to]);
        }
      } else {
        const Frame done = f;
        stack.pop_back();
        if (!stack.empty()) {
          const std::size_t up = stack.back().atom;
          low[up] = std::min(low[up], low[done.atom]);
          if (low[done.atom] > disc[up]) bridge[done.parent_bond] = true;
        }
      }
    }
  }
  std::vector<bool> in_ring(mol.bonds.size());
  for (std::size_t j = 0; j < bridge.size(); ++j) in_ring[j] = !bridge[j];
  return in_ring;
}

std::vector<bool> conjugation(const Molecule& mol) {
  const auto inc = mol.incident_bonds();
  auto is_multiple = [](const Bond& b) { return b.order != BondOrder::kSingle; };
  // True if `atom` carries a multiple/aromatic bond other than `except`.
  auto has_other_multiple = [&](std::size_t atom, std::size_t except) {
    return std::any_of(inc[atom].begin(), inc[atom].end(), [&](std::size_t j) {
      return j != except && is_multiple(mol.bonds[j]);
    });
  };

  std::vector<bool> conj(mol.bonds.size(), false);
  for (std::size_t j = 0; j < mol.bonds.size(); ++j) {
    const Bond& b = mol.bonds[j];
    if (b.order == BondOrder::kAromatic) {
      conj[j] = true;
    } else if (b.order == BondOrder::kSingle) {
      conj[j] = has_other_multiple(b.a, j) && has_other_multiple(b.b, j);
    }
  }
  for (std::size_t j = 0; j < mol.bonds.size(); ++j) {
    const Bond& b = mol.bonds[j];
    if (b.order != BondOrder::kDouble && b.order != BondOrder::kTriple) continue;
    for (std::size_t atom : {b.a, b.b}) {
      for (std::size_t k : inc[atom]) {
        if (k != j && mol.bonds[k].order == BondOrder::kSingle && conj[k]) conj[j] = true;
      }
    }
  }
  return conj;
}

Molecule permute(const Molecule& mol, const std::vector<std::size_t>& perm,
                 const std::vector<std::size_t>& bond_perm) {
  const std::size_t n = mol.atoms.size();
  if (perm.size() != n) throw ContractError("permute: permutation length mismatch");
  std::vector<bool> seen(n, false);
  for (std::size_t p : perm) {
    if (p >= n || seen[p]) throw ContractError("permute: not a permutation");
    seen[p] = true;
  }
  if (!bond_perm.empty() && bond_perm.size() != mol.bonds.size()) {
    throw ContractError("permute: bond permutation length mismatch");
  }
  Molecule out;
  out.source = mol.source;
  out.atoms.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.atoms[perm[i]] = mol.atoms[i];
    out.atoms[perm[i]].index = perm[i];
  }
  out.bonds.resize(mol.bonds.size());
  for (std::size_t j = 0; j < mol.bonds.size(); ++j) {
    Bond b = mol.bonds[j];
    b.a = perm[b.a];
    b.b = perm[b.b];
    out.bonds[bond_perm.empty() ? j : bond_perm[j]] = b;
  }
  return out;
}

}  // namespace egtsyn::smiles
