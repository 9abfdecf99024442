//
// carat - carbon attribute tracing for chemical value chains
// SPDX-License-Identifier: Apache-2.0
//

#include "carat/smiles.h"

#include <algorithm>
#include <array>
#include <cctype>
#include <map>
#include <span>
#include <string>
#include <utility>

#include <fmt/format.h>

#include "carat/elements.h"

namespace carat {
namespace {

constexpr std::size_t kNoAtom = static_cast<std::size_t>(-1);

std::span<const int> organic_valences(std::string_view element) {
  static constexpr std::array<int, 1> kB { 3 }, kC { 4 }, kN { 3 }, kO { 2 },
      kHalogen { 1 };
  static constexpr std::array<int, 2> kP { 3, 5 };
  static constexpr std::array<int, 3> kS { 2, 4, 6 };

  if (element == "B")
    return kB;
  if (element == "C")
    return kC;
  if (element == "N")
    return kN;
  if (element == "O")
    return kO;
  if (element == "P")
    return kP;
  if (element == "S")
    return kS;
  if (element == "F" || element == "Cl" || element == "Br" || element == "I")
    return kHalogen;
  return {};
}

bool aromatic_capable(std::string_view element) {
  return element == "B" || element == "C" || element == "N" || element == "O"
         || element == "P" || element == "S";
}

// Implicit hydrogen count for an organic-subset atom. Aromatic atoms spend one
// extra valence unit on the delocalized system and use their lowest valence.
int organic_implicit_h(const Atom &atom, int bond_order_sum) {
  std::span<const int> valences = organic_valences(atom.element);
  if (valences.empty())
    return 0;

  if (atom.aromatic)
    return std::max(0, valences.front() - bond_order_sum - 1);

  for (int v: valences) {
    if (v >= bond_order_sum)
      return v - bond_order_sum;
  }
  return 0;
}

std::string charge_text(int charge) {
  if (charge == 0)
    return {};
  std::string sign = charge > 0 ? "+" : "-";
  int magnitude = std::abs(charge);
  return magnitude == 1 ? sign : sign + std::to_string(magnitude);
}

std::string element_text(const Atom &atom) {
  if (!atom.aromatic)
    return atom.element;
  std::string out = atom.element;
  out[0] = static_cast<char>(std::tolower(static_cast<unsigned char>(out[0])));
  return out;
}

std::string bracket_atom_text(const Atom &atom, bool with_map) {
  std::string out = "[";
  if (atom.isotope)
    out += std::to_string(*atom.isotope);
  out += element_text(atom);
  out += atom.chirality;
  if (atom.explicit_h == 1)
    out += "H";
  else if (atom.explicit_h > 1)
    out += "H" + std::to_string(atom.explicit_h);
  out += charge_text(atom.charge);
  if (with_map && atom.map_number)
    out += ":" + std::to_string(*atom.map_number);
  out += "]";
  return out;
}

std::string stripped_atom_text(const Atom &atom, int bond_order_sum) {
  bool organic = !organic_valences(atom.element).empty()
                 && (!atom.aromatic || aromatic_capable(atom.element));
  if (organic && atom.charge == 0 && !atom.isotope && atom.chirality.empty()
      && organic_implicit_h(atom, bond_order_sum) == atom.explicit_h) {
    return element_text(atom);
  }
  return bracket_atom_text(atom, false);
}

struct BondSymbol {
  char symbol;
  std::size_t offset;
};

std::pair<int, bool> bond_from_symbol(char symbol) {
  switch (symbol) {
  case '=':
    return { 2, false };
  case '#':
    return { 3, false };
  case '$':
    return { 4, false };
  case ':':
    return { 1, true };
  default:  // '-', '/', '\'
    return { 1, false };
  }
}

class Parser {
public:
  explicit Parser(std::string_view text): text_(text) { }

  void run();

  std::vector<Atom> atoms;
  std::vector<Bond> bonds;
  std::vector<Molecule::Token> tokens;
  int components = 0;

private:
  struct RingOpening {
    std::size_t atom;
    std::optional<BondSymbol> bond;
    std::size_t offset;
  };

  struct BranchOpening {
    std::size_t atom;
    std::size_t offset;
  };

  [[noreturn]] void fail(std::size_t offset, const std::string &what) const {
    throw SmilesError(SmilesError::Kind::kSyntax, offset, what);
  }

  void parse_bracket_atom();
  void parse_organic_atom();
  void parse_ring_bond();
  void add_atom(Atom atom, std::size_t begin);
  void connect(std::size_t from, std::size_t to, std::optional<BondSymbol> bond,
               std::size_t offset);

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t prev_ = kNoAtom;
  std::optional<BondSymbol> pending_bond_;
  std::vector<BranchOpening> branches_;
  std::map<int, RingOpening> rings_;
  bool component_has_atom_ = false;
};

void Parser::run() {
  if (text_.empty())
    fail(0, "empty SMILES");

  while (pos_ < text_.size()) {
    const char c = text_[pos_];
    if (c == '[') {
      parse_bracket_atom();
    } else if (c == '*') {
      throw SmilesError(SmilesError::Kind::kUnsupported, pos_,
                        "wildcard atoms are not supported");
    } else if (std::isalpha(static_cast<unsigned char>(c))) {
      parse_organic_atom();
    } else if (c == '-' || c == '=' || c == '#' || c == '$' || c == ':'
               || c == '/' || c == '\\') {
      if (prev_ == kNoAtom)
        fail(pos_, fmt::format("bond '{}' without a preceding atom", c));
      if (pending_bond_)
        fail(pos_, "consecutive bond symbols");
      pending_bond_ = BondSymbol { c, pos_ };
      tokens.push_back({ kNoAtom, std::string(1, c) });
      ++pos_;
    } else if (c == '(') {
      if (prev_ == kNoAtom)
        fail(pos_, "branch without a preceding atom");
      if (pending_bond_)
        fail(pos_, "bond symbol before branch");
      branches_.push_back({ prev_, pos_ });
      tokens.push_back({ kNoAtom, "(" });
      ++pos_;
    } else if (c == ')') {
      if (branches_.empty())
        fail(pos_, "unbalanced parenthesis");
      if (pending_bond_)
        fail(pending_bond_->offset, "dangling bond at end of branch");
      prev_ = branches_.back().atom;
      branches_.pop_back();
      tokens.push_back({ kNoAtom, ")" });
      ++pos_;
    } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '%') {
      parse_ring_bond();
    } else if (c == '.') {
      if (pending_bond_)
        fail(pending_bond_->offset, "dangling bond before '.'");
      if (!branches_.empty())
        fail(pos_, "'.' inside a branch");
      if (!component_has_atom_)
        fail(pos_, "empty component");
      prev_ = kNoAtom;
      ++components;
      component_has_atom_ = false;
      tokens.push_back({ kNoAtom, "." });
      ++pos_;
    } else {
      fail(pos_, fmt::format("unexpected character '{}'", c));
    }
  }

  if (pending_bond_)
    fail(pending_bond_->offset, "dangling bond at end of input");
  if (!branches_.empty())
    fail(branches_.back().offset, "unbalanced parenthesis");
  if (!rings_.empty())
    fail(rings_.begin()->second.offset,
         fmt::format("dangling ring bond {}", rings_.begin()->first));
  if (!component_has_atom_)
    fail(text_.size(), "empty component");
  ++components;
}

void Parser::add_atom(Atom atom, std::size_t begin) {
  atom.component = components;
  const std::size_t index = atoms.size();
  atoms.push_back(std::move(atom));
  tokens.push_back({ index, std::string(text_.substr(begin, pos_ - begin)) });
  if (prev_ != kNoAtom)
    connect(prev_, index, pending_bond_, begin);
  pending_bond_.reset();
  prev_ = index;
  component_has_atom_ = true;
}

void Parser::connect(std::size_t from, std::size_t to,
                     std::optional<BondSymbol> bond, std::size_t offset) {
  if (from == to)
    fail(offset, "atom bonded to itself");
  Bond b { from, to, 1, false };
  if (bond) {
    auto [order, aromatic] = bond_from_symbol(bond->symbol);
    b.order = order;
    b.aromatic = aromatic;
  } else if (atoms[from].aromatic && atoms[to].aromatic) {
    b.aromatic = true;
  }
  bonds.push_back(b);
}

void Parser::parse_organic_atom() {
  const std::size_t begin = pos_;
  const char c = text_[pos_];
  Atom atom;

  auto next_is = [&](char ch) {
    return pos_ + 1 < text_.size() && text_[pos_ + 1] == ch;
  };

  if (c == 'C' && next_is('l')) {
    atom.element = "Cl";
    pos_ += 2;
  } else if (c == 'B' && next_is('r')) {
    atom.element = "Br";
    pos_ += 2;
  } else if (c == 'B' || c == 'C' || c == 'N' || c == 'O' || c == 'P'
             || c == 'S' || c == 'F' || c == 'I') {
    atom.element = std::string(1, c);
    ++pos_;
  } else if (c == 'b' || c == 'c' || c == 'n' || c == 'o' || c == 'p'
             || c == 's') {
    atom.element = std::string(1, static_cast<char>(std::toupper(c)));
    atom.aromatic = true;
    ++pos_;
  } else {
    throw SmilesError(SmilesError::Kind::kUnknownElement, pos_,
                      fmt::format("'{}' is not an organic-subset atom", c));
  }
  add_atom(std::move(atom), begin);
}

void Parser::parse_bracket_atom() {
  const std::size_t begin = pos_;
  const std::size_t close = text_.find(']', begin);
  if (close == std::string_view::npos)
    fail(begin, "unbalanced bracket");
  const std::size_t open_next = text_.find('[', begin + 1);
  if (open_next != std::string_view::npos && open_next < close)
    fail(begin, "unbalanced bracket");

  std::size_t p = begin + 1;
  auto peek = [&](std::size_t k = 0) -> char {
    return p + k < close ? text_[p + k] : '\0';
  };
  auto read_number = [&]() {
    int value = 0;
    bool any = false;
    while (std::isdigit(static_cast<unsigned char>(peek()))) {
      value = value * 10 + (peek() - '0');
      ++p;
      any = true;
    }
    return any ? std::optional<int>(value) : std::nullopt;
  };

  Atom atom;
  atom.bracket = true;
  atom.isotope = read_number();

  if (peek() == '*') {
    throw SmilesError(SmilesError::Kind::kUnsupported, p,
                      "wildcard atoms are not supported");
  }

  const char first = peek();
  if (std::islower(static_cast<unsigned char>(first))) {
    std::string two { first, peek(1) };
    if (two == "se" || two == "as" || two == "te") {
      atom.element = { static_cast<char>(std::toupper(first)), peek(1) };
      p += 2;
    } else if (aromatic_capable(std::string(1, static_cast<char>(
                   std::toupper(first))))) {
      atom.element = std::string(1, static_cast<char>(std::toupper(first)));
      ++p;
    } else {
      throw SmilesError(SmilesError::Kind::kUnknownElement, p,
                        fmt::format("unknown aromatic element '{}'", first));
    }
    atom.aromatic = true;
  } else if (std::isupper(static_cast<unsigned char>(first))) {
    std::string two { first, peek(1) };
    if (std::islower(static_cast<unsigned char>(peek(1)))
        && find_element(two) != nullptr) {
      atom.element = two;
      p += 2;
    } else if (find_element(std::string(1, first)) != nullptr) {
      atom.element = std::string(1, first);
      ++p;
    } else {
      throw SmilesError(SmilesError::Kind::kUnknownElement, p,
                        fmt::format("unknown element '{}'", first));
    }
  } else {
    fail(p, "missing element symbol in bracket atom");
  }

  if (peek() == '@') {
    const std::size_t chiral_begin = p++;
    if (peek() == '@') {
      ++p;
    } else if (std::isupper(static_cast<unsigned char>(peek()))
               && std::isupper(static_cast<unsigned char>(peek(1)))) {
      std::string cls { peek(), peek(1) };
      if (cls == "TH" || cls == "AL" || cls == "SP" || cls == "TB"
          || cls == "OH" || cls == "SQ") {
        p += 2;
        read_number();
      }
    }
    atom.chirality = std::string(text_.substr(chiral_begin, p - chiral_begin));
  }

  if (peek() == 'H') {
    ++p;
    atom.explicit_h = read_number().value_or(1);
  }

  if (peek() == '+' || peek() == '-') {
    const char sign = peek();
    const int unit = sign == '+' ? 1 : -1;
    ++p;
    if (auto n = read_number()) {
      atom.charge = unit * *n;
    } else {
      int count = 1;
      while (peek() == sign) {
        ++count;
        ++p;
      }
      atom.charge = unit * count;
    }
  }

  if (peek() == ':') {
    const std::size_t map_offset = p++;
    auto n = read_number();
    if (!n)
      fail(map_offset, "missing atom map number");
    if (*n <= 0)
      fail(map_offset, "atom map numbers must be positive");
    atom.map_number = n;
  }

  if (p != close)
    fail(p, fmt::format("unexpected character '{}' in bracket atom", text_[p]));

  pos_ = close + 1;
  add_atom(std::move(atom), begin);
}

void Parser::parse_ring_bond() {
  const std::size_t begin = pos_;
  if (prev_ == kNoAtom)
    fail(begin, "ring bond without a preceding atom");

  int label = 0;
  if (text_[pos_] == '%') {
    if (pos_ + 2 >= text_.size()
        || !std::isdigit(static_cast<unsigned char>(text_[pos_ + 1]))
        || !std::isdigit(static_cast<unsigned char>(text_[pos_ + 2]))) {
      fail(begin, "'%' must be followed by two digits");
    }
    label = (text_[pos_ + 1] - '0') * 10 + (text_[pos_ + 2] - '0');
    pos_ += 3;
  } else {
    label = text_[pos_] - '0';
    ++pos_;
  }
  tokens.push_back({ kNoAtom, std::string(text_.substr(begin, pos_ - begin)) });

  auto it = rings_.find(label);
  if (it == rings_.end()) {
    rings_.emplace(label, RingOpening { prev_, pending_bond_, begin });
  } else {
    std::optional<BondSymbol> bond = pending_bond_;
    const auto &opening = it->second.bond;
    if (opening && bond && opening->symbol != bond->symbol)
      fail(begin, fmt::format("conflicting bond symbols for ring bond {}", label));
    if (!bond)
      bond = opening;
    connect(it->second.atom, prev_, bond, begin);
    rings_.erase(it);
  }
  pending_bond_.reset();
}

}  // namespace

SmilesError::SmilesError(Kind kind, std::size_t offset, const std::string &what)
    : Error(fmt::format("{} at offset {}", what, offset)), kind_(kind),
      offset_(offset), reason_(what) { }

ReactionError::ReactionError(const std::string &what, int role, int component,
                             std::size_t offset)
    : Error(what), role_(role), component_(component), offset_(offset) { }

ElementCounts count_elements(const std::vector<Atom> &atoms) {
  ElementCounts counts;
  int hydrogens = 0;
  for (const Atom &atom: atoms) {
    ++counts[atom.element];
    hydrogens += atom.total_h();
  }
  if (hydrogens > 0)
    counts["H"] += hydrogens;
  return counts;
}

Molecule parse_molecule(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  const auto last = text.find_last_not_of(" \t\r\n");
  std::string_view trimmed = first == std::string_view::npos
                                 ? std::string_view {}
                                 : text.substr(first, last - first + 1);

  Parser parser(trimmed);
  try {
    parser.run();
  } catch (const SmilesError &e) {
    if (first == 0 || first == std::string_view::npos)
      throw;
    throw SmilesError(e.kind(), e.offset() + first, e.reason());
  }

  Molecule mol;
  mol.text_ = std::string(trimmed);
  mol.atoms_ = std::move(parser.atoms);
  mol.bonds_ = std::move(parser.bonds);
  mol.tokens_ = std::move(parser.tokens);
  mol.components_ = parser.components;

  mol.bond_order_sums_.assign(mol.atoms_.size(), 0);
  for (const Bond &bond: mol.bonds_) {
    mol.bond_order_sums_[bond.begin] += bond.order;
    mol.bond_order_sums_[bond.end] += bond.order;
  }
  for (std::size_t i = 0; i < mol.atoms_.size(); ++i) {
    Atom &atom = mol.atoms_[i];
    if (!atom.bracket)
      atom.implicit_h = organic_implicit_h(atom, mol.bond_order_sums_[i]);
  }
  mol.counts_ = count_elements(mol.atoms_);
  return mol;
}

int Molecule::count(std::string_view element) const {
  auto it = counts_.find(element);
  return it == counts_.end() ? 0 : it->second;
}

int Molecule::net_charge() const {
  int charge = 0;
  for (const Atom &atom: atoms_)
    charge += atom.charge;
  return charge;
}

bool Molecule::has_map_numbers() const {
  return std::any_of(atoms_.begin(), atoms_.end(),
                     [](const Atom &a) { return a.map_number.has_value(); });
}

std::string Molecule::write(const SmilesWriteOptions &options) const {
  std::string out;
  for (const Token &token: tokens_) {
    if (token.atom == kNoAtom) {
      out += token.text;
      continue;
    }
    const Atom &atom = atoms_[token.atom];
    if (options.strip_maps && atom.bracket)
      out += stripped_atom_text(atom, bond_order_sums_[token.atom]);
    else
      out += token.text;
  }
  return out;
}

double molar_mass(const Molecule &molecule) {
  double mass = 0;
  int hydrogens = 0;
  for (const Atom &atom: molecule.atoms()) {
    // Isotope labels use the mass number as the nuclide mass.
    mass += atom.isotope ? static_cast<double>(*atom.isotope)
                         : atomic_weight(atom.element);
    hydrogens += atom.total_h();
  }
  return mass + hydrogens * atomic_weight("H");
}

Reaction parse_reaction(std::string_view text) {
  std::vector<std::size_t> separators;
  int depth = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '[')
      ++depth;
    else if (text[i] == ']')
      --depth;
    else if (text[i] == '>' && depth == 0)
      separators.push_back(i);
  }
  if (separators.size() != 2) {
    throw ReactionError(
        fmt::format("reaction SMILES needs exactly two '>' separators, found {}",
                    separators.size()),
        -1, -1, separators.size() > 2 ? separators[2] : text.size());
  }

  Reaction reaction;
  std::array<std::vector<Molecule> *, 3> sides { &reaction.reactants,
                                                 &reaction.reagents,
                                                 &reaction.products };
  std::array<std::size_t, 4> bounds { 0, separators[0] + 1, separators[1] + 1,
                                      text.size() + 1 };

  for (int role = 0; role < 3; ++role) {
    const std::size_t side_begin = bounds[role];
    const std::size_t side_end = bounds[role + 1] - 1;
    std::string_view side = text.substr(side_begin, side_end - side_begin);
    if (side.empty())
      continue;

    std::size_t start = 0;
    int component = 0;
    for (std::size_t i = 0; i <= side.size(); ++i) {
      if (i < side.size() && side[i] != '.')
        continue;
      // Dots inside brackets cannot occur in valid SMILES.
      std::string_view piece = side.substr(start, i - start);
      if (piece.empty()) {
        throw ReactionError("empty reaction component", role, component,
                            side_begin + start);
      }
      try {
        sides[role]->push_back(parse_molecule(piece));
      } catch (const SmilesError &e) {
        throw ReactionError(
            fmt::format("component {} of {}: {}", component,
                        role == 0   ? "reactants"
                        : role == 1 ? "reagents"
                                    : "products",
                        e.what()),
            role, component, side_begin + start + e.offset());
      }
      start = i + 1;
      ++component;
    }
  }

  if (reaction.reactants.empty() && reaction.products.empty())
    throw ReactionError("empty reactant and product sides", -1, -1, 0);
  if (reaction.reactants.empty())
    throw ReactionError("empty reactant side", 0, -1, 0);
  if (reaction.products.empty())
    throw ReactionError("empty product side", 2, -1, separators[1] + 1);

  auto collect_maps = [](const std::vector<Molecule> &mols) {
    std::map<int, int> seen;
    for (const Molecule &mol: mols)
      for (const Atom &atom: mol.atoms())
        if (atom.map_number)
          ++seen[*atom.map_number];
    return seen;
  };
  const auto reactant_maps = collect_maps(reaction.reactants);
  const auto product_maps = collect_maps(reaction.products);
  reaction.mapped = !reactant_maps.empty() || !product_maps.empty();

  for (const auto &[map, n]: reactant_maps)
    if (n > 1)
      reaction.diagnostics.push_back(
          fmt::format("duplicate map number {} on reactant side", map));
  for (const auto &[map, n]: product_maps) {
    if (n > 1)
      reaction.diagnostics.push_back(
          fmt::format("duplicate map number {} on product side", map));
    if (!reactant_maps.contains(map))
      reaction.diagnostics.push_back(
          fmt::format("product map number {} has no reactant partner", map));
  }
  return reaction;
}

std::string write_reaction(const Reaction &reaction,
                           const SmilesWriteOptions &options) {
  auto join = [&](const std::vector<Molecule> &mols) {
    std::string out;
    for (std::size_t i = 0; i < mols.size(); ++i) {
      if (i > 0)
        out += '.';
      out += mols[i].write(options);
    }
    return out;
  };
  return join(reaction.reactants) + ">" + join(reaction.reagents) + ">"
         + join(reaction.products);
}

CorrespondenceResult atom_correspondence(const Reaction &reaction,
                                         std::string_view element) {
  CorrespondenceResult result;

  std::map<int, std::vector<AtomRef>> by_map;
  for (std::size_t m = 0; m < reaction.reactants.size(); ++m) {
    const auto &atoms = reaction.reactants[m].atoms();
    for (std::size_t a = 0; a < atoms.size(); ++a)
      if (atoms[a].map_number)
        by_map[*atoms[a].map_number].push_back({ m, a });
  }

  auto partner_of = [&](const Atom &atom) -> std::optional<AtomRef> {
    if (!atom.map_number)
      return std::nullopt;
    auto it = by_map.find(*atom.map_number);
    if (it == by_map.end())
      return std::nullopt;
    if (it->second.size() > 1) {
      result.diagnostics.push_back(fmt::format(
          "map number {} is ambiguous on the reactant side", *atom.map_number));
      return std::nullopt;
    }
    return it->second.front();
  };
  auto reactant_atom = [&](AtomRef ref) -> const Atom & {
    return reaction.reactants[ref.molecule].atoms()[ref.atom];
  };

  const bool hydrogen = element == "H";
  for (std::size_t m = 0; m < reaction.products.size(); ++m) {
    const auto &atoms = reaction.products[m].atoms();
    for (std::size_t a = 0; a < atoms.size(); ++a) {
      const Atom &atom = atoms[a];
      const AtomRef self { m, a };

      if (atom.element == element) {
        auto partner = partner_of(atom);
        if (partner && reactant_atom(*partner).element == atom.element)
          result.matched.push_back({ self, *partner });
        else
          result.unattributed.push_back(self);
      }

      if (hydrogen && atom.total_h() > 0) {
        auto partner = partner_of(atom);
        int credited = 0;
        if (partner)
          credited = std::min(atom.total_h(), reactant_atom(*partner).total_h());
        for (int h = 0; h < credited; ++h)
          result.matched.push_back({ self, *partner });
        for (int h = credited; h < atom.total_h(); ++h)
          result.unattributed.push_back(self);
      }
    }
  }
  return result;
}

}  // namespace carat
