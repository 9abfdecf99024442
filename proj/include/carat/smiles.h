//
// carat - carbon attribute tracing for chemical value chains
// SPDX-License-Identifier: Apache-2.0
//

#ifndef CARAT_SMILES_H_
#define CARAT_SMILES_H_

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "carat/error.h"

namespace carat {

using ElementCounts = std::map<std::string, int, std::less<>>;

struct Atom {
  std::string element;
  int charge = 0;
  std::optional<int> isotope;
  bool aromatic = false;
  // Written in brackets. Bracket atoms carry their hydrogens explicitly and
  // never receive implicit ones.
  bool bracket = false;
  int explicit_h = 0;
  int implicit_h = 0;
  std::optional<int> map_number;
  // Stereo descriptor as written ("@", "@@", "@TH1", ...). Ignored for counting.
  std::string chirality;
  // Index of the dot-separated component this atom belongs to.
  int component = 0;

  int total_h() const { return explicit_h + implicit_h; }
};

struct Bond {
  std::size_t begin;
  std::size_t end;
  int order;  // 1..4; aromatic bonds count as 1
  bool aromatic;
};

class SmilesError: public Error {
public:
  enum class Kind {
    kSyntax,
    kUnknownElement,
    kUnsupported,
  };

  SmilesError(Kind kind, std::size_t offset, const std::string &what);

  Kind kind() const { return kind_; }
  // Byte offset into the parsed text.
  std::size_t offset() const { return offset_; }
  const std::string &reason() const { return reason_; }

private:
  Kind kind_;
  std::size_t offset_;
  std::string reason_;
};

struct SmilesWriteOptions {
  // Drop ":n" atom classes; bracket atoms that become expressible in the
  // organic subset are written without brackets.
  bool strip_maps = false;
};

class Molecule {
public:
  const std::vector<Atom> &atoms() const { return atoms_; }
  const std::vector<Bond> &bonds() const { return bonds_; }
  const std::string &smiles_text() const { return text_; }
  const ElementCounts &element_counts() const { return counts_; }

  int count(std::string_view element) const;
  bool contains(std::string_view element) const { return count(element) > 0; }
  int component_count() const { return components_; }
  int net_charge() const;
  bool has_map_numbers() const;

  // Serializes in input atom order; no canonicalization.
  std::string write(const SmilesWriteOptions &options = {}) const;

  // Serialization pieces in input order.
  struct Token {
    // Atom index, or npos for verbatim text (bonds, branches, ring labels).
    std::size_t atom;
    std::string text;
  };

  friend Molecule parse_molecule(std::string_view text);

private:
  std::string text_;
  std::vector<Atom> atoms_;
  std::vector<Bond> bonds_;
  std::vector<Token> tokens_;
  std::vector<int> bond_order_sums_;
  ElementCounts counts_;
  int components_ = 0;
};

// Recounts elements (hydrogens included) from the atom list.
ElementCounts count_elements(const std::vector<Atom> &atoms);

// Daylight SMILES with atom classes. Throws SmilesError.
Molecule parse_molecule(std::string_view text);

// Sum of standard atomic weights in g/mol. Throws carat::Error for elements
// without a tabulated weight.
double molar_mass(const Molecule &molecule);

struct Reaction {
  std::vector<Molecule> reactants;
  std::vector<Molecule> reagents;
  std::vector<Molecule> products;
  bool mapped = false;
  // Duplicate map numbers, product maps missing from the reactant side.
  std::vector<std::string> diagnostics;
};

class ReactionError: public Error {
public:
  // Role 0/1/2 for reactants/reagents/products; component -1 when the error
  // is not specific to one molecule.
  ReactionError(const std::string &what, int role, int component,
                std::size_t offset);

  int role() const { return role_; }
  int component() const { return component_; }
  std::size_t offset() const { return offset_; }

private:
  int role_;
  int component_;
  std::size_t offset_;
};

// "reactants>reagents>products"; every dot-separated component becomes one
// Molecule. Throws ReactionError.
Reaction parse_reaction(std::string_view text);

std::string write_reaction(const Reaction &reaction,
                           const SmilesWriteOptions &options = {});

struct AtomRef {
  std::size_t molecule;
  std::size_t atom;

  bool operator==(const AtomRef &) const = default;
};

struct AtomCorrespondence {
  AtomRef product;
  AtomRef reactant;
};

struct CorrespondenceResult {
  std::vector<AtomCorrespondence> matched;
  std::vector<AtomRef> unattributed;
  std::vector<std::string> diagnostics;
};

// Pairs every product atom of `element` with the reactant atom carrying the
// same map number. For hydrogen, attached hydrogens follow their heavy atom:
// up to min(product H, partner H) hydrogens are credited to the partner and
// the remainder is unattributed. One entry is emitted per hydrogen.
CorrespondenceResult atom_correspondence(const Reaction &reaction,
                                         std::string_view element);

}  // namespace carat

#endif  // CARAT_SMILES_H_
