//
// carat - carbon attribute tracing for chemical value chains
// SPDX-License-Identifier: Apache-2.0
//

#ifndef CARAT_ATOMBILL_H_
#define CARAT_ATOMBILL_H_

#include <cstddef>
#include <iosfwd>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "carat/diagnostics.h"
#include "carat/smiles.h"
#include "carat/valuechain.h"

namespace carat {

using ElementSet = std::set<std::string, std::less<>>;

struct MoleEntry {
  std::string smiles;
  // Aggregated mass over materials of the role, kg per kg main output.
  double mass = 0;
  double molar_mass = 0;
  // mass / molar_mass; kmol per kg main output when masses are in kg.
  double moles = 0;
};

struct MoleTable {
  std::vector<MoleEntry> reactants;
  std::vector<MoleEntry> products;

  const MoleEntry *find(ReactionRole role, std::string_view smiles) const;
};

// Throws DataError naming `location` for substances that do not parse.
MoleTable compute_moles(const BillOfSubstances &bill,
                        std::string_view location = {});

struct ReactionBuildOptions {
  // Only products containing one of these elements get a reaction string.
  ElementSet elements { "C" };
  int multiplicity_cap = 6;
  // Token budget of the mapping provider, counted with the usual reaction
  // SMILES tokenizer plus the two sequence delimiters.
  std::size_t token_limit = 512;
};

struct BuiltReaction {
  std::string product_smiles;
  std::string text;
  std::size_t tokens = 0;
};

class TokenLimitError: public Error {
public:
  TokenLimitError(const std::string &what, std::string location,
                  std::size_t tokens)
      : Error(what), location_(std::move(location)), tokens_(tokens) { }

  const std::string &location() const { return location_; }
  std::size_t tokens() const { return tokens_; }

private:
  std::string location_;
  std::size_t tokens_;
};

// Tokens in a (reaction) SMILES string, bracket atoms counting as one.
std::size_t count_smiles_tokens(std::string_view text);

// One string per qualifying product substance; all reactant substances in
// first-appearance order, each repeated round(n_j / n_product) times clamped
// to [1, cap]; empty reagent section.
std::vector<BuiltReaction> build_reaction_smiles(
    const MoleTable &moles,
    const ReactionBuildOptions &options = {}, std::string_view location = {});

// Maps a dot-separated component of a mapped reaction back to the bill's
// substance SMILES. Components are recognized by element counts (hydrogens
// included) and charge, since mapped strings spell atoms differently.
class SubstanceResolver {
public:
  SubstanceResolver() = default;
  explicit SubstanceResolver(std::span<const std::string> substances);

  void add(const std::string &smiles);
  // Substance for the component; its map-stripped text when unknown.
  std::string resolve(const Molecule &component) const;

private:
  struct Key {
    ElementCounts counts;
    int charge;

    auto operator<=>(const Key &) const = default;
  };
  static Key key_of(const Molecule &m);

  // A substance written as several components ("[Na+].[OH-]") resolves from
  // any one of them.
  std::map<Key, std::string> by_key_;
};

struct PhiRow {
  std::string reactant_smiles;
  std::string product_smiles;
  std::string element;
  int atom_count = 0;
  int total_atoms = 0;
  // atom_count / total_atoms.
  double share = 0;
};

struct PhiResult {
  std::vector<PhiRow> rows;
  // Unattributed atoms per (product, element), mapping warnings.
  std::vector<Diagnostic> diagnostics;
};

// Substance-level atom bill. Duplicate reactant molecules pool into one row.
// Throws MappingError for an unmapped reaction or a product side that holds
// anything but exactly one molecule.
PhiResult derive_phi(std::span<const Reaction> reactions,
                     const ElementSet &elements,
                     const SubstanceResolver *resolver = nullptr);

struct PsiRow {
  std::string reactant_material;
  std::string reactant_smiles;
  std::string product_material;
  std::string product_smiles;
  std::string element;
  int atom_count = 0;
  double share = 0;
};

struct PsiResult {
  std::vector<PsiRow> rows;
  std::vector<Diagnostic> diagnostics;
};

// Splits phi across source materials by alpha * lambda; every product
// material carrying the product substance inherits the rows.
PsiResult derive_psi(std::span<const PhiRow> phi, const BillOfSubstances &bill,
                     std::string_view location = {});

// For each reactant substance and element: atoms attributed to products
// versus atoms supplied (count times multiplicity in the reaction). Flags
// over-attribution, which cannot happen for a consistent mapping.
std::vector<Diagnostic> check_conservation(std::span<const Reaction> reactions,
                                           const PhiResult &phi,
                                           const ElementSet &elements,
                                           const SubstanceResolver *resolver =
                                               nullptr);

struct NodeAtomBill {
  ProductionNodeId node;
  std::vector<PsiRow> rows;
};

// Bill of atoms table: node columns followed by reactant material, reactant
// SMILES, product material, product SMILES, element, atom count, atom share.
void write_boa_csv(std::ostream &out, std::span<const NodeAtomBill> bills);

}  // namespace carat

#endif  // CARAT_ATOMBILL_H_
