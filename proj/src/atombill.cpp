//
// carat - carbon attribute tracing for chemical value chains
// SPDX-License-Identifier: Apache-2.0
//

#include "carat/atombill.h"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <regex>

#include <fmt/format.h>

#include "carat/csv.h"
#include "carat/error.h"

namespace carat {

const MoleEntry *MoleTable::find(ReactionRole role,
                                 std::string_view smiles) const {
  const auto &list = role == ReactionRole::kReactant ? reactants : products;
  for (const MoleEntry &e: list)
    if (e.smiles == smiles)
      return &e;
  return nullptr;
}

MoleTable compute_moles(const BillOfSubstances &bill,
                        std::string_view location) {
  MoleTable table;
  for (ReactionRole role: { ReactionRole::kReactant, ReactionRole::kProduct }) {
    auto &list = role == ReactionRole::kReactant ? table.reactants
                                                 : table.products;
    for (const auto &[smiles, mass]: aggregate_substances(bill, role)) {
      if (!(mass > 0))
        continue;
      double m = 0;
      try {
        m = molar_mass(parse_molecule(smiles));
      } catch (const Error &e) {
        throw DataError(fmt::format("{}: {} substance {}: {}", location,
                                    to_string(role), smiles, e.what()));
      }
      list.push_back({ smiles, mass, m, mass / m });
    }
  }
  return table;
}

std::size_t count_smiles_tokens(std::string_view text) {
  // Same pattern the transformer mappers use to split reaction SMILES.
  static const std::regex pattern(
      R"((\[[^\]]+]|Br?|Cl?|N|O|S|P|F|I|b|c|n|o|s|p|\(|\)|\.|=|#|-|\+|\\|\/|:|~|@|\?|>|\*|\$|%[0-9]{2}|[0-9]))");
  const std::string s(text);
  return static_cast<std::size_t>(std::distance(
      std::sregex_iterator(s.begin(), s.end(), pattern), std::sregex_iterator()));
}

std::vector<BuiltReaction> build_reaction_smiles(
    const MoleTable &moles,
    const ReactionBuildOptions &options, std::string_view location) {
  if (moles.reactants.empty() || moles.products.empty())
    throw DataError(fmt::format("{}: reaction needs at least one reactant and "
                                "one product substance",
                                location));
  std::vector<BuiltReaction> out;
  for (const MoleEntry &p: moles.products) {
    const Molecule product = parse_molecule(p.smiles);
    const bool tracked =
        std::any_of(options.elements.begin(), options.elements.end(),
                    [&](const std::string &e) { return product.contains(e); });
    if (!tracked)
      continue;

    std::string text;
    for (const MoleEntry &r: moles.reactants) {
      long k = std::lround(r.moles / p.moles);
      k = std::clamp<long>(k, 1, options.multiplicity_cap);
      for (long i = 0; i < k; ++i) {
        if (!text.empty())
          text += '.';
        text += r.smiles;
      }
    }
    text += ">>";
    text += p.smiles;

    const std::size_t tokens = count_smiles_tokens(text) + 2;
    if (tokens > options.token_limit) {
      throw TokenLimitError(
          fmt::format("{}: reaction for {} has {} tokens, above the mapping "
                      "limit of {}",
                      location, p.smiles, tokens, options.token_limit),
          std::string(location), tokens);
    }
    out.push_back({ p.smiles, std::move(text), tokens });
  }
  return out;
}

SubstanceResolver::SubstanceResolver(std::span<const std::string> substances) {
  for (const std::string &s: substances)
    add(s);
}

SubstanceResolver::Key SubstanceResolver::key_of(const Molecule &m) {
  return { m.element_counts(), m.net_charge() };
}

void SubstanceResolver::add(const std::string &smiles) {
  const Reaction parts = parse_reaction(smiles + ">>" + smiles);
  for (const Molecule &component: parts.reactants)
    by_key_.emplace(key_of(component), smiles);
}

std::string SubstanceResolver::resolve(const Molecule &component) const {
  auto it = by_key_.find(key_of(component));
  if (it != by_key_.end())
    return it->second;
  return component.write({ .strip_maps = true });
}

namespace {

std::string name_of(const Molecule &m, const SubstanceResolver *resolver) {
  return resolver ? resolver->resolve(m) : m.write({ .strip_maps = true });
}

}  // namespace

PhiResult derive_phi(std::span<const Reaction> reactions,
                     const ElementSet &elements,
                     const SubstanceResolver *resolver) {
  PhiResult out;
  std::set<std::string> seen_products;
  for (const Reaction &r: reactions) {
    const std::string text = write_reaction(r);
    if (!r.mapped)
      throw MappingError("reaction is not atom-mapped: " + text);
    if (r.products.size() != 1) {
      bool same = r.products.size() > 1;
      for (const Molecule &m: r.products)
        same = same && name_of(m, resolver) == name_of(r.products[0], resolver);
      throw MappingError(
          fmt::format("{}: {}", same ? "product multiplicity above one"
                                     : "reaction must have exactly one product "
                                       "substance",
                      text));
    }
    const Molecule &product = r.products.front();
    const std::string product_name = name_of(product, resolver);
    if (!seen_products.insert(product_name).second)
      throw MappingError("two reactions for product " + product_name);

    for (const std::string &message: r.diagnostics)
      out.diagnostics.push_back({ Severity::kWarning, "mapping", product_name,
                                  message, std::nullopt });

    std::vector<std::string> reactant_names;
    for (const Molecule &m: r.reactants)
      reactant_names.push_back(name_of(m, resolver));

    for (const std::string &e: elements) {
      const int total = product.count(e);
      if (total == 0)
        continue;
      const CorrespondenceResult corr = atom_correspondence(r, e);
      std::vector<std::pair<std::string, int>> counts;
      for (const AtomCorrespondence &c: corr.matched) {
        const std::string &name = reactant_names[c.reactant.molecule];
        auto it = std::find_if(counts.begin(), counts.end(),
                               [&](const auto &p) { return p.first == name; });
        if (it == counts.end())
          counts.emplace_back(name, 1);
        else
          ++it->second;
      }
      for (const auto &[name, count]: counts)
        out.rows.push_back({ name, product_name, e, count, total,
                             static_cast<double>(count) / total });
      if (!corr.unattributed.empty()) {
        const double missing =
            static_cast<double>(corr.unattributed.size()) / total;
        out.diagnostics.push_back(
            { Severity::kWarning, "unattributed", product_name,
              fmt::format("{} of {} {} atoms have no mapped origin",
                          corr.unattributed.size(), total, e),
              missing });
      }
      for (const std::string &message: corr.diagnostics)
        out.diagnostics.push_back({ Severity::kWarning, "mapping", product_name,
                                    message, std::nullopt });
    }
  }
  return out;
}

PsiResult derive_psi(std::span<const PhiRow> phi, const BillOfSubstances &bill,
                     std::string_view location) {
  PsiResult out;
  for (const PhiRow &row: phi) {
    double total = 0;
    for (const MaterialLine &m: bill.materials)
      if (m.role == ReactionRole::kReactant)
        total += m.ratio * m.mass_fraction(row.reactant_smiles);
    if (!(total > 0)) {
      out.diagnostics.push_back(
          { Severity::kError, "psi-unknown-reactant", std::string(location),
            fmt::format("reactant {} of {} is not in the bill",
                        row.reactant_smiles, row.product_smiles),
            std::nullopt });
      continue;
    }
    bool product_found = false;
    for (const MaterialLine &p: bill.materials) {
      if (p.role != ReactionRole::kProduct || !(p.mass_fraction(row.product_smiles) > 0))
        continue;
      product_found = true;
      for (const MaterialLine &m: bill.materials) {
        if (m.role != ReactionRole::kReactant)
          continue;
        const double w = m.ratio * m.mass_fraction(row.reactant_smiles);
        if (!(w > 0))
          continue;
        out.rows.push_back({ m.material, row.reactant_smiles, p.material,
                             row.product_smiles, row.element, row.atom_count,
                             w / total * row.share });
      }
    }
    if (!product_found) {
      out.diagnostics.push_back(
          { Severity::kError, "psi-unknown-product", std::string(location),
            fmt::format("product {} is not in the bill", row.product_smiles),
            std::nullopt });
    }
  }
  return out;
}

std::vector<Diagnostic> check_conservation(std::span<const Reaction> reactions,
                                           const PhiResult &phi,
                                           const ElementSet &elements,
                                           const SubstanceResolver *resolver) {
  std::vector<Diagnostic> out;
  for (const Reaction &r: reactions) {
    if (r.products.size() != 1)
      continue;
    const std::string product = name_of(r.products.front(), resolver);
    for (const std::string &e: elements) {
      std::map<std::string, int> supplied;
      int supplied_total = 0;
      for (const Molecule &m: r.reactants) {
        supplied[name_of(m, resolver)] += m.count(e);
        supplied_total += m.count(e);
      }
      int attributed_total = 0;
      for (const PhiRow &row: phi.rows) {
        if (row.product_smiles != product || row.element != e)
          continue;
        attributed_total += row.atom_count;
        if (row.atom_count > supplied[row.reactant_smiles]) {
          out.push_back({ Severity::kError, "conservation", product,
                          fmt::format("{} {} atoms credited to {} which "
                                      "supplies only {}",
                                      row.atom_count, e, row.reactant_smiles,
                                      supplied[row.reactant_smiles]),
                          static_cast<double>(row.atom_count) });
        }
      }
      if (supplied_total == r.products.front().count(e) &&
          attributed_total < supplied_total) {
        out.push_back({ Severity::kWarning, "conservation", product,
                        fmt::format("balanced in {} but only {} of {} atoms "
                                    "attributed",
                                    e, attributed_total, supplied_total),
                        static_cast<double>(supplied_total - attributed_total) });
      }
    }
  }
  return out;
}

void write_boa_csv(std::ostream &out, std::span<const NodeAtomBill> bills) {
  CsvWriter w(out);
  w.row({ "node_c", "node_b", "node_g", "reactant_material", "reactant_smiles",
          "product_material", "product_smiles", "element", "atom_count",
          "atom_share" });
  for (const NodeAtomBill &b: bills)
    for (const PsiRow &r: b.rows)
      w.row({ b.node.company, b.node.business_process, b.node.main_product,
              r.reactant_material, r.reactant_smiles, r.product_material,
              r.product_smiles, r.element, std::to_string(r.atom_count),
              format_number(r.share) });
}

}  // namespace carat
