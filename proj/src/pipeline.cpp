//
// carat - carbon attribute tracing for chemical value chains
// SPDX-License-Identifier: Apache-2.0
//

#include "carat/pipeline.h"

#include <algorithm>
#include <map>

#include <fmt/format.h>

#include "carat/smiles.h"

namespace carat {

ValidationError::ValidationError(std::vector<Diagnostic> diagnostics)
    : DataError([&] {
        std::size_t errors = 0;
        const Diagnostic *first = nullptr;
        for (const Diagnostic &d: diagnostics)
          if (d.severity == Severity::kError && errors++ == 0)
            first = &d;
        return fmt::format("validation failed with {} error(s); first: {}",
                           errors, first ? format_diagnostic(*first) : "none");
      }()),
      diagnostics_(std::move(diagnostics)) { }

std::vector<NodeReactions> build_reactions(const ValueChainGraph &graph,
                                           const PipelineOptions &options) {
  ReactionBuildOptions build;
  build.elements = options.elements;
  build.multiplicity_cap = options.multiplicity_cap;
  build.token_limit = options.token_limit;

  std::vector<NodeReactions> out;
  for (const auto &[node, bill]: graph.production_nodes()) {
    const std::string location = to_string(node);
    const MoleTable moles = compute_moles(bill, location);
    // A node without any tracked product needs no mapping at all.
    const bool tracked = std::any_of(
        moles.products.begin(), moles.products.end(), [&](const MoleEntry &p) {
          const Molecule m = parse_molecule(p.smiles);
          return std::any_of(options.elements.begin(), options.elements.end(),
                             [&](const std::string &e) { return m.contains(e); });
        });
    if (!tracked)
      continue;
    out.push_back({ node, build_reaction_smiles(moles, build, location) });
  }
  return out;
}

AtomBills derive_atom_bills(const ValueChainGraph &graph,
                            MappingProvider &provider,
                            const PipelineOptions &options) {
  const std::vector<NodeReactions> per_node = build_reactions(graph, options);

  // One provider round trip for the whole chain; identical strings from
  // different nodes are mapped once.
  std::vector<std::string> unique;
  for (const NodeReactions &n: per_node)
    for (const BuiltReaction &r: n.reactions)
      if (std::find(unique.begin(), unique.end(), r.text) == unique.end())
        unique.push_back(r.text);
  std::vector<std::string> mapped;
  try {
    mapped = provider.map(unique);
  } catch (const MappingError &e) {
    // Name the node when the provider says which reaction failed.
    const std::string_view what = e.what();
    for (const NodeReactions &n: per_node)
      for (const BuiltReaction &r: n.reactions)
        if (what.find(r.text) != std::string_view::npos)
          throw MappingError(fmt::format("{}: {}", to_string(n.node), what));
    throw;
  }
  if (mapped.size() != unique.size())
    throw MappingError(fmt::format("{} returned {} mappings for {} reactions",
                                   provider.describe(), mapped.size(),
                                   unique.size()));
  std::map<std::string, std::string, std::less<>> lookup;
  for (std::size_t i = 0; i < unique.size(); ++i)
    lookup.emplace(unique[i], mapped[i]);

  AtomBills out;
  for (const NodeReactions &n: per_node) {
    const std::string location = to_string(n.node);
    const BillOfSubstances &bill = graph.bill(n.node);
    SubstanceResolver resolver;
    for (const MaterialLine &m: bill.materials)
      for (const SubstanceLine &s: m.substances)
        resolver.add(s.smiles);

    std::vector<Reaction> reactions;
    for (const BuiltReaction &r: n.reactions) {
      try {
        reactions.push_back(parse_reaction(lookup.at(r.text)));
      } catch (const SmilesError &e) {
        throw MappingError(fmt::format("{}: mapped reaction for {} does not "
                                       "parse: {}",
                                       location, r.product_smiles, e.what()));
      }
    }

    PhiResult phi;
    try {
      phi = derive_phi(reactions, options.elements, &resolver);
    } catch (const MappingError &e) {
      throw MappingError(fmt::format("{}: {}", location, e.what()));
    }
    for (Diagnostic d: phi.diagnostics) {
      if (d.location.empty())
        d.location = location;
      else
        d.location = location + " " + d.location;
      out.diagnostics.push_back(std::move(d));
    }
    for (Diagnostic d: check_conservation(reactions, phi, options.elements,
                                          &resolver)) {
      d.location = location + (d.location.empty() ? "" : " " + d.location);
      out.diagnostics.push_back(std::move(d));
    }

    PsiResult psi = derive_psi(phi.rows, bill, location);
    out.diagnostics.insert(out.diagnostics.end(), psi.diagnostics.begin(),
                           psi.diagnostics.end());
    out.bills.push_back({ n.node, psi.rows });
    out.psi.emplace(n.node, std::move(psi.rows));
  }
  return out;
}

std::vector<HeadlineBcc> headline_shares(const ValueChainGraph &graph,
                                         const AttributeSolution &solution,
                                         const std::string &attribute,
                                         const std::string &element) {
  std::map<std::string, std::pair<double, int>, std::less<>> chemistry;
  auto info = [&](const std::string &smiles) {
    auto it = chemistry.find(smiles);
    if (it == chemistry.end()) {
      const Molecule m = parse_molecule(smiles);
      it = chemistry.emplace(smiles, std::pair { molar_mass(m), m.count(element) })
               .first;
    }
    return it->second;
  };

  std::vector<HeadlineBcc> out;
  for (const MixNodeId &d: terminal_nodes(graph)) {
    double weight = 0, weighted = 0;
    bool covered = false;
    for (const Edge &e: graph.in_edges(d)) {
      const auto *t = std::get_if<ProductionNodeId>(&e.source);
      if (!t)
        continue;
      const MaterialLine *m = graph.bill(*t).find(ReactionRole::kProduct, d.product);
      if (!m)
        continue;
      for (const SubstanceLine &s: m->substances) {
        const auto [mass, atoms] = info(s.smiles);
        if (atoms == 0 || mass <= 0)
          continue;
        const auto beta =
            solution.find({ d, d.product, s.smiles, element }, attribute);
        if (!beta)
          continue;
        const double w = e.weight * s.mass_fraction / mass * atoms;
        weight += w;
        weighted += w * *beta;
        covered = true;
      }
    }
    if (!covered || weight <= 0)
      continue;
    out.push_back({ d, graph.material_label(d.product), weighted / weight });
  }
  return out;
}

namespace {

void solve_into(TraceResult &r, const PipelineOptions &options) {
  r.model = build_lp(r.graph, r.atom_bills.psi, r.inlets, options.attributes,
                     options.elements);
  r.diagnostics.insert(r.diagnostics.end(), r.model.diagnostics.begin(),
                       r.model.diagnostics.end());
  r.solution = solve(r.model, options.simplex);
  if (r.solution.status != LpStatus::kOptimal)
    throw Error(fmt::format("attribute program not solved: {}",
                            to_string(r.solution.status)));
  const std::string attribute =
      std::find(options.attributes.begin(), options.attributes.end(),
                "biogenic") != options.attributes.end()
          ? "biogenic"
          : options.attributes.back();
  const std::string element =
      options.elements.count("C") ? "C" : *options.elements.begin();
  r.headlines = headline_shares(r.graph, r.solution, attribute, element);
}

}  // namespace

TraceResult run_trace(const GraphRecords &records, MappingProvider &provider,
                      const PipelineOptions &options) {
  TraceResult r;
  r.graph = load_graph(records, options.load, &r.diagnostics);
  r.inlets = records.inlets;

  std::vector<Diagnostic> found = r.diagnostics;
  for (Diagnostic &d: validate(r.graph))
    found.push_back(std::move(d));
  for (Diagnostic &d: validate_inlets(r.graph, r.inlets))
    found.push_back(std::move(d));
  if (has_errors(found))
    throw ValidationError(std::move(found));
  r.diagnostics = std::move(found);

  if (options.threshold > 0)
    r.graph = apply_threshold(r.graph, options.threshold, &r.diagnostics);

  r.atom_bills = derive_atom_bills(r.graph, provider, options);
  r.diagnostics.insert(r.diagnostics.end(), r.atom_bills.diagnostics.begin(),
                       r.atom_bills.diagnostics.end());
  solve_into(r, options);
  return r;
}

TraceResult retrace(const TraceResult &base, const InletAttributeTable &inlets,
                    const PipelineOptions &options) {
  TraceResult r;
  r.graph = base.graph;
  r.inlets = inlets;
  r.atom_bills = base.atom_bills;
  std::vector<Diagnostic> found = validate_inlets(r.graph, inlets);
  if (has_errors(found))
    throw ValidationError(std::move(found));
  r.diagnostics = std::move(found);
  solve_into(r, options);
  return r;
}

}  // namespace carat
