//
// carat - carbon attribute tracing for chemical value chains
// SPDX-License-Identifier: Apache-2.0
//

#include "carat/attribute_lp.h"

#include <algorithm>
#include <cmath>
#include <deque>

#include <fmt/format.h>

#include "carat/error.h"
#include "carat/smiles.h"

namespace carat {

std::string to_string(const SiteKey &key) {
  return fmt::format("{}|{}|{}|{}", to_string(key.node), key.material,
                     key.smiles, key.element);
}

const Site *AttributeModel::find(const SiteKey &key) const {
  auto it = site_index.find(key);
  return it == site_index.end() ? nullptr : &sites[it->second];
}

namespace {

// Element membership per SMILES, parsed once.
class ElementCache {
public:
  bool contains(const std::string &smiles, const std::string &element) {
    auto it = counts_.find(smiles);
    if (it == counts_.end())
      it = counts_.emplace(smiles, parse_molecule(smiles).element_counts()).first;
    auto e = it->second.find(element);
    return e != it->second.end() && e->second > 0;
  }

private:
  std::map<std::string, ElementCounts> counts_;
};

std::set<NodeId> reachable_from_inlets(const ValueChainGraph &graph) {
  std::set<NodeId> seen;
  std::deque<NodeId> queue;
  for (const MixNodeId &d: inlet_nodes(graph)) {
    seen.insert(d);
    queue.push_back(d);
  }
  std::map<NodeId, std::vector<NodeId>> next;
  for (const Edge &e: graph.edges())
    next[e.source].push_back(e.target);
  while (!queue.empty()) {
    const NodeId n = queue.front();
    queue.pop_front();
    for (const NodeId &m: next[n])
      if (seen.insert(m).second)
        queue.push_back(m);
  }
  return seen;
}

// Substances present in mix node d: outputs of its producers plus inputs of
// its consumers, first-appearance order.
std::vector<std::string> mix_substances(const ValueChainGraph &graph,
                                        const MixNodeId &d) {
  std::vector<std::string> out;
  auto add = [&](const MaterialLine *m) {
    if (!m)
      return;
    for (const SubstanceLine &s: m->substances)
      if (std::find(out.begin(), out.end(), s.smiles) == out.end())
        out.push_back(s.smiles);
  };
  for (const Edge &e: graph.in_edges(d))
    if (const auto *t = std::get_if<ProductionNodeId>(&e.source))
      add(graph.bill(*t).find(ReactionRole::kProduct, d.product));
  for (const Edge &e: graph.out_edges(d))
    if (const auto *t = std::get_if<ProductionNodeId>(&e.target))
      add(graph.bill(*t).find(ReactionRole::kReactant, d.product));
  return out;
}

}  // namespace

AttributeModel build_lp(const ValueChainGraph &graph, const PsiTable &psi,
                        const InletAttributeTable &inlets,
                        const std::vector<std::string> &attributes,
                        const ElementSet &elements) {
  AttributeModel model;
  model.attributes = attributes;
  if (attributes.empty())
    throw DataError("attribute set is empty");
  for (const auto &[node, rows]: psi)
    if (!graph.production_nodes().count(node))
      throw DataError("atom bill for unknown production node " +
                      to_string(node));

  ElementCache cache;
  const std::set<NodeId> reachable = reachable_from_inlets(graph);
  const std::set<MixNodeId> d0 = inlet_nodes(graph);
  auto warn = [&](std::string code, std::string location, std::string message) {
    model.diagnostics.push_back({ Severity::kWarning, std::move(code),
                                  std::move(location), std::move(message),
                                  std::nullopt });
  };

  auto add_site = [&](SiteKey key, bool inlet) {
    Site site;
    site.key = key;
    site.inlet = inlet;
    const std::string base = to_string(key);
    for (const std::string &a: attributes) {
      double lower = 0, upper = 1;
      if (inlet) {
        const auto *d = std::get_if<MixNodeId>(&key.node);
        const double h =
            inlets.share(*d, key.smiles, key.element, a).value_or(0.0);
        lower = upper = h;
      }
      site.beta.push_back(
          model.lp.add_variable(fmt::format("b[{}|{}]", base, a), lower, upper, 0));
    }
    site.z = model.lp.add_variable(fmt::format("z[{}]", base), 0,
                                   LinearProgram::kInfinity, 1);
    site.q_hat = model.lp.add_variable(fmt::format("q[{}]", base), 0,
                                       LinearProgram::kInfinity, 1);
    model.site_index.emplace(key, model.sites.size());
    model.sites.push_back(std::move(site));
  };

  // Production sites: every product substance carrying a tracked element.
  for (const auto &[t, bill]: graph.production_nodes()) {
    if (!reachable.count(t))
      continue;
    for (const MaterialLine &m: bill.materials) {
      if (m.role != ReactionRole::kProduct)
        continue;
      for (const SubstanceLine &s: m.substances)
        for (const std::string &e: elements)
          if (cache.contains(s.smiles, e) &&
              !model.site_index.count({ t, m.material, s.smiles, e }))
            add_site({ t, m.material, s.smiles, e }, false);
    }
  }
  // Mix sites.
  for (const MixNodeId &d: graph.mix_nodes()) {
    if (!reachable.count(d))
      continue;
    const bool inlet = d0.count(d) > 0;
    for (const std::string &s: mix_substances(graph, d)) {
      for (const std::string &e: elements) {
        if (!cache.contains(s, e))
          continue;
        if (inlet && !inlets.covers(d, s, e))
          throw DataError(fmt::format("inlet {} supplies {} but the inlet "
                                      "table has no {} shares for it",
                                      to_string(d), s, e));
        add_site({ d, d.product, s, e }, inlet);
      }
    }
  }

  const std::size_t na = attributes.size();
  for (const Site &site: model.sites) {
    const std::string name = to_string(site.key);
    if (!site.inlet) {
      if (const auto *t = std::get_if<ProductionNodeId>(&site.key.node)) {
        // beta_t = sum psi * beta_mix(supplier)
        std::vector<std::pair<std::size_t, double>> sources;
        bool any_row = false;
        auto rows = psi.find(*t);
        if (rows != psi.end()) {
          for (const PsiRow &r: rows->second) {
            if (r.product_material != site.key.material ||
                r.product_smiles != site.key.smiles ||
                r.element != site.key.element)
              continue;
            any_row = true;
            const auto supplier = graph.supplier(*t, r.reactant_material);
            const Site *from =
                supplier ? model.find({ *supplier, r.reactant_material,
                                        r.reactant_smiles, r.element })
                         : nullptr;
            if (!from) {
              warn("missing-term", name,
                   fmt::format("no attribute site for {} in material {}; term "
                               "dropped",
                               r.reactant_smiles, r.reactant_material));
              continue;
            }
            sources.emplace_back(static_cast<std::size_t>(from - model.sites.data()),
                                 r.share);
          }
        }
        if (!any_row)
          warn("no-mapped-origin", name,
               "product substance has no atom bill rows; its normalization "
               "relies on slack");
        for (std::size_t a = 0; a < na; ++a) {
          std::vector<LinearProgram::Term> terms { { site.beta[a], 1.0 } };
          for (const auto &[from, share]: sources)
            terms.push_back({ model.sites[from].beta[a], -share });
          model.lp.add_constraint(fmt::format("prod[{}|{}]", name, attributes[a]),
                                  std::move(terms), LinearProgram::Sense::kEqual,
                                  0);
        }
      } else {
        // beta_d = sum mu * beta_t
        const auto &d = std::get<MixNodeId>(site.key.node);
        std::vector<std::pair<std::size_t, double>> sources;
        for (const Edge &e: graph.in_edges(d)) {
          const auto *t = std::get_if<ProductionNodeId>(&e.source);
          if (!t)
            continue;
          const Site *from =
              model.find({ *t, d.product, site.key.smiles, site.key.element });
          if (!from) {
            warn("missing-term", name,
                 fmt::format("{} does not supply {} in {}; term dropped",
                             to_string(*t), site.key.smiles, d.product));
            continue;
          }
          sources.emplace_back(static_cast<std::size_t>(from - model.sites.data()),
                               e.weight);
        }
        for (std::size_t a = 0; a < na; ++a) {
          std::vector<LinearProgram::Term> terms { { site.beta[a], 1.0 } };
          for (const auto &[from, mu]: sources)
            terms.push_back({ model.sites[from].beta[a], -mu });
          model.lp.add_constraint(fmt::format("mix[{}|{}]", name, attributes[a]),
                                  std::move(terms), LinearProgram::Sense::kEqual,
                                  0);
        }
      }
    }
    // sum_a beta - z - q = 1 with q = -q_hat.
    std::vector<LinearProgram::Term> norm;
    for (std::size_t v: site.beta)
      norm.push_back({ v, 1.0 });
    norm.push_back({ site.z, -1.0 });
    norm.push_back({ site.q_hat, 1.0 });
    model.lp.add_constraint(fmt::format("norm[{}]", name), std::move(norm),
                            LinearProgram::Sense::kEqual, 1);
  }
  return model;
}

std::optional<double> AttributeSolution::find(const SiteKey &key,
                                              const std::string &attribute) const {
  for (const BetaValue &b: beta)
    if (b.attribute == attribute && b.key == key)
      return b.value;
  return std::nullopt;
}

AttributeSolution solve(const AttributeModel &model,
                        const SimplexOptions &options) {
  AttributeSolution out;
  out.attributes = model.attributes;
  out.diagnostics = model.diagnostics;
  const SimplexResult r = solve(model.lp, options);
  out.status = r.status;
  out.iterations = r.iterations;
  if (r.status != LpStatus::kOptimal)
    return out;

  for (const Site &site: model.sites) {
    for (std::size_t a = 0; a < site.beta.size(); ++a)
      out.beta.push_back({ site.key, model.attributes[a], r.x[site.beta[a]] });
    out.slack.push_back({ site.key, r.x[site.z], -r.x[site.q_hat] });
  }
  out.total_slack = r.objective;
  out.max_residual = model.lp.max_violation(r.x);
  return out;
}

std::vector<SlackValue> slack_report(const AttributeSolution &solution,
                                     double threshold) {
  std::vector<SlackValue> out;
  for (const SlackValue &s: solution.slack)
    if (std::abs(s.z) + std::abs(s.q) > threshold)
      out.push_back(s);
  std::stable_sort(out.begin(), out.end(),
                   [](const SlackValue &a, const SlackValue &b) {
                     return std::abs(a.z) + std::abs(a.q) >
                            std::abs(b.z) + std::abs(b.q);
                   });
  return out;
}

}  // namespace carat
