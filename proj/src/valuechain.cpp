//
// carat - carbon attribute tracing for chemical value chains
// SPDX-License-Identifier: Apache-2.0
//

#include "carat/valuechain.h"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <tuple>

#include <fmt/format.h>

#include "carat/error.h"
#include "carat/smiles.h"

namespace carat {

std::string to_string(const MixNodeId &id) {
  return fmt::format("d:{}|{}", id.company, id.product);
}

std::string to_string(const ProductionNodeId &id) {
  return fmt::format("t:{}|{}|{}", id.company, id.business_process,
                     id.main_product);
}

std::string to_string(const NodeId &id) {
  return std::visit([](const auto &v) { return to_string(v); }, id);
}

std::string_view to_string(ReactionRole role) {
  return role == ReactionRole::kReactant ? "reactant" : "product";
}

std::optional<ReactionRole> parse_role(std::string_view text) {
  if (text == "reactant" || text == "Reactant")
    return ReactionRole::kReactant;
  if (text == "product" || text == "Product")
    return ReactionRole::kProduct;
  return std::nullopt;
}

double MaterialLine::mass_fraction(std::string_view smiles) const {
  double total = 0;
  for (const SubstanceLine &s: substances)
    if (s.smiles == smiles)
      total += s.mass_fraction;
  return total;
}

const MaterialLine *BillOfSubstances::find(ReactionRole role,
                                           std::string_view material) const {
  for (const MaterialLine &m: materials)
    if (m.role == role && m.material == material)
      return &m;
  return nullptr;
}

MaterialLine *BillOfSubstances::find(ReactionRole role,
                                     std::string_view material) {
  for (MaterialLine &m: materials)
    if (m.role == role && m.material == material)
      return &m;
  return nullptr;
}

void BillOfSubstances::normalize() {
  for (MaterialLine &m: materials) {
    double total = 0;
    for (const SubstanceLine &s: m.substances)
      total += s.ratio;
    for (SubstanceLine &s: m.substances)
      s.mass_fraction = total > 0 ? s.ratio / total : 0;
  }
}

SubstanceTotals aggregate_substances(const BillOfSubstances &bill,
                                     ReactionRole role) {
  SubstanceTotals totals;
  for (const MaterialLine &m: bill.materials) {
    if (m.role != role)
      continue;
    for (const SubstanceLine &s: m.substances) {
      auto it = std::find_if(totals.begin(), totals.end(),
                             [&](const auto &t) { return t.first == s.smiles; });
      if (it == totals.end())
        totals.emplace_back(s.smiles, m.ratio * s.mass_fraction);
      else
        it->second += m.ratio * s.mass_fraction;
    }
  }
  return totals;
}

BillOfSubstances apply_threshold(const BillOfSubstances &bill, double min_ratio,
                                 std::vector<Diagnostic> *log,
                                 std::string_view location) {
  if (min_ratio <= 0)
    return bill;
  BillOfSubstances out = bill;
  for (MaterialLine &m: out.materials) {
    std::vector<SubstanceLine> kept;
    double total = 0;
    for (const SubstanceLine &s: m.substances) {
      if (s.mass_fraction >= min_ratio) {
        kept.push_back(s);
        total += s.mass_fraction;
      }
    }
    // Every row below the threshold: keep the material as is rather than
    // leaving it empty.
    if (kept.empty() || kept.size() == m.substances.size())
      continue;
    if (log) {
      for (const SubstanceLine &s: m.substances) {
        if (s.mass_fraction < min_ratio)
          log->push_back({ Severity::kWarning, "threshold",
                           std::string(location),
                           fmt::format("dropped {} {} from material {}",
                                       to_string(m.role), s.smiles, m.material),
                           s.mass_fraction });
      }
    }
    for (SubstanceLine &s: kept)
      s.mass_fraction /= total;
    m.substances = std::move(kept);
  }
  return out;
}

void ValueChainGraph::add_mix_node(const MixNodeId &id) {
  if (id.company.empty() || id.product.empty())
    throw DataError("mix node with empty code");
  mix_nodes_.insert(id);
}

void ValueChainGraph::add_production_node(const ProductionNodeId &id,
                                          BillOfSubstances bill) {
  if (id.company.empty() || id.business_process.empty() ||
      id.main_product.empty())
    throw DataError("production node with empty code");
  if (!production_nodes_.emplace(id, std::move(bill)).second)
    throw DataError("duplicate production node " + to_string(id));
}

void ValueChainGraph::add_edge(const NodeId &source, const NodeId &target,
                               double weight) {
  if (!contains(source))
    throw DataError("edge from undefined node " + to_string(source));
  if (!contains(target))
    throw DataError("edge to undefined node " + to_string(target));
  edges_.push_back({ source, target, weight });
}

void ValueChainGraph::set_material_text(const std::string &material,
                                        std::string text) {
  material_text_[material] = std::move(text);
}

const std::string &ValueChainGraph::material_label(
    const std::string &material) const {
  auto it = material_text_.find(material);
  return it == material_text_.end() ? material : it->second;
}

bool ValueChainGraph::contains(const NodeId &id) const {
  if (const auto *d = std::get_if<MixNodeId>(&id))
    return mix_nodes_.count(*d) > 0;
  return production_nodes_.count(std::get<ProductionNodeId>(id)) > 0;
}

const BillOfSubstances &ValueChainGraph::bill(const ProductionNodeId &id) const {
  auto it = production_nodes_.find(id);
  if (it == production_nodes_.end())
    throw DataError("unknown production node " + to_string(id));
  return it->second;
}

void ValueChainGraph::replace_bill(const ProductionNodeId &id,
                                   BillOfSubstances bill) {
  auto it = production_nodes_.find(id);
  if (it == production_nodes_.end())
    throw DataError("unknown production node " + to_string(id));
  it->second = std::move(bill);
}

std::vector<Edge> ValueChainGraph::in_edges(const NodeId &id) const {
  std::vector<Edge> out;
  for (const Edge &e: edges_)
    if (e.target == id)
      out.push_back(e);
  return out;
}

std::vector<Edge> ValueChainGraph::out_edges(const NodeId &id) const {
  std::vector<Edge> out;
  for (const Edge &e: edges_)
    if (e.source == id)
      out.push_back(e);
  return out;
}

std::optional<double> ValueChainGraph::alpha(const MixNodeId &from,
                                             const ProductionNodeId &to) const {
  for (const Edge &e: edges_)
    if (e.source == NodeId(from) && e.target == NodeId(to))
      return e.weight;
  return std::nullopt;
}

std::optional<double> ValueChainGraph::mu(const ProductionNodeId &from,
                                          const MixNodeId &to) const {
  for (const Edge &e: edges_)
    if (e.source == NodeId(from) && e.target == NodeId(to))
      return e.weight;
  return std::nullopt;
}

std::optional<MixNodeId> ValueChainGraph::supplier(
    const ProductionNodeId &node, std::string_view material) const {
  for (const Edge &e: edges_) {
    if (e.target != NodeId(node))
      continue;
    if (const auto *d = std::get_if<MixNodeId>(&e.source))
      if (d->product == material)
        return *d;
  }
  return std::nullopt;
}

std::set<MixNodeId> inlet_nodes(const ValueChainGraph &graph) {
  std::set<MixNodeId> inlets = graph.mix_nodes();
  for (const Edge &e: graph.edges())
    if (const auto *d = std::get_if<MixNodeId>(&e.target))
      inlets.erase(*d);
  return inlets;
}

std::set<MixNodeId> terminal_nodes(const ValueChainGraph &graph) {
  std::set<MixNodeId> terminals = graph.mix_nodes();
  for (const Edge &e: graph.edges())
    if (const auto *d = std::get_if<MixNodeId>(&e.source))
      terminals.erase(*d);
  return terminals;
}

std::vector<Diagnostic> validate(const ValueChainGraph &graph) {
  std::vector<Diagnostic> out;
  auto error = [&](std::string code, std::string location, std::string message,
                   std::optional<double> value = std::nullopt) {
    out.push_back({ Severity::kError, std::move(code), std::move(location),
                    std::move(message), value });
  };

  std::map<MixNodeId, double> mu_sums;
  for (const Edge &e: graph.edges()) {
    const std::string where =
        fmt::format("{} -> {}", to_string(e.source), to_string(e.target));
    if (is_mix(e.source) == is_mix(e.target)) {
      error("non-bipartite-edge", where,
            is_mix(e.source) ? "edge joins two mix nodes"
                             : "edge joins two production nodes");
      continue;
    }
    if (is_mix(e.source)) {
      if (!(e.weight > 0))
        error("alpha-nonpositive", where, "input ratio must be positive",
              e.weight);
      const auto &t = std::get<ProductionNodeId>(e.target);
      const auto &d = std::get<MixNodeId>(e.source);
      if (!graph.bill(t).find(ReactionRole::kReactant, d.product))
        error("alpha-material-mismatch", where,
              "no reactant material " + d.product + " in the bill");
    } else {
      if (!(e.weight >= 0 && e.weight <= 1))
        error("mu-range", where, "consumption mix share outside [0,1]",
              e.weight);
      mu_sums[std::get<MixNodeId>(e.target)] += e.weight;
    }
  }
  for (const auto &[node, sum]: mu_sums)
    if (std::abs(sum - 1) > 1e-9)
      error("mu-sum", to_string(node), "consumption mix shares do not sum to 1",
            sum);

  for (const auto &[id, bill]: graph.production_nodes()) {
    const std::string where = to_string(id);
    bool carbon_product = false;
    for (const MaterialLine &m: bill.materials) {
      double lambda = 0;
      for (const SubstanceLine &s: m.substances) {
        lambda += s.mass_fraction;
        if (s.ratio < 0)
          error("negative-ratio", where,
                fmt::format("negative ratio for {} in {}", s.smiles,
                            m.material),
                s.ratio);
        try {
          Molecule mol = parse_molecule(s.smiles);
          if (m.role == ReactionRole::kProduct && mol.contains("C"))
            carbon_product = true;
        } catch (const SmilesError &ex) {
          error("bad-smiles", where,
                fmt::format("{} in {}: {}", s.smiles, m.material, ex.what()));
        }
      }
      if (m.ratio < 0)
        error("negative-ratio", where,
              fmt::format("negative ratio for material {}", m.material),
              m.ratio);
      if (!(lambda > 0))
        error("zero-lambda", where,
              fmt::format("material {} has zero total mass fraction",
                          m.material),
              lambda);
    }
    if (!carbon_product) {
      out.push_back({ Severity::kWarning, "no-carbon-product", where,
                      "no carbon-containing product substance",
                      std::nullopt });
    }
  }
  return out;
}

ValueChainGraph apply_threshold(const ValueChainGraph &graph, double min_ratio,
                                std::vector<Diagnostic> *log) {
  ValueChainGraph out = graph;
  for (const auto &[id, bill]: graph.production_nodes())
    out.replace_bill(id, apply_threshold(bill, min_ratio, log, to_string(id)));
  return out;
}

namespace {

// Adjacency over a node index: mix nodes first, then production nodes, both in
// id order.
struct Indexed {
  std::vector<NodeId> nodes;
  std::map<NodeId, std::size_t> index;
  std::vector<std::vector<std::size_t>> next;
};

Indexed index_graph(const ValueChainGraph &graph) {
  Indexed g;
  for (const MixNodeId &d: graph.mix_nodes())
    g.nodes.push_back(d);
  for (const auto &[t, bill]: graph.production_nodes())
    g.nodes.push_back(t);
  for (std::size_t i = 0; i < g.nodes.size(); ++i)
    g.index.emplace(g.nodes[i], i);
  g.next.resize(g.nodes.size());
  for (const Edge &e: graph.edges())
    g.next[g.index.at(e.source)].push_back(g.index.at(e.target));
  for (auto &n: g.next) {
    std::sort(n.begin(), n.end());
    n.erase(std::unique(n.begin(), n.end()), n.end());
  }
  return g;
}

// Kahn's algorithm taking the smallest ready index first. Returns fewer than
// all nodes when a cycle exists.
std::vector<std::size_t> kahn(const Indexed &g) {
  std::vector<int> indegree(g.nodes.size(), 0);
  for (const auto &n: g.next)
    for (std::size_t j: n)
      ++indegree[j];
  std::set<std::size_t> ready;
  for (std::size_t i = 0; i < g.nodes.size(); ++i)
    if (indegree[i] == 0)
      ready.insert(i);
  std::vector<std::size_t> order;
  while (!ready.empty()) {
    const std::size_t i = *ready.begin();
    ready.erase(ready.begin());
    order.push_back(i);
    for (std::size_t j: g.next[i])
      if (--indegree[j] == 0)
        ready.insert(j);
  }
  return order;
}

}  // namespace

std::vector<NodeId> ordered_nodes(const ValueChainGraph &graph) {
  const Indexed g = index_graph(graph);
  const std::vector<std::size_t> order = kahn(g);
  if (order.size() != g.nodes.size())
    return g.nodes;
  std::vector<NodeId> out;
  out.reserve(order.size());
  for (std::size_t i: order)
    out.push_back(g.nodes[i]);
  return out;
}

bool has_cycle(const ValueChainGraph &graph) {
  const Indexed g = index_graph(graph);
  return kahn(g).size() != g.nodes.size();
}

std::optional<double> InletAttributeTable::share(
    const MixNodeId &node, std::string_view smiles, std::string_view element,
    std::string_view attribute) const {
  std::optional<double> out;
  for (const InletRow &r: rows)
    if (r.node == node && r.smiles == smiles && r.element == element &&
        r.attribute == attribute)
      out = out.value_or(0) + r.share;
  return out;
}

bool InletAttributeTable::covers(const MixNodeId &node, std::string_view smiles,
                                 std::string_view element) const {
  return std::any_of(rows.begin(), rows.end(), [&](const InletRow &r) {
    return r.node == node && r.smiles == smiles && r.element == element;
  });
}

std::vector<Diagnostic> validate_inlets(const ValueChainGraph &graph,
                                        const InletAttributeTable &inlets) {
  std::vector<Diagnostic> out;
  const std::set<MixNodeId> d0 = inlet_nodes(graph);
  std::map<std::tuple<MixNodeId, std::string, std::string>, double> sums;
  for (const InletRow &r: inlets.rows) {
    const std::string where = to_string(r.node);
    if (!d0.count(r.node)) {
      out.push_back({ Severity::kError, "inlet-not-inlet", where,
                      graph.mix_nodes().count(r.node)
                          ? "node has incoming edges"
                          : "node is not part of the graph",
                      std::nullopt });
    }
    if (!(r.share >= 0 && r.share <= 1)) {
      out.push_back({ Severity::kError, "inlet-share-range", where,
                      fmt::format("share for {} {} {} outside [0,1]", r.smiles,
                                  r.element, r.attribute),
                      r.share });
    }
    sums[{ r.node, r.smiles, r.element }] += r.share;
  }
  for (const auto &[key, sum]: sums) {
    if (std::abs(sum - 1) > 1e-9) {
      out.push_back({ Severity::kError, "inlet-share-sum",
                      to_string(std::get<0>(key)),
                      fmt::format("shares for {} {} do not sum to 1",
                                  std::get<1>(key), std::get<2>(key)),
                      sum });
    }
  }
  return out;
}

}  // namespace carat
