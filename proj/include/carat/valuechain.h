//
// carat - carbon attribute tracing for chemical value chains
// SPDX-License-Identifier: Apache-2.0
//

#ifndef CARAT_VALUECHAIN_H_
#define CARAT_VALUECHAIN_H_

#include <compare>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "carat/diagnostics.h"

namespace carat {

// Virtual tank aggregating one material of one company: (c, p).
struct MixNodeId {
  std::string company;
  std::string product;

  auto operator<=>(const MixNodeId &) const = default;
};

// Production step: (c, b, g).
struct ProductionNodeId {
  std::string company;
  std::string business_process;
  std::string main_product;

  auto operator<=>(const ProductionNodeId &) const = default;
};

using NodeId = std::variant<MixNodeId, ProductionNodeId>;

// "d:COMP2|PROD10" and "t:COMP2|PLNT11|PROD29".
std::string to_string(const MixNodeId &id);
std::string to_string(const ProductionNodeId &id);
std::string to_string(const NodeId &id);

inline bool is_mix(const NodeId &id) {
  return std::holds_alternative<MixNodeId>(id);
}

enum class ReactionRole {
  kReactant,
  kProduct,
};

std::string_view to_string(ReactionRole role);
std::optional<ReactionRole> parse_role(std::string_view text);

struct SubstanceLine {
  std::string smiles;
  // kg of substance per kg main output, as recorded.
  double ratio = 0;
  // Mass fraction within the material (lambda), set by normalize().
  double mass_fraction = 0;

  bool operator==(const SubstanceLine &) const = default;
};

struct MaterialLine {
  ReactionRole role = ReactionRole::kReactant;
  std::string material;
  // Input ratio (alpha) for reactants, output ratio for products.
  double ratio = 0;
  std::vector<SubstanceLine> substances;

  double mass_fraction(std::string_view smiles) const;
  bool operator==(const MaterialLine &) const = default;
};

struct BillOfSubstances {
  std::vector<MaterialLine> materials;

  const MaterialLine *find(ReactionRole role, std::string_view material) const;
  MaterialLine *find(ReactionRole role, std::string_view material);

  // Recomputes lambda per material from the recorded substance ratios.
  void normalize();

  bool operator==(const BillOfSubstances &) const = default;
};

// Per-substance totals in first-appearance order.
using SubstanceTotals = std::vector<std::pair<std::string, double>>;

// Sum of material ratio times lambda per SMILES over materials of `role`.
SubstanceTotals aggregate_substances(const BillOfSubstances &bill,
                                     ReactionRole role);

// Drops substances whose mass fraction is below `min_ratio` and renormalizes
// the survivors. Removals are appended to `log` when given.
BillOfSubstances apply_threshold(const BillOfSubstances &bill, double min_ratio,
                                 std::vector<Diagnostic> *log = nullptr,
                                 std::string_view location = {});

struct Edge {
  NodeId source;
  NodeId target;
  // alpha on mix -> production edges, mu on production -> mix edges.
  double weight = 0;

  bool operator==(const Edge &) const = default;
};

class ValueChainGraph {
public:
  void add_mix_node(const MixNodeId &id);
  // Throws DataError for a duplicate (c, b, g).
  void add_production_node(const ProductionNodeId &id, BillOfSubstances bill);
  // Both endpoints must exist. Edges are not checked for bipartiteness here;
  // validate() reports violations.
  void add_edge(const NodeId &source, const NodeId &target, double weight);

  void set_material_text(const std::string &material, std::string text);
  // Human label for a material code; the code itself when no text is known.
  const std::string &material_label(const std::string &material) const;
  const std::map<std::string, std::string> &material_texts() const {
    return material_text_;
  }

  bool contains(const NodeId &id) const;
  const std::set<MixNodeId> &mix_nodes() const { return mix_nodes_; }
  const std::map<ProductionNodeId, BillOfSubstances> &production_nodes() const {
    return production_nodes_;
  }
  const BillOfSubstances &bill(const ProductionNodeId &id) const;
  void replace_bill(const ProductionNodeId &id, BillOfSubstances bill);

  const std::vector<Edge> &edges() const { return edges_; }
  std::vector<Edge> in_edges(const NodeId &id) const;
  std::vector<Edge> out_edges(const NodeId &id) const;

  std::optional<double> alpha(const MixNodeId &from,
                              const ProductionNodeId &to) const;
  std::optional<double> mu(const ProductionNodeId &from,
                           const MixNodeId &to) const;
  // Mix node supplying reactant material `material` to `node`.
  std::optional<MixNodeId> supplier(const ProductionNodeId &node,
                                    std::string_view material) const;

  bool operator==(const ValueChainGraph &) const = default;

private:
  std::set<MixNodeId> mix_nodes_;
  std::map<ProductionNodeId, BillOfSubstances> production_nodes_;
  std::vector<Edge> edges_;
  std::map<std::string, std::string> material_text_;
};

// Mix nodes with no incoming edges (the inlet set D0).
std::set<MixNodeId> inlet_nodes(const ValueChainGraph &graph);

// Mix nodes with no outgoing edges.
std::set<MixNodeId> terminal_nodes(const ValueChainGraph &graph);

// Bipartiteness, mu sums, alpha signs, empty materials, carbon-free nodes.
std::vector<Diagnostic> validate(const ValueChainGraph &graph);

ValueChainGraph apply_threshold(const ValueChainGraph &graph, double min_ratio,
                                std::vector<Diagnostic> *log = nullptr);

// Node ids in a deterministic order: topological when the graph is acyclic,
// otherwise sorted by id.
std::vector<NodeId> ordered_nodes(const ValueChainGraph &graph);

// True when some directed cycle exists.
bool has_cycle(const ValueChainGraph &graph);

struct InletRow {
  MixNodeId node;
  std::string smiles;
  std::string element;
  std::string attribute;
  double share = 0;

  bool operator==(const InletRow &) const = default;
};

struct InletAttributeTable {
  std::vector<InletRow> rows;

  std::optional<double> share(const MixNodeId &node, std::string_view smiles,
                              std::string_view element,
                              std::string_view attribute) const;
  bool covers(const MixNodeId &node, std::string_view smiles,
              std::string_view element) const;

  bool operator==(const InletAttributeTable &) const = default;
};

// Shares summing to one per (node, smiles, element), rows naming inlet nodes.
std::vector<Diagnostic> validate_inlets(const ValueChainGraph &graph,
                                        const InletAttributeTable &inlets);

}  // namespace carat

#endif  // CARAT_VALUECHAIN_H_
