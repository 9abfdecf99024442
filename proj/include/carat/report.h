//
// carat - carbon attribute tracing for chemical value chains
// SPDX-License-Identifier: Apache-2.0
//

#ifndef CARAT_REPORT_H_
#define CARAT_REPORT_H_

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "carat/attribute_lp.h"
#include "carat/diagnostics.h"
#include "carat/valuechain.h"

namespace carat {

inline constexpr std::string_view kFossilColor = "#9e9e9e";
inline constexpr std::string_view kBiogenicColor = "#1b5e20";
inline constexpr std::string_view kNonCarbonColor = "#fff3c4";

// Linear RGB ramp from kFossilColor (0) to kBiogenicColor (1); clamped.
std::string interpolate_color(double share);

struct SankeyNode {
  std::string id;
  std::string label;
  // "mix" or "production".
  std::string kind;
  // "inlet", "terminal", "intermediate" or "process".
  std::string color_class;
};

struct SankeyLink {
  std::string source;
  std::string target;
  std::string smiles;
  // alpha * lambda into production nodes, mu * lambda into mix nodes.
  double width = 0;
  std::string color;
  // Attribute share of the source site; empty for untracked substances.
  std::optional<double> share;
};

struct SankeyDocument {
  std::vector<SankeyNode> nodes;
  std::vector<SankeyLink> links;
  std::vector<Diagnostic> diagnostics;
};

// One link per (edge, substance carried). Substances without the tracked
// element are yellow; tracked ones take the ramp color of the source site's
// `attribute` share, falling back to gray with a warning when unsolved.
SankeyDocument emit_sankey(const ValueChainGraph &graph,
                           const AttributeSolution &solution,
                           const std::string &attribute = "biogenic",
                           const std::string &element = "C");

// Compact, deterministic JSON ({"nodes": [...], "links": [...]}).
std::string sankey_json(const SankeyDocument &doc);
// Static page embedding the JSON and a small SVG renderer; no external assets.
std::string sankey_html(const SankeyDocument &doc, std::string_view title);

struct InletOverride {
  MixNodeId node;
  // "*" selects every substance the table lists for the node.
  std::string smiles;
  std::string attribute;
  double share = 0;
  std::string element = "C";
};

// "c,p,smiles,attribute,share"; throws DataError when malformed.
InletOverride parse_override(std::string_view text);

// Copy of `inlets` with each override applied in order: the named attribute
// takes the share and the remaining attributes of that (node, smiles,
// element) are rescaled to fill the rest. Throws DataError for non-inlet
// targets, substances the table does not cover and shares outside [0, 1].
InletAttributeTable scenario_override(const ValueChainGraph &graph,
                                      const InletAttributeTable &inlets,
                                      const std::vector<InletOverride> &overrides);

// node_type,c,b,g,p,smiles,element,attribute,share
void write_beta_csv(std::ostream &out, const AttributeSolution &solution);
// node_type,c,b,g,p,smiles,element,z,q
void write_slack_csv(std::ostream &out, const AttributeSolution &solution);
// node_type,c,b,g,p,smiles,element,attribute,base,scenario,delta; sites of
// either solution, missing values reported as 0.
void write_comparison_csv(std::ostream &out, const AttributeSolution &base,
                          const AttributeSolution &scenario);

// Reads beta.csv back; slack and status are left at their defaults.
AttributeSolution read_beta_csv(std::istream &in, const std::string &name);

}  // namespace carat

#endif  // CARAT_REPORT_H_
