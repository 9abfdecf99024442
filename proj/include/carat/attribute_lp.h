//
// carat - carbon attribute tracing for chemical value chains
// SPDX-License-Identifier: Apache-2.0
//

#ifndef CARAT_ATTRIBUTE_LP_H_
#define CARAT_ATTRIBUTE_LP_H_

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "carat/atombill.h"
#include "carat/diagnostics.h"
#include "carat/simplex.h"
#include "carat/valuechain.h"

namespace carat {

// Material-level atom bills per production node.
using PsiTable = std::map<ProductionNodeId, std::vector<PsiRow>>;

// One (node, material, substance, element) combination. Mix sites use the
// mix node's product code as material.
struct SiteKey {
  NodeId node;
  std::string material;
  std::string smiles;
  std::string element;

  auto operator<=>(const SiteKey &) const = default;
};

std::string to_string(const SiteKey &key);

struct Site {
  SiteKey key;
  bool inlet = false;
  // Variable index per attribute, in attribute order.
  std::vector<std::size_t> beta;
  std::size_t z = 0;
  // Non-negative stand-in for the negative slack: q = -q_hat.
  std::size_t q_hat = 0;
};

struct AttributeModel {
  LinearProgram lp;
  std::vector<std::string> attributes;
  // In build order: production sites by node, then mix sites by node.
  std::vector<Site> sites;
  std::map<SiteKey, std::size_t> site_index;
  std::vector<Diagnostic> diagnostics;

  const Site *find(const SiteKey &key) const;
  // Plain-text equation listing, one constraint per line.
  std::string dump() const { return lp.dump(); }
};

// Builds the slack-minimizing program. Sites exist for nodes reachable from
// the inlet set and substances containing a tracked element. Inlet betas are
// fixed to the table's shares. Throws DataError for an inlet substance the
// table does not cover and for bills naming unknown nodes.
AttributeModel build_lp(const ValueChainGraph &graph, const PsiTable &psi,
                        const InletAttributeTable &inlets,
                        const std::vector<std::string> &attributes,
                        const ElementSet &elements);

struct BetaValue {
  SiteKey key;
  std::string attribute;
  double value = 0;
};

struct SlackValue {
  SiteKey key;
  double z = 0;
  // Reported with its natural sign (<= 0).
  double q = 0;
};

struct AttributeSolution {
  LpStatus status = LpStatus::kOptimal;
  std::vector<std::string> attributes;
  // Site order of the model; attributes vary fastest.
  std::vector<BetaValue> beta;
  std::vector<SlackValue> slack;
  double total_slack = 0;
  double max_residual = 0;
  std::size_t iterations = 0;
  std::vector<Diagnostic> diagnostics;

  std::optional<double> find(const SiteKey &key,
                             const std::string &attribute) const;
};

AttributeSolution solve(const AttributeModel &model,
                        const SimplexOptions &options = {});

// Sites with |z| + |q| above `threshold`, largest first; ties keep build order.
std::vector<SlackValue> slack_report(const AttributeSolution &solution,
                                     double threshold = 1e-9);

}  // namespace carat

#endif  // CARAT_ATTRIBUTE_LP_H_
