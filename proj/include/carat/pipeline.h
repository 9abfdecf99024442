//
// carat - carbon attribute tracing for chemical value chains
// SPDX-License-Identifier: Apache-2.0
//

#ifndef CARAT_PIPELINE_H_
#define CARAT_PIPELINE_H_

#include <string>
#include <vector>

#include "carat/atombill.h"
#include "carat/attribute_lp.h"
#include "carat/diagnostics.h"
#include "carat/error.h"
#include "carat/mapping.h"
#include "carat/records.h"
#include "carat/simplex.h"
#include "carat/valuechain.h"

namespace carat {

struct PipelineOptions {
  ElementSet elements { "C" };
  std::vector<std::string> attributes { "fossil", "biogenic" };
  // Substances below this mass fraction are dropped before tracing.
  double threshold = 0;
  int multiplicity_cap = 6;
  std::size_t token_limit = 512;
  LoadOptions load;
  SimplexOptions simplex;
};

struct NodeReactions {
  ProductionNodeId node;
  std::vector<BuiltReaction> reactions;
};

// Unmapped reaction strings for every production node with a tracked product.
// Throws TokenLimitError naming the node when a string exceeds the budget.
std::vector<NodeReactions> build_reactions(const ValueChainGraph &graph,
                                           const PipelineOptions &options);

struct AtomBills {
  PsiTable psi;
  std::vector<NodeAtomBill> bills;
  std::vector<Diagnostic> diagnostics;
};

// Maps every reaction through `provider` (one batched call), then derives
// substance- and material-level atom bills per node.
AtomBills derive_atom_bills(const ValueChainGraph &graph,
                            MappingProvider &provider,
                            const PipelineOptions &options);

struct HeadlineBcc {
  MixNodeId node;
  std::string label;
  // Attribute share of the node's tracked-element atoms, weighted by moles.
  double share = 0;
};

// One entry per terminal mix node carrying `element`. Substance weights are
// mu * lambda / molar mass * atom count over the node's producers.
std::vector<HeadlineBcc> headline_shares(const ValueChainGraph &graph,
                                         const AttributeSolution &solution,
                                         const std::string &attribute,
                                         const std::string &element = "C");

// Validation found error-severity diagnostics; all findings are attached.
class ValidationError: public DataError {
public:
  explicit ValidationError(std::vector<Diagnostic> diagnostics);

  const std::vector<Diagnostic> &diagnostics() const { return diagnostics_; }

private:
  std::vector<Diagnostic> diagnostics_;
};

struct TraceResult {
  ValueChainGraph graph;
  InletAttributeTable inlets;
  AtomBills atom_bills;
  AttributeModel model;
  AttributeSolution solution;
  std::vector<HeadlineBcc> headlines;
  // Loading, threshold, mapping and LP diagnostics in pipeline order.
  std::vector<Diagnostic> diagnostics;
};

// load -> validate -> threshold -> reactions -> mapping -> phi/psi -> LP.
// Throws ValidationError when graph or inlet validation reports errors.
TraceResult run_trace(const GraphRecords &records, MappingProvider &provider,
                      const PipelineOptions &options = {});

// Re-solves with a different inlet table, reusing graph and atom bills.
TraceResult retrace(const TraceResult &base, const InletAttributeTable &inlets,
                    const PipelineOptions &options = {});

}  // namespace carat

#endif  // CARAT_PIPELINE_H_
