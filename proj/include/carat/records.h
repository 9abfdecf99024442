//
// carat - carbon attribute tracing for chemical value chains
// SPDX-License-Identifier: Apache-2.0
//

#ifndef CARAT_RECORDS_H_
#define CARAT_RECORDS_H_

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "carat/diagnostics.h"
#include "carat/valuechain.h"

namespace carat {

class CsvTable;

// One row of bom.csv.
struct BomRecord {
  ProductionNodeId node;
  ReactionRole role = ReactionRole::kReactant;
  std::string material;
  double ratio = 0;
  // Optional human label ("Carbon Monoxide").
  std::string material_text;

  bool operator==(const BomRecord &) const = default;
};

// One row of bos.csv.
struct BosRecord {
  ProductionNodeId node;
  ReactionRole role = ReactionRole::kReactant;
  std::string material;
  std::string smiles;
  double ratio = 0;

  bool operator==(const BosRecord &) const = default;
};

// One row of mix.csv: share of mix node `mix` sourced from `source`.
struct MixRecord {
  MixNodeId mix;
  ProductionNodeId source;
  double mu = 0;

  bool operator==(const MixRecord &) const = default;
};

struct GraphRecords {
  std::vector<BomRecord> bom;
  std::vector<BosRecord> bos;
  std::vector<MixRecord> mix;
  InletAttributeTable inlets;

  bool operator==(const GraphRecords &) const = default;
};

std::vector<BomRecord> read_bom(const CsvTable &table);
std::vector<BosRecord> read_bos(const CsvTable &table);
std::vector<MixRecord> read_mix(const CsvTable &table);
InletAttributeTable read_inlets(const CsvTable &table);

void write_bom(std::ostream &out, const std::vector<BomRecord> &rows);
void write_bos(std::ostream &out, const std::vector<BosRecord> &rows);
void write_mix(std::ostream &out, const std::vector<MixRecord> &rows);
void write_inlets(std::ostream &out, const InletAttributeTable &inlets);

// Single-document form with keys "bom", "bos", "mix", "inlet"; each an array
// of objects using the CSV column names.
GraphRecords read_bundle(std::istream &in, const std::string &name);
void write_bundle(std::ostream &out, const GraphRecords &records);

struct InputPaths {
  std::filesystem::path bom;
  std::filesystem::path bos;
  std::filesystem::path mix;
  std::filesystem::path inlet;
  std::filesystem::path bundle;
};

// Reads either the bundle or the four CSV files. An absent inlet path yields
// an empty table. Throws std::ios_base::failure for unreadable files and
// DataError for malformed content.
GraphRecords read_records(const InputPaths &paths);

struct LoadOptions {
  // Raw mu sums this close to 1 are rescaled with a warning.
  double mu_tolerance = 1e-3;
  // Disables the rescaling entirely (used to exercise slack reporting).
  bool normalize_mu = true;
  // Adds a terminal mix node (c, p) for product materials no mix row consumes.
  bool synthesize_terminals = true;
};

// Builds the graph: alpha edges from reactant BOM rows, mu edges from mix
// rows, lambda from BOS ratios. Throws DataError for dangling references and
// duplicate definitions.
ValueChainGraph load_graph(const GraphRecords &records,
                           const LoadOptions &options = {},
                           std::vector<Diagnostic> *notes = nullptr);

// Inverse of load_graph up to row order; λ is written back as the BOS ratio
// scaled by the material ratio.
GraphRecords to_records(const ValueChainGraph &graph,
                        const InletAttributeTable &inlets);

}  // namespace carat

#endif  // CARAT_RECORDS_H_
