//
// carat - carbon attribute tracing for chemical value chains
// SPDX-License-Identifier: Apache-2.0
//

#include "support/fixtures.h"

namespace carat::testing {

std::filesystem::path fixture_dir(std::string_view name) {
  return std::filesystem::path(CARAT_FIXTURE_DIR) / name;
}

InputPaths fixture_paths(std::string_view name) {
  const std::filesystem::path dir = fixture_dir(name);
  InputPaths p;
  p.bom = dir / "bom.csv";
  p.bos = dir / "bos.csv";
  p.mix = dir / "mix.csv";
  p.inlet = dir / "inlet.csv";
  return p;
}

GraphRecords load_fixture(std::string_view name) {
  return read_records(fixture_paths(name));
}

OneNodeExample one_node_example() {
  const std::string tda = "Cc1ccc(N)cc1N";
  const std::string co = "[C-]#[O+]";
  const std::string tdi = "Cc1ccc(N=C=O)cc1N=C=O";

  OneNodeExample ex;
  ex.node = { "COMP1", "PLNT1", "PROD3" };
  GraphRecords &r = ex.records;
  const double a1 = 20.0 / 60, a2 = 40.0 / 60;
  r.bom = {
    { ex.node, ReactionRole::kReactant, "PROD1", a1, "TDA/CO blend" },
    { ex.node, ReactionRole::kReactant, "PROD2", a2, "Carbon monoxide" },
    { ex.node, ReactionRole::kProduct, "PROD3", 1.0, "TDI" },
  };
  r.bos = {
    { ex.node, ReactionRole::kReactant, "PROD1", tda, 0.8 * a1 },
    { ex.node, ReactionRole::kReactant, "PROD1", co, 0.2 * a1 },
    { ex.node, ReactionRole::kReactant, "PROD2", co, a2 },
    { ex.node, ReactionRole::kProduct, "PROD3", tdi, 1.0 },
  };
  r.mix = { { { "COMP1", "PROD3" }, ex.node, 1.0 } };
  const MixNodeId d1 { "COMP1", "PROD1" }, d2 { "COMP1", "PROD2" };
  r.inlets.rows = {
    { d1, tda, "C", "fossil", 1 }, { d1, tda, "C", "biogenic", 0 },
    { d1, co, "C", "fossil", 1 },  { d1, co, "C", "biogenic", 0 },
    { d2, co, "C", "fossil", 0 },  { d2, co, "C", "biogenic", 1 },
  };
  ex.graph = load_graph(r);
  ex.phi = {
    { tda, tdi, "C", 7, 9, 7.0 / 9 },
    { co, tdi, "C", 2, 9, 2.0 / 9 },
  };
  return ex;
}

}  // namespace carat::testing
