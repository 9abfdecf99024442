//
// carat - carbon attribute tracing for chemical value chains
// SPDX-License-Identifier: Apache-2.0
//

#ifndef CARAT_TESTS_FIXTURES_H_
#define CARAT_TESTS_FIXTURES_H_

#include <filesystem>
#include <string_view>
#include <vector>

#include "carat/atombill.h"
#include "carat/records.h"
#include "carat/valuechain.h"

namespace carat::testing {

// tests/fixtures/<name>
std::filesystem::path fixture_dir(std::string_view name);

// bom.csv, bos.csv, mix.csv and inlet.csv of a fixture directory.
GraphRecords load_fixture(std::string_view name);
InputPaths fixture_paths(std::string_view name);

// Single TDI production step fed by two tanks: PROD1 (alpha 20/60, TDA 0.8 and
// CO 0.2 by mass, fossil) and PROD2 (alpha 40/60, pure CO, biogenic). Phi has
// TDA contributing 7 of 9 carbons and CO the other 2.
struct OneNodeExample {
  GraphRecords records;
  ValueChainGraph graph;
  ProductionNodeId node;
  std::vector<PhiRow> phi;
};

OneNodeExample one_node_example();

// Mapped TDA + 2 CO -> TDI reaction, as returned by the atom mapper.
inline constexpr std::string_view kMappedTdiReaction =
    "[CH3:1][c:2]1[cH:3][cH:4][c:5]([NH2:6])[cH:9][c:10]1[NH2:11]."
    "[C-:12]#[O+:13].[C-:7]#[O+:8]>>"
    "[CH3:1][c:2]1[cH:3][cH:4][c:5]([N:6]=[C:7]=[O:8])[cH:9][c:10]1"
    "[N:11]=[C:12]=[O:13]";

}  // namespace carat::testing

#endif  // CARAT_TESTS_FIXTURES_H_
