//
// carat - carbon attribute tracing for chemical value chains
// SPDX-License-Identifier: Apache-2.0
//

#include <algorithm>
#include <cmath>

#include <doctest.h>

#include "carat/csv.h"
#include "carat/error.h"
#include "carat/pipeline.h"
#include "support/fixed_point_oracle.h"
#include "support/fixtures.h"

using namespace carat;
using namespace carat::testing;

namespace {

PipelineOptions tdi_options() {
  PipelineOptions o;
  o.threshold = 0.01;
  return o;
}

TraceResult trace(const std::string &fixture, const GraphRecords &records,
                  const PipelineOptions &options) {
  FileMappingProvider mapper(fixture_dir(fixture) / "mapped.csv");
  return run_trace(records, mapper, options);
}

GraphRecords tdi_case1() {
  GraphRecords r = load_fixture("tdi");
  r.inlets = read_inlets(CsvTable::read_file(fixture_dir("tdi") / "inlet_case1.csv"));
  return r;
}

const HeadlineBcc *headline(const TraceResult &r, const std::string &label) {
  for (const HeadlineBcc &h: r.headlines)
    if (h.label == label)
      return &h;
  return nullptr;
}

// Every site the LP solved agrees with the independent fixed-point iteration.
void check_against_oracle(const TraceResult &r, const PipelineOptions &o) {
  const OracleResult oracle =
      fixed_point_oracle(r.graph, r.atom_bills.psi, r.inlets, o.attributes, o.elements);
  REQUIRE(oracle.converged);
  for (const BetaValue &b: r.solution.beta) {
    const auto idx = static_cast<std::size_t>(
        std::find(o.attributes.begin(), o.attributes.end(), b.attribute) -
        o.attributes.begin());
    CAPTURE(to_string(b.key));
    CHECK(std::abs(b.value - oracle.value(b.key, idx)) < 1e-8);
  }
}

}  // namespace

TEST_CASE("reaction strings for the TDI chain are all in the mapping table") {
  const ValueChainGraph g = apply_threshold(load_graph(load_fixture("tdi")), 0.01);
  const auto reactions = build_reactions(g, tdi_options());
  CHECK(reactions.size() == 8);
  FileMappingProvider mapper(fixture_dir("tdi") / "mapped.csv");
  for (const NodeReactions &n: reactions)
    for (const BuiltReaction &r: n.reactions) {
      const std::vector<std::string> one { r.text };
      CHECK_NOTHROW(mapper.map(one));
    }
}

TEST_CASE("TDI base case is fossil throughout") {
  const TraceResult r = trace("tdi", load_fixture("tdi"), tdi_options());
  CHECK(r.solution.status == LpStatus::kOptimal);
  CHECK(r.solution.total_slack < 1e-6);
  for (const BetaValue &b: r.solution.beta)
    if (b.attribute == "biogenic")
      CHECK(std::abs(b.value) < 1e-9);
  REQUIRE(r.headlines.size() == 3);  // the waste-water terminal carries no carbon
  for (const HeadlineBcc &h: r.headlines)
    CHECK(std::abs(h.share) < 1e-9);
  CHECK(r.atom_bills.bills.size() == 8);
  check_against_oracle(r, tdi_options());
}

TEST_CASE("TDI with biogenic natural gas") {
  const TraceResult r = trace("tdi", tdi_case1(), tdi_options());
  CHECK(r.solution.total_slack < 1e-6);
  // Two of the nine TDI carbons come from carbon monoxide.
  const HeadlineBcc *tdi = headline(r, "TDI");
  REQUIRE(tdi);
  CHECK(std::abs(tdi->share - 2.0 / 9) < 1e-9);
  REQUIRE(headline(r, "Offgas"));
  CHECK(std::abs(headline(r, "Offgas")->share - 1) < 1e-9);
  REQUIRE(headline(r, "HCL"));
  CHECK(std::abs(headline(r, "HCL")->share - 1) < 1e-9);

  // Everything made from syngas carbon inherits the full share.
  int co_derived = 0;
  for (const BetaValue &b: r.solution.beta) {
    if (b.attribute != "biogenic")
      continue;
    const auto *d = std::get_if<MixNodeId>(&b.key.node);
    if (!d)
      continue;
    if (d->product == "PROD3" || d->product == "PROD10" || d->product == "PROD12" ||
        d->product == "PROD36") {
      ++co_derived;
      CAPTURE(to_string(b.key));
      CHECK(std::abs(b.value - 1) < 1e-9);
    }
    if (d->product == "PROD8" || d->product == "PROD20" || d->product == "PROD31")
      CHECK(std::abs(b.value) < 1e-9);
  }
  CHECK(co_derived >= 5);
  check_against_oracle(r, tdi_options());
}

TEST_CASE("BDO recycle chain") {
  const TraceResult r = trace("bdo", load_fixture("bdo"), {});
  CHECK(has_cycle(r.graph));
  CHECK(r.solution.total_slack < 1e-6);
  const HeadlineBcc *bdo = headline(r, "BDO");
  REQUIRE(bdo);
  CHECK(std::abs(bdo->share - 0.375) < 1e-6);
  check_against_oracle(r, {});
}

TEST_CASE("retrace reuses the atom bills") {
  const TraceResult base = trace("tdi", load_fixture("tdi"), tdi_options());
  const GraphRecords case1 = tdi_case1();
  const TraceResult again = retrace(base, case1.inlets, tdi_options());
  const TraceResult fresh = trace("tdi", case1, tdi_options());
  REQUIRE(again.solution.beta.size() == fresh.solution.beta.size());
  for (std::size_t i = 0; i < fresh.solution.beta.size(); ++i) {
    CHECK(again.solution.beta[i].key == fresh.solution.beta[i].key);
    CHECK(std::abs(again.solution.beta[i].value - fresh.solution.beta[i].value) < 1e-12);
  }
  CHECK(headline(again, "TDI")->share == doctest::Approx(2.0 / 9).epsilon(1e-12));
}

TEST_CASE("invalid data stops the trace with diagnostics") {
  GraphRecords r = load_fixture("tdi");
  for (MixRecord &m: r.mix)
    if (m.mix.product == "PROD8" && m.source.business_process == "PLNT3")
      m.mu = 0.5;
  try {
    trace("tdi", r, tdi_options());
    FAIL("expected ValidationError");
  } catch (const ValidationError &e) {
    CHECK(std::any_of(e.diagnostics().begin(), e.diagnostics().end(),
                      [](const Diagnostic &d) { return d.code == "mu-sum"; }));
  }

  GraphRecords bad_inlet = load_fixture("tdi");
  bad_inlet.inlets.rows[0].share = 0.5;
  CHECK_THROWS_AS(trace("tdi", bad_inlet, tdi_options()), ValidationError);
}

TEST_CASE("a missing mapping names the node") {
  GraphRecords r = load_fixture("bdo");
  CHECK_THROWS_WITH_AS(trace("tdi", r, {}), doctest::Contains("t:COMP5|"),
                       MappingError);
}
