//
// carat - carbon attribute tracing for chemical value chains
// SPDX-License-Identifier: Apache-2.0
//

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include <doctest.h>

#include "carat/atombill.h"
#include "carat/error.h"
#include "support/fixtures.h"

using namespace carat;
using carat::testing::kMappedTdiReaction;
using carat::testing::one_node_example;

namespace {

// Standard atomic weights, kept separate from the library table.
double formula_mass(int c, int h, int n, int o) {
  return c * 12.011 + h * 1.008 + n * 14.007 + o * 15.999;
}

const std::string kTda = "Cc1ccc(N)cc1N";
const std::string kCo = "[C-]#[O+]";
const std::string kTdi = "Cc1ccc(N=C=O)cc1N=C=O";

const PhiRow *find_phi(const PhiResult &r, const std::string &reactant,
                       const std::string &element) {
  for (const PhiRow &row: r.rows)
    if (row.reactant_smiles == reactant && row.element == element)
      return &row;
  return nullptr;
}

SubstanceResolver tdi_resolver() {
  const std::vector<std::string> subs { kTda, kCo, kTdi };
  return SubstanceResolver(subs);
}

}  // namespace

TEST_CASE("moles follow mass over molar mass") {
  const auto ex = one_node_example();
  const MoleTable t = compute_moles(ex.graph.bill(ex.node));
  REQUIRE(t.reactants.size() == 2);
  REQUIRE(t.products.size() == 1);

  const MoleEntry *tda = t.find(ReactionRole::kReactant, kTda);
  const MoleEntry *co = t.find(ReactionRole::kReactant, kCo);
  const MoleEntry *tdi = t.find(ReactionRole::kProduct, kTdi);
  REQUIRE((tda && co && tdi));
  CHECK(tda->molar_mass == doctest::Approx(formula_mass(7, 10, 2, 0)).epsilon(1e-9));
  CHECK(co->molar_mass == doctest::Approx(formula_mass(1, 0, 0, 1)).epsilon(1e-9));
  CHECK(tdi->molar_mass == doctest::Approx(formula_mass(9, 6, 2, 2)).epsilon(1e-9));
  CHECK(tda->mass == doctest::Approx(0.8 / 3));
  CHECK(co->mass == doctest::Approx(0.2 / 3 + 2.0 / 3));
  CHECK(co->moles == doctest::Approx(co->mass / formula_mass(1, 0, 0, 1)));
  CHECK(t.find(ReactionRole::kReactant, kTdi) == nullptr);
}

TEST_CASE("token counting follows the reaction SMILES tokenizer") {
  CHECK(count_smiles_tokens("CC(=O)O") == 7);
  CHECK(count_smiles_tokens("[Na+].[OH-]") == 3);
  CHECK(count_smiles_tokens("Clc1ccccc1") == 9);
  CHECK(count_smiles_tokens("C%12CC%12") == 5);
  CHECK(count_smiles_tokens("C>>C") == 4);
  CHECK(count_smiles_tokens("") == 0);
}

TEST_CASE("reaction strings repeat reactants by rounded mole ratio") {
  const auto ex = one_node_example();
  const MoleTable t = compute_moles(ex.graph.bill(ex.node));
  const auto built = build_reaction_smiles(t);
  REQUIRE(built.size() == 1);

  // Independent multiplicities from formula masses.
  const double n_tdi = 1.0 / formula_mass(9, 6, 2, 2);
  const long k_tda = std::clamp<long>(
      std::lround(0.8 / 3 / formula_mass(7, 10, 2, 0) / n_tdi), 1, 6);
  const long k_co = std::clamp<long>(
      std::lround((0.2 / 3 + 2.0 / 3) / formula_mass(1, 0, 0, 1) / n_tdi), 1, 6);
  std::string expected;
  for (long i = 0; i < k_tda; ++i)
    expected += (expected.empty() ? "" : ".") + kTda;
  for (long i = 0; i < k_co; ++i)
    expected += "." + kCo;
  expected += ">>" + kTdi;
  CHECK(built[0].product_smiles == kTdi);
  CHECK(built[0].text == expected);
  CHECK(built[0].tokens == count_smiles_tokens(expected) + 2);

  ReactionBuildOptions capped;
  capped.multiplicity_cap = 2;
  const auto two = build_reaction_smiles(t, capped);
  CHECK(two[0].text == kTda + "." + kCo + "." + kCo + ">>" + kTdi);
}

TEST_CASE("reaction strings skip untracked products and enforce the token limit") {
  BillOfSubstances b;
  b.materials.push_back({ ReactionRole::kReactant, "A", 1, { { "CO", 1, 0 } } });
  b.materials.push_back({ ReactionRole::kProduct, "B", 0.5, { { "C", 1, 0 } } });
  b.materials.push_back({ ReactionRole::kProduct, "W", 0.5, { { "O", 1, 0 } } });
  b.normalize();
  const MoleTable t = compute_moles(b);
  const auto built = build_reaction_smiles(t);
  REQUIRE(built.size() == 1);
  CHECK(built[0].product_smiles == "C");

  ReactionBuildOptions with_o;
  with_o.elements = { "C", "O" };
  CHECK(build_reaction_smiles(t, with_o).size() == 2);

  ReactionBuildOptions tight;
  tight.token_limit = 4;
  try {
    build_reaction_smiles(t, tight, "t:X|Y|B");
    FAIL("expected TokenLimitError");
  } catch (const TokenLimitError &e) {
    CHECK(e.location() == "t:X|Y|B");
    CHECK(e.tokens() == count_smiles_tokens("CO>>C") + 2);
  }

  CHECK_THROWS_AS(build_reaction_smiles(MoleTable {}), DataError);
}

TEST_CASE("phi of the mapped TDI reaction is exact per element") {
  const std::vector<Reaction> rs { parse_reaction(kMappedTdiReaction) };
  const SubstanceResolver resolver = tdi_resolver();
  const PhiResult phi = derive_phi(rs, { "C", "H", "N", "O" }, &resolver);
  CHECK(phi.diagnostics.empty());

  struct Expect {
    std::string reactant, element;
    int count, total;
  };
  const std::vector<Expect> expected {
    { kTda, "C", 7, 9 }, { kCo, "C", 2, 9 }, { kTda, "H", 6, 6 },
    { kTda, "N", 2, 2 }, { kCo, "O", 2, 2 },
  };
  CHECK(phi.rows.size() == expected.size());
  for (const Expect &e: expected) {
    CAPTURE(e.reactant);
    CAPTURE(e.element);
    const PhiRow *row = find_phi(phi, e.reactant, e.element);
    REQUIRE(row);
    CHECK(row->product_smiles == kTdi);
    CHECK(row->atom_count == e.count);
    CHECK(row->total_atoms == e.total);
    CHECK(row->share == static_cast<double>(e.count) / e.total);
  }
  CHECK(check_conservation(rs, phi, { "C", "H", "N", "O" }, &resolver).empty());

  // Without a resolver the names are the map-stripped components.
  const PhiResult bare = derive_phi(rs, { "C" });
  REQUIRE(bare.rows.size() == 2);
  CHECK(find_phi(bare, kCo, "C"));
}

TEST_CASE("phi splits oxygen between two reactants") {
  const std::vector<Reaction> rs { parse_reaction("[C-:1]#[O+:2].[OH2:3]>>[O:2]=[C:1]=[O:3]") };
  const PhiResult phi = derive_phi(rs, { "C", "O" });
  const PhiRow *co = find_phi(phi, kCo, "O");
  const PhiRow *water = find_phi(phi, "O", "O");
  REQUIRE((co && water));
  CHECK(co->share == 0.5);
  CHECK(water->share == 0.5);
  CHECK(find_phi(phi, kCo, "C")->share == 1.0);
}

TEST_CASE("phi rejects unusable mappings") {
  SUBCASE("unmapped") {
    const std::vector<Reaction> rs { parse_reaction("CO>>C") };
    CHECK_THROWS_AS(derive_phi(rs, { "C" }), MappingError);
  }
  SUBCASE("two products") {
    const std::vector<Reaction> rs { parse_reaction("[CH3:1][CH3:2]>>[CH4:1].[CH4:2]") };
    CHECK_THROWS_WITH_AS(derive_phi(rs, { "C" }),
                         doctest::Contains("multiplicity"), MappingError);
  }
  SUBCASE("same product twice") {
    const std::vector<Reaction> rs { parse_reaction("[CH4:1]>>[CH4:1]"),
                                     parse_reaction("[CH3:1][OH:2]>>[CH4:1]") };
    CHECK_THROWS_AS(derive_phi(rs, { "C" }), MappingError);
  }
}

TEST_CASE("unmapped product atoms are reported, not attributed") {
  const std::vector<Reaction> rs { parse_reaction("[CH4:1]>>[CH3:1]C") };
  const PhiResult phi = derive_phi(rs, { "C" });
  REQUIRE(phi.rows.size() == 1);
  CHECK(phi.rows[0].atom_count == 1);
  CHECK(phi.rows[0].share == 0.5);
  bool seen = false;
  for (const Diagnostic &d: phi.diagnostics)
    if (d.code == "unattributed") {
      seen = true;
      CHECK(*d.value == 0.5);
    }
  CHECK(seen);
}

TEST_CASE("conservation flags credit beyond supply") {
  const std::vector<Reaction> rs { parse_reaction(kMappedTdiReaction) };
  const SubstanceResolver resolver = tdi_resolver();
  PhiResult phi = derive_phi(rs, { "C" }, &resolver);
  for (PhiRow &row: phi.rows)
    if (row.reactant_smiles == kCo)
      row.atom_count = 3;
  const auto ds = check_conservation(rs, phi, { "C" }, &resolver);
  REQUIRE(ds.size() == 1);
  CHECK(ds[0].code == "conservation");
  CHECK(ds[0].severity == Severity::kError);

  PhiResult partial = derive_phi(rs, { "C" }, &resolver);
  partial.rows.pop_back();
  const auto warn = check_conservation(rs, partial, { "C" }, &resolver);
  REQUIRE(warn.size() == 1);
  CHECK(warn[0].severity == Severity::kWarning);
}

TEST_CASE("psi spreads phi over the materials carrying each reactant") {
  const auto ex = one_node_example();
  const PsiResult psi = derive_psi(ex.phi, ex.graph.bill(ex.node));
  CHECK(psi.diagnostics.empty());
  REQUIRE(psi.rows.size() == 3);
  std::map<std::pair<std::string, std::string>, double> got;
  for (const PsiRow &r: psi.rows) {
    CHECK(r.product_material == "PROD3");
    got[{ r.reactant_material, r.reactant_smiles }] = r.share;
  }
  CHECK(got.at({ "PROD1", kTda }) == doctest::Approx(7.0 / 9).epsilon(1e-12));
  CHECK(got.at({ "PROD1", kCo }) == doctest::Approx(2.0 / 99).epsilon(1e-12));
  CHECK(got.at({ "PROD2", kCo }) == doctest::Approx(20.0 / 99).epsilon(1e-12));

  std::vector<PhiRow> stray = ex.phi;
  stray.push_back({ "CCO", kTdi, "C", 1, 9, 1.0 / 9 });
  stray.push_back({ kTda, "CCCC", "C", 1, 4, 0.25 });
  const PsiResult bad = derive_psi(stray, ex.graph.bill(ex.node), "t:x");
  CHECK(bad.diagnostics.size() == 2);
  CHECK(bad.diagnostics[0].code == "psi-unknown-reactant");
  CHECK(bad.diagnostics[1].code == "psi-unknown-product");
}

TEST_CASE("atom bill CSV") {
  const auto ex = one_node_example();
  const std::vector<NodeAtomBill> bills {
    { ex.node, derive_psi(ex.phi, ex.graph.bill(ex.node)).rows }
  };
  std::ostringstream out;
  write_boa_csv(out, bills);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "node_c,node_b,node_g,reactant_material,reactant_smiles,"
                "product_material,product_smiles,element,atom_count,atom_share");
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    CHECK(line.rfind("COMP1,PLNT1,PROD3,", 0) == 0);
  }
  CHECK(rows == 3);
}

TEST_CASE("property: chain joins split carbon by reactant length") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    // Distinct chain lengths keep the reactant names distinct.
    std::vector<int> lengths { 1, 2, 3, 4, 5, 6 };
    std::shuffle(lengths.begin(), lengths.end(), rng);
    lengths.resize(std::uniform_int_distribution<std::size_t>(1, 4)(rng));

    std::string reactants, product;
    int next = 1;
    for (int n: lengths) {
      std::string chain;
      for (int i = 0; i < n; ++i) {
        const std::string atom = "[C:" + std::to_string(next++) + "]";
        chain += atom;
        product += atom;
      }
      reactants += (reactants.empty() ? "" : ".") + chain;
    }
    const std::vector<Reaction> rs { parse_reaction(reactants + ">>" + product) };
    const PhiResult phi = derive_phi(rs, { "C" });
    const int total = std::accumulate(lengths.begin(), lengths.end(), 0);
    CAPTURE(reactants);
    REQUIRE(phi.rows.size() == lengths.size());
    double sum = 0;
    for (const PhiRow &row: phi.rows) {
      const int n = parse_molecule(row.reactant_smiles).count("C");
      CHECK(row.atom_count == n);
      CHECK(row.total_atoms == total);
      sum += row.share;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(check_conservation(rs, phi, { "C" }).empty());

    // Reordering the reactant components leaves phi unchanged.
    std::vector<std::string> parts;
    std::stringstream split(reactants);
    for (std::string part; std::getline(split, part, '.');)
      parts.push_back(part);
    std::shuffle(parts.begin(), parts.end(), rng);
    std::string permuted;
    for (const std::string &part: parts)
      permuted += (permuted.empty() ? "" : ".") + part;
    const std::vector<Reaction> rp { parse_reaction(permuted + ">>" + product) };
    auto key = [](const PhiResult &r) {
      std::map<std::string, int> m;
      for (const PhiRow &row: r.rows)
        m[row.reactant_smiles] = row.atom_count;
      return m;
    };
    CHECK(key(derive_phi(rp, { "C" })) == key(phi));
  }
}

TEST_CASE("property: psi preserves the phi total for every product") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(0.05, 1);
  for (int trial = 0; trial < 60; ++trial) {
    // Reactant CO in up to three materials, product CCO.
    BillOfSubstances b;
    const int k = std::uniform_int_distribution<int>(1, 3)(rng);
    for (int i = 0; i < k; ++i)
      b.materials.push_back({ ReactionRole::kReactant, "M" + std::to_string(i), u(rng),
                              { { "CO", u(rng), 0 }, { "CC", u(rng), 0 } } });
    b.materials.push_back({ ReactionRole::kProduct, "P", 1, { { "CCO", 1, 0 } } });
    b.normalize();
    const double s = u(rng) / 2;
    const std::vector<PhiRow> phi { { "CO", "CCO", "C", 1, 2, s },
                                    { "CC", "CCO", "C", 1, 2, 1 - s } };
    const PsiResult psi = derive_psi(phi, b);
    CHECK(psi.rows.size() == static_cast<std::size_t>(2 * k));
    double co = 0, cc = 0;
    for (const PsiRow &r: psi.rows) {
      CHECK(r.share >= 0);
      (r.reactant_smiles == "CO" ? co : cc) += r.share;
    }
    CHECK(co == doctest::Approx(s).epsilon(1e-12));
    CHECK(cc == doctest::Approx(1 - s).epsilon(1e-12));
  }
}
