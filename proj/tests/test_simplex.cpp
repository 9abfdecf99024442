//
// carat - carbon attribute tracing for chemical value chains
// SPDX-License-Identifier: Apache-2.0
//

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <random>

#include <doctest.h>

#include "carat/simplex.h"

using carat::LinearProgram;
using carat::LpStatus;
using Sense = LinearProgram::Sense;

namespace {

// Brute-force oracle: every choice of n active constraints (rows or bounds)
// gives a candidate vertex; the best feasible one is the optimum of a
// bounded program. Plain Gaussian elimination, independent of the solver.
std::optional<double> vertex_optimum(const LinearProgram &lp) {
  const std::size_t n = lp.variables().size();
  struct Plane {
    std::vector<double> a;
    double b;
  };
  std::vector<Plane> planes;
  for (const auto &c: lp.constraints()) {
    Plane p { std::vector<double>(n, 0.0), c.rhs };
    for (const auto &t: c.terms)
      p.a[t.variable] += t.coefficient;
    planes.push_back(p);
  }
  for (std::size_t i = 0; i < n; ++i) {
    Plane lo { std::vector<double>(n, 0.0), lp.variables()[i].lower };
    lo.a[i] = 1;
    planes.push_back(lo);
    Plane hi { std::vector<double>(n, 0.0), lp.variables()[i].upper };
    hi.a[i] = 1;
    planes.push_back(hi);
  }

  std::optional<double> best;
  std::vector<std::size_t> pick(n);
  // Iterate over n-subsets of planes.
  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t start,
                                                          std::size_t depth) {
    if (depth == n) {
      std::vector<std::vector<double>> m(n, std::vector<double>(n + 1));
      for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c)
          m[r][c] = planes[pick[r]].a[c];
        m[r][n] = planes[pick[r]].b;
      }
      for (std::size_t c = 0; c < n; ++c) {
        std::size_t p = c;
        for (std::size_t r = c + 1; r < n; ++r)
          if (std::abs(m[r][c]) > std::abs(m[p][c]))
            p = r;
        if (std::abs(m[p][c]) < 1e-12)
          return;
        std::swap(m[p], m[c]);
        for (std::size_t r = 0; r < n; ++r) {
          if (r == c)
            continue;
          const double f = m[r][c] / m[c][c];
          for (std::size_t k = c; k <= n; ++k)
            m[r][k] -= f * m[c][k];
        }
      }
      std::vector<double> x(n);
      for (std::size_t i = 0; i < n; ++i)
        x[i] = m[i][n] / m[i][i];
      if (lp.max_violation(x) > 1e-9)
        return;
      const double obj = lp.objective(x);
      if (!best || obj < *best)
        best = obj;
      return;
    }
    for (std::size_t i = start; i < planes.size(); ++i) {
      pick[depth] = i;
      rec(i + 1, depth + 1);
    }
  };
  rec(0, 0);
  return best;
}

}  // namespace

TEST_CASE("textbook maximization") {
  LinearProgram lp;
  auto x = lp.add_variable("x", 0, LinearProgram::kInfinity, -3);
  auto y = lp.add_variable("y", 0, LinearProgram::kInfinity, -5);
  lp.add_constraint("c1", { { x, 1 } }, Sense::kLessEqual, 4);
  lp.add_constraint("c2", { { y, 2 } }, Sense::kLessEqual, 12);
  lp.add_constraint("c3", { { x, 3 }, { y, 2 } }, Sense::kLessEqual, 18);
  auto r = carat::solve(lp);
  REQUIRE(r.status == LpStatus::kOptimal);
  CHECK(r.x[x] == doctest::Approx(2).epsilon(1e-12));
  CHECK(r.x[y] == doctest::Approx(6).epsilon(1e-12));
  CHECK(r.objective == doctest::Approx(-36));
}

TEST_CASE("equality and greater-equal rows need phase one") {
  LinearProgram lp;
  auto x = lp.add_variable("x", 0, 10, 1);
  auto y = lp.add_variable("y", 0, 10, 2);
  lp.add_constraint("sum", { { x, 1 }, { y, 1 } }, Sense::kEqual, 3);
  lp.add_constraint("floor", { { y, 1 } }, Sense::kGreaterEqual, 1);
  auto r = carat::solve(lp);
  REQUIRE(r.status == LpStatus::kOptimal);
  CHECK(r.x[x] == doctest::Approx(2));
  CHECK(r.x[y] == doctest::Approx(1));
  CHECK(lp.max_violation(r.x) < 1e-9);
}

TEST_CASE("negative right-hand sides and shifted lower bounds") {
  LinearProgram lp;
  auto x = lp.add_variable("x", -5, 5, 1);
  auto y = lp.add_variable("y", 1, 4, 1);
  lp.add_constraint("c", { { x, 1 }, { y, -1 } }, Sense::kGreaterEqual, -3);
  auto r = carat::solve(lp);
  REQUIRE(r.status == LpStatus::kOptimal);
  // y as small as possible, then x >= y - 3.
  CHECK(r.x[y] == doctest::Approx(1));
  CHECK(r.x[x] == doctest::Approx(-2));
}

TEST_CASE("fixed variables are substituted") {
  LinearProgram lp;
  auto h = lp.add_variable("h", 0.25, 0.25, 0);
  auto b = lp.add_variable("b", 0, 1, 0);
  auto z = lp.add_variable("z", 0, LinearProgram::kInfinity, 1);
  lp.add_constraint("prop", { { b, 1 }, { h, -0.5 } }, Sense::kEqual, 0);
  lp.add_constraint("norm", { { b, 1 }, { z, -1 } }, Sense::kEqual, 0.125);
  auto r = carat::solve(lp);
  REQUIRE(r.status == LpStatus::kOptimal);
  CHECK(r.x[h] == 0.25);
  CHECK(r.x[b] == doctest::Approx(0.125).epsilon(1e-12));
  CHECK(r.x[z] == doctest::Approx(0).scale(1));
}

TEST_CASE("infeasible and unbounded programs") {
  {
    LinearProgram lp;
    auto x = lp.add_variable("x", 0, LinearProgram::kInfinity, 1);
    lp.add_constraint("lo", { { x, 1 } }, Sense::kGreaterEqual, 2);
    lp.add_constraint("hi", { { x, 1 } }, Sense::kLessEqual, 1);
    CHECK(carat::solve(lp).status == LpStatus::kInfeasible);
  }
  {
    LinearProgram lp;
    auto x = lp.add_variable("x", 0, LinearProgram::kInfinity, -1);
    auto y = lp.add_variable("y", 0, LinearProgram::kInfinity, 0);
    lp.add_constraint("c", { { x, 1 }, { y, -1 } }, Sense::kLessEqual, 1);
    CHECK(carat::solve(lp).status == LpStatus::kUnbounded);
  }
}

TEST_CASE("empty program is trivially optimal") {
  LinearProgram lp;
  auto r = carat::solve(lp);
  CHECK(r.status == LpStatus::kOptimal);
  CHECK(r.objective == 0);
  CHECK(r.x.empty());
}

TEST_CASE("Beale's cycling example terminates under Bland's rule") {
  LinearProgram lp;
  auto x4 = lp.add_variable("x4", 0, LinearProgram::kInfinity, -0.75);
  auto x5 = lp.add_variable("x5", 0, LinearProgram::kInfinity, 20);
  auto x6 = lp.add_variable("x6", 0, LinearProgram::kInfinity, -0.5);
  auto x7 = lp.add_variable("x7", 0, LinearProgram::kInfinity, 6);
  lp.add_constraint("r1", { { x4, 0.25 }, { x5, -8 }, { x6, -1 }, { x7, 9 } },
                    Sense::kLessEqual, 0);
  lp.add_constraint("r2", { { x4, 0.5 }, { x5, -12 }, { x6, -0.5 }, { x7, 3 } },
                    Sense::kLessEqual, 0);
  lp.add_constraint("r3", { { x6, 1 } }, Sense::kLessEqual, 1);
  auto r = carat::solve(lp);
  REQUIRE(r.status == LpStatus::kOptimal);
  CHECK(r.objective == doctest::Approx(-1.25).epsilon(1e-12));
}

TEST_CASE("iteration cap is reported") {
  LinearProgram lp;
  auto x = lp.add_variable("x", 0, LinearProgram::kInfinity, -3);
  auto y = lp.add_variable("y", 0, LinearProgram::kInfinity, -5);
  lp.add_constraint("c3", { { x, 3 }, { y, 2 } }, Sense::kLessEqual, 18);
  lp.add_constraint("c2", { { y, 2 } }, Sense::kLessEqual, 12);
  carat::SimplexOptions options;
  options.iteration_limit = 1;
  CHECK(carat::solve(lp, options).status == LpStatus::kIterationLimit);
}

TEST_CASE("dump lists one constraint per line") {
  LinearProgram lp;
  auto x = lp.add_variable("x", 0, 1, 1);
  lp.add_constraint("row_a", { { x, 0.5 } }, Sense::kEqual, 0.25);
  lp.add_constraint("row_b", { { x, -1 } }, Sense::kLessEqual, 0);
  const std::string text = lp.dump();
  CHECK(text.find("row_a: + 0.5 x = 0.25\n") != std::string::npos);
  CHECK(text.find("row_b: - 1 x <= 0\n") != std::string::npos);
  CHECK(text.find("minimize: + 1 x\n") != std::string::npos);
}

TEST_CASE("property: random bounded programs match vertex enumeration") {
  std::mt19937_64 rng(20250917);
  std::uniform_int_distribution<int> nvars(1, 4), nrows(1, 4), sense(0, 2);
  std::uniform_real_distribution<double> coef(-3, 3), ub(0.5, 4);
  int optimal = 0, infeasible = 0;
  for (int trial = 0; trial < 300; ++trial) {
    LinearProgram lp;
    const int n = nvars(rng);
    for (int i = 0; i < n; ++i) {
      const double lo = coef(rng) / 3;
      lp.add_variable("x" + std::to_string(i), lo, lo + ub(rng), coef(rng));
    }
    const int m = nrows(rng);
    for (int r = 0; r < m; ++r) {
      std::vector<LinearProgram::Term> terms;
      for (int i = 0; i < n; ++i)
        terms.push_back({ static_cast<std::size_t>(i), coef(rng) });
      lp.add_constraint("r" + std::to_string(r), terms,
                        static_cast<Sense>(sense(rng)), coef(rng));
    }
    const auto oracle = vertex_optimum(lp);
    const auto r = carat::solve(lp);
    CAPTURE(trial);
    CAPTURE(lp.dump());
    if (!oracle) {
      CHECK(r.status == LpStatus::kInfeasible);
      ++infeasible;
      continue;
    }
    REQUIRE(r.status == LpStatus::kOptimal);
    CHECK(lp.max_violation(r.x) < 1e-8);
    CHECK(r.objective == doctest::Approx(*oracle).epsilon(1e-8).scale(1));
    ++optimal;
  }
  // Both outcomes must actually be exercised.
  CHECK(optimal > 50);
  CHECK(infeasible > 10);
}

TEST_CASE("property: solving twice gives identical results") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0, 1);
  LinearProgram lp;
  for (int i = 0; i < 12; ++i)
    lp.add_variable("v" + std::to_string(i), 0, 1, u(rng));
  for (int r = 0; r < 8; ++r) {
    std::vector<LinearProgram::Term> terms;
    for (int i = 0; i < 12; ++i)
      if (u(rng) < 0.4)
        terms.push_back({ static_cast<std::size_t>(i), u(rng) });
    lp.add_constraint("r" + std::to_string(r), terms, Sense::kGreaterEqual,
                      0.2 * u(rng));
  }
  const auto a = carat::solve(lp);
  const auto b = carat::solve(lp);
  REQUIRE(a.status == LpStatus::kOptimal);
  CHECK(a.x == b.x);
  CHECK(a.iterations == b.iterations);
}
