//
// carat - carbon attribute tracing for chemical value chains
// SPDX-License-Identifier: Apache-2.0
//

#ifndef CARAT_SIMPLEX_H_
#define CARAT_SIMPLEX_H_

#include <cstddef>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

namespace carat {

// min c'x subject to linear rows and finite lower bounds.
class LinearProgram {
public:
  static constexpr double kInfinity = std::numeric_limits<double>::infinity();

  enum class Sense {
    kLessEqual,
    kEqual,
    kGreaterEqual,
  };

  struct Variable {
    std::string name;
    double lower = 0;
    double upper = kInfinity;
    double cost = 0;
  };

  struct Term {
    std::size_t variable;
    double coefficient;
  };

  struct Constraint {
    std::string name;
    std::vector<Term> terms;
    Sense sense = Sense::kEqual;
    double rhs = 0;
  };

  // Throws std::invalid_argument for a non-finite lower bound or upper < lower.
  std::size_t add_variable(std::string name, double lower, double upper,
                           double cost);
  std::size_t add_constraint(std::string name, std::vector<Term> terms,
                             Sense sense, double rhs);

  const std::vector<Variable> &variables() const { return variables_; }
  const std::vector<Constraint> &constraints() const { return constraints_; }
  Variable &variable(std::size_t i) { return variables_.at(i); }

  // One line per constraint, then the objective and bounds.
  std::string dump() const;

  // Largest violation of rows and bounds at x.
  double max_violation(const std::vector<double> &x) const;
  double objective(const std::vector<double> &x) const;

private:
  std::vector<Variable> variables_;
  std::vector<Constraint> constraints_;
};

enum class LpStatus {
  kOptimal,
  kInfeasible,
  kUnbounded,
  kIterationLimit,
};

std::string_view to_string(LpStatus status);

struct SimplexOptions {
  double tolerance = 1e-9;
  // 0 selects 10 * (variables + constraints).
  std::size_t iteration_limit = 0;
  // Pivots between refactorizations of the basis inverse.
  std::size_t refactor_interval = 50;
};

struct SimplexResult {
  LpStatus status = LpStatus::kOptimal;
  // Values of the program's variables (empty unless optimal).
  std::vector<double> x;
  double objective = 0;
  std::size_t iterations = 0;
};

// Dense revised simplex, two phases, Bland's rule for entering and leaving
// variables. Deterministic for a fixed program.
SimplexResult solve(const LinearProgram &lp, const SimplexOptions &options = {});

}  // namespace carat

#endif  // CARAT_SIMPLEX_H_
