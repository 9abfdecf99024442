//
// carat - carbon attribute tracing for chemical value chains
// SPDX-License-Identifier: Apache-2.0
//

#include "carat/simplex.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>
#include <fmt/format.h>

namespace carat {

std::size_t LinearProgram::add_variable(std::string name, double lower,
                                        double upper, double cost) {
  if (!std::isfinite(lower))
    throw std::invalid_argument("variable " + name + " needs a finite lower bound");
  if (upper < lower)
    throw std::invalid_argument("variable " + name + " has upper < lower");
  variables_.push_back({ std::move(name), lower, upper, cost });
  return variables_.size() - 1;
}

std::size_t LinearProgram::add_constraint(std::string name,
                                          std::vector<Term> terms, Sense sense,
                                          double rhs) {
  for (const Term &t: terms)
    if (t.variable >= variables_.size())
      throw std::invalid_argument("constraint " + name +
                                  " references an unknown variable");
  constraints_.push_back({ std::move(name), std::move(terms), sense, rhs });
  return constraints_.size() - 1;
}

std::string LinearProgram::dump() const {
  std::string out;
  for (const Constraint &c: constraints_) {
    out += c.name;
    out += ':';
    for (const Term &t: c.terms) {
      out += fmt::format(" {} {} {}", t.coefficient < 0 ? '-' : '+',
                         std::abs(t.coefficient), variables_[t.variable].name);
    }
    const char *sense = c.sense == Sense::kEqual       ? "="
                        : c.sense == Sense::kLessEqual ? "<="
                                                       : ">=";
    out += fmt::format(" {} {}\n", sense, c.rhs);
  }
  out += "minimize:";
  for (const Variable &v: variables_)
    if (v.cost != 0)
      out += fmt::format(" {} {} {}", v.cost < 0 ? '-' : '+', std::abs(v.cost),
                         v.name);
  out += '\n';
  for (const Variable &v: variables_)
    out += fmt::format("bounds: {} <= {} <= {}\n", v.lower, v.name, v.upper);
  return out;
}

double LinearProgram::max_violation(const std::vector<double> &x) const {
  double worst = 0;
  for (std::size_t i = 0; i < variables_.size(); ++i) {
    worst = std::max(worst, variables_[i].lower - x[i]);
    worst = std::max(worst, x[i] - variables_[i].upper);
  }
  for (const Constraint &c: constraints_) {
    double lhs = 0;
    for (const Term &t: c.terms)
      lhs += t.coefficient * x[t.variable];
    const double d = lhs - c.rhs;
    switch (c.sense) {
    case Sense::kEqual:
      worst = std::max(worst, std::abs(d));
      break;
    case Sense::kLessEqual:
      worst = std::max(worst, d);
      break;
    case Sense::kGreaterEqual:
      worst = std::max(worst, -d);
      break;
    }
  }
  return worst;
}

double LinearProgram::objective(const std::vector<double> &x) const {
  double sum = 0;
  for (std::size_t i = 0; i < variables_.size(); ++i)
    sum += variables_[i].cost * x[i];
  return sum;
}

std::string_view to_string(LpStatus status) {
  switch (status) {
  case LpStatus::kOptimal:
    return "optimal";
  case LpStatus::kInfeasible:
    return "infeasible";
  case LpStatus::kUnbounded:
    return "unbounded";
  case LpStatus::kIterationLimit:
    return "iteration-limit";
  }
  return "unknown";
}

namespace {

using Column = std::vector<std::pair<std::size_t, double>>;

// A x = b, x >= 0, b >= 0.
struct StandardForm {
  std::vector<Column> columns;
  std::vector<double> cost;
  std::vector<bool> artificial;
  Eigen::VectorXd b;
  std::vector<std::size_t> initial_basis;
  // Original variable -> standard column, or npos when fixed.
  std::vector<std::size_t> column_of;

  std::size_t rows() const { return static_cast<std::size_t>(b.size()); }
};

constexpr std::size_t npos = static_cast<std::size_t>(-1);

StandardForm standardize(const LinearProgram &lp) {
  StandardForm s;
  const auto &vars = lp.variables();
  std::vector<std::vector<std::pair<std::size_t, double>>> rows;
  std::vector<double> rhs;
  // Slack column per row with coefficient +1, if any.
  std::vector<std::size_t> slack_of;

  s.column_of.assign(vars.size(), npos);
  for (std::size_t i = 0; i < vars.size(); ++i) {
    if (vars[i].lower == vars[i].upper)
      continue;
    s.column_of[i] = s.columns.size();
    s.columns.emplace_back();
    s.cost.push_back(vars[i].cost);
    s.artificial.push_back(false);
  }

  auto add_slack = [&](std::size_t row, double sign) {
    const std::size_t j = s.columns.size();
    s.columns.emplace_back();
    s.cost.push_back(0);
    s.artificial.push_back(false);
    rows[row].push_back({ j, sign });
    return j;
  };

  for (const auto &c: lp.constraints()) {
    const std::size_t r = rows.size();
    rows.emplace_back();
    double b = c.rhs;
    for (const auto &t: c.terms) {
      const auto &v = vars[t.variable];
      b -= t.coefficient * v.lower;
      if (s.column_of[t.variable] != npos)
        rows[r].push_back({ s.column_of[t.variable], t.coefficient });
    }
    rhs.push_back(b);
    slack_of.push_back(npos);
    if (c.sense == LinearProgram::Sense::kLessEqual)
      slack_of[r] = add_slack(r, 1);
    else if (c.sense == LinearProgram::Sense::kGreaterEqual)
      slack_of[r] = add_slack(r, -1);
  }
  for (std::size_t i = 0; i < vars.size(); ++i) {
    if (s.column_of[i] == npos || std::isinf(vars[i].upper))
      continue;
    const std::size_t r = rows.size();
    rows.push_back({ { s.column_of[i], 1.0 } });
    rhs.push_back(vars[i].upper - vars[i].lower);
    slack_of.push_back(add_slack(r, 1));
  }

  // Flip rows with negative right-hand side.
  const std::size_t m = rows.size();
  std::vector<double> sign(m, 1.0);
  for (std::size_t r = 0; r < m; ++r)
    if (rhs[r] < 0)
      sign[r] = -1.0;
  for (std::size_t r = 0; r < m; ++r)
    for (const auto &[j, a]: rows[r])
      s.columns[j].push_back({ r, a * sign[r] });
  for (Column &col: s.columns) {
    // Merge duplicate entries from repeated terms.
    std::sort(col.begin(), col.end());
    Column merged;
    for (const auto &e: col) {
      if (!merged.empty() && merged.back().first == e.first)
        merged.back().second += e.second;
      else
        merged.push_back(e);
    }
    col = std::move(merged);
  }
  s.b.resize(static_cast<Eigen::Index>(m));
  for (std::size_t r = 0; r < m; ++r)
    s.b[static_cast<Eigen::Index>(r)] = rhs[r] * sign[r];

  s.initial_basis.resize(m);
  for (std::size_t r = 0; r < m; ++r) {
    const std::size_t slack = slack_of[r];
    if (slack != npos && s.columns[slack].front().second > 0) {
      s.initial_basis[r] = slack;
      continue;
    }
    s.initial_basis[r] = s.columns.size();
    s.columns.push_back({ { r, 1.0 } });
    s.cost.push_back(0);
    s.artificial.push_back(true);
  }
  return s;
}

class RevisedSimplex {
public:
  RevisedSimplex(const StandardForm &s, const SimplexOptions &options,
                 std::size_t limit)
      : s_(s), options_(options), limit_(limit), m_(s.rows()),
        basis_(s.initial_basis), is_basic_(s.columns.size(), false) {
    for (std::size_t j: basis_)
      is_basic_[j] = true;
    refactor();
  }

  // Runs to optimality for `cost`; artificial columns may enter only when
  // `allow_artificial`.
  LpStatus run(const std::vector<double> &cost, bool allow_artificial) {
    const double tol = options_.tolerance;
    const auto m = static_cast<Eigen::Index>(m_);
    Eigen::VectorXd cb(m), y(m), u(m);
    for (;;) {
      if (iterations_ >= limit_)
        return LpStatus::kIterationLimit;
      if (since_refactor_ >= options_.refactor_interval)
        refactor();

      for (Eigen::Index i = 0; i < m; ++i)
        cb[i] = cost[basis_[static_cast<std::size_t>(i)]];
      y.noalias() = binv_.transpose() * cb;

      // Bland: lowest-index improving column.
      std::size_t entering = npos;
      for (std::size_t j = 0; j < s_.columns.size(); ++j) {
        if (is_basic_[j] || (s_.artificial[j] && !allow_artificial))
          continue;
        double d = cost[j];
        for (const auto &[r, a]: s_.columns[j])
          d -= y[static_cast<Eigen::Index>(r)] * a;
        if (d < -tol) {
          entering = j;
          break;
        }
      }
      if (entering == npos)
        return LpStatus::kOptimal;

      column(entering, u);
      std::size_t leave = npos;
      double best = 0;
      for (Eigen::Index i = 0; i < m; ++i) {
        if (u[i] <= tol)
          continue;
        const double ratio = std::max(0.0, xb_[i]) / u[i];
        const auto row = static_cast<std::size_t>(i);
        // Ties go to the lowest basic column index.
        if (leave == npos || ratio < best - 1e-12) {
          best = ratio;
          leave = row;
        } else if (ratio <= best + 1e-12 && basis_[row] < basis_[leave]) {
          best = std::min(best, ratio);
          leave = row;
        }
      }
      if (leave == npos)
        return LpStatus::kUnbounded;
      pivot(leave, entering, u);
    }
  }

  // Pivots zero-valued artificial columns out of the basis where possible.
  void drive_out_artificials() {
    const auto m = static_cast<Eigen::Index>(m_);
    Eigen::VectorXd u(m);
    for (std::size_t r = 0; r < m_; ++r) {
      if (!s_.artificial[basis_[r]])
        continue;
      for (std::size_t j = 0; j < s_.columns.size(); ++j) {
        if (is_basic_[j] || s_.artificial[j])
          continue;
        double ur = 0;
        for (const auto &[k, a]: s_.columns[j])
          ur += binv_(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) * a;
        if (std::abs(ur) <= 1e-9)
          continue;
        column(j, u);
        pivot(r, j, u);
        break;
      }
    }
  }

  double value_of(std::size_t column) const {
    for (std::size_t r = 0; r < m_; ++r)
      if (basis_[r] == column)
        return std::max(0.0, xb_[static_cast<Eigen::Index>(r)]);
    return 0;
  }

  double artificial_sum() const {
    double sum = 0;
    for (std::size_t r = 0; r < m_; ++r)
      if (s_.artificial[basis_[r]])
        sum += std::abs(xb_[static_cast<Eigen::Index>(r)]);
    return sum;
  }

  std::size_t iterations() const { return iterations_; }

private:
  void column(std::size_t j, Eigen::VectorXd &u) const {
    u.setZero();
    for (const auto &[k, a]: s_.columns[j])
      u += binv_.col(static_cast<Eigen::Index>(k)) * a;
  }

  void pivot(std::size_t leave, std::size_t entering, const Eigen::VectorXd &u) {
    const auto r = static_cast<Eigen::Index>(leave);
    const double pivot = u[r];
    binv_.row(r) /= pivot;
    xb_[r] /= pivot;
    for (Eigen::Index i = 0; i < binv_.rows(); ++i) {
      if (i == r || u[i] == 0)
        continue;
      binv_.row(i) -= u[i] * binv_.row(r);
      xb_[i] -= u[i] * xb_[r];
    }
    is_basic_[basis_[leave]] = false;
    is_basic_[entering] = true;
    basis_[leave] = entering;
    ++iterations_;
    ++since_refactor_;
  }

  void refactor() {
    const auto m = static_cast<Eigen::Index>(m_);
    Eigen::MatrixXd basis_matrix = Eigen::MatrixXd::Zero(m, m);
    for (std::size_t c = 0; c < m_; ++c)
      for (const auto &[r, a]: s_.columns[basis_[c]])
        basis_matrix(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = a;
    if (m > 0) {
      Eigen::PartialPivLU<Eigen::MatrixXd> lu(basis_matrix);
      binv_ = lu.inverse();
    } else {
      binv_.resize(0, 0);
    }
    xb_ = binv_ * s_.b;
    since_refactor_ = 0;
  }

  const StandardForm &s_;
  const SimplexOptions &options_;
  std::size_t limit_;
  std::size_t m_;
  std::vector<std::size_t> basis_;
  std::vector<bool> is_basic_;
  Eigen::MatrixXd binv_;
  Eigen::VectorXd xb_;
  std::size_t iterations_ = 0;
  std::size_t since_refactor_ = 0;
};

}  // namespace

SimplexResult solve(const LinearProgram &lp, const SimplexOptions &options) {
  SimplexResult result;
  const std::size_t limit =
      options.iteration_limit ? options.iteration_limit
                              : 10 * (lp.variables().size() +
                                      lp.constraints().size()) + 10;

  const StandardForm s = standardize(lp);
  RevisedSimplex simplex(s, options, limit);

  std::vector<double> phase1(s.columns.size(), 0.0);
  bool any_artificial = false;
  for (std::size_t j = 0; j < s.columns.size(); ++j) {
    if (s.artificial[j]) {
      phase1[j] = 1;
      any_artificial = true;
    }
  }
  if (any_artificial) {
    const LpStatus status = simplex.run(phase1, true);
    if (status == LpStatus::kIterationLimit) {
      result.status = status;
      result.iterations = simplex.iterations();
      return result;
    }
    const double scale = std::max(1.0, s.b.size() ? s.b.cwiseAbs().maxCoeff() : 0.0);
    if (simplex.artificial_sum() > 10 * options.tolerance * scale) {
      result.status = LpStatus::kInfeasible;
      result.iterations = simplex.iterations();
      return result;
    }
    simplex.drive_out_artificials();
  }

  result.status = simplex.run(s.cost, false);
  result.iterations = simplex.iterations();
  if (result.status != LpStatus::kOptimal)
    return result;

  const auto &vars = lp.variables();
  result.x.resize(vars.size());
  for (std::size_t i = 0; i < vars.size(); ++i) {
    double v = vars[i].lower;
    if (s.column_of[i] != npos)
      v += simplex.value_of(s.column_of[i]);
    result.x[i] = std::min(v, vars[i].upper);
  }
  result.objective = lp.objective(result.x);
  return result;
}

}  // namespace carat
