#pragma once

#include <cstddef>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

namespace rpkitor {

// Sparse linear row: sum(coef * x[index]) (sense) rhs.
struct LinearRow {
  std::vector<std::pair<std::size_t, double>> terms;
  double rhs = 0;
};

// maximize objective . x
// subject to equalities (==), inequalities (<=), 0 <= x <= upper_bounds.
struct LpProblem {
  std::size_t num_vars = 0;
  std::vector<double> objective;
  std::vector<LinearRow> equalities;
  std::vector<LinearRow> inequalities;
  std::vector<double> upper_bounds;  // +inf when unbounded above

  static constexpr double kInfinity = std::numeric_limits<double>::infinity();

  // Throws std::invalid_argument when sizes or indices disagree with num_vars.
  void check() const;

  double evaluate(const std::vector<double>& x) const;

  // Largest violation of any equality, inequality and bound respectively.
  struct Residuals {
    double equality = 0;
    double inequality = 0;
    double bounds = 0;
  };
  Residuals residuals(const std::vector<double>& x) const;
};

struct LpSolution {
  std::vector<double> x;
  double objective = 0;
  std::size_t iterations = 0;
};

class LpInfeasible : public std::runtime_error {
 public:
  LpInfeasible() : std::runtime_error("linear program is infeasible") {}
};

class LpUnbounded : public std::runtime_error {
 public:
  LpUnbounded() : std::runtime_error("linear program is unbounded") {}
};

// Two-phase primal simplex on a dense tableau with implicit variable bounds.
// Dantzig pricing, falling back to Bland's rule while pivots stay degenerate.
// Deterministic for a given problem. Memory is (rows) x (vars + rows); meant for
// problems up to a few thousand variables.
LpSolution solve_lp(const LpProblem& problem);

}  // namespace rpkitor
