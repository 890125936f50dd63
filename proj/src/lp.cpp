#include "rpkitor/lp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace rpkitor {

void LpProblem::check() const {
  if (objective.size() != num_vars) throw std::invalid_argument("objective length differs from num_vars");
  if (upper_bounds.size() != num_vars) throw std::invalid_argument("upper_bounds length differs from num_vars");
  for (double u : upper_bounds) {
    if (!(u >= 0.0)) throw std::invalid_argument("upper bounds must be nonnegative");
  }
  for (const auto* rows : {&equalities, &inequalities}) {
    for (const auto& row : *rows) {
      for (const auto& [idx, coef] : row.terms) {
        if (idx >= num_vars) throw std::invalid_argument("row references variable " + std::to_string(idx));
        if (!std::isfinite(coef)) throw std::invalid_argument("non-finite coefficient");
      }
      if (!std::isfinite(row.rhs)) throw std::invalid_argument("non-finite right-hand side");
    }
  }
}

double LpProblem::evaluate(const std::vector<double>& x) const {
  double v = 0;
  for (std::size_t j = 0; j < num_vars; ++j) v += objective[j] * x[j];
  return v;
}

LpProblem::Residuals LpProblem::residuals(const std::vector<double>& x) const {
  Residuals r;
  auto lhs = [&](const LinearRow& row) {
    double s = 0;
    for (const auto& [idx, coef] : row.terms) s += coef * x[idx];
    return s;
  };
  for (const auto& row : equalities) r.equality = std::max(r.equality, std::abs(lhs(row) - row.rhs));
  for (const auto& row : inequalities) r.inequality = std::max(r.inequality, lhs(row) - row.rhs);
  for (std::size_t j = 0; j < num_vars; ++j) {
    r.bounds = std::max(r.bounds, -x[j]);
    if (std::isfinite(upper_bounds[j])) r.bounds = std::max(r.bounds, x[j] - upper_bounds[j]);
  }
  return r;
}

namespace {

constexpr double kPivotTol = 1e-9;
constexpr double kCostTol = 1e-9;
constexpr double kTieTol = 1e-12;
constexpr std::size_t kDegenerateLimit = 50;
constexpr std::size_t kRefreshEvery = 200;

enum class VarState : unsigned char { lower, upper, basic };

class Simplex {
 public:
  explicit Simplex(const LpProblem& p) : n_(p.num_vars) {
    const std::size_t n_eq = p.equalities.size();
    const std::size_t n_ub = p.inequalities.size();
    m_ = n_eq + n_ub;

    std::vector<double> sign(m_, 1.0);
    for (std::size_t i = 0; i < m_; ++i) {
      const double rhs = i < n_eq ? p.equalities[i].rhs : p.inequalities[i - n_eq].rhs;
      if (rhs < 0) sign[i] = -1.0;
    }
    // An artificial for every equality row and every flipped inequality row.
    std::size_t n_art = 0;
    for (std::size_t i = 0; i < m_; ++i) {
      if (i < n_eq || sign[i] < 0) ++n_art;
    }
    first_slack_ = n_;
    first_art_ = n_ + n_ub;
    cols_ = first_art_ + n_art;

    a_.assign(m_ * cols_, 0.0);
    rhs_.assign(m_, 0.0);
    upper_.assign(cols_, LpProblem::kInfinity);
    std::copy(p.upper_bounds.begin(), p.upper_bounds.end(), upper_.begin());
    state_.assign(cols_, VarState::lower);
    basis_.assign(m_, 0);
    initial_basic_.assign(m_, 0);

    std::size_t art = first_art_;
    for (std::size_t i = 0; i < m_; ++i) {
      const LinearRow& row = i < n_eq ? p.equalities[i] : p.inequalities[i - n_eq];
      for (const auto& [idx, coef] : row.terms) at(i, idx) += sign[i] * coef;
      rhs_[i] = sign[i] * row.rhs;
      std::size_t basic = 0;
      if (i >= n_eq) {
        const std::size_t slack = first_slack_ + (i - n_eq);
        at(i, slack) = sign[i];
        if (sign[i] > 0) basic = slack;
      }
      if (i < n_eq || sign[i] < 0) {
        at(i, art) = 1.0;
        basic = art++;
      }
      basis_[i] = basic;
      initial_basic_[i] = basic;
      state_[basic] = VarState::basic;
    }
    original_ = a_;
    beta_ = rhs_;
  }

  LpSolution solve(const LpProblem& p) {
    // Phase 1: drive the artificials to zero.
    std::vector<double> cost(cols_, 0.0);
    for (std::size_t j = first_art_; j < cols_; ++j) cost[j] = -1.0;
    run(cost);
    double infeasibility = 0;
    double scale = 1.0;
    for (double b : rhs_) scale = std::max(scale, std::abs(b));
    for (std::size_t i = 0; i < m_; ++i) {
      if (basis_[i] >= first_art_) infeasibility += beta_[i];
    }
    if (infeasibility > 1e-7 * scale) throw LpInfeasible();
    for (std::size_t j = first_art_; j < cols_; ++j) upper_[j] = 0.0;
    refresh_beta();
    for (std::size_t i = 0; i < m_; ++i) {
      if (basis_[i] >= first_art_) beta_[i] = 0.0;
    }

    // Phase 2.
    std::fill(cost.begin(), cost.end(), 0.0);
    std::copy(p.objective.begin(), p.objective.end(), cost.begin());
    run(cost);
    refresh_beta();

    LpSolution sol;
    sol.x.assign(n_, 0.0);
    for (std::size_t j = 0; j < n_; ++j) {
      if (state_[j] == VarState::upper) sol.x[j] = upper_[j];
    }
    for (std::size_t i = 0; i < m_; ++i) {
      if (basis_[i] < n_) sol.x[basis_[i]] = std::clamp(beta_[i], 0.0, upper_[basis_[i]]);
    }
    sol.objective = p.evaluate(sol.x);
    sol.iterations = iterations_;
    return sol;
  }

 private:
  double& at(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
  double at(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }

  double nonbasic_value(std::size_t j) const { return state_[j] == VarState::upper ? upper_[j] : 0.0; }

  // beta = B^-1 (b - sum over nonbasic-at-upper columns). The columns of the initial
  // identity basis carry B^-1.
  void refresh_beta() {
    std::vector<double> r = rhs_;
    for (std::size_t j = 0; j < cols_; ++j) {
      if (state_[j] != VarState::upper || upper_[j] == 0.0) continue;
      for (std::size_t k = 0; k < m_; ++k) r[k] -= original_[k * cols_ + j] * upper_[j];
    }
    for (std::size_t i = 0; i < m_; ++i) {
      double v = 0;
      for (std::size_t k = 0; k < m_; ++k) v += at(i, initial_basic_[k]) * r[k];
      beta_[i] = v;
    }
  }

  void run(const std::vector<double>& cost) {
    std::vector<double> d(cols_);
    for (std::size_t j = 0; j < cols_; ++j) d[j] = cost[j];
    for (std::size_t i = 0; i < m_; ++i) {
      const double cb = cost[basis_[i]];
      if (cb == 0.0) continue;
      for (std::size_t j = 0; j < cols_; ++j) d[j] -= cb * at(i, j);
    }

    const std::size_t max_iterations = 50 * (m_ + cols_) + 10000;
    std::size_t degenerate_run = 0;
    std::size_t since_refresh = 0;
    while (true) {
      if (++iterations_ > max_iterations) throw std::runtime_error("simplex iteration limit reached");
      const bool bland = degenerate_run >= kDegenerateLimit;

      // Pricing.
      std::size_t enter = cols_;
      double best = 0;
      for (std::size_t j = 0; j < cols_; ++j) {
        if (state_[j] == VarState::basic) continue;
        double gain = 0;
        if (state_[j] == VarState::lower && upper_[j] > 0.0 && d[j] > kCostTol) gain = d[j];
        if (state_[j] == VarState::upper && d[j] < -kCostTol) gain = -d[j];
        if (gain == 0) continue;
        if (bland) {
          enter = j;
          break;
        }
        if (gain > best) {
          best = gain;
          enter = j;
        }
      }
      if (enter == cols_) return;

      // Ratio test, including the entering variable's own bound flip.
      const double dir = state_[enter] == VarState::lower ? 1.0 : -1.0;
      double step = upper_[enter];
      std::size_t leave = m_;
      bool leave_to_upper = false;
      double leave_alpha = 0;
      for (std::size_t i = 0; i < m_; ++i) {
        const double alpha = at(i, enter);
        if (std::abs(alpha) < kPivotTol) continue;
        const double rate = -dir * alpha;  // change of basic i per unit step
        const std::size_t var = basis_[i];
        double limit = 0;
        bool to_upper = false;
        if (rate < 0) {
          limit = beta_[i] / -rate;
        } else if (std::isfinite(upper_[var])) {
          limit = (upper_[var] - beta_[i]) / rate;
          to_upper = true;
        } else {
          continue;
        }
        limit = std::max(limit, 0.0);
        bool take = false;
        if (limit < step - kTieTol) {
          take = true;
        } else if (limit <= step + kTieTol && leave != m_) {
          take = bland ? var < basis_[leave] : std::abs(alpha) > std::abs(leave_alpha);
        }
        if (take) {
          step = limit;
          leave = i;
          leave_to_upper = to_upper;
          leave_alpha = alpha;
        }
      }
      if (!std::isfinite(step)) throw LpUnbounded();

      degenerate_run = step <= kTieTol ? degenerate_run + 1 : 0;

      for (std::size_t i = 0; i < m_; ++i) {
        const double alpha = at(i, enter);
        if (alpha != 0.0) beta_[i] -= dir * step * alpha;
      }

      if (leave == m_) {
        state_[enter] = state_[enter] == VarState::lower ? VarState::upper : VarState::lower;
        continue;
      }

      const std::size_t leaving = basis_[leave];
      state_[leaving] = leave_to_upper ? VarState::upper : VarState::lower;
      const double entering_value = nonbasic_value(enter) + dir * step;
      basis_[leave] = enter;
      state_[enter] = VarState::basic;
      beta_[leave] = entering_value;
      pivot(leave, enter, d);

      if (++since_refresh >= kRefreshEvery) {
        refresh_beta();
        since_refresh = 0;
      }
    }
  }

  void pivot(std::size_t r, std::size_t c, std::vector<double>& d) {
    double* prow = &a_[r * cols_];
    const double inv = 1.0 / prow[c];
    for (std::size_t j = 0; j < cols_; ++j) prow[j] *= inv;
    prow[c] = 1.0;
    // Only touch the nonzero part of the pivot row.
    nz_.clear();
    for (std::size_t j = 0; j < cols_; ++j) {
      if (prow[j] != 0.0) nz_.push_back(j);
    }
    for (std::size_t i = 0; i < m_; ++i) {
      if (i == r) continue;
      double* row = &a_[i * cols_];
      const double f = row[c];
      if (f == 0.0) continue;
      for (const std::size_t j : nz_) row[j] -= f * prow[j];
      row[c] = 0.0;
    }
    const double fd = d[c];
    if (fd != 0.0) {
      for (const std::size_t j : nz_) d[j] -= fd * prow[j];
      d[c] = 0.0;
    }
  }

  std::size_t n_;
  std::size_t m_ = 0;
  std::size_t cols_ = 0;
  std::size_t first_slack_ = 0;
  std::size_t first_art_ = 0;
  std::vector<double> a_;
  std::vector<double> original_;
  std::vector<double> rhs_;
  std::vector<double> beta_;
  std::vector<double> upper_;
  std::vector<VarState> state_;
  std::vector<std::size_t> basis_;
  std::vector<std::size_t> initial_basic_;
  std::vector<std::size_t> nz_;
  std::size_t iterations_ = 0;
};

}  // namespace

LpSolution solve_lp(const LpProblem& problem) {
  problem.check();
  if (problem.equalities.empty() && problem.inequalities.empty()) {
    // Bounds only: each variable independently at its best bound.
    LpSolution sol;
    sol.x.assign(problem.num_vars, 0.0);
    for (std::size_t j = 0; j < problem.num_vars; ++j) {
      if (problem.objective[j] > 0) {
        if (!std::isfinite(problem.upper_bounds[j])) throw LpUnbounded();
        sol.x[j] = problem.upper_bounds[j];
      }
    }
    sol.objective = problem.evaluate(sol.x);
    return sol;
  }
  Simplex simplex(problem);
  return simplex.solve(problem);
}

}  // namespace rpkitor
