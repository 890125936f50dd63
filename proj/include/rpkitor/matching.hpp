#pragma once

#include <span>
#include <string>
#include <vector>

#include "rpkitor/category.hpp"
#include "rpkitor/consensus.hpp"
#include "rpkitor/lp.hpp"

namespace rpkitor {

// Reward structure: d1 discounts a side missing ROV, d2 a side missing ROA, and B is
// the bonus for a matched pair.
struct RewardParams {
  double d1 = 0.9;
  double d2 = 0.7;
  double bonus = 1.5;

  // 0 <= d2 < d1 <= 1, B > 1, d1*d1 < B*d2. Throws InputError naming the broken condition.
  void validate() const;
  bool valid() const;
};

double unit_reward(Category c, const RewardParams& p);

// unit_reward(client) * unit_reward(relay), times B when the pair is matched.
double pair_reward(Category client, Category relay, const RewardParams& p);

enum class ObjectiveMode {
  weighted,  // coefficients T_s * P(s, r): client-distribution-weighted reward
  literal,   // coefficients P(s, r) alone
};
std::string_view to_string(ObjectiveMode m);

struct LpConfig {
  double load = 0.8;
  double theta = 5.0;
  RewardParams reward;
  CategoryArray client_distribution{0.25, 0.25, 0.25, 0.25};  // T_s, indexed by Category
  ObjectiveMode objective = ObjectiveMode::weighted;

  void validate() const;
};

// Variable layout: w_{r,s} lives at index s * relay_count + r.
inline std::size_t weight_var(std::size_t relay, Category s, std::size_t relay_count) {
  return index(s) * relay_count + relay;
}

// The weight LP over all guards and all four client categories at once:
//   max  sum_s sum_r coef(s, r) w_{r,s}
//   s.t. sum_r w_{r,s} = 1                      for each s
//        sum_s T_s w_{r,s} <= b_r / l           for each r (b_r normalized)
//        0 <= w_{r,s} <= theta * w'_r           (w' the vanilla normalized weights)
// Inequality rows list only the categories with T_s > 0.
LpProblem build_lp(std::span<const Relay> guards, const LpConfig& cfg);

struct WeightMatrix {
  std::vector<std::string> relay_ids;
  std::vector<Category> relay_categories;
  std::vector<double> bandwidth_share;  // b_r normalized
  std::vector<double> vanilla;          // w'_r
  std::vector<CategoryArray> weights;   // weights[r][s]
  double objective = 0;                 // LP objective of `weights`

  std::size_t relay_count() const { return weights.size(); }
  double at(std::size_t relay, Category s) const { return weights[relay][index(s)]; }
  std::vector<double> column(Category s) const;
};

enum class LpMethod {
  network_flow,  // min-cost flow on the transportation structure of the weight LP
  simplex,       // build_lp + solve_lp
};

// Solves the weight LP. Columns of categories with T_s = 0 carry no objective weight
// in the weighted mode; both methods fill them greedily by pair reward (ties spread in
// proportion to vanilla weight) so they stay meaningful for clients that appear later.
WeightMatrix optimize_weights(std::span<const Relay> guards, const LpConfig& cfg,
                              LpMethod method = LpMethod::network_flow);

// Every column equal to the vanilla weights.
WeightMatrix vanilla_weights(std::span<const Relay> guards);

// Objective of an arbitrary matrix under cfg's coefficients.
double lp_objective(const WeightMatrix& w, const LpConfig& cfg);

// sum_s T_s sum_r [matched(s, category(r))] w_{r,s}
double expected_matched_rate(const WeightMatrix& w, const CategoryArray& client_distribution);

struct ConstraintResiduals {
  double normalization = 0;  // max |sum_r w_{r,s} - 1|
  double capacity = 0;       // max (sum_s T_s w_{r,s} - b_r / l)
  double placement = 0;      // max (w_{r,s} - theta w'_r)
  double negativity = 0;     // max -w_{r,s}
};
ConstraintResiduals check_constraints(const WeightMatrix& w, const LpConfig& cfg);

}  // namespace rpkitor
