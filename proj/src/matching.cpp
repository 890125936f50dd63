#include "rpkitor/matching.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>

namespace rpkitor {

bool RewardParams::valid() const {
  return d2 >= 0.0 && d2 < d1 && d1 <= 1.0 && bonus > 1.0 && d1 * d1 < bonus * d2;
}

void RewardParams::validate() const {
  if (!(d2 >= 0.0 && d2 < d1 && d1 <= 1.0)) throw InputError("reward params need 0 <= d2 < d1 <= 1");
  if (!(bonus > 1.0)) throw InputError("matching bonus B must exceed 1");
  if (!(d1 * d1 < bonus * d2)) throw InputError("reward params need d1*d1 < B*d2");
}

double unit_reward(Category c, const RewardParams& p) {
  switch (c) {
    case Category::both: return 1.0;
    case Category::roa: return p.d1;
    case Category::rov: return p.d2;
    case Category::neither: return p.d1 * p.d2;
  }
  return 0.0;
}

double pair_reward(Category client, Category relay, const RewardParams& p) {
  const double base = unit_reward(client, p) * unit_reward(relay, p);
  return is_matched(client, relay) ? p.bonus * base : base;
}

std::string_view to_string(ObjectiveMode m) { return m == ObjectiveMode::weighted ? "weighted" : "literal"; }

void LpConfig::validate() const {
  if (!(load > 0.0 && load <= 1.0)) throw InputError("load factor must lie in (0,1]");
  if (!(theta >= 1.0)) throw InputError("theta must be at least 1");
  reward.validate();
  double sum = 0;
  for (double t : client_distribution) {
    if (!(t >= 0.0)) throw InputError("client distribution entries must be nonnegative");
    sum += t;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw InputError("client distribution must sum to 1");
}

std::vector<double> WeightMatrix::column(Category s) const {
  std::vector<double> col(weights.size());
  for (std::size_t r = 0; r < weights.size(); ++r) col[r] = weights[r][index(s)];
  return col;
}

namespace {

std::vector<double> normalized_bandwidth(std::span<const Relay> guards) {
  if (guards.empty()) throw InputError("guard set is empty");
  double total = 0;
  for (const auto& g : guards) total += static_cast<double>(g.bandwidth);
  if (!(total > 0.0)) throw InputError("guard set has zero total bandwidth");
  std::vector<double> share;
  share.reserve(guards.size());
  for (const auto& g : guards) share.push_back(static_cast<double>(g.bandwidth) / total);
  return share;
}

double coefficient(Category client, Category relay, const LpConfig& cfg) {
  const double p = pair_reward(client, relay, cfg.reward);
  return cfg.objective == ObjectiveMode::weighted ? cfg.client_distribution[index(client)] * p : p;
}

WeightMatrix skeleton(std::span<const Relay> guards) {
  WeightMatrix w;
  w.bandwidth_share = normalized_bandwidth(guards);
  w.vanilla = w.bandwidth_share;
  for (const auto& g : guards) {
    w.relay_ids.push_back(g.identity);
    w.relay_categories.push_back(g.category);
  }
  w.weights.assign(guards.size(), CategoryArray{});
  return w;
}

// Best column for a category that does not touch any capacity row: fill relays by
// descending pair reward up to their placement cap; within a reward tier, spread the
// remainder in proportion to the cap (that is, to vanilla weight).
void fill_unconstrained_column(WeightMatrix& w, Category s, const LpConfig& cfg) {
  const std::size_t n = w.relay_count();
  std::array<double, kCategoryCount> tier_reward{};
  for (const auto c : kAllCategories) tier_reward[index(c)] = pair_reward(s, c, cfg.reward);
  std::array<std::size_t, kCategoryCount> order{0, 1, 2, 3};
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return tier_reward[a] > tier_reward[b]; });

  for (std::size_t r = 0; r < n; ++r) w.weights[r][index(s)] = 0.0;
  double remaining = 1.0;
  std::size_t i = 0;
  while (i < order.size() && remaining > 0.0) {
    // Tiers with equal reward are filled together.
    std::size_t j = i;
    while (j < order.size() && tier_reward[order[j]] == tier_reward[order[i]]) ++j;
    double cap = 0;
    for (std::size_t r = 0; r < n; ++r) {
      const auto rc = index(w.relay_categories[r]);
      if (std::find(order.begin() + static_cast<long>(i), order.begin() + static_cast<long>(j), rc) !=
          order.begin() + static_cast<long>(j)) {
        cap += cfg.theta * w.vanilla[r];
      }
    }
    if (cap > 0.0) {
      const double take = std::min(1.0, remaining / cap);
      for (std::size_t r = 0; r < n; ++r) {
        const auto rc = index(w.relay_categories[r]);
        if (std::find(order.begin() + static_cast<long>(i), order.begin() + static_cast<long>(j), rc) !=
            order.begin() + static_cast<long>(j)) {
          w.weights[r][index(s)] = take * cfg.theta * w.vanilla[r];
        }
      }
      remaining -= take * cap;
      if (take < 1.0) remaining = 0.0;
    }
    i = j;
  }
}

// Min-cost flow, primal-dual: Dijkstra with potentials to find the current shortest
// distance, then a Dinic blocking flow over the zero-reduced-cost arcs.
class MinCostFlow {
 public:
  explicit MinCostFlow(std::size_t nodes) : adj_(nodes) {}

  std::size_t add_arc(std::size_t from, std::size_t to, double cap, double cost) {
    const std::size_t id = arcs_.size();
    arcs_.push_back({to, cap, cost});
    arcs_.push_back({from, 0.0, -cost});
    adj_[from].push_back(id);
    adj_[to].push_back(id + 1);
    return id;
  }

  double flow_on(std::size_t arc) const { return arcs_[arc ^ 1U].cap; }

  double run(std::size_t source, std::size_t sink, double amount) {
    const std::size_t n = adj_.size();
    std::vector<double> pot(n, 0.0);
    std::vector<double> dist(n);
    double remaining = amount;
    level_.assign(n, -1);
    next_.assign(n, 0);

    while (remaining > kFlowEps) {
      std::fill(dist.begin(), dist.end(), kInf);
      dist[source] = 0.0;
      using Item = std::pair<double, std::size_t>;
      std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
      heap.emplace(0.0, source);
      while (!heap.empty()) {
        const auto [du, u] = heap.top();
        heap.pop();
        if (du > dist[u]) continue;
        for (const std::size_t id : adj_[u]) {
          const Arc& a = arcs_[id];
          if (a.cap <= kCapEps) continue;
          const double rc = std::max(0.0, a.cost + pot[u] - pot[a.to]);
          if (du + rc < dist[a.to]) {
            dist[a.to] = du + rc;
            heap.emplace(dist[a.to], a.to);
          }
        }
      }
      if (dist[sink] == kInf) break;
      for (std::size_t v = 0; v < n; ++v) pot[v] += std::min(dist[v], dist[sink]);

      while (remaining > kFlowEps && build_levels(source, sink, pot)) {
        std::fill(next_.begin(), next_.end(), 0);
        while (remaining > kFlowEps) {
          const double pushed = augment(source, sink, remaining, pot);
          if (pushed <= kFlowEps) break;
          remaining -= pushed;
        }
      }
    }
    return amount - remaining;
  }

 private:
  struct Arc {
    std::size_t to;
    double cap;
    double cost;
  };

  static constexpr double kInf = std::numeric_limits<double>::infinity();
  static constexpr double kCapEps = 1e-15;
  static constexpr double kFlowEps = 1e-14;
  static constexpr double kCostEps = 1e-9;

  bool admissible(std::size_t u, const Arc& a, const std::vector<double>& pot) const {
    return a.cap > kCapEps && std::abs(a.cost + pot[u] - pot[a.to]) <= kCostEps;
  }

  bool build_levels(std::size_t source, std::size_t sink, const std::vector<double>& pot) {
    std::fill(level_.begin(), level_.end(), -1);
    std::queue<std::size_t> q;
    level_[source] = 0;
    q.push(source);
    while (!q.empty()) {
      const std::size_t u = q.front();
      q.pop();
      for (const std::size_t id : adj_[u]) {
        const Arc& a = arcs_[id];
        if (level_[a.to] < 0 && admissible(u, a, pot)) {
          level_[a.to] = level_[u] + 1;
          q.push(a.to);
        }
      }
    }
    return level_[sink] >= 0;
  }

  double augment(std::size_t u, std::size_t sink, double limit, const std::vector<double>& pot) {
    if (u == sink) return limit;
    for (; next_[u] < adj_[u].size(); ++next_[u]) {
      const std::size_t id = adj_[u][next_[u]];
      Arc& a = arcs_[id];
      if (level_[a.to] != level_[u] + 1 || !admissible(u, a, pot)) continue;
      const double pushed = augment(a.to, sink, std::min(limit, a.cap), pot);
      if (pushed > kFlowEps) {
        a.cap -= pushed;
        arcs_[id ^ 1U].cap += pushed;
        return pushed;
      }
    }
    return 0.0;
  }

  std::vector<Arc> arcs_;
  std::vector<std::vector<std::size_t>> adj_;
  std::vector<int> level_;
  std::vector<std::size_t> next_;
};

void solve_by_flow(WeightMatrix& w, const LpConfig& cfg) {
  const std::size_t n = w.relay_count();
  const auto& dist = cfg.client_distribution;

  // x_{r,s} = T_s w_{r,s} turns the LP into a transportation problem: categories ship
  // T_s to relays through arcs capped at T_s theta w'_r; relays pass at most b_r / l.
  std::vector<Category> active;
  for (const auto c : kAllCategories) {
    if (dist[index(c)] > 0.0) active.push_back(c);
  }
  const std::size_t source = 0;
  const std::size_t first_cat = 1;
  const std::size_t first_relay = first_cat + active.size();
  const std::size_t sink = first_relay + n;
  MinCostFlow mcf(sink + 1);

  auto unit_value = [&](Category s, Category rc) {
    const double p = pair_reward(s, rc, cfg.reward);
    return cfg.objective == ObjectiveMode::weighted ? p : p / dist[index(s)];
  };
  double max_value = 0;
  for (const auto s : active) {
    for (const auto rc : kAllCategories) max_value = std::max(max_value, unit_value(s, rc));
  }

  for (std::size_t k = 0; k < active.size(); ++k) mcf.add_arc(source, first_cat + k, dist[index(active[k])], 0.0);
  std::vector<std::vector<std::size_t>> arc_of(active.size(), std::vector<std::size_t>(n, SIZE_MAX));
  for (std::size_t k = 0; k < active.size(); ++k) {
    const Category s = active[k];
    for (std::size_t r = 0; r < n; ++r) {
      const double cap = dist[index(s)] * cfg.theta * w.vanilla[r];
      if (cap <= 0.0) continue;
      // Every unit of flow crosses exactly one of these arcs, so shifting by max_value
      // keeps costs nonnegative without changing the optimum.
      arc_of[k][r] = mcf.add_arc(first_cat + k, first_relay + r, cap, max_value - unit_value(s, w.relay_categories[r]));
    }
  }
  for (std::size_t r = 0; r < n; ++r) {
    if (w.bandwidth_share[r] > 0.0) mcf.add_arc(first_relay + r, sink, w.bandwidth_share[r] / cfg.load, 0.0);
  }

  const double total = std::accumulate(dist.begin(), dist.end(), 0.0);
  const double sent = mcf.run(source, sink, total);
  if (sent < total - 1e-9) throw LpInfeasible();

  for (std::size_t k = 0; k < active.size(); ++k) {
    const std::size_t s = index(active[k]);
    double column_sum = 0;
    for (std::size_t r = 0; r < n; ++r) {
      const double v = arc_of[k][r] == SIZE_MAX ? 0.0 : std::max(0.0, mcf.flow_on(arc_of[k][r])) / dist[s];
      w.weights[r][s] = v;
      column_sum += v;
    }
    // Remove the last few ulps of under-shipment.
    if (column_sum > 0.0 && std::abs(column_sum - 1.0) < 1e-9) {
      for (std::size_t r = 0; r < n; ++r) w.weights[r][s] /= column_sum;
    }
  }
}

void solve_by_simplex(WeightMatrix& w, std::span<const Relay> guards, const LpConfig& cfg) {
  const auto problem = build_lp(guards, cfg);
  const auto sol = solve_lp(problem);
  const std::size_t n = w.relay_count();
  for (const auto s : kAllCategories) {
    for (std::size_t r = 0; r < n; ++r) w.weights[r][index(s)] = sol.x[weight_var(r, s, n)];
  }
}

}  // namespace

LpProblem build_lp(std::span<const Relay> guards, const LpConfig& cfg) {
  cfg.validate();
  const auto share = normalized_bandwidth(guards);
  const std::size_t n = guards.size();

  LpProblem lp;
  lp.num_vars = kCategoryCount * n;
  lp.objective.assign(lp.num_vars, 0.0);
  lp.upper_bounds.assign(lp.num_vars, 0.0);
  for (const auto s : kAllCategories) {
    LinearRow norm;
    norm.rhs = 1.0;
    for (std::size_t r = 0; r < n; ++r) {
      const std::size_t v = weight_var(r, s, n);
      lp.objective[v] = coefficient(s, guards[r].category, cfg);
      lp.upper_bounds[v] = cfg.theta * share[r];
      norm.terms.emplace_back(v, 1.0);
    }
    lp.equalities.push_back(std::move(norm));
  }
  for (std::size_t r = 0; r < n; ++r) {
    LinearRow cap;
    cap.rhs = share[r] / cfg.load;
    for (const auto s : kAllCategories) {
      const double t = cfg.client_distribution[index(s)];
      if (t > 0.0) cap.terms.emplace_back(weight_var(r, s, n), t);
    }
    lp.inequalities.push_back(std::move(cap));
  }
  return lp;
}

WeightMatrix optimize_weights(std::span<const Relay> guards, const LpConfig& cfg, LpMethod method) {
  cfg.validate();
  WeightMatrix w = skeleton(guards);
  if (method == LpMethod::simplex) {
    solve_by_simplex(w, guards, cfg);
  } else {
    solve_by_flow(w, cfg);
  }
  for (const auto s : kAllCategories) {
    if (cfg.client_distribution[index(s)] == 0.0) fill_unconstrained_column(w, s, cfg);
  }
  w.objective = lp_objective(w, cfg);
  return w;
}

WeightMatrix vanilla_weights(std::span<const Relay> guards) {
  WeightMatrix w = skeleton(guards);
  for (std::size_t r = 0; r < w.relay_count(); ++r) w.weights[r].fill(w.vanilla[r]);
  return w;
}

double lp_objective(const WeightMatrix& w, const LpConfig& cfg) {
  double v = 0;
  for (std::size_t r = 0; r < w.relay_count(); ++r) {
    for (const auto s : kAllCategories) v += coefficient(s, w.relay_categories[r], cfg) * w.weights[r][index(s)];
  }
  return v;
}

double expected_matched_rate(const WeightMatrix& w, const CategoryArray& client_distribution) {
  double rate = 0;
  for (const auto s : kAllCategories) {
    double col = 0;
    for (std::size_t r = 0; r < w.relay_count(); ++r) {
      if (is_matched(s, w.relay_categories[r])) col += w.weights[r][index(s)];
    }
    rate += client_distribution[index(s)] * col;
  }
  return rate;
}

ConstraintResiduals check_constraints(const WeightMatrix& w, const LpConfig& cfg) {
  ConstraintResiduals res;
  for (const auto s : kAllCategories) {
    double sum = 0;
    for (std::size_t r = 0; r < w.relay_count(); ++r) sum += w.weights[r][index(s)];
    res.normalization = std::max(res.normalization, std::abs(sum - 1.0));
  }
  for (std::size_t r = 0; r < w.relay_count(); ++r) {
    double load = 0;
    for (const auto s : kAllCategories) {
      const double v = w.weights[r][index(s)];
      load += cfg.client_distribution[index(s)] * v;
      res.placement = std::max(res.placement, v - cfg.theta * w.vanilla[r]);
      res.negativity = std::max(res.negativity, -v);
    }
    res.capacity = std::max(res.capacity, load - w.bandwidth_share[r] / cfg.load);
  }
  return res;
}

}  // namespace rpkitor
