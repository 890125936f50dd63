#include "rpkitor/discount.hpp"

#include <algorithm>
#include <numeric>

namespace rpkitor {

void DiscountParams::validate() const {
  if (!(discount >= 0.0 && discount <= 1.0)) throw InputError("discount factor must lie in [0,1]");
  if (!(load >= 0.0 && load <= 1.0)) throw InputError("load factor must lie in [0,1]");
}

std::vector<double> discounted_weights(std::span<const Relay> guards, double discount) {
  std::vector<double> w;
  w.reserve(guards.size());
  for (const auto& g : guards) {
    const auto b = static_cast<double>(g.bandwidth);
    w.push_back(g.roa_covered() ? b : discount * b);
  }
  return w;
}

SelectionState::SelectionState(std::span<const Relay> guards, std::vector<std::vector<double>> columns,
                               double load, std::uint64_t total_clients, std::size_t max_retries)
    : base_(std::move(columns)),
      multiplier_(guards.size(), 1.0),
      assigned_(guards.size(), 0),
      total_clients_(total_clients),
      max_retries_(max_retries) {
  if (base_.empty()) throw std::invalid_argument("selection needs at least one weight column");
  bandwidth_.reserve(guards.size());
  for (const auto& g : guards) bandwidth_.push_back(static_cast<double>(g.bandwidth));
  total_bandwidth_ = std::accumulate(bandwidth_.begin(), bandwidth_.end(), 0.0);
  demand_per_client_ = total_clients_ > 0 ? load * total_bandwidth_ / static_cast<double>(total_clients_) : 0.0;
  trees_.reserve(base_.size());
  for (const auto& col : base_) {
    if (col.size() != guards.size()) throw std::invalid_argument("weight column size differs from guard count");
    trees_.emplace_back(col);
    base_trees_.emplace_back(col);
  }
}

bool SelectionState::saturated(std::size_t relay) const {
  if (demand_per_client_ <= 0.0) return false;
  return bandwidth_[relay] / static_cast<double>(assigned_[relay] + 1) < demand_per_client_;
}

void SelectionState::shrink(std::size_t relay) {
  const double per_client = bandwidth_[relay] / static_cast<double>(assigned_[relay] + 1);
  multiplier_[relay] *= per_client / demand_per_client_;
  for (std::size_t c = 0; c < trees_.size(); ++c) trees_[c].set(relay, base_[c][relay] * multiplier_[relay]);
}

SelectionOutcome SelectionState::select(Rng& rng, std::size_t column) {
  auto& tree = trees_.at(column);
  SelectionOutcome out;
  if (!(tree.total() > 0.0)) {
    // Every eligible relay has been shrunk to nothing: accept an overload.
    if (!(base_trees_[column].total() > 0.0)) throw NoEligibleGuard();
    out.relay = base_trees_[column].sample(rng);
    out.overloaded = true;
    ++overloads_;
    ++assigned_[out.relay];
    ++accepted_;
    return out;
  }
  while (true) {
    out.relay = tree.sample(rng);
    if (!saturated(out.relay)) break;
    if (out.retries == max_retries_) {
      out.overloaded = true;
      ++overloads_;
      break;
    }
    shrink(out.relay);
    ++out.retries;
    if (!(tree.total() > 0.0)) {
      // Only reachable through underflow of every multiplier; keep the rejected pick.
      out.overloaded = true;
      ++overloads_;
      break;
    }
  }
  ++assigned_[out.relay];
  ++accepted_;
  return out;
}

void SelectionState::assign(std::size_t relay) {
  ++assigned_.at(relay);
  ++accepted_;
}

void SelectionState::release(std::size_t relay) {
  if (assigned_.at(relay) == 0) throw std::logic_error("releasing a relay with no assigned clients");
  --assigned_[relay];
  --accepted_;
}

double client_roa_rate(std::span<const std::uint64_t> assignments, std::span<const Relay> guards) {
  if (assignments.size() != guards.size()) throw std::invalid_argument("assignment histogram size mismatch");
  std::uint64_t total = 0;
  std::uint64_t covered = 0;
  for (std::size_t i = 0; i < guards.size(); ++i) {
    total += assignments[i];
    if (guards[i].roa_covered()) covered += assignments[i];
  }
  return total == 0 ? 0.0 : static_cast<double>(covered) / static_cast<double>(total);
}

namespace {

void check_weights(double roa_weight, double total_weight) {
  if (!(total_weight > 0.0)) throw InputError("total guard weight must be positive");
  if (!(roa_weight >= 0.0 && roa_weight <= total_weight)) {
    throw InputError("ROA weight must lie in [0, total weight]");
  }
}

}  // namespace

double expected_utilization(double load, double discount, double roa_weight, double total_weight) {
  check_weights(roa_weight, total_weight);
  const double non_roa = total_weight - roa_weight;
  const double denom = roa_weight + discount * non_roa;
  const double roa_share = denom > 0.0 ? roa_weight / denom : (roa_weight > 0.0 ? 1.0 : 0.0);
  const double demand = load * total_weight;
  const double served = std::min(demand * roa_share, roa_weight) + std::min(demand * (1.0 - roa_share), non_roa);
  return served / total_weight;
}

double optimal_discount(double load, double roa_weight, double total_weight) {
  check_weights(roa_weight, total_weight);
  const double non_roa = total_weight - roa_weight;
  if (non_roa <= 0.0) return 0.0;
  return std::clamp((load * total_weight - roa_weight) / non_roa, 0.0, 1.0);
}

GuardWeights guard_weights(std::span<const Relay> guards) {
  GuardWeights w;
  for (const auto& g : guards) {
    const auto b = static_cast<double>(g.bandwidth);
    w.total += b;
    if (g.roa_covered()) w.roa += b;
  }
  return w;
}

}  // namespace rpkitor
