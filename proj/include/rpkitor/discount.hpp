#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "rpkitor/consensus.hpp"
#include "rpkitor/random.hpp"

namespace rpkitor {

struct DiscountParams {
  double discount = 1.0;  // d: multiplier on non-ROA guard weights
  double load = 0.8;      // l: fraction of guard bandwidth in demand

  // Throws InputError unless both lie in [0,1].
  void validate() const;
};

// b_r for relays with a Valid ROA, d * b_r for the rest.
std::vector<double> discounted_weights(std::span<const Relay> guards, double discount);

class NoEligibleGuard : public std::runtime_error {
 public:
  NoEligibleGuard() : std::runtime_error("no eligible guard") {}
};

struct SelectionOutcome {
  std::size_t relay = 0;
  bool overloaded = false;  // accepted only because the retry budget ran out
  std::size_t retries = 0;
};

// Load-balanced proportional guard selection.
//
// Each column is one weight vector (one for discount selection, one per client
// category for matching). A relay is saturated for the next client when its
// per-client bandwidth b_r / (assigned_r + 1) would drop below the demand per
// client, l * B / N, with B the total guard bandwidth and N the declared client
// count. A saturated pick is rejected, the relay's multiplier (shared by all
// columns) is scaled by (b_r / (assigned_r + 1)) / (l * B / N), and the draw repeats.
class SelectionState {
 public:
  static constexpr std::size_t kDefaultMaxRetries = 100;

  SelectionState(std::span<const Relay> guards, std::vector<std::vector<double>> columns, double load,
                 std::uint64_t total_clients, std::size_t max_retries = kDefaultMaxRetries);

  SelectionOutcome select(Rng& rng, std::size_t column = 0);

  // Record or drop an assignment made outside select() (clients kept across days).
  void assign(std::size_t relay);
  void release(std::size_t relay);

  std::size_t relay_count() const { return bandwidth_.size(); }
  std::size_t column_count() const { return trees_.size(); }
  double effective_weight(std::size_t column, std::size_t relay) const { return trees_[column].weight(relay); }
  double base_weight(std::size_t column, std::size_t relay) const { return base_[column][relay]; }
  double multiplier(std::size_t relay) const { return multiplier_[relay]; }
  std::uint64_t assigned(std::size_t relay) const { return assigned_[relay]; }
  const std::vector<std::uint64_t>& assignments() const { return assigned_; }
  std::uint64_t accepted() const { return accepted_; }
  std::uint64_t overloads() const { return overloads_; }
  std::uint64_t total_clients() const { return total_clients_; }
  double demand_per_client() const { return demand_per_client_; }
  double total_bandwidth() const { return total_bandwidth_; }

 private:
  bool saturated(std::size_t relay) const;
  void shrink(std::size_t relay);

  std::vector<double> bandwidth_;
  std::vector<std::vector<double>> base_;
  std::vector<WeightTree> trees_;
  std::vector<WeightTree> base_trees_;  // unshrunk, used once every multiplier has underflowed
  std::vector<double> multiplier_;
  std::vector<std::uint64_t> assigned_;
  std::uint64_t total_clients_;
  std::size_t max_retries_;
  double total_bandwidth_ = 0;
  double demand_per_client_ = 0;
  std::uint64_t accepted_ = 0;
  std::uint64_t overloads_ = 0;
};

inline SelectionOutcome select_guard(SelectionState& state, Rng& rng, std::size_t column = 0) {
  return state.select(rng, column);
}

// Share of clients whose guard has a Valid ROA; counts are per guard index.
double client_roa_rate(std::span<const std::uint64_t> assignments, std::span<const Relay> guards);

// Fraction of total guard bandwidth actually used when demand l * W_total is split
// between ROA and non-ROA relays in proportion to discounted weight, and each group
// serves at most its own capacity.
double expected_utilization(double load, double discount, double roa_weight, double total_weight);

// Smallest discount that still serves the full demand (the kink of the utilization
// curve): clamp((l W - W_roa) / (W - W_roa), 0, 1), and 0 when every relay has a ROA.
double optimal_discount(double load, double roa_weight, double total_weight);

struct GuardWeights {
  double roa = 0;
  double total = 0;
};
GuardWeights guard_weights(std::span<const Relay> guards);

}  // namespace rpkitor
