#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "rpkitor/clients.hpp"
#include "rpkitor/consensus.hpp"
#include "rpkitor/discount.hpp"
#include "rpkitor/matching.hpp"

namespace rpkitor {

enum class Algorithm { vanilla, discount, matching };
std::string_view to_string(Algorithm a);
std::optional<Algorithm> parse_algorithm(std::string_view text);

// Seed streams; every random draw in a pipeline comes from derive_seed(master, stream, i).
namespace streams {
inline constexpr std::uint64_t population = 1;
inline constexpr std::uint64_t run = 2;
inline constexpr std::uint64_t churn = 3;
inline constexpr std::uint64_t churn_selection = 4;
inline constexpr std::uint64_t full_selection = 5;
}  // namespace streams

struct SimConfig {
  Algorithm algorithm = Algorithm::discount;
  std::uint64_t clients = 1'000'000;
  std::size_t runs = 100;
  std::uint64_t seed = 0;
  DiscountParams discount;  // the load factor here drives load balancing for every algorithm
  LpConfig lp;
  std::size_t max_retries = SelectionState::kDefaultMaxRetries;
  unsigned jobs = 1;

  void validate() const;
};

struct RunMetrics {
  std::size_t run = 0;
  std::uint64_t seed = 0;
  double client_roa_rate = 0;
  double matched_rate = 0;
  std::vector<std::uint64_t> assignments;  // per guard, in guard order
  std::uint64_t overloads = 0;
  double wall_seconds = 0;  // not part of any CSV output
};

// Weight columns the algorithm selects from: one column for vanilla and discount,
// four (indexed by Category) for matching.
std::vector<std::vector<double>> selection_columns(const SimConfig& cfg, std::span<const Relay> guards,
                                                   const WeightMatrix* weights);

// Every client of `pop`, in order, picks a guard under load balancing. Matching
// clients draw from their category's column. `weights` is required for matching.
RunMetrics run_once(const SimConfig& cfg, std::span<const Relay> guards, const ClientPopulation& pop,
                    const WeightMatrix* weights, Rng& rng);

struct MetricSummary {
  double mean = 0;
  double stddev = 0;  // sample standard deviation, 0 for a single run
};

struct SimResult {
  Algorithm algorithm = Algorithm::discount;
  std::vector<RunMetrics> runs;  // in run order
  MetricSummary client_roa_rate;
  MetricSummary matched_rate;
  MetricSummary overloads;
};

MetricSummary summarize(std::span<const double> values);

// cfg.runs independent runs over the same population, run i seeded with
// derive_seed(cfg.seed, streams::run, i); up to cfg.jobs threads.
SimResult run_many(const SimConfig& cfg, std::span<const Relay> guards, const ClientPopulation& pop,
                   const WeightMatrix* weights);

// kind,run,seed,algorithm,client_roa_rate,matched_rate,overloads
// One "run" row per run, then "mean" and "stddev" rows.
void write_sim_header(std::ostream& out);
void write_sim_rows(std::ostream& out, const SimResult& result);

struct ChurnDayInput {
  std::string label;
  std::optional<CountryCensus> census;      // missing: the day is skipped
  std::optional<std::vector<Relay>> guards;  // missing: previous day's guards
};

struct ChurnConfig {
  std::uint64_t clients = 100'000;
  std::uint64_t seed = 0;
  LpConfig lp;  // client_distribution is replaced by each day's census
  std::size_t max_retries = SelectionState::kDefaultMaxRetries;
  int max_guard_age_days = 120;  // 0 disables rotation
  // Called after each simulated day with the with-churn population.
  std::function<void(std::size_t day, const ClientPopulation&)> observer;
};

struct ChurnDayResult {
  std::size_t day = 0;
  std::string label;
  std::uint64_t population = 0;
  std::uint64_t removed = 0;
  std::uint64_t new_selections = 0;
  double matched_rate_churn = 0;
  double matched_rate_no_churn = 0;
  std::uint64_t overloads = 0;
};

struct ChurnTimeline {
  std::vector<ChurnDayResult> days;
  std::vector<std::string> warnings;
};

// Day 0 samples the population and selects for everyone. Each later day applies the
// day's churn, recomputes weights and selects only for clients without a guard (new,
// rotated out, or whose guard left the consensus). The comparator reselects the whole
// population each day with one fixed seed, so equal days give equal rates.
ChurnTimeline run_churn_timeline(const std::vector<ChurnDayInput>& days, const ChurnConfig& cfg);

// day,label,population,removed,new_selections,matched_rate_churn,matched_rate_no_churn,overloads
void write_churn_header(std::ostream& out);
void write_churn_rows(std::ostream& out, const ChurnTimeline& timeline);

}  // namespace rpkitor
