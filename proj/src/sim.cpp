#include "rpkitor/sim.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>
#include <unordered_map>

#include "rpkitor/text.hpp"

namespace rpkitor {

std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::vanilla: return "vanilla";
    case Algorithm::discount: return "discount";
    case Algorithm::matching: return "matching";
  }
  return "?";
}

std::optional<Algorithm> parse_algorithm(std::string_view text) {
  if (text == "vanilla") return Algorithm::vanilla;
  if (text == "discount") return Algorithm::discount;
  if (text == "matching") return Algorithm::matching;
  return std::nullopt;
}

void SimConfig::validate() const {
  if (clients == 0) throw InputError("client count must be at least 1");
  if (runs == 0) throw InputError("run count must be at least 1");
  discount.validate();
  if (algorithm == Algorithm::matching) lp.validate();
}

std::vector<std::vector<double>> selection_columns(const SimConfig& cfg, std::span<const Relay> guards,
                                                   const WeightMatrix* weights) {
  switch (cfg.algorithm) {
    case Algorithm::vanilla: return {discounted_weights(guards, 1.0)};
    case Algorithm::discount: return {discounted_weights(guards, cfg.discount.discount)};
    case Algorithm::matching: {
      if (weights == nullptr) throw std::invalid_argument("matching selection needs a weight matrix");
      if (weights->relay_count() != guards.size()) throw std::invalid_argument("weight matrix does not match guards");
      std::vector<std::vector<double>> cols;
      for (const auto c : kAllCategories) cols.push_back(weights->column(c));
      return cols;
    }
  }
  return {};
}

RunMetrics run_once(const SimConfig& cfg, std::span<const Relay> guards, const ClientPopulation& pop,
                    const WeightMatrix* weights, Rng& rng) {
  const auto start = std::chrono::steady_clock::now();
  SelectionState state(guards, selection_columns(cfg, guards, weights), cfg.discount.load, pop.size(),
                       cfg.max_retries);
  const bool per_category = cfg.algorithm == Algorithm::matching;
  std::uint64_t matched = 0;
  for (const auto& c : pop.clients()) {
    const auto out = state.select(rng, per_category ? index(c.category) : 0);
    if (is_matched(c.category, guards[out.relay].category)) ++matched;
  }
  RunMetrics m;
  m.assignments = state.assignments();
  m.client_roa_rate = client_roa_rate(m.assignments, guards);
  m.matched_rate = pop.size() == 0 ? 0.0 : static_cast<double>(matched) / static_cast<double>(pop.size());
  m.overloads = state.overloads();
  m.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return m;
}

MetricSummary summarize(std::span<const double> values) {
  // Welford: identical values give exactly that mean and a zero deviation.
  MetricSummary s;
  double m2 = 0;
  std::size_t k = 0;
  for (double v : values) {
    ++k;
    const double d = v - s.mean;
    s.mean += d / static_cast<double>(k);
    m2 += d * (v - s.mean);
  }
  if (k > 1) s.stddev = std::sqrt(std::max(0.0, m2) / static_cast<double>(k - 1));
  return s;
}

SimResult run_many(const SimConfig& cfg, std::span<const Relay> guards, const ClientPopulation& pop,
                   const WeightMatrix* weights) {
  cfg.validate();
  SimResult result;
  result.algorithm = cfg.algorithm;
  result.runs.resize(cfg.runs);

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < cfg.runs; i = next++) {
      try {
        const std::uint64_t seed = derive_seed(cfg.seed, streams::run, i);
        Rng rng(seed);
        RunMetrics m = run_once(cfg, guards, pop, weights, rng);
        m.run = i;
        m.seed = seed;
        result.runs[i] = std::move(m);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = cfg.runs;
      }
    }
  };
  const unsigned threads = std::max(1U, std::min<unsigned>(cfg.jobs, static_cast<unsigned>(cfg.runs)));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<double> roa, matched, overloads;
  for (const auto& r : result.runs) {
    roa.push_back(r.client_roa_rate);
    matched.push_back(r.matched_rate);
    overloads.push_back(static_cast<double>(r.overloads));
  }
  result.client_roa_rate = summarize(roa);
  result.matched_rate = summarize(matched);
  result.overloads = summarize(overloads);
  return result;
}

void write_sim_header(std::ostream& out) {
  out << "kind,run,seed,algorithm,client_roa_rate,matched_rate,overloads\n";
}

void write_sim_rows(std::ostream& out, const SimResult& result) {
  const auto alg = to_string(result.algorithm);
  for (const auto& r : result.runs) {
    out << "run," << r.run << ',' << r.seed << ',' << alg << ',' << text::format_double(r.client_roa_rate) << ','
        << text::format_double(r.matched_rate) << ',' << r.overloads << '\n';
  }
  out << "mean,,," << alg << ',' << text::format_double(result.client_roa_rate.mean) << ','
      << text::format_double(result.matched_rate.mean) << ',' << text::format_double(result.overloads.mean) << '\n';
  out << "stddev,,," << alg << ',' << text::format_double(result.client_roa_rate.stddev) << ','
      << text::format_double(result.matched_rate.stddev) << ',' << text::format_double(result.overloads.stddev)
      << '\n';
}

namespace {

double matched_fraction(const ClientPopulation& pop, const std::unordered_map<std::string, std::size_t>& where,
                        std::span<const Relay> guards) {
  if (pop.size() == 0) return 0.0;
  std::uint64_t matched = 0;
  for (const auto& c : pop.clients()) {
    if (c.has_guard() && is_matched(c.category, guards[where.at(pop.guard_id(c))].category)) ++matched;
  }
  return static_cast<double>(matched) / static_cast<double>(pop.size());
}

}  // namespace

ChurnTimeline run_churn_timeline(const std::vector<ChurnDayInput>& days, const ChurnConfig& cfg) {
  if (cfg.clients == 0) throw InputError("client count must be at least 1");
  ChurnTimeline timeline;
  ClientPopulation pop;
  std::vector<Relay> guards;
  bool started = false;

  for (std::size_t i = 0; i < days.size(); ++i) {
    const auto& input = days[i];
    if (!input.census) {
      timeline.warnings.push_back("day " + input.label + ": no client census, skipped");
      continue;
    }
    if (input.guards) {
      guards = *input.guards;
    } else if (guards.empty()) {
      timeline.warnings.push_back("day " + input.label + ": no consensus, skipped");
      continue;
    } else {
      timeline.warnings.push_back("day " + input.label + ": no consensus, reusing the previous one");
    }

    const CategoryArray dist = input.census->overall();
    LpConfig lp = cfg.lp;
    lp.client_distribution = dist;
    const WeightMatrix weights = optimize_weights(guards, lp);
    std::vector<std::vector<double>> columns;
    for (const auto c : kAllCategories) columns.push_back(weights.column(c));
    std::unordered_map<std::string, std::size_t> where;
    for (std::size_t r = 0; r < guards.size(); ++r) where.emplace(guards[r].identity, r);

    ChurnDayResult row;
    row.day = i;
    row.label = input.label;
    const bool first = !started;
    if (first) {
      Rng rng(derive_seed(cfg.seed, streams::population, 0));
      pop = sample_clients(*input.census, cfg.clients, rng);
      // Bring the sampled counts onto the rounded targets so later deltas are census changes only.
      Rng fit(derive_seed(cfg.seed, streams::churn, 0));
      apply_churn(pop, dist, fit);
      started = true;
    } else {
      Rng rng(derive_seed(cfg.seed, streams::churn, i));
      row.removed = apply_churn(pop, dist, rng).removed.size();
      age_out(pop, static_cast<int>(i), cfg.max_guard_age_days);
    }

    SelectionState state(guards, columns, lp.load, pop.size(), cfg.max_retries);
    std::vector<std::size_t> pending;
    for (std::size_t k = 0; k < pop.size(); ++k) {
      const Client& c = pop[k];
      const auto it = c.has_guard() ? where.find(pop.guard_id(c)) : where.end();
      if (it != where.end()) {
        state.assign(it->second);
      } else {
        pop.clear_guard(k);
        pending.push_back(k);
      }
    }
    Rng select_rng(first ? derive_seed(cfg.seed, streams::full_selection, 0)
                         : derive_seed(cfg.seed, streams::churn_selection, i));
    for (const std::size_t k : pending) {
      const auto out = state.select(select_rng, index(pop[k].category));
      pop.set_guard(k, guards[out.relay].identity, static_cast<int>(i));
    }
    row.population = pop.size();
    row.new_selections = pending.size();
    row.overloads = state.overloads();
    row.matched_rate_churn = matched_fraction(pop, where, guards);

    SelectionState full(guards, columns, lp.load, pop.size(), cfg.max_retries);
    Rng full_rng(derive_seed(cfg.seed, streams::full_selection, 0));
    std::uint64_t matched = 0;
    for (const auto& c : pop.clients()) {
      const auto out = full.select(full_rng, index(c.category));
      if (is_matched(c.category, guards[out.relay].category)) ++matched;
    }
    row.matched_rate_no_churn = static_cast<double>(matched) / static_cast<double>(pop.size());

    if (cfg.observer) cfg.observer(i, pop);
    timeline.days.push_back(std::move(row));
  }
  return timeline;
}

void write_churn_header(std::ostream& out) {
  out << "day,label,population,removed,new_selections,matched_rate_churn,matched_rate_no_churn,overloads\n";
}

void write_churn_rows(std::ostream& out, const ChurnTimeline& timeline) {
  for (const auto& d : timeline.days) {
    out << d.day << ',' << d.label << ',' << d.population << ',' << d.removed << ',' << d.new_selections << ','
        << text::format_double(d.matched_rate_churn) << ',' << text::format_double(d.matched_rate_no_churn) << ','
        << d.overloads << '\n';
  }
}

}  // namespace rpkitor
