#include "rpkitor/cli.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include "rpkitor/clients.hpp"
#include "rpkitor/consensus.hpp"
#include "rpkitor/coverage.hpp"
#include "rpkitor/discount.hpp"
#include "rpkitor/matching.hpp"
#include "rpkitor/rpki.hpp"
#include "rpkitor/sim.hpp"
#include "rpkitor/text.hpp"

namespace rpkitor::cli {
namespace {

namespace fs = std::filesystem;

std::ifstream open_input(const std::string& path, const std::string& flag) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path + " (" + flag + ")");
  return in;
}

void report_rows(std::ostream& err, const std::string& path, const std::vector<RowError>& errors, bool strict) {
  for (const auto& e : errors) err << path << ':' << e.line << ": " << e.message << '\n';
  if (strict && !errors.empty()) throw InputError(path, errors.front().line, errors.front().message);
}

// Options shared by every subcommand that reads network data.
struct NetworkOptions {
  std::string consensus;
  std::string roa;
  std::string routes;
  std::vector<std::string> rov;
  std::vector<std::string> rov_sources;
  double rov_threshold = 0.5;
  bool strict = false;

  void attach(CLI::App* app) {
    app->add_option("--consensus", consensus, "Tor consensus document");
    app->add_option("--roa", roa, "ROA CSV: asn,prefix,max_length");
    app->add_option("--routes", routes, "Route table CSV: prefix,origin_asn");
    app->add_option("--rov", rov, "ROV enforcement list (asn[,score]); repeatable");
    app->add_option("--rov-source", rov_sources,
                    "Source label per --rov file (rov-monitor, manrs-case1, rovista, hlavacek, manrs-case2, "
                    "custom); one label applies to all");
    app->add_option("--rov-threshold", rov_threshold, "Score at which an AS counts as enforcing")
        ->check(CLI::Range(0.0, 1.0));
    app->add_flag("--strict", strict, "Treat any rejected input row as fatal");
  }

  void require(bool need_consensus) const {
    if (need_consensus && consensus.empty()) throw InputError("--consensus is required");
    if (roa.empty()) throw InputError("--roa is required");
    if (routes.empty()) throw InputError("--routes is required");
  }

  RoaStore load_roa(const std::string& path, std::ostream& err) const {
    auto in = open_input(path, "--roa");
    auto res = load_roas(in);
    report_rows(err, path, res.errors, strict);
    return std::move(res.store);
  }

  PrefixTable<Asn> load_route_table(const std::string& path, std::ostream& err) const {
    auto in = open_input(path, "--routes");
    auto res = load_routes(in);
    report_rows(err, path, res.errors, strict);
    return std::move(res.routes);
  }

  RovRegistry load_rov(std::ostream& err) const {
    RovRegistry reg(rov_threshold);
    if (!rov_sources.empty() && rov_sources.size() != 1 && rov_sources.size() != rov.size()) {
      throw InputError("--rov-source must be given once or once per --rov file");
    }
    for (std::size_t i = 0; i < rov.size(); ++i) {
      RovSource source = RovSource::custom;
      if (!rov_sources.empty()) {
        const auto& label = rov_sources.size() == 1 ? rov_sources.front() : rov_sources[i];
        const auto parsed = parse_rov_source(label);
        if (!parsed) throw InputError("unknown --rov-source '" + label + "'");
        source = *parsed;
      }
      auto in = open_input(rov[i], "--rov");
      report_rows(err, rov[i], load_rov_list(in, source, reg), strict);
    }
    return reg;
  }

  ConsensusSnapshot load_snapshot(const std::string& path, std::ostream& err) const {
    auto in = open_input(path, "--consensus");
    auto snap = parse_consensus(in);
    for (const auto& w : snap.warning_messages) err << path << ": " << w << '\n';
    if (strict && snap.warnings > 0) throw InputError(path + ": malformed router entries");
    return snap;
  }

  // Consensus resolved against the ROA, route and ROV inputs; returns the guard set.
  std::vector<Relay> load_guards(std::ostream& err) const {
    require(true);
    auto snap = load_snapshot(consensus, err);
    const auto roas = load_roa(roa, err);
    const auto table = load_route_table(routes, err);
    resolve_rpki(snap, table, roas, load_rov(err));
    auto guards = guard_set(snap);
    if (guards.empty()) throw InputError(consensus + ": no relays with Guard and Running flags");
    return guards;
  }
};

// Client category distribution: explicit, or built from country files.
struct ClientOptions {
  std::string client_dist;
  std::string country_users;
  std::string country_asns;

  void attach(CLI::App* app) {
    app->add_option("--client-dist", client_dist, "Client categories, e.g. both=0.4,roa=0.3,rov=0.2,neither=0.1");
    app->add_option("--country-users", country_users, "Tor users per country CSV: country,fraction");
    app->add_option("--country-asns", country_asns, "Country to AS CSV: country,asn");
  }

  void require() const {
    if (client_dist.empty() && (country_users.empty() || country_asns.empty())) {
      throw InputError("--client-dist or both --country-users and --country-asns are required");
    }
  }

  CountryCensus census(const NetworkOptions& net, std::ostream& err) const {
    require();
    if (!client_dist.empty()) return census_from_distribution(parse_distribution(client_dist));
    auto users_in = open_input(country_users, "--country-users");
    auto asns_in = open_input(country_asns, "--country-asns");
    const auto users = load_country_users(users_in, country_users);
    const auto asns = load_country_asns(asns_in, country_asns);
    auto c = build_census(users, asns, net.load_route_table(net.routes, err), net.load_roa(net.roa, err),
                          net.load_rov(err));
    for (const auto& w : c.warnings) err << "warning: " << w << '\n';
    return c;
  }

  static CategoryArray parse_distribution(const std::string& spec) {
    CategoryArray d{};
    for (const auto field : text::split(spec, ',')) {
      const auto eq = field.find('=');
      const auto cat = parse_category(text::trim(field.substr(0, eq)));
      const auto val = eq == std::string_view::npos ? std::nullopt : text::parse_double(field.substr(eq + 1));
      if (!cat || !val || *val < 0.0) throw InputError("bad --client-dist entry '" + std::string(field) + "'");
      d[index(*cat)] = *val;
    }
    double sum = 0;
    for (double v : d) sum += v;
    if (std::abs(sum - 1.0) > 1e-6) throw InputError("--client-dist fractions must sum to 1");
    for (double& v : d) v /= sum;
    return d;
  }
};

struct LpOptions {
  double load = 0.8;
  double theta = 5.0;
  double d1 = 0.9;
  double d2 = 0.7;
  double bonus = 1.5;
  std::string objective = "weighted";
  std::string method = "flow";

  void attach(CLI::App* app, bool with_rewards = true) {
    app->add_option("--load", load, "Load factor l")->capture_default_str();
    app->add_option("--theta", theta, "Guard placement cap")->capture_default_str();
    if (with_rewards) {
      app->add_option("--d1", d1, "Reward discount for a missing ROV side")->capture_default_str();
      app->add_option("--d2", d2, "Reward discount for a missing ROA side")->capture_default_str();
      app->add_option("--bonus", bonus, "Matching bonus B")->capture_default_str();
    }
    app->add_option("--objective-mode", objective, "weighted (T_s * reward) or literal (reward)")
        ->check(CLI::IsMember({"weighted", "literal"}))
        ->capture_default_str();
    app->add_option("--lp-method", method, "flow or simplex")
        ->check(CLI::IsMember({"flow", "simplex"}))
        ->capture_default_str();
  }

  LpConfig config(const CategoryArray& dist) const {
    LpConfig cfg;
    cfg.load = load;
    cfg.theta = theta;
    cfg.reward = {d1, d2, bonus};
    cfg.client_distribution = dist;
    cfg.objective = objective == "literal" ? ObjectiveMode::literal : ObjectiveMode::weighted;
    cfg.validate();
    return cfg;
  }

  LpMethod lp_method() const { return method == "simplex" ? LpMethod::simplex : LpMethod::network_flow; }
};

struct SeedOption {
  std::optional<std::uint64_t> seed;

  void attach(CLI::App* app) { app->add_option("--seed", seed, "Master seed; printed to stderr when omitted"); }

  std::uint64_t resolve(std::ostream& err) {
    if (!seed) {
      std::random_device rd;
      seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
      err << "seed: " << *seed << '\n';
    }
    return *seed;
  }
};

// A CSV row-oriented manifest; relative paths resolve against its directory.
struct Manifest {
  fs::path base;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> lines;

  static Manifest load(const std::string& path, std::size_t min_fields, const std::string& flag) {
    auto in = open_input(path, flag);
    Manifest m;
    m.base = fs::path(path).parent_path();
    std::string line;
    std::size_t lineno = 0;
    bool first = true;
    while (text::next_line(in, line)) {
      ++lineno;
      const auto trimmed = text::trim(line);
      if (trimmed.empty() || trimmed.front() == '#') continue;
      const auto fields = text::split(trimmed, ',');
      if (first) {
        first = false;
        if (!fields.empty() && (fields[0] == "date" || fields[0] == "day")) continue;
      }
      if (fields.size() < min_fields) throw InputError(path, lineno, "expected at least " + std::to_string(min_fields) + " fields");
      m.rows.emplace_back(fields.begin(), fields.end());
      m.lines.push_back(lineno);
    }
    return m;
  }

  std::string resolve(const std::string& p) const {
    if (p.empty()) return p;
    const fs::path path(p);
    return path.is_absolute() ? p : (base / path).string();
  }
};

unsigned default_jobs() { return std::max(1U, std::thread::hardware_concurrency()); }

// Runs fn(i) for i in [0, n) on up to `jobs` threads; the first exception wins.
template <class F>
void parallel_for(std::size_t n, unsigned jobs, F&& fn) {
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex mu;
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
        next = n;
      }
    }
  };
  const unsigned threads = static_cast<unsigned>(std::max<std::size_t>(1, std::min<std::size_t>(jobs, n)));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
}

class Output {
 public:
  Output(const std::string& path, std::ostream& fallback) : path_(path), fallback_(fallback) {}

  std::ostream& stream() { return buffer_; }

  // Written only after the whole table is ready, so a failed run leaves no partial file.
  void commit() {
    if (path_.empty() || path_ == "-") {
      fallback_ << buffer_.str();
      fallback_.flush();
      return;
    }
    std::ofstream f(path_, std::ios::binary);
    if (!f) throw InputError("cannot write " + path_ + " (-o)");
    f << buffer_.str();
    if (!f) throw InputError("error writing " + path_);
  }

 private:
  std::string path_;
  std::ostream& fallback_;
  std::ostringstream buffer_;
};

double roa_share_of(const std::vector<Relay>& guards) {
  const auto w = guard_weights(guards);
  if (!(w.total > 0.0)) throw InputError("guards have zero total weight");
  return w.roa / w.total;
}

// ---- coverage ----

struct CoverageCmd {
  NetworkOptions net;
  std::string series;
  std::string date;
  std::string output;

  void attach(CLI::App* app) {
    net.attach(app);
    app->add_option("--series", series, "Manifest CSV: date,consensus,roa,routes");
    app->add_option("--date", date, "Date label for a single consensus (default: its valid-after)");
    app->add_option("-o,--output", output, "Output CSV (default stdout)");
  }

  void run(std::ostream& out, std::ostream& err) {
    Output o(output, out);
    write_coverage_header(o.stream());
    const auto rov = net.load_rov(err);
    if (series.empty()) {
      net.require(true);
      auto snap = net.load_snapshot(net.consensus, err);
      resolve_rpki(snap, net.load_route_table(net.routes, err), net.load_roa(net.roa, err), rov);
      write_coverage_rows(o.stream(), date.empty() ? snap.valid_after : date, coverage_report(snap));
    } else {
      const auto m = Manifest::load(series, 4, "--series");
      std::vector<DatedSnapshot> snaps;
      std::map<std::string, RoaStore> roas;
      std::map<std::string, PrefixTable<Asn>> routes;
      for (const auto& row : m.rows) {
        const auto& d = row[0];
        const auto cpath = m.resolve(row[1]);
        const auto rpath = m.resolve(row[2]);
        const auto tpath = m.resolve(row[3]);
        if (!fs::exists(cpath)) {
          err << "warning: skipping " << d << ": missing consensus " << cpath << '\n';
          continue;
        }
        snaps.push_back({d, net.load_snapshot(cpath, err)});
        if (fs::exists(rpath)) roas.emplace(d, net.load_roa(rpath, err));
        if (fs::exists(tpath)) routes.emplace(d, net.load_route_table(tpath, err));
      }
      const auto result = coverage_timeseries(std::move(snaps), roas, routes, rov);
      for (const auto& w : result.warnings) err << "warning: " << w << '\n';
      for (const auto& r : result.rows) write_coverage_rows(o.stream(), r.date, r.stats);
    }
    o.commit();
  }
};

// ---- discount-sim / matching-sim ----

struct SimCmd {
  Algorithm algorithm;
  NetworkOptions net;
  ClientOptions clients;
  LpOptions lp;
  SeedOption seed;
  double discount = 0.5;
  double load = 0.8;
  std::uint64_t n = 100'000;
  std::size_t runs = 10;
  std::size_t max_retries = SelectionState::kDefaultMaxRetries;
  unsigned jobs = default_jobs();
  std::string output;

  explicit SimCmd(Algorithm a) : algorithm(a) {}

  void attach(CLI::App* app) {
    net.attach(app);
    clients.attach(app);
    seed.attach(app);
    if (algorithm == Algorithm::matching) {
      lp.attach(app);
    } else {
      app->add_option("--discount,-d", discount, "Discount factor d on non-ROA guards")
          ->check(CLI::Range(0.0, 1.0))
          ->capture_default_str();
      app->add_option("--load", load, "Load factor l")->check(CLI::Range(0.0, 1.0))->capture_default_str();
    }
    app->add_option("--clients,-n", n, "Clients per run")->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--runs", runs, "Independent runs")->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--max-retries", max_retries, "Load-balancing redraws before accepting an overload")
        ->capture_default_str();
    app->add_option("--jobs,-j", jobs, "Worker threads")->check(CLI::PositiveNumber);
    app->add_option("-o,--output", output, "Output CSV (default stdout)");
  }

  void run(std::ostream& out, std::ostream& err) {
    net.require(true);
    clients.require();
    const auto guards = net.load_guards(err);
    const auto census = clients.census(net, err);

    SimConfig cfg;
    cfg.algorithm = algorithm;
    cfg.clients = n;
    cfg.runs = runs;
    cfg.seed = seed.resolve(err);
    cfg.max_retries = max_retries;
    cfg.jobs = jobs;
    cfg.discount = {discount, algorithm == Algorithm::matching ? lp.load : load};
    if (algorithm == Algorithm::matching) cfg.lp = lp.config(census.overall());
    cfg.validate();

    Rng pop_rng(derive_seed(cfg.seed, streams::population, 0));
    const auto pop = sample_clients(census, n, pop_rng);

    Output o(output, out);
    write_sim_header(o.stream());
    if (algorithm == Algorithm::matching) {
      const auto weights = optimize_weights(guards, cfg.lp, lp.lp_method());
      write_sim_rows(o.stream(), run_many(cfg, guards, pop, &weights));
      SimConfig base = cfg;
      base.algorithm = Algorithm::vanilla;
      write_sim_rows(o.stream(), run_many(base, guards, pop, nullptr));
    } else {
      write_sim_rows(o.stream(), run_many(cfg, guards, pop, nullptr));
    }
    o.commit();
  }
};

// ---- churn-sim ----

struct ChurnCmd {
  NetworkOptions net;
  LpOptions lp;
  SeedOption seed;
  std::string manifest;
  std::string country_asns;
  std::uint64_t n = 100'000;
  int max_age = 120;
  std::size_t max_retries = SelectionState::kDefaultMaxRetries;
  std::string output;

  void attach(CLI::App* app) {
    net.attach(app);
    lp.attach(app);
    seed.attach(app);
    app->add_option("--manifest", manifest, "Manifest CSV: day,country_users[,consensus]");
    app->add_option("--country-asns", country_asns, "Country to AS CSV: country,asn");
    app->add_option("--clients,-n", n, "Population size")->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--max-guard-age", max_age, "Days before a client rotates its guard (0 disables)")
        ->capture_default_str();
    app->add_option("--max-retries", max_retries, "Load-balancing redraws before accepting an overload")
        ->capture_default_str();
    app->add_option("-o,--output", output, "Output CSV (default stdout)");
  }

  void run(std::ostream& out, std::ostream& err) {
    if (manifest.empty()) throw InputError("--manifest is required");
    if (country_asns.empty()) throw InputError("--country-asns is required");
    net.require(false);
    const auto m = Manifest::load(manifest, 2, "--manifest");
    const auto roas = net.load_roa(net.roa, err);
    const auto routes = net.load_route_table(net.routes, err);
    const auto rov = net.load_rov(err);
    auto asn_in = open_input(country_asns, "--country-asns");
    const auto asns = load_country_asns(asn_in, country_asns);

    auto guards_from = [&](const std::string& path) {
      auto snap = net.load_snapshot(path, err);
      resolve_rpki(snap, routes, roas, rov);
      return guard_set(snap);
    };

    std::vector<ChurnDayInput> days;
    for (std::size_t i = 0; i < m.rows.size(); ++i) {
      const auto& row = m.rows[i];
      ChurnDayInput day;
      day.label = row[0];
      const auto users_path = m.resolve(row[1]);
      if (fs::exists(users_path)) {
        std::ifstream users_in(users_path);
        auto census = build_census(load_country_users(users_in, users_path), asns, routes, roas, rov);
        for (const auto& w : census.warnings) err << "warning: " << day.label << ": " << w << '\n';
        day.census = std::move(census);
      }
      const std::string cpath = row.size() > 2 && !row[2].empty() ? m.resolve(row[2])
                                : (i == 0 ? net.consensus : std::string());
      if (!cpath.empty() && fs::exists(cpath)) day.guards = guards_from(cpath);
      days.push_back(std::move(day));
    }

    ChurnConfig cfg;
    cfg.clients = n;
    cfg.seed = seed.resolve(err);
    cfg.lp = lp.config({0.25, 0.25, 0.25, 0.25});
    cfg.max_retries = max_retries;
    cfg.max_guard_age_days = max_age;
    const auto timeline = run_churn_timeline(days, cfg);
    for (const auto& w : timeline.warnings) err << "warning: " << w << '\n';

    Output o(output, out);
    write_churn_header(o.stream());
    write_churn_rows(o.stream(), timeline);
    o.commit();
  }
};

// ---- optimize-weights ----

struct OptimizeCmd {
  NetworkOptions net;
  ClientOptions clients;
  LpOptions lp;
  std::string output;

  void attach(CLI::App* app) {
    net.attach(app);
    clients.attach(app);
    lp.attach(app);
    app->add_option("-o,--output", output, "Output CSV (default stdout)");
  }

  void run(std::ostream& out, std::ostream& err) {
    net.require(true);
    clients.require();
    const auto guards = net.load_guards(err);
    const auto dist = clients.census(net, err).overall();
    const auto cfg = lp.config(dist);
    const auto w = optimize_weights(guards, cfg, lp.lp_method());

    Output o(output, out);
    auto& s = o.stream();
    s << "relay_id,category,weight\n";
    for (const auto c : kAllCategories) {
      for (std::size_t r = 0; r < w.relay_count(); ++r) {
        s << w.relay_ids[r] << ',' << to_string(c) << ',' << text::format_double(w.at(r, c)) << '\n';
      }
    }
    for (std::size_t r = 0; r < w.relay_count(); ++r) {
      s << w.relay_ids[r] << ",vanilla," << text::format_double(w.vanilla[r]) << '\n';
    }
    o.commit();
    const auto vanilla = vanilla_weights(guards);
    err << "objective " << text::format_double(w.objective) << " (vanilla "
        << text::format_double(lp_objective(vanilla, cfg)) << "), matched rate "
        << text::format_double(expected_matched_rate(w, dist)) << " (vanilla "
        << text::format_double(expected_matched_rate(vanilla, dist)) << ")\n";
  }
};

// ---- sweep ----

struct SweepCmd {
  NetworkOptions net;
  ClientOptions clients;
  std::string grid;
  std::string l_list = "0.8";
  std::string d1_list = "0.9";
  std::string d2_list = "0.7";
  std::string b_list = "1.5";
  double theta = 5.0;
  std::string objective = "weighted";
  unsigned jobs = default_jobs();
  std::string output;

  void attach(CLI::App* app) {
    net.attach(app);
    clients.attach(app);
    app->add_option("--grid", grid, "Grid CSV: l,d1,d2,B (overrides the list options)");
    app->add_option("--l", l_list, "Load factors: a,b,c or start:stop:step")->capture_default_str();
    app->add_option("--d1", d1_list, "d1 values")->capture_default_str();
    app->add_option("--d2", d2_list, "d2 values")->capture_default_str();
    app->add_option("--bonus,--B", b_list, "Matching bonus values")->capture_default_str();
    app->add_option("--theta", theta, "Guard placement cap")->capture_default_str();
    app->add_option("--objective-mode", objective, "weighted or literal")
        ->check(CLI::IsMember({"weighted", "literal"}))
        ->capture_default_str();
    app->add_option("--jobs,-j", jobs, "Worker threads")->check(CLI::PositiveNumber);
    app->add_option("-o,--output", output, "Output CSV (default stdout)");
  }

  struct Point {
    double l, d1, d2, b;
  };

  std::vector<Point> points() const {
    std::vector<Point> pts;
    if (!grid.empty()) {
      auto in = open_input(grid, "--grid");
      std::string line;
      std::size_t lineno = 0;
      while (text::next_line(in, line)) {
        ++lineno;
        const auto trimmed = text::trim(line);
        if (trimmed.empty() || trimmed.front() == '#') continue;
        const auto f = text::split(trimmed, ',');
        std::array<std::optional<double>, 4> v;
        for (std::size_t i = 0; i < 4 && i < f.size(); ++i) v[i] = text::parse_double(f[i]);
        if (!v[0] || !v[1] || !v[2] || !v[3]) {
          if (lineno == 1) continue;
          throw InputError(grid, lineno, "expected l,d1,d2,B");
        }
        pts.push_back({*v[0], *v[1], *v[2], *v[3]});
      }
      return pts;
    }
    for (double l : text::parse_double_list(l_list)) {
      for (double d1 : text::parse_double_list(d1_list)) {
        for (double d2 : text::parse_double_list(d2_list)) {
          for (double b : text::parse_double_list(b_list)) pts.push_back({l, d1, d2, b});
        }
      }
    }
    return pts;
  }

  void run(std::ostream& out, std::ostream& err) {
    net.require(true);
    clients.require();
    const auto pts = points();
    const auto guards = net.load_guards(err);
    const auto dist = clients.census(net, err).overall();
    const double vanilla_rate = expected_matched_rate(vanilla_weights(guards), dist);

    std::vector<std::optional<double>> rates(pts.size());
    std::vector<std::string> skipped(pts.size());
    parallel_for(pts.size(), jobs, [&](std::size_t i) {
      LpConfig cfg;
      cfg.load = pts[i].l;
      cfg.theta = theta;
      cfg.reward = {pts[i].d1, pts[i].d2, pts[i].b};
      cfg.client_distribution = dist;
      cfg.objective = objective == "literal" ? ObjectiveMode::literal : ObjectiveMode::weighted;
      try {
        cfg.validate();
      } catch (const InputError& e) {
        skipped[i] = e.what();
        return;
      }
      rates[i] = expected_matched_rate(optimize_weights(guards, cfg), dist);
    });

    Output o(output, out);
    auto& s = o.stream();
    s << "l,d1,d2,B,matched_rate,delta_matched_rate\n";
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const auto& p = pts[i];
      if (!rates[i]) {
        err << "warning: skipping l=" << text::format_double(p.l) << " d1=" << text::format_double(p.d1)
            << " d2=" << text::format_double(p.d2) << " B=" << text::format_double(p.b) << ": " << skipped[i] << '\n';
        continue;
      }
      s << text::format_double(p.l) << ',' << text::format_double(p.d1) << ',' << text::format_double(p.d2) << ','
        << text::format_double(p.b) << ',' << text::format_double(*rates[i]) << ','
        << text::format_double(*rates[i] - vanilla_rate) << '\n';
    }
    o.commit();
  }
};

// ---- utilization-grid / optimal-discount ----

struct ShareSource {
  NetworkOptions net;
  std::optional<double> roa_share;

  void attach(CLI::App* app) {
    net.attach(app);
    app->add_option("--roa-share", roa_share, "ROA-covered share of guard bandwidth (instead of network inputs)")
        ->check(CLI::Range(0.0, 1.0));
  }

  // (date label, share) pairs.
  std::vector<std::pair<std::string, double>> shares(std::ostream& err) const {
    if (roa_share) return {{"", *roa_share}};
    const auto guards = net.load_guards(err);
    std::ifstream in(net.consensus);
    return {{parse_consensus(in).valid_after, roa_share_of(guards)}};
  }
};

struct UtilizationCmd {
  ShareSource src;
  std::string l_list = "0:1:0.01";
  std::string d_list = "0:1:0.01";
  std::string output;

  void attach(CLI::App* app) {
    src.attach(app);
    app->add_option("--l", l_list, "Load factors")->capture_default_str();
    app->add_option("--d", d_list, "Discount factors")->capture_default_str();
    app->add_option("-o,--output", output, "Output CSV (default stdout)");
  }

  void run(std::ostream& out, std::ostream& err) {
    const double share = src.shares(err).front().second;
    const auto ls = text::parse_double_list(l_list);
    const auto ds = text::parse_double_list(d_list);
    for (double v : ls) DiscountParams{0.0, v}.validate();
    for (double v : ds) DiscountParams{v, 0.0}.validate();
    Output o(output, out);
    auto& s = o.stream();
    s << "l,d,utilization\n";
    for (double l : ls) {
      for (double d : ds) {
        s << text::format_double(l) << ',' << text::format_double(d) << ','
          << text::format_double(expected_utilization(l, d, share, 1.0)) << '\n';
      }
    }
    o.commit();
  }
};

struct OptimalDiscountCmd {
  ShareSource src;
  std::string series;
  std::string l_list = "0:1:0.01";
  std::string output;

  void attach(CLI::App* app) {
    src.attach(app);
    app->add_option("--series", series, "Manifest CSV: date,consensus,roa,routes");
    app->add_option("--l", l_list, "Load factors")->capture_default_str();
    app->add_option("-o,--output", output, "Output CSV (default stdout)");
  }

  void run(std::ostream& out, std::ostream& err) {
    const auto ls = text::parse_double_list(l_list);
    for (double v : ls) DiscountParams{0.0, v}.validate();
    std::vector<std::pair<std::string, double>> shares;
    if (series.empty()) {
      shares = src.shares(err);
    } else {
      const auto m = Manifest::load(series, 4, "--series");
      const auto rov = src.net.load_rov(err);
      for (const auto& row : m.rows) {
        const auto cpath = m.resolve(row[1]);
        const auto rpath = m.resolve(row[2]);
        const auto tpath = m.resolve(row[3]);
        if (!fs::exists(cpath) || !fs::exists(rpath) || !fs::exists(tpath)) {
          err << "warning: skipping " << row[0] << ": missing input file\n";
          continue;
        }
        auto snap = src.net.load_snapshot(cpath, err);
        resolve_rpki(snap, src.net.load_route_table(tpath, err), src.net.load_roa(rpath, err), rov);
        const auto guards = guard_set(snap);
        if (guards.empty()) {
          err << "warning: skipping " << row[0] << ": no guards\n";
          continue;
        }
        shares.emplace_back(row[0], roa_share_of(guards));
      }
    }
    Output o(output, out);
    auto& s = o.stream();
    s << "date,l,roa_bandwidth_share,optimal_discount\n";
    for (const auto& [date, share] : shares) {
      for (double l : ls) {
        s << date << ',' << text::format_double(l) << ',' << text::format_double(share) << ','
          << text::format_double(optimal_discount(l, share, 1.0)) << '\n';
      }
    }
    o.commit();
  }
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"RPKI-aware Tor guard selection toolkit", "rpkitor"};
  app.require_subcommand(1);
  app.fallthrough(false);

  CoverageCmd coverage;
  SimCmd discount_sim(Algorithm::discount);
  SimCmd matching_sim(Algorithm::matching);
  ChurnCmd churn;
  OptimizeCmd optimize;
  SweepCmd sweep;
  UtilizationCmd utilization;
  OptimalDiscountCmd optimal;

  std::function<void()> action;
  auto add = [&](const char* name, const char* help, auto& cmd) {
    auto* sub = app.add_subcommand(name, help);
    cmd.attach(sub);
    sub->callback([&] { action = [&] { cmd.run(out, err); }; });
  };
  add("coverage", "ROA/ROV coverage of relays per scope and address family", coverage);
  add("discount-sim", "Monte-Carlo guard selection with the discount algorithm", discount_sim);
  add("matching-sim", "Monte-Carlo guard selection with optimized matching weights", matching_sim);
  add("churn-sim", "Daily client churn timeline with and without churn", churn);
  add("optimize-weights", "Solve the matching weight LP and print the weight matrix", optimize);
  add("sweep", "Expected matched rate over a grid of (l, d1, d2, B)", sweep);
  add("utilization-grid", "Expected bandwidth utilization over (l, d)", utilization);
  add("optimal-discount", "Smallest discount serving all demand, per load factor", optimal);

  std::vector<char*> argv;
  std::vector<std::string> storage(args);
  for (auto& a : storage) argv.push_back(a.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 1;
  }

  try {
    if (action) action();
    return 0;
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return 2;
  }
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace rpkitor::cli
