// powdag-sim: run experiments and the invariant suite.
//
// Exit codes: 0 success, 2 configuration error, 3 invariant violation,
// 1 anything else.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "powdag/check.hpp"
#include "powdag/ordering.hpp"
#include "powdag/sim/engine.hpp"
#include "powdag/sim/report.hpp"
#include "powdag/snapshot.hpp"
#include "powdag/staleness.hpp"

namespace {

using namespace powdag;
using namespace powdag::sim;

constexpr int kOk = 0;
constexpr int kInternal = 1;
constexpr int kConfigError = 2;
constexpr int kInvariantViolation = 3;

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("powdag-sim");
  logger->set_pattern("%^%l%$: %v");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("SIM_LOG")) {
    auto level = spdlog::level::from_str(env);
    if (level == spdlog::level::off && std::string(env) != "off") {
      spdlog::warn("SIM_LOG='{}' is not a level (trace, debug, info, warn, error, off)", env);
    } else {
      spdlog::set_level(level);
    }
  }
}

/// Opens `path` for writing; "-" is standard output.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (path != "-") {
      file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
      if (!*file_) throw Error(ErrorCode::config_invalid, "cannot write '" + path + "'");
    }
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

struct RunArgs {
  std::string config;
  std::optional<double> alpha, beta;
  std::optional<std::uint32_t> p;
  std::optional<Micro> penalty, base;
  std::optional<std::uint64_t> rounds, seed;
  std::optional<std::string> strategy;
  std::vector<std::string> sets;
  std::uint32_t seeds = 1;
  unsigned workers = 0;
  std::string output = "-";
  std::string ledger_csv, dump_dag, dump_order, dump_stale, event_log;
  bool check_invariants = false;
};

SimConfig build_config(const RunArgs& a) {
  SimConfig c = a.config.empty() ? SimConfig{} : load_config(a.config);
  if (a.alpha) c.alpha = *a.alpha;
  if (a.beta) c.beta = *a.beta;
  if (a.p) c.p = *a.p;
  if (a.penalty) c.penalty = *a.penalty;
  if (a.base) c.base = *a.base;
  if (a.rounds) c.rounds = *a.rounds;
  if (a.seed) c.seed = *a.seed;
  if (a.strategy) set_option(c, "strategy", *a.strategy);
  for (const std::string& kv : a.sets) {
    auto eq = kv.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::config_invalid, "--set expects key=value, got '" + kv + "'");
    set_option(c, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (a.check_invariants) c.check_invariants = true;
  return c;
}

void log_summary(const SimReport& r) {
  spdlog::info("seed {}: {} blocks, chain length {}, {} rounds", r.config.seed, r.dag_blocks, r.main_chain_length,
               r.rounds_run);
  for (const auto& m : r.miners) {
    spdlog::info("  miner {} ({}): mined {}, reward {} micro, share {:.4f}", m.id, m.role, m.blocks_mined, m.reward,
                 m.share);
  }
  const auto& v = r.invariants;
  if (v.failures()) {
    spdlog::error("invariants: {} honest stale, {} late inclusions, {} finality violations, {} dropped, {} parent "
                  "mismatches",
                  v.honest_stale, v.inclusion_late, v.finality_violations, v.finalized_dropped, v.parent_mismatches);
  }
}

int cmd_run(const RunArgs& a) {
  SimConfig cfg = build_config(a);
  for (const auto& w : cfg.validate()) spdlog::warn("{}", w);
  const bool artifacts = !a.ledger_csv.empty() || !a.dump_dag.empty() || !a.dump_order.empty() ||
                         !a.dump_stale.empty() || !a.event_log.empty();
  if (a.seeds == 0) throw Error(ErrorCode::config_invalid, "--seeds must be at least 1");

  if (a.seeds > 1) {
    if (artifacts) throw Error(ErrorCode::config_invalid, "ledger, dump and event-log outputs need a single seed");
    auto runs = run_sweep(cfg, a.seeds, a.workers);
    Output out(a.output);
    out.stream() << sweep_json(runs).dump(2) << '\n';
    std::uint64_t failures = 0;
    for (const auto& r : runs) {
      log_summary(r);
      failures += r.invariants.failures();
    }
    return cfg.check_invariants && failures ? kInvariantViolation : kOk;
  }

  std::unique_ptr<Output> events;
  RunOptions opt;
  if (!a.event_log.empty()) {
    events = std::make_unique<Output>(a.event_log);
    opt.event_log = &events->stream();
  }
  Simulation sim(cfg, opt);
  SimReport r = sim.run();
  {
    Output out(a.output);
    out.stream() << report_json(r).dump(2) << '\n';
  }
  const BlockDag& g = sim.dag();
  if (!a.ledger_csv.empty()) {
    Output out(a.ledger_csv);
    write_ledger_csv(g, sim.ledger(), out.stream());
  }
  if (!a.dump_dag.empty()) {
    Output out(a.dump_dag);
    export_snapshot(g, out.stream());
  }
  const BlockIndex tip = sim.view(0).tip();
  if (!a.dump_order.empty()) {
    Output out(a.dump_order);
    for (BlockIndex b : order(g, tip)) out.stream() << g.id(b).hex() << '\n';
  }
  if (!a.dump_stale.empty()) {
    Output out(a.dump_stale);
    for (BlockIndex b : stale_set(g, tip, cfg.p).members) out.stream() << g.id(b).hex() << '\n';
  }
  log_summary(r);
  return cfg.check_invariants && r.invariants.failures() ? kInvariantViolation : kOk;
}

struct CheckArgs {
  std::string config;
  std::uint32_t dags = 100;
  std::size_t max_blocks = 1000;
  std::uint64_t seed = 1;
  std::string snapshot;
  bool inject_fault = false;
  std::uint64_t scenario_rounds = 2000;
};

int cmd_check(const CheckArgs& a) {
  SimConfig cfg = a.config.empty() ? SimConfig{} : load_config(a.config);
  cfg.validate();

  check::SuiteOptions opt;
  opt.dags = a.dags;
  opt.max_blocks = a.max_blocks;
  opt.seed = a.seed;
  check::Table table = check::run_suite(opt);

  if (!a.snapshot.empty()) {
    std::ifstream in(a.snapshot);
    if (!in) throw Error(ErrorCode::config_invalid, "cannot open snapshot '" + a.snapshot + "'");
    const BlockDag g = import_snapshot(in, ParentPolicy::trust);
    check::check_dag(g, "snapshot " + a.snapshot, {cfg.p}, table);
  }
  if (a.inject_fault) {
    check::check_dag(check::wrong_parent_fixture(), "injected wrong parent", {2}, table);
  }

  if (a.scenario_rounds > 0 && !cfg.punisher()) {
    for (const char* name : {"honest", "withhold", "selfish", "no_reference"}) {
      SimConfig c = cfg;
      c.strategy = parse_strategy(name);
      if (c.strategy.name == "withhold") c.strategy.k = std::max<std::uint32_t>(1, c.p / 2);
      c.rounds = std::max<std::uint64_t>(a.scenario_rounds, 4ull * c.p);
      c.check_invariants = true;
      const SimReport r = run(c);
      const auto& v = r.invariants;
      table.expect("scenario " + c.strategy.label() + ": honest blocks never stale", v.honest_stale == 0,
                   [&] { return std::to_string(v.honest_stale) + " stale inclusions"; });
      table.expect("scenario " + c.strategy.label() + ": broadcasts included within 4p", v.inclusion_late == 0,
                   [&] { return std::to_string(v.inclusion_late) + " late"; });
      table.expect("scenario " + c.strategy.label() + ": finalized rewards unchanged",
                   v.finality_violations + v.finalized_dropped == 0, [&] { return std::string("recheck mismatch"); });
      table.expect("scenario " + c.strategy.label() + ": parents agree with chain rule", v.parent_mismatches == 0,
                   [&] { return std::to_string(v.parent_mismatches) + " mismatches"; });
    }
  }

  table.print(std::cout);
  return table.all_passed() ? kOk : kInvariantViolation;
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Block DAG reward simulator"};
  app.require_subcommand(1);

  RunArgs ra;
  auto* run_cmd = app.add_subcommand("run", "run one experiment or a seed sweep");
  run_cmd->add_option("-c,--config", ra.config, "flat key = value config file");
  run_cmd->add_option("--alpha", ra.alpha, "honest blocks per round");
  run_cmd->add_option("--beta", ra.beta, "adversary blocks per round");
  run_cmd->add_option("--p", ra.p, "staleness bound");
  run_cmd->add_option("--penalty", ra.penalty, "penalty per conflict, micro-units");
  run_cmd->add_option("--base", ra.base, "base reward, micro-units");
  run_cmd->add_option("--rounds", ra.rounds, "rounds before the settle phase");
  run_cmd->add_option("--seed", ra.seed, "RNG seed (first seed of a sweep)");
  run_cmd->add_option("--strategy", ra.strategy, "honest | withhold(k) | selfish[(t)] | no_reference | punisher");
  run_cmd->add_option("--set", ra.sets, "any other config key, as key=value");
  run_cmd->add_option("--seeds", ra.seeds, "number of consecutive seeds to sweep");
  run_cmd->add_option("--workers", ra.workers, "sweep worker threads (default: hardware)");
  run_cmd->add_option("-o,--output", ra.output, "report path, - for stdout");
  run_cmd->add_option("--ledger-csv", ra.ledger_csv, "write the reward ledger as CSV");
  run_cmd->add_option("--dump-dag", ra.dump_dag, "write the block DAG as JSON lines");
  run_cmd->add_option("--dump-order", ra.dump_order, "write the total order of player 1's final tip");
  run_cmd->add_option("--dump-stale", ra.dump_stale, "write the stale set of player 1's final tip");
  run_cmd->add_option("--event-log", ra.event_log, "write a JSON-lines event log");
  run_cmd->add_flag("--check-invariants", ra.check_invariants, "recheck finality and spot-check parents; exit 3 on failure");

  CheckArgs ca;
  auto* check_cmd = app.add_subcommand("check", "run the invariant suite");
  check_cmd->add_option("-c,--config", ca.config, "config for the scenario runs");
  check_cmd->add_option("--dags", ca.dags, "random DAGs to check");
  check_cmd->add_option("--max-blocks", ca.max_blocks, "largest random DAG");
  check_cmd->add_option("--seed", ca.seed, "seed for the random DAGs");
  check_cmd->add_option("--snapshot", ca.snapshot, "also check a DAG snapshot (parents taken as recorded)");
  check_cmd->add_flag("--inject-fault", ca.inject_fault, "also check a fixture with a wrong parent");
  check_cmd->add_option("--scenario-rounds", ca.scenario_rounds, "rounds per scenario run, 0 to skip");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*run_cmd) return cmd_run(ra);
    return cmd_check(ca);
  } catch (const Error& e) {
    spdlog::error("{}", e.what());
    switch (e.code()) {
      case ErrorCode::config_invalid:
      case ErrorCode::parse_error:
        return kConfigError;
      case ErrorCode::finality_violation:
        return kInvariantViolation;
      default:
        return kInternal;
    }
  } catch (const std::exception& e) {
    spdlog::error("internal error: {}", e.what());
    return kInternal;
  }
}
