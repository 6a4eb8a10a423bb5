#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <ostream>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "powdag/sim/engine.hpp"

namespace powdag::sim {

using Json = nlohmann::ordered_json;

inline Json config_json(const SimConfig& c) {
  Json j;
  j["alpha"] = c.alpha;
  j["beta"] = c.beta;
  j["epsilon"] = c.epsilon;
  j["p"] = c.p;
  j["penalty"] = c.penalty;
  j["base"] = c.base;
  j["honest_players"] = c.honest_players;
  j["weights"] = c.effective_weights();
  j["strategy"] = c.strategy.label();
  j["rounds"] = c.rounds;
  j["settle_rounds"] = c.settle();
  j["seed"] = c.seed;
  j["rng"] = c.rng;
  j["check_invariants"] = c.check_invariants;
  return j;
}

inline Json invariants_json(const InvariantCounters& v) {
  return Json{{"honest_stale", v.honest_stale},
              {"inclusion_checks", v.inclusion_checks},
              {"inclusion_late", v.inclusion_late},
              {"finality_rechecks", v.finality_rechecks},
              {"finality_violations", v.finality_violations},
              {"finalized_dropped", v.finalized_dropped},
              {"parent_checks", v.parent_checks},
              {"parent_mismatches", v.parent_mismatches}};
}

inline Json report_json(const SimReport& r) {
  Json j;
  j["schema_version"] = SimReport::kSchemaVersion;
  j["kind"] = "run";
  j["config"] = config_json(r.config);
  j["rounds_run"] = r.rounds_run;
  j["dag_blocks"] = r.dag_blocks;
  j["main_chain_length"] = r.main_chain_length;
  Json miners = Json::array();
  for (const auto& m : r.miners) {
    miners.push_back({{"id", m.id},
                      {"role", m.role},
                      {"weight", m.weight},
                      {"blocks_mined", m.blocks_mined},
                      {"blocks_finalized", m.blocks_finalized},
                      {"stale_blocks", m.stale_blocks},
                      {"conflicts", m.conflicts},
                      {"reward_micro", m.reward},
                      {"share", m.share}});
  }
  j["miners"] = miners;
  j["total_reward_micro"] = r.total_reward;
  j["unfinalized_blocks"] = r.unfinalized_blocks;
  j["negative_clamped"] = r.negative_clamped;
  j["max_conflict_size"] = r.max_conflict_size;
  Json hist = Json::array();
  for (const auto& [size, count] : r.conflict_histogram) hist.push_back({size, count});
  j["conflict_histogram"] = hist;
  j["punisher_triggered"] = r.punisher_triggered;
  j["invariants"] = invariants_json(r.invariants);
  j["warnings"] = r.warnings;
  return j;
}

/// block_id, miner, amount_micro, finalized_round, conflict_size, stale
inline void write_ledger_csv(const BlockDag& g, const RewardLedger& ledger, std::ostream& out) {
  out << "block_id,miner,amount_micro,finalized_round,conflict_size,stale\n";
  for (const auto& [b, e] : ledger.entries()) {
    out << g.id(b).hex() << ',' << g.block(b).miner.value << ',' << e.amount << ',' << e.round << ','
        << e.conflict_size << ',' << (e.stale ? 1 : 0) << '\n';
  }
}

struct Summary {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation
};

inline Summary summarize(const std::vector<double>& xs) {
  Summary s;
  if (xs.empty()) return s;
  for (double x : xs) s.mean += x;
  s.mean /= static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return s;
}

/// Runs seeds cfg.seed, cfg.seed+1, ... on a bounded pool. Results are in
/// seed order whatever the scheduling.
inline std::vector<SimReport> run_sweep(const SimConfig& cfg, std::uint32_t seeds, unsigned workers = 0) {
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, std::max(1u, seeds));
  std::vector<SimReport> out(seeds);
  std::atomic<std::uint32_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto work = [&] {
    for (;;) {
      const std::uint32_t i = next++;
      if (i >= seeds) return;
      try {
        SimConfig c = cfg;
        c.seed = cfg.seed + i;
        out[i] = run(c);
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!error) error = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
  return out;
}

inline Json sweep_json(const std::vector<SimReport>& runs) {
  Json j;
  j["schema_version"] = SimReport::kSchemaVersion;
  j["kind"] = "sweep";
  j["seeds"] = runs.size();
  Json per_run = Json::array();
  for (const auto& r : runs) per_run.push_back(report_json(r));
  Json agg;
  Json miners = Json::array();
  if (!runs.empty()) {
    for (std::size_t k = 0; k < runs.front().miners.size(); ++k) {
      std::vector<double> shares, rewards;
      for (const auto& r : runs) {
        shares.push_back(r.miners[k].share);
        rewards.push_back(static_cast<double>(r.miners[k].reward));
      }
      const Summary s = summarize(shares);
      const Summary w = summarize(rewards);
      miners.push_back({{"id", runs.front().miners[k].id},
                        {"role", runs.front().miners[k].role},
                        {"share_mean", s.mean},
                        {"share_stddev", s.stddev},
                        {"reward_mean_micro", w.mean},
                        {"reward_stddev_micro", w.stddev}});
    }
  }
  agg["miners"] = miners;
  std::uint64_t failures = 0, clamped = 0;
  std::uint32_t max_conflict = 0;
  for (const auto& r : runs) {
    failures += r.invariants.failures();
    clamped += r.negative_clamped;
    max_conflict = std::max(max_conflict, r.max_conflict_size);
  }
  agg["invariant_failures"] = failures;
  agg["negative_clamped"] = clamped;
  agg["max_conflict_size"] = max_conflict;
  j["aggregate"] = agg;
  j["runs"] = per_run;
  return j;
}

}  // namespace powdag::sim
