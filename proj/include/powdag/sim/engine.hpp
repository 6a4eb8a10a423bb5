#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "powdag/rewards.hpp"
#include "powdag/sim/config.hpp"
#include "powdag/sim/rng.hpp"
#include "powdag/sim/strategy.hpp"
#include "powdag/sim/view.hpp"

namespace powdag::sim {

struct MinerReport {
  std::uint32_t id = 0;
  std::string role;  // honest | adversary | scripted
  double weight = 0.0;
  std::uint64_t blocks_mined = 0;
  std::uint64_t blocks_finalized = 0;
  std::uint64_t stale_blocks = 0;
  std::uint64_t conflicts = 0;  // sum of conflict-set sizes over finalized blocks
  Micro reward = 0;
  double share = 0.0;
};

struct InvariantCounters {
  std::uint64_t honest_stale = 0;       // distinct honest blocks stale in some honest tip
  std::uint64_t inclusion_checks = 0;   // deadline checks of broadcast blocks
  std::uint64_t inclusion_late = 0;     // ... that were not yet in an honest main chain
  std::uint64_t finality_rechecks = 0;
  std::uint64_t finality_violations = 0;
  std::uint64_t finalized_dropped = 0;  // finalized block later missing from an honest past
  std::uint64_t parent_checks = 0;
  std::uint64_t parent_mismatches = 0;

  std::uint64_t failures() const {
    return honest_stale + inclusion_late + finality_violations + finalized_dropped + parent_mismatches;
  }
};

struct SimReport {
  static constexpr int kSchemaVersion = 1;

  SimConfig config;
  std::vector<MinerReport> miners;
  Micro total_reward = 0;
  std::map<std::uint32_t, std::uint64_t> conflict_histogram;
  std::uint32_t max_conflict_size = 0;
  std::uint64_t negative_clamped = 0;
  std::uint32_t main_chain_length = 0;
  std::uint64_t dag_blocks = 0;
  std::uint64_t rounds_run = 0;
  std::uint64_t unfinalized_blocks = 0;  // main-phase blocks without a final reward
  bool punisher_triggered = false;
  InvariantCounters invariants;
  std::vector<std::string> warnings;

  const MinerReport& miner(std::uint32_t id) const { return miners.at(id - 1); }
  Micro honest_reward() const {
    Micro t = 0;
    for (const auto& m : miners) {
      if (m.role == "honest") t += m.reward;
    }
    return t;
  }
};

struct RunOptions {
  std::ostream* event_log = nullptr;
};

/// One run of the round model.
///
/// Round r: deliveries due at r; the adversary mines on everything that
/// exists; honest players mine on what they received through r-1 (plus
/// their own blocks); the adversary sees round-r honest blocks and releases;
/// released and honest blocks reach the other players at r+1. After the
/// configured rounds a settle phase without adversary mining runs until
/// every block mined earlier has a final reward (or the settle cap is hit).
/// Reported rewards cover blocks mined before the settle phase.
class Simulation {
 public:
  explicit Simulation(SimConfig cfg, RunOptions opt = {})
      : cfg_(std::move(cfg)), opt_(opt), rng_(cfg_.seed), strategy_rng_(Rng::derived(cfg_.seed, 0x5354)) {
    report_.warnings = cfg_.validate();
    params_ = cfg_.reward_params();
    weights_ = cfg_.effective_weights();
    const std::uint32_t n = cfg_.players();
    for (std::uint32_t i = 0; i < n; ++i) views_.push_back(std::make_unique<View>(dag_));
    queues_.resize(n);
    orphans_.resize(n);
    pending_.resize(n);
    roles_.assign(n, Role::honest);
    if (cfg_.punisher()) {
      roles_[2] = cfg_.strategy.player3_silent ? Role::silent_first_round : Role::honest;
      roles_[3] = Role::punisher;
    } else {
      adversary_ = MinerId{n + 1};
      strategy_ = make_strategy(cfg_.strategy);
    }
    pub_ = std::make_unique<View>(dag_);
    full_ = std::make_unique<View>(dag_);
    ledger_.throw_on_violation = true;
    note_block(dag_.genesis(), 0);
  }

  SimReport run() {
    const std::uint64_t last = cfg_.rounds + cfg_.settle();
    for (round_ = 1; round_ <= last; ++round_) {
      step();
      if (round_ >= cfg_.rounds && settled()) break;
    }
    report_.rounds_run = std::min(round_, last);
    return summarize();
  }

  const BlockDag& dag() const { return dag_; }
  const RewardLedger& ledger() const { return ledger_; }
  const View& view(std::uint32_t player) const { return *views_.at(player); }
  std::uint64_t mined_round(BlockIndex b) const { return mined_round_.at(b); }
  bool is_honest_block(BlockIndex b) const {
    const std::uint32_t m = dag_.block(b).miner.value;
    return m >= 1 && m <= roles_.size() && roles_[m - 1] == Role::honest && !cfg_.punisher();
  }

 private:
  enum class Role { honest, silent_first_round, punisher };

  struct Recheck {
    std::uint32_t player;
    BlockIndex block;
  };

  bool main_phase() const { return round_ <= cfg_.rounds; }
  bool honest_player(std::uint32_t i) const { return roles_[i] == Role::honest; }

  void note_block(BlockIndex b, std::uint64_t round) {
    mined_round_.resize(dag_.size(), 0);
    mined_round_[b] = round;
    if (b != dag_.genesis() && round <= cfg_.rounds) ++main_blocks_;
  }

  void event(nlohmann::ordered_json j) {
    if (!opt_.event_log) return;
    nlohmann::ordered_json line;
    line["round"] = round_;
    for (auto& [k, v] : j.items()) line[k] = v;
    *opt_.event_log << line.dump() << '\n';
  }

  std::string payload(std::uint32_t miner) {
    return "r" + std::to_string(round_) + ":m" + std::to_string(miner) + ":" + std::to_string(serial_++);
  }

  void step() {
    deliver();
    if (cfg_.punisher() && round_ == 2) check_trigger();

    const std::uint32_t adv_count =
        (main_phase() && strategy_) ? rng_.poisson(cfg_.beta) : 0;
    const std::uint32_t honest_count = rng_.poisson(cfg_.alpha);

    for (std::uint32_t i = 0; i < adv_count; ++i) adversary_mine();

    std::vector<BlockIndex> honest_now;
    for (std::uint32_t i = 0; i < honest_count; ++i) {
      const auto player = static_cast<std::uint32_t>(rng_.pick(weights_));
      honest_now.push_back(player_mine(player));
    }
    release_scripted();

    if (strategy_) {
      auto state = adversary_state();
      for (const Release& r : strategy_->releases(state, honest_now)) {
        auto it = std::find(withheld_.begin(), withheld_.end(), r.block);
        if (it == withheld_.end()) continue;
        withheld_.erase(it);
        announce(r.block, kNoPlayer, r.first);
      }
    }

    for (std::uint32_t i = 0; i < views_.size(); ++i) absorb_pushes(i);
    finalize_round();
    check_deadlines();
  }

  static constexpr std::uint32_t kNoPlayer = UINT32_MAX;

  AdversaryState adversary_state() {
    return AdversaryState{dag_, *full_, *pub_, round_, adversary_, withheld_, strategy_rng_};
  }

  void adversary_mine() {
    auto state = adversary_state();
    MiningPlan plan = strategy_->plan(state);
    BlockIndex b;
    if (plan.all_tips) {
      b = dag_.insert_block_with_parent(payload(adversary_.value), plan.refs, adversary_, full_->tip()).index;
      spot_check_parent(b);
    } else {
      b = dag_.insert_block(payload(adversary_.value), plan.refs, adversary_).index;
    }
    note_block(b, round_);
    full_->add(b);
    withheld_.push_back(b);
    strategy_->mined(b, adversary_state());
    if (opt_.event_log) event({{"event", "mined"}, {"block", b}, {"miner", adversary_.value}, {"parent", dag_.parent(b)}});
  }

  BlockIndex player_mine(std::uint32_t player) {
    View& v = *views_[player];
    const MinerId miner{player + 1};
    BlockIndex b;
    std::uint64_t release = round_;
    if (roles_[player] == Role::punisher && punishing_) {
      const std::uint32_t back = params_.p / 2;
      BlockIndex anc = v.tip();
      for (std::uint32_t i = 0; i < back && anc != dag_.genesis(); ++i) anc = dag_.parent(anc);
      std::vector<BlockIndex> refs{anc};
      b = dag_.insert_block_with_parent(payload(miner.value), refs, miner, anc).index;
      release = round_ + params_.p / 4;
    } else {
      b = dag_.insert_block_with_parent(payload(miner.value), v.tips(), miner, v.tip()).index;
      spot_check_parent(b);
      if (roles_[player] == Role::silent_first_round && round_ == 1) release = 2;
    }
    note_block(b, round_);
    v.add(b);
    full_->add(b);
    if (opt_.event_log) event({{"event", "mined"}, {"block", b}, {"miner", miner.value}, {"parent", dag_.parent(b)}});
    if (release == round_) {
      announce(b, player, {});
    } else {
      scripted_.push_back({release, b, player});
    }
    return b;
  }

  void release_scripted() {
    for (auto it = scripted_.begin(); it != scripted_.end();) {
      if (it->release <= round_) {
        announce(it->block, it->player, {});
        it = scripted_.erase(it);
      } else {
        ++it;
      }
    }
  }

  /// Broadcast from `origin` (kNoPlayer for the adversary).
  void announce(BlockIndex b, std::uint32_t origin, const std::vector<std::uint32_t>& first) {
    add_when_ready(*pub_, pub_orphans_, b);
    for (std::uint32_t j = 0; j < views_.size(); ++j) {
      if (j == origin) continue;
      const bool early = first.empty() || std::find(first.begin(), first.end(), j) != first.end();
      queues_[j].emplace(round_ + (early ? 1 : 2), b);
    }
    deadlines_[round_ + 4ull * params_.p].push_back(b);
    if (origin == kNoPlayer && opt_.event_log) event({{"event", "released"}, {"block", b}});
  }

  static void add_when_ready(View& v, std::vector<BlockIndex>& orphans, BlockIndex b) {
    if (v.knows(b)) return;
    if (!v.ready(b)) {
      orphans.push_back(b);
      return;
    }
    v.add(b);
    bool progress = true;
    while (progress && !orphans.empty()) {
      progress = false;
      for (auto it = orphans.begin(); it != orphans.end();) {
        if (v.knows(*it)) {
          it = orphans.erase(it);
        } else if (v.ready(*it)) {
          v.add(*it);
          it = orphans.erase(it);
          progress = true;
        } else {
          ++it;
        }
      }
    }
  }

  void deliver() {
    for (std::uint32_t j = 0; j < views_.size(); ++j) {
      auto& q = queues_[j];
      while (!q.empty() && q.begin()->first <= round_) {
        add_when_ready(*views_[j], orphans_[j], q.begin()->second);
        q.erase(q.begin());
      }
    }
  }

  void check_trigger() {
    std::set<std::uint32_t> miners;
    const View& v = *views_[3];
    for (BlockIndex b = 1; b < dag_.size(); ++b) {
      if (v.knows(b) && dag_.parent(b) == dag_.genesis() && dag_.block(b).miner.value != 4) {
        miners.insert(dag_.block(b).miner.value);
      }
    }
    if (miners.size() >= 3) {
      punishing_ = true;
      report_.punisher_triggered = true;
      if (opt_.event_log) event({{"event", "punisher_triggered"}});
    }
  }

  void spot_check_parent(BlockIndex b) {
    if (!cfg_.check_invariants || (b % 61) != 0) return;
    ++report_.invariants.parent_checks;
    if (determine_parent(dag_, dag_.refs(b)) != dag_.parent(b)) ++report_.invariants.parent_mismatches;
  }

  void absorb_pushes(std::uint32_t i) {
    View& v = *views_[i];
    const bool honest = honest_player(i);
    for (BlockIndex c : v.take_pushed()) {
      if (!honest) continue;
      const auto fresh = dag_.fresh(c);
      const auto ages = dag_.fresh_ages(c);
      for (std::size_t k = 0; k < fresh.size(); ++k) {
        if (ages[k] > params_.p && is_honest_block(fresh[k])) {
          if (stale_honest_.insert(fresh[k]).second) ++report_.invariants.honest_stale;
          if (opt_.event_log) event({{"event", "honest_stale"}, {"block", fresh[k]}, {"player", i + 1}});
        }
        pending_[i].push_back(fresh[k]);
      }
    }
  }

  void finalize_round() {
    for (std::uint32_t i = 0; i < views_.size(); ++i) {
      if (!honest_player(i)) continue;
      const TipIndex& tip = views_[i]->chain();
      auto& pend = pending_[i];
      std::vector<BlockIndex> keep;
      for (BlockIndex b : pend) {
        if (!tip.contains(b)) continue;  // left the chain's past; re-queued if it returns
        if (tip.burial(b) <= params_.finality_depth()) {
          keep.push_back(b);
          continue;
        }
        const bool known = ledger_.contains(b);
        if (known && !cfg_.check_invariants) continue;
        const RewardOutcome out = reward(dag_, tip, b, params_);
        if (ledger_.observe(b, out, tip.tip(), round_)) {
          if (mined_round_[b] <= cfg_.rounds && b != dag_.genesis()) ++main_finalized_;
          if (cfg_.check_invariants) rechecks_[round_ + 2ull * params_.p].push_back({i, b});
          if (opt_.event_log) event({{"event", "finalized"}, {"block", b}, {"amount", out.amount}, {"conflicts", out.conflict_size},
                 {"stale", out.stale}});
        }
      }
      pend.swap(keep);
    }
    auto due = rechecks_.find(round_);
    if (due != rechecks_.end()) {
      for (const Recheck& rc : due->second) {
        const TipIndex& tip = views_[rc.player]->chain();
        if (!tip.contains(rc.block)) {
          ++report_.invariants.finalized_dropped;
          continue;
        }
        ledger_.observe(rc.block, reward(dag_, tip, rc.block, params_), tip.tip(), round_);
      }
      rechecks_.erase(due);
    }
  }

  void check_deadlines() {
    auto due = deadlines_.find(round_);
    if (due == deadlines_.end()) return;
    for (BlockIndex b : due->second) {
      for (std::uint32_t i = 0; i < views_.size(); ++i) {
        if (!honest_player(i)) continue;
        ++report_.invariants.inclusion_checks;
        if (!views_[i]->chain().contains(b)) {
          ++report_.invariants.inclusion_late;
          if (opt_.event_log) event({{"event", "inclusion_late"}, {"block", b}, {"player", i + 1}});
        }
      }
    }
    deadlines_.erase(due);
  }

  bool settled() const {
    if (main_finalized_ < main_blocks_) return false;
    return deadlines_.empty() || deadlines_.begin()->first > cfg_.rounds + 4ull * params_.p;
  }

  SimReport summarize() {
    SimReport& r = report_;
    r.config = cfg_;
    const std::uint32_t n = cfg_.players();
    for (std::uint32_t i = 0; i < n; ++i) {
      MinerReport m;
      m.id = i + 1;
      m.role = roles_[i] == Role::honest ? "honest" : "scripted";
      m.weight = weights_[i];
      r.miners.push_back(m);
    }
    if (strategy_) {
      MinerReport m;
      m.id = adversary_.value;
      m.role = "adversary";
      r.miners.push_back(m);
    }
    for (BlockIndex b = 1; b < dag_.size(); ++b) {
      if (mined_round_[b] > cfg_.rounds) continue;
      MinerReport& m = r.miners.at(dag_.block(b).miner.value - 1);
      ++m.blocks_mined;
      const LedgerEntry* e = ledger_.find(b);
      if (!e) {
        ++r.unfinalized_blocks;
        continue;
      }
      ++m.blocks_finalized;
      m.reward += e->amount;
      m.conflicts += e->conflict_size;
      if (e->stale) ++m.stale_blocks;
    }
    for (const auto& [b, e] : ledger_.entries()) {
      if (e.stale) continue;
      ++r.conflict_histogram[e.conflict_size];
      r.max_conflict_size = std::max(r.max_conflict_size, e.conflict_size);
    }
    for (const auto& m : r.miners) r.total_reward += m.reward;
    for (auto& m : r.miners) {
      m.share = r.total_reward > 0 ? static_cast<double>(m.reward) / static_cast<double>(r.total_reward) : 0.0;
    }
    r.negative_clamped = ledger_.negative_clamped();
    r.main_chain_length = views_[0]->chain().tip_depth();
    r.dag_blocks = dag_.size();
    r.invariants.finality_rechecks = ledger_.rechecks();
    r.invariants.finality_violations = ledger_.violations().size();
    return r;
  }

  struct Scripted {
    std::uint64_t release;
    BlockIndex block;
    std::uint32_t player;
  };

  SimConfig cfg_;
  RunOptions opt_;
  Rng rng_;
  Rng strategy_rng_;
  RewardParams params_;
  std::vector<double> weights_;
  BlockDag dag_;
  std::vector<std::unique_ptr<View>> views_;
  std::unique_ptr<View> pub_;
  std::unique_ptr<View> full_;
  std::vector<BlockIndex> pub_orphans_;
  std::vector<std::multimap<std::uint64_t, BlockIndex>> queues_;
  std::vector<std::vector<BlockIndex>> orphans_;
  std::vector<std::vector<BlockIndex>> pending_;
  std::vector<Role> roles_;
  std::unique_ptr<Strategy> strategy_;
  MinerId adversary_{0};
  std::vector<BlockIndex> withheld_;
  std::vector<Scripted> scripted_;
  bool punishing_ = false;
  std::set<BlockIndex> stale_honest_;
  RewardLedger ledger_;
  std::map<std::uint64_t, std::vector<Recheck>> rechecks_;
  std::map<std::uint64_t, std::vector<BlockIndex>> deadlines_;
  std::vector<std::uint64_t> mined_round_;
  std::uint64_t main_blocks_ = 0;
  std::uint64_t main_finalized_ = 0;
  std::uint64_t round_ = 0;
  std::uint64_t serial_ = 0;
  SimReport report_;
};

inline SimReport run(const SimConfig& cfg, RunOptions opt = {}) { return Simulation(cfg, opt).run(); }

}  // namespace powdag::sim
