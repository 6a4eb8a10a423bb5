#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "powdag/dag_store.hpp"
#include "powdag/tip_index.hpp"

namespace powdag {

/// Reward scheme parameters. penalty == 0 is the flat scheme.
struct RewardParams {
  Micro base = 0;
  Micro penalty = 0;
  std::uint32_t p = 1;

  void validate() const {
    if (base <= 0) throw Error(ErrorCode::config_invalid, "base reward must be positive");
    if (penalty < 0) throw Error(ErrorCode::config_invalid, "penalty must be non-negative");
    if (p == 0) throw Error(ErrorCode::config_invalid, "p must be positive");
  }

  /// base > penalty * x * p: conflict sets up to x * p cannot push a reward
  /// below zero.
  bool has_margin(double x) const {
    return static_cast<double>(base) > static_cast<double>(penalty) * x * p;
  }

  std::uint32_t finality_depth() const { return 2 * p; }
};

namespace detail {

template <class Visit>
void for_each_conflict(const BlockDag& g, const TipIndex& tip, BlockIndex b, std::uint32_t p,
                       Visit&& visit) {
  if (b >= g.size()) throw Error(ErrorCode::unknown_block, "conflict_set: unknown block");
  if (!tip.contains(b)) throw Error(ErrorCode::not_in_past, "conflict_set: block not in past(tip)");
  if (tip.is_stale(b, p)) throw Error(ErrorCode::stale_subject, g.id(b).short_hex());
  // Everything below past_floor(b) is in past(b); nothing above the tip is in
  // past(tip).
  const BlockIndex hi = tip.tip();
  for (BlockIndex x = g.past_floor(b); x <= hi; ++x) {
    if (x == b) continue;
    const std::int32_t age = tip.age(x);
    if (age < 0 || static_cast<std::uint32_t>(age) > p) continue;
    if (g.reaches(b, x) || g.reaches(x, b)) continue;
    visit(x);
  }
}

}  // namespace detail

/// Non-stale members of past(tip) that are mutually unreachable with b.
inline std::vector<BlockIndex> conflict_set(const BlockDag& g, const TipIndex& tip, BlockIndex b,
                                            std::uint32_t p) {
  std::vector<BlockIndex> out;
  detail::for_each_conflict(g, tip, b, p, [&](BlockIndex x) { out.push_back(x); });
  return out;
}

inline std::vector<BlockIndex> conflict_set(const BlockDag& g, BlockIndex tip, BlockIndex b,
                                            std::uint32_t p) {
  return conflict_set(g, TipIndex::at(g, tip), b, p);
}

inline std::uint32_t conflict_size(const BlockDag& g, const TipIndex& tip, BlockIndex b,
                                   std::uint32_t p) {
  std::uint32_t n = 0;
  detail::for_each_conflict(g, tip, b, p, [&](BlockIndex) { ++n; });
  return n;
}

struct RewardOutcome {
  Micro amount = 0;
  Micro unclamped = 0;
  std::uint32_t conflict_size = 0;
  bool stale = false;
  bool pending = false;  // buried at most 2p below the tip
  bool clamped = false;  // unclamped value was negative

  bool final() const { return !pending; }
  friend bool operator==(const RewardOutcome&, const RewardOutcome&) = default;
};

inline RewardOutcome reward(const BlockDag& g, const TipIndex& tip, BlockIndex b,
                            const RewardParams& params) {
  if (b >= g.size()) throw Error(ErrorCode::unknown_block, "reward: unknown block");
  if (!tip.contains(b)) throw Error(ErrorCode::not_in_past, "reward: block not in past(tip)");
  RewardOutcome out;
  out.pending = tip.burial(b) <= params.finality_depth();
  if (tip.is_stale(b, params.p)) {
    out.stale = true;
    return out;
  }
  if (out.pending) return out;
  out.conflict_size = conflict_size(g, tip, b, params.p);
  out.unclamped = params.base - params.penalty * static_cast<Micro>(out.conflict_size);
  out.clamped = out.unclamped < 0;
  out.amount = out.clamped ? 0 : out.unclamped;
  return out;
}

inline RewardOutcome reward(const BlockDag& g, BlockIndex tip, BlockIndex b,
                            const RewardParams& params) {
  return reward(g, TipIndex::at(g, tip), b, params);
}

struct LedgerEntry {
  Micro amount = 0;
  BlockIndex finalized_at = kNoBlock;  // tip that fixed the amount
  std::uint64_t round = 0;
  std::uint32_t conflict_size = 0;
  bool stale = false;
  bool clamped = false;
};

/// Finalized rewards. Amounts are written once; later observations of the
/// same block are compared against the stored amount.
class RewardLedger {
 public:
  struct Violation {
    BlockIndex block;
    Micro recorded;
    Micro observed;
    BlockIndex recorded_tip;
    BlockIndex observed_tip;
  };

  bool throw_on_violation = true;

  bool contains(BlockIndex b) const { return entries_.contains(b); }
  const LedgerEntry* find(BlockIndex b) const {
    auto it = entries_.find(b);
    return it == entries_.end() ? nullptr : &it->second;
  }
  const std::map<BlockIndex, LedgerEntry>& entries() const { return entries_; }
  std::uint64_t negative_clamped() const { return negative_clamped_; }
  std::uint64_t rechecks() const { return rechecks_; }
  const std::vector<Violation>& violations() const { return violations_; }

  /// Records a final outcome, or compares it with the recorded one. Returns
  /// true when the block was newly recorded.
  bool observe(BlockIndex b, const RewardOutcome& o, BlockIndex tip, std::uint64_t round) {
    if (o.pending) return false;
    auto it = entries_.find(b);
    if (it == entries_.end()) {
      entries_.emplace(b, LedgerEntry{o.amount, tip, round, o.conflict_size, o.stale, o.clamped});
      if (o.clamped) ++negative_clamped_;
      return true;
    }
    ++rechecks_;
    const LedgerEntry& e = it->second;
    if (e.amount != o.amount || e.stale != o.stale) {
      violations_.push_back({b, e.amount, o.amount, e.finalized_at, tip});
      if (throw_on_violation) {
        std::ostringstream msg;
        msg << "block #" << b << " recorded " << e.amount << " at tip #" << e.finalized_at
            << ", observed " << o.amount << " at tip #" << tip;
        throw Error(ErrorCode::finality_violation, msg.str());
      }
    }
    return false;
  }

 private:
  std::map<BlockIndex, LedgerEntry> entries_;
  std::vector<Violation> violations_;
  std::uint64_t negative_clamped_ = 0;
  std::uint64_t rechecks_ = 0;
};

/// Records every block of past(tip) buried more than 2p below the tip. With
/// `recheck`, blocks already in the ledger are re-evaluated and compared.
inline std::size_t finalize(const BlockDag& g, const TipIndex& tip, const RewardParams& params,
                            RewardLedger& ledger, std::uint64_t round = 0, bool recheck = false) {
  std::size_t added = 0;
  for (BlockIndex b = 0; b <= tip.tip(); ++b) {
    if (!tip.contains(b)) continue;
    if (ledger.contains(b) && !recheck) continue;
    if (tip.burial(b) <= params.finality_depth()) continue;
    if (ledger.observe(b, reward(g, tip, b, params), tip.tip(), round)) ++added;
  }
  return added;
}

inline std::size_t finalize(const BlockDag& g, BlockIndex tip, const RewardParams& params,
                            RewardLedger& ledger, std::uint64_t round = 0, bool recheck = false) {
  return finalize(g, TipIndex::at(g, tip), params, ledger, round, recheck);
}

}  // namespace powdag
