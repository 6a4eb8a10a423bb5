#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <vector>

#include "powdag/sim/config.hpp"
#include "powdag/sim/rng.hpp"
#include "powdag/sim/view.hpp"

namespace powdag::sim {

struct MiningPlan {
  std::vector<BlockIndex> refs;
  bool all_tips = false;  // refs are every tip of the full view, so the parent is its main tip
};

/// Broadcast of a withheld block. Players listed in `first` receive it one
/// round after the release, everyone else one round later still. An empty
/// `first` means everyone receives it after one round.
struct Release {
  BlockIndex block = kNoBlock;
  std::vector<std::uint32_t> first;
};

struct AdversaryState {
  const BlockDag& dag;
  const View& full;  // every block in existence, withheld ones included
  const View& pub;   // honest blocks plus released adversary blocks
  std::uint64_t round;
  MinerId self;
  std::span<const BlockIndex> withheld;  // own unreleased blocks, ascending
  Rng& rng;
};

/// The rushing adversary. plan() is asked once per block mined in the
/// mining phase, before the round's honest blocks exist; releases() runs
/// after they are visible, when mining is no longer allowed.
class Strategy {
 public:
  virtual ~Strategy() = default;
  virtual MiningPlan plan(const AdversaryState& s) = 0;
  virtual void mined(BlockIndex, const AdversaryState&) {}
  virtual std::vector<Release> releases(const AdversaryState& s, std::span<const BlockIndex> honest_now) = 0;
};

inline MiningPlan all_tips(const View& v) { return {v.tips(), true}; }

inline std::vector<Release> release_all(std::span<const BlockIndex> blocks) {
  std::vector<Release> out;
  for (BlockIndex b : blocks) out.push_back({b, {}});
  return out;
}

/// The protocol: reference every known tip, broadcast at once.
class HonestStrategy final : public Strategy {
 public:
  MiningPlan plan(const AdversaryState& s) override { return all_tips(s.full); }
  std::vector<Release> releases(const AdversaryState& s, std::span<const BlockIndex>) override {
    return release_all(s.withheld);
  }
};

/// withhold(k): honest references, each block released k rounds after it
/// was mined. k = 0 is the protocol.
class WithholdStrategy final : public Strategy {
 public:
  explicit WithholdStrategy(std::uint32_t k) : k_(k) {}
  MiningPlan plan(const AdversaryState& s) override { return all_tips(s.full); }
  void mined(BlockIndex b, const AdversaryState& s) override { mined_at_[b] = s.round; }
  std::vector<Release> releases(const AdversaryState& s, std::span<const BlockIndex>) override {
    std::vector<Release> out;
    for (BlockIndex b : s.withheld) {
      if (mined_at_.at(b) + k_ <= s.round) {
        out.push_back({b, {}});
        mined_at_.erase(b);
      }
    }
    return out;
  }

 private:
  std::uint32_t k_;
  std::map<BlockIndex, std::uint64_t> mined_at_;
};

/// Private chain on its own blocks, released by lead against the public
/// main chain (depth difference).
class SelfishStrategy final : public Strategy {
 public:
  explicit SelfishStrategy(std::uint32_t threshold) : threshold_(threshold) {}

  MiningPlan plan(const AdversaryState& s) override {
    if (s.withheld.empty()) return all_tips(s.full);
    return {{s.withheld.back()}, false};
  }

  std::vector<Release> releases(const AdversaryState& s, std::span<const BlockIndex>) override {
    const std::uint32_t pub_len = s.dag.depth(s.pub.tip());
    const bool progressed = pub_len > last_pub_len_;
    last_pub_len_ = pub_len;
    if (s.withheld.empty()) return {};
    const auto priv_len = static_cast<std::int64_t>(s.dag.depth(s.withheld.back()));
    const std::int64_t lead = priv_len - pub_len;
    if (lead <= 0) return release_all(s.withheld);
    if (!progressed) return {};
    if (lead <= static_cast<std::int64_t>(threshold_)) return release_all(s.withheld);
    std::vector<Release> out;
    for (BlockIndex b : s.withheld) {
      if (s.dag.depth(b) <= pub_len) out.push_back({b, {}});
    }
    return out;
  }

 private:
  std::uint32_t threshold_;
  std::uint32_t last_pub_len_ = 0;
};

/// Broadcasts at once but references only its parent and its own tips.
class NoReferenceStrategy final : public Strategy {
 public:
  MiningPlan plan(const AdversaryState& s) override {
    std::vector<BlockIndex> refs{s.full.tip()};
    for (BlockIndex t : s.full.tips()) {
      if (t != s.full.tip() && s.dag.block(t).miner == s.self) refs.push_back(t);
    }
    std::sort(refs.begin(), refs.end());
    return {refs, false};
  }
  std::vector<Release> releases(const AdversaryState& s, std::span<const BlockIndex>) override {
    return release_all(s.withheld);
  }
};

inline std::unique_ptr<Strategy> make_strategy(const StrategySpec& spec) {
  if (spec.name == "honest") return std::make_unique<HonestStrategy>();
  if (spec.name == "withhold") return std::make_unique<WithholdStrategy>(spec.k);
  if (spec.name == "selfish") return std::make_unique<SelfishStrategy>(spec.lead_threshold);
  if (spec.name == "no_reference") return std::make_unique<NoReferenceStrategy>();
  throw Error(ErrorCode::config_invalid, "strategy '" + spec.name + "' has no adversary implementation");
}

}  // namespace powdag::sim
