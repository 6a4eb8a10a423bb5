#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "powdag/chain_select.hpp"
#include "powdag/dag_store.hpp"
#include "powdag/tip_index.hpp"

namespace powdag::sim {

/// One participant's knowledge: a past-closed subset of the shared store,
/// with its own subtree counts and main chain.
///
/// Adding a block bumps the counts of its parent-tree ancestors. Only the
/// comparison at the deepest on-chain ancestor can change, so the chain is
/// either extended, left alone, or cut there and re-descended.
class View {
 public:
  explicit View(const BlockDag& g) : g_(&g), chain_(g) {
    grow();
    known_[g.genesis()] = 1;
    count_[g.genesis()] = 1;
    tips_.push_back(g.genesis());
    known_count_ = 1;
    pushed_.push_back(g.genesis());
  }

  const BlockDag& graph() const { return *g_; }
  bool knows(BlockIndex b) const { return b < known_.size() && known_[b]; }
  std::size_t known_count() const { return known_count_; }

  bool ready(BlockIndex b) const {
    for (BlockIndex r : g_->refs(b)) {
      if (!knows(r)) return false;
    }
    return true;
  }

  void add(BlockIndex b) {
    grow();
    if (knows(b)) return;
    if (!ready(b)) throw Error(ErrorCode::unknown_reference, "View::add: references not known");
    known_[b] = 1;
    count_[b] = 1;
    ++known_count_;
    for (BlockIndex r : g_->refs(b)) {
      auto it = std::lower_bound(tips_.begin(), tips_.end(), r);
      if (it != tips_.end() && *it == r) tips_.erase(it);
    }
    tips_.insert(std::upper_bound(tips_.begin(), tips_.end(), b), b);

    const BlockIndex parent = g_->parent(b);
    kids_[parent].push_back(b);
    BlockIndex child = b;
    BlockIndex x = parent;
    for (;;) {
      ++count_[x];
      if (chain_.on_chain(x)) break;
      child = x;
      x = g_->parent(x);
    }
    for (BlockIndex y = x; y != g_->genesis();) {
      y = g_->parent(y);
      ++count_[y];
    }
    if (x == chain_.tip()) {
      push(child);
      return;
    }
    const BlockIndex current = chain_.chain()[g_->depth(x) + 1];
    if (heavier(*g_, count_[child], child, count_[current], current)) {
      while (chain_.tip() != x) chain_.pop();
      push(child);
      descend();
    }
  }

  BlockIndex tip() const { return chain_.tip(); }
  const TipIndex& chain() const { return chain_; }
  std::uint32_t subtree_size(BlockIndex b) const { return knows(b) ? count_[b] : 0; }

  /// Blocks no known block references, ascending.
  const std::vector<BlockIndex>& tips() const { return tips_; }

  /// Chain blocks pushed since the last call, including re-pushes after a
  /// reorganization.
  std::vector<BlockIndex> take_pushed() {
    std::vector<BlockIndex> out;
    out.swap(pushed_);
    return out;
  }

 private:
  void push(BlockIndex c) {
    chain_.push(c);
    pushed_.push_back(c);
  }

  void descend() {
    for (;;) {
      const auto& kids = kids_[chain_.tip()];
      if (kids.empty()) return;
      BlockIndex best = kids.front();
      for (BlockIndex k : kids) {
        if (heavier(*g_, count_[k], k, count_[best], best)) best = k;
      }
      push(best);
    }
  }

  void grow() {
    if (known_.size() < g_->size()) {
      known_.resize(g_->size(), 0);
      count_.resize(g_->size(), 0);
      kids_.resize(g_->size());
    }
  }

  const BlockDag* g_;
  TipIndex chain_;
  std::vector<char> known_;
  std::vector<std::uint32_t> count_;
  std::vector<std::vector<BlockIndex>> kids_;
  std::vector<BlockIndex> tips_;
  std::vector<BlockIndex> pushed_;
  std::size_t known_count_ = 0;
};

}  // namespace powdag::sim
