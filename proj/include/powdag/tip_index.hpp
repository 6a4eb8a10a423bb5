#pragma once

#include <cstdint>
#include <vector>

#include "powdag/dag_store.hpp"

namespace powdag {

/// past(tip) of one main chain, with every member's inclusion age.
///
/// The chain is edited at its end only (push a child of the tip, pop the
/// tip), so it can follow a growing or reorganizing main chain: each edit
/// touches only the inclusion layer of the block pushed or popped.
class TipIndex {
 public:
  explicit TipIndex(const BlockDag& g) : g_(&g) { push(g.genesis()); }

  static TipIndex at(const BlockDag& g, BlockIndex tip) {
    if (tip >= g.size()) throw Error(ErrorCode::unknown_block, "TipIndex: unknown tip");
    std::vector<BlockIndex> path;
    for (BlockIndex c = tip; c != g.genesis(); c = g.parent(c)) path.push_back(c);
    TipIndex t(g);
    for (auto it = path.rbegin(); it != path.rend(); ++it) t.push(*it);
    return t;
  }

  const BlockDag& graph() const { return *g_; }
  BlockIndex tip() const { return chain_.back(); }
  std::uint32_t tip_depth() const { return static_cast<std::uint32_t>(chain_.size() - 1); }
  const std::vector<BlockIndex>& chain() const { return chain_; }

  void push(BlockIndex c) {
    grow();
    if (!chain_.empty() && g_->parent(c) != chain_.back()) {
      throw Error(ErrorCode::not_an_ancestor, "TipIndex::push: not a child of the tip");
    }
    if (chain_.empty() && c != g_->genesis()) {
      throw Error(ErrorCode::not_an_ancestor, "TipIndex: chain must start at genesis");
    }
    auto fresh = g_->fresh(c);
    auto ages = g_->fresh_ages(c);
    for (std::size_t i = 0; i < fresh.size(); ++i) age_[fresh[i]] = static_cast<std::int32_t>(ages[i]);
    on_chain_[c] = 1;
    chain_.push_back(c);
  }

  void pop() {
    if (chain_.size() <= 1) throw Error(ErrorCode::not_an_ancestor, "TipIndex::pop: at genesis");
    BlockIndex c = chain_.back();
    for (BlockIndex x : g_->fresh(c)) age_[x] = -1;
    on_chain_[c] = 0;
    chain_.pop_back();
  }

  bool contains(BlockIndex x) const { return x < age_.size() && age_[x] >= 0; }

  /// Inclusion age, or -1 outside past(tip).
  std::int32_t age(BlockIndex x) const { return x < age_.size() ? age_[x] : -1; }

  bool is_stale(BlockIndex x, std::uint32_t p) const {
    if (!contains(x)) throw Error(ErrorCode::not_in_past, "is_stale: block not in past(tip)");
    return static_cast<std::uint32_t>(age_[x]) > p;
  }

  bool on_chain(BlockIndex x) const { return x < on_chain_.size() && on_chain_[x]; }

  /// lca(tip, x): the deepest chain block that is a parent-tree ancestor of x.
  BlockIndex meet(BlockIndex x) const {
    if (x >= g_->size()) throw Error(ErrorCode::unknown_block, "meet: unknown block");
    while (!on_chain(x)) x = g_->parent(x);
    return x;
  }

  /// distance(tip, lca(tip, x)).
  std::uint32_t burial(BlockIndex x) const { return tip_depth() - g_->depth(meet(x)); }

 private:
  void grow() {
    if (age_.size() < g_->size()) {
      age_.resize(g_->size(), -1);
      on_chain_.resize(g_->size(), 0);
    }
  }

  const BlockDag* g_;
  std::vector<BlockIndex> chain_;
  std::vector<std::int32_t> age_;
  std::vector<char> on_chain_;
};

}  // namespace powdag
