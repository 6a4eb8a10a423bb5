#pragma once

#include <optional>
#include <span>
#include <vector>

#include "powdag/graph.hpp"
#include "powdag/types.hpp"

namespace powdag {

/// Restriction of a block graph to a past-closed subset. Subtree sizes are
/// counted over view members only and computed on first use.
template <BlockGraph G>
class ChainView {
 public:
  /// Every block currently in the graph.
  static ChainView whole(const G& g) {
    ChainView v(g);
    v.member_.assign(g.size(), 1);
    v.count_ = g.size();
    v.limit_ = g.size();
    return v;
  }

  /// Union of past(r) over `refs`. Refs must be valid indices.
  static ChainView union_of_pasts(const G& g, std::span<const BlockIndex> refs) {
    ChainView v(g);
    v.member_.assign(g.size(), 0);
    BlockIndex top = 0;
    for (BlockIndex r : refs) {
      if (r >= g.size()) throw Error(ErrorCode::unknown_reference, "ref index out of range");
      top = std::max(top, r);
    }
    for (BlockIndex x = 0; x <= top && !refs.empty(); ++x) {
      for (BlockIndex r : refs) {
        if (x <= r && g.reaches(r, x)) {
          v.member_[x] = 1;
          ++v.count_;
          break;
        }
      }
    }
    v.limit_ = refs.empty() ? 0 : top + 1;
    return v;
  }

  /// Explicit member list; callers are expected to pass a past-closed set
  /// (see is_past_closed()).
  static ChainView from_members(const G& g, std::span<const BlockIndex> members) {
    ChainView v(g);
    v.member_.assign(g.size(), 0);
    for (BlockIndex m : members) {
      if (m >= g.size()) throw Error(ErrorCode::unknown_block, "member out of range");
      if (!v.member_[m]) {
        v.member_[m] = 1;
        ++v.count_;
        v.limit_ = std::max<std::size_t>(v.limit_, m + 1);
      }
    }
    return v;
  }

  const G& graph() const { return *g_; }
  bool empty() const { return count_ == 0; }
  std::size_t count() const { return count_; }
  bool contains(BlockIndex b) const { return b < member_.size() && member_[b]; }

  bool is_past_closed() const {
    for (BlockIndex x = 0; x < limit_; ++x) {
      if (!member_[x]) continue;
      for (BlockIndex r : g_->refs(x)) {
        if (!contains(r)) return false;
      }
    }
    return true;
  }

  std::uint32_t subtree_size(BlockIndex b) const {
    ensure_sizes();
    return contains(b) ? sizes_[b] : 0;
  }

  std::vector<BlockIndex> children(BlockIndex b) const {
    std::vector<BlockIndex> out;
    for (BlockIndex c : g_->children(b)) {
      if (contains(c)) out.push_back(c);
    }
    return out;
  }

 private:
  explicit ChainView(const G& g) : g_(&g) {}

  void ensure_sizes() const {
    if (!sizes_.empty() || limit_ == 0) return;
    sizes_.assign(limit_, 0);
    for (std::size_t i = limit_; i-- > 0;) {
      if (!member_[i]) continue;
      sizes_[i] += 1;
      BlockIndex p = g_->parent(static_cast<BlockIndex>(i));
      if (p != kNoBlock) sizes_[p] += sizes_[i];
    }
  }

  const G* g_;
  std::vector<char> member_;
  std::size_t count_ = 0;
  std::size_t limit_ = 0;
  mutable std::vector<std::uint32_t> sizes_;
};

/// Heavier subtree first; equal weights resolve to the smaller block id.
template <BlockGraph G>
bool heavier(const G& g, std::uint32_t size_a, BlockIndex a, std::uint32_t size_b,
             BlockIndex b) {
  if (size_a != size_b) return size_a > size_b;
  return g.id(a) < g.id(b);
}

template <BlockGraph G>
std::optional<BlockIndex> heaviest_child(const ChainView<G>& view, BlockIndex b) {
  if (!view.contains(b)) throw Error(ErrorCode::unknown_block, "block not in view");
  const G& g = view.graph();
  std::optional<BlockIndex> best;
  std::uint32_t best_size = 0;
  for (BlockIndex c : g.children(b)) {
    if (!view.contains(c)) continue;
    std::uint32_t s = view.subtree_size(c);
    if (!best || heavier(g, s, c, best_size, *best)) {
      best = c;
      best_size = s;
    }
  }
  return best;
}

/// Genesis-to-leaf path that follows the heaviest child at every step.
template <BlockGraph G>
std::vector<BlockIndex> main_chain(const ChainView<G>& view) {
  const G& g = view.graph();
  if (view.empty() || !view.contains(g.genesis())) {
    throw Error(ErrorCode::unknown_block, "main_chain: view has no genesis");
  }
  std::vector<BlockIndex> chain{g.genesis()};
  while (auto next = heaviest_child(view, chain.back())) chain.push_back(*next);
  return chain;
}

/// Parent of a block with the given references: the end of the main chain of
/// the union of the references' pasts.
template <BlockGraph G>
BlockIndex determine_parent(const G& g, std::span<const BlockIndex> refs) {
  if (refs.empty()) throw Error(ErrorCode::empty_references, "no references");
  auto view = ChainView<G>::union_of_pasts(g, refs);
  BlockIndex b = g.genesis();
  while (auto next = heaviest_child(view, b)) b = *next;
  return b;
}

}  // namespace powdag
