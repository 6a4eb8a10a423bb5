#pragma once

#include <span>
#include <vector>

#include "powdag/graph.hpp"
#include "powdag/types.hpp"

namespace powdag {

namespace detail {

/// Depth-first visit in the inclusion order: parent subtree first, then each
/// reference in stored order, then the block itself. `visited` is consulted
/// and updated through the two callables so callers can seed it (e.g. with
/// past(P(B))). Recursion is an explicit stack.
template <BlockGraph G, class IsVisited, class Mark>
void visit_inclusion_order(const G& g, BlockIndex root, IsVisited&& is_visited,
                           Mark&& mark, std::vector<BlockIndex>& out) {
  struct Frame {
    BlockIndex block;
    int next;  // -1: parent pending, k >= 0: refs[k] pending
  };
  auto enter = [&](BlockIndex x, std::vector<Frame>& stack) {
    if (is_visited(x)) return;
    mark(x);
    if (x == g.genesis()) {
      out.push_back(x);
      return;
    }
    stack.push_back({x, -1});
  };
  std::vector<Frame> stack;
  enter(root, stack);
  while (!stack.empty()) {
    Frame& f = stack.back();
    auto refs = g.refs(f.block);
    if (f.next == -1) {
      f.next = 0;
      enter(g.parent(f.block), stack);
      continue;
    }
    if (static_cast<std::size_t>(f.next) < refs.size()) {
      BlockIndex r = refs[f.next++];
      enter(r, stack);
      continue;
    }
    out.push_back(f.block);
    stack.pop_back();
  }
}

/// Blocks of the union of past(r) over `refs` that are not in past(parent),
/// in inclusion visit order. The block being created is not part of the
/// output; callers append it.
template <BlockGraph G>
std::vector<BlockIndex> fresh_in_visit_order(const G& g, std::span<const BlockIndex> refs,
                                             BlockIndex parent) {
  std::vector<BlockIndex> out;
  std::vector<BlockIndex> marked;
  auto is_visited = [&](BlockIndex x) {
    if (g.reaches(parent, x)) return true;
    for (BlockIndex m : marked) {
      if (m == x) return true;
    }
    return false;
  };
  auto mark = [&](BlockIndex x) { marked.push_back(x); };
  for (BlockIndex r : refs) visit_inclusion_order(g, r, is_visited, mark, out);
  return out;
}

}  // namespace detail

/// Total order of past(b): order(P(b)) followed by the newly included blocks
/// of each reference in stored order, then b.
template <BlockGraph G>
std::vector<BlockIndex> order(const G& g, BlockIndex b) {
  if (b >= g.size()) throw Error(ErrorCode::unknown_block, "order: unknown block");
  std::vector<char> visited(b + 1, 0);
  std::vector<BlockIndex> out;
  detail::visit_inclusion_order(
      g, b, [&](BlockIndex x) { return visited[x] != 0; },
      [&](BlockIndex x) { visited[x] = 1; }, out);
  return out;
}

/// order(b) from order(P(b)), appending only past(b) \ past(P(b)).
template <LayeredBlockGraph G>
std::vector<BlockIndex> order_incremental(const G& g, std::span<const BlockIndex> prev,
                                          BlockIndex b) {
  if (b >= g.size()) throw Error(ErrorCode::unknown_block, "order_incremental: unknown block");
  if (b == g.genesis()) {
    if (!prev.empty()) throw Error(ErrorCode::prefix_mismatch, "genesis has no parent order");
    return {b};
  }
  // prev must be the concatenation of the inclusion layers along P(b)'s chain.
  std::vector<BlockIndex> chain;
  for (BlockIndex c = g.parent(b); c != kNoBlock; c = g.parent(c)) chain.push_back(c);
  std::size_t pos = 0;
  for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
    for (BlockIndex x : g.fresh(*it)) {
      if (pos >= prev.size() || prev[pos] != x) {
        throw Error(ErrorCode::prefix_mismatch, "previous order is not order(parent)");
      }
      ++pos;
    }
  }
  if (pos != prev.size()) {
    throw Error(ErrorCode::prefix_mismatch, "previous order is not order(parent)");
  }
  std::vector<BlockIndex> out(prev.begin(), prev.end());
  auto fresh = detail::fresh_in_visit_order(g, g.refs(b), g.parent(b));
  out.insert(out.end(), fresh.begin(), fresh.end());
  out.push_back(b);
  return out;
}

}  // namespace powdag
