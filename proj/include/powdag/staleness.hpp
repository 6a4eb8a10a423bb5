#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "powdag/graph.hpp"
#include "powdag/types.hpp"

namespace powdag {

/// Deepest block that is a parent-tree ancestor of both a and b.
template <BlockGraph G>
BlockIndex lca(const G& g, BlockIndex a, BlockIndex b) {
  if (a >= g.size() || b >= g.size()) throw Error(ErrorCode::unknown_block, "lca: unknown block");
  while (g.depth(a) > g.depth(b)) a = g.parent(a);
  while (g.depth(b) > g.depth(a)) b = g.parent(b);
  while (a != b) {
    a = g.parent(a);
    b = g.parent(b);
  }
  return a;
}

/// Parent steps from `descendant` up to `ancestor`.
template <BlockGraph G>
std::uint32_t distance(const G& g, BlockIndex descendant, BlockIndex ancestor) {
  if (descendant >= g.size() || ancestor >= g.size()) {
    throw Error(ErrorCode::unknown_block, "distance: unknown block");
  }
  if (g.depth(ancestor) > g.depth(descendant)) {
    throw Error(ErrorCode::not_an_ancestor, "distance: not an ancestor");
  }
  const std::uint32_t steps = g.depth(descendant) - g.depth(ancestor);
  BlockIndex x = descendant;
  for (std::uint32_t i = 0; i < steps; ++i) x = g.parent(x);
  if (x != ancestor) throw Error(ErrorCode::not_an_ancestor, "distance: not an ancestor");
  return steps;
}

/// Age of `a` as judged by a block with parent `parent` and depth
/// depth(parent) + 1. `a` must not be that block itself.
template <BlockGraph G>
std::uint32_t inclusion_age(const G& g, BlockIndex a, BlockIndex parent) {
  return g.depth(parent) + 1 - g.depth(lca(g, a, parent));
}

struct StaleSet {
  BlockIndex tip = kNoBlock;
  std::vector<BlockIndex> members;  // ascending
  std::uint32_t p = 0;

  bool contains(BlockIndex b) const {
    return std::binary_search(members.begin(), members.end(), b);
  }
};

/// Stale blocks of past(tip): the union, along tip's parent chain, of the
/// layer members whose age exceeds p. Layers are computed once per block at
/// insertion and shared by every tip that extends it.
template <LayeredBlockGraph G>
StaleSet stale_set(const G& g, BlockIndex tip, std::uint32_t p) {
  if (tip >= g.size()) throw Error(ErrorCode::unknown_block, "stale_set: unknown block");
  StaleSet s{tip, {}, p};
  for (BlockIndex c = tip; c != kNoBlock; c = g.parent(c)) {
    auto fresh = g.fresh(c);
    auto ages = g.fresh_ages(c);
    for (std::size_t i = 0; i < fresh.size(); ++i) {
      if (ages[i] > p) s.members.push_back(fresh[i]);
    }
  }
  std::sort(s.members.begin(), s.members.end());
  return s;
}

/// Chain block C on tip's parent chain with b in past(C) \ past(P(C)).
template <LayeredBlockGraph G>
BlockIndex including_block(const G& g, BlockIndex tip, BlockIndex b) {
  if (tip >= g.size() || b >= g.size()) throw Error(ErrorCode::unknown_block, "unknown block");
  if (!g.reaches(tip, b)) throw Error(ErrorCode::not_in_past, "block not in past(tip)");
  BlockIndex c = tip;
  while (c != g.genesis() && g.reaches(g.parent(c), b)) c = g.parent(c);
  return c;
}

template <LayeredBlockGraph G>
std::uint32_t age_in_chain(const G& g, BlockIndex tip, BlockIndex b) {
  BlockIndex c = including_block(g, tip, b);
  auto fresh = g.fresh(c);
  auto ages = g.fresh_ages(c);
  for (std::size_t i = 0; i < fresh.size(); ++i) {
    if (fresh[i] == b) return ages[i];
  }
  throw Error(ErrorCode::not_in_past, "block missing from its inclusion layer");
}

template <LayeredBlockGraph G>
bool is_stale(const G& g, BlockIndex tip, BlockIndex b, std::uint32_t p) {
  return age_in_chain(g, tip, b) > p;
}

}  // namespace powdag
