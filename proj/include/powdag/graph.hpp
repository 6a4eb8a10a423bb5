#pragma once

#include <concepts>
#include <cstddef>
#include <span>

#include "powdag/types.hpp"

namespace powdag {

/// Read-only surface the chain, ordering and staleness algorithms need from a
/// block store. Indices are dense and topologically ordered; the parent edge
/// is the one fixed by chain selection at insertion time.
template <class G>
concept BlockGraph = requires(const G& g, BlockIndex i) {
  { g.size() } -> std::convertible_to<std::size_t>;
  { g.genesis() } -> std::convertible_to<BlockIndex>;
  { g.parent(i) } -> std::convertible_to<BlockIndex>;
  { g.depth(i) } -> std::convertible_to<std::uint32_t>;
  { g.refs(i) } -> std::convertible_to<std::span<const BlockIndex>>;
  { g.children(i) } -> std::convertible_to<std::span<const BlockIndex>>;
  { g.id(i) } -> std::convertible_to<const BlockId&>;
  { g.reaches(i, i) } -> std::convertible_to<bool>;
};

/// A BlockGraph that additionally caches, per block B, the blocks of
/// past(B) \ past(P(B)) in depth-first visit order together with each one's
/// age (parent-tree distance from B to its lowest common ancestor with B).
template <class G>
concept LayeredBlockGraph = BlockGraph<G> && requires(const G& g, BlockIndex i) {
  { g.fresh(i) } -> std::convertible_to<std::span<const BlockIndex>>;
  { g.fresh_ages(i) } -> std::convertible_to<std::span<const std::uint32_t>>;
};

}  // namespace powdag
