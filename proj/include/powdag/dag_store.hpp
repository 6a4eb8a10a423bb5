#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "powdag/chain_select.hpp"
#include "powdag/digest.hpp"
#include "powdag/ordering.hpp"
#include "powdag/staleness.hpp"
#include "powdag/types.hpp"

namespace powdag {

struct Block {
  BlockId id;
  std::string payload;
  std::vector<BlockIndex> refs;  // inclusion order
  MinerId miner;
  BlockIndex parent = kNoBlock;  // kNoBlock only for genesis
  BlockIndex index = 0;
  std::uint32_t depth = 0;       // parent-tree depth, genesis = 0
};

/// Append-only block store. Blocks are addressed by their digest and by a
/// dense insertion index; a block can only be inserted once everything it
/// references is present, so the index order is topological.
///
/// Besides the blocks themselves the store keeps, per block: parent-tree
/// children and subtree size, a past-membership index, and the inclusion
/// layer past(B) \ past(P(B)) with ages (used by ordering and staleness).
class BlockDag {
 public:
  BlockDag() {
    Block g;
    g.miner = kGenesisMiner;
    g.id = block_digest({}, {}, g.miner);
    append(std::move(g), {});
  }

  // Queries (BlockGraph surface).
  std::size_t size() const { return blocks_.size(); }
  BlockIndex genesis() const { return 0; }
  BlockIndex parent(BlockIndex i) const { return links_[i].parent; }
  std::uint32_t depth(BlockIndex i) const { return links_[i].depth; }
  std::span<const BlockIndex> refs(BlockIndex i) const { return blocks_[i].refs; }
  std::span<const BlockIndex> children(BlockIndex i) const { return aux_[i].children; }
  const BlockId& id(BlockIndex i) const { return blocks_[i].id; }
  MinerId miner(BlockIndex i) const { return blocks_[i].miner; }
  std::span<const BlockIndex> fresh(BlockIndex i) const { return aux_[i].fresh; }
  std::span<const std::uint32_t> fresh_ages(BlockIndex i) const { return aux_[i].fresh_age; }
  std::uint32_t subtree_size(BlockIndex i) const { return links_[i].subtree_size; }
  const Block& block(BlockIndex i) const { return blocks_.at(i); }

  /// True iff `to` is in past(from). past includes the block itself.
  bool reaches(BlockIndex from, BlockIndex to) const {
    if (to > from) return false;
    const PastIndex& p = aux_[from].past;
    if (to < p.lo) return true;
    const std::size_t w = to / 64 - p.first_word;
    return (p.words[w] >> (to % 64)) & 1u;
  }

  bool contains(const BlockId& id) const { return by_id_.contains(id); }

  BlockIndex index_of(const BlockId& id) const {
    auto it = by_id_.find(id);
    if (it == by_id_.end()) throw Error(ErrorCode::unknown_block, id.short_hex());
    return it->second;
  }

  const Block& block(const BlockId& id) const { return blocks_[index_of(id)]; }

  /// past(b), ascending by index.
  std::vector<BlockIndex> past(BlockIndex b) const {
    check(b);
    std::vector<BlockIndex> out;
    for (BlockIndex x = 0; x <= b; ++x) {
      if (reaches(b, x)) out.push_back(x);
    }
    return out;
  }

  std::vector<BlockIndex> past(const BlockId& b) const { return past(index_of(b)); }

  bool is_reachable(BlockIndex from, BlockIndex to) const {
    check(from);
    check(to);
    return reaches(from, to);
  }

  bool is_reachable(const BlockId& from, const BlockId& to) const {
    return reaches(index_of(from), index_of(to));
  }

  /// Smallest index not in past(b) (or b + 1): every index below it is in
  /// past(b).
  BlockIndex past_floor(BlockIndex b) const { return aux_[b].past.lo; }

  /// Blocks not referenced by any other block.
  std::vector<BlockIndex> tips() const {
    std::vector<BlockIndex> out;
    for (BlockIndex i = 0; i < size(); ++i) {
      if (!aux_[i].referenced) out.push_back(i);
    }
    return out;
  }

  const Block& insert_block(std::string_view payload, std::span<const BlockId> refs,
                            MinerId miner) {
    auto idx = resolve(refs);
    return insert_block(payload, std::span<const BlockIndex>(idx), miner);
  }

  const Block& insert_block(std::string_view payload, std::span<const BlockIndex> refs,
                            MinerId miner) {
    validate_refs(refs);
    BlockIndex parent = determine_parent(*this, refs);
    return link(payload, refs, miner, parent);
  }

  /// Insertion with a parent already known to equal determine_parent(refs),
  /// e.g. the tip of a tracked main chain whose view is exactly the union of
  /// the references' pasts. Only membership of the parent in that union is
  /// checked here.
  const Block& insert_block_with_parent(std::string_view payload,
                                        std::span<const BlockIndex> refs, MinerId miner,
                                        BlockIndex parent) {
    validate_refs(refs);
    check(parent);
    bool in_union = std::any_of(refs.begin(), refs.end(),
                                [&](BlockIndex r) { return reaches(r, parent); });
    if (!in_union) throw Error(ErrorCode::unknown_reference, "parent outside referenced past");
    return link(payload, refs, miner, parent);
  }

  /// Subtree sizes recomputed from parent links; compares equal to the
  /// incrementally maintained values.
  std::vector<std::uint32_t> recompute_subtree_sizes() const {
    std::vector<std::uint32_t> s(size(), 0);
    for (std::size_t i = size(); i-- > 0;) {
      s[i] += 1;
      if (blocks_[i].parent != kNoBlock) s[blocks_[i].parent] += s[i];
    }
    return s;
  }

 private:
  struct PastIndex {
    BlockIndex lo = 0;           // all indices < lo are in the past
    std::uint32_t first_word = 0;  // words[k] covers bits of word first_word + k
    std::vector<std::uint64_t> words;  // bits below lo are kept set
  };

  struct Aux {
    std::vector<BlockIndex> children;
    PastIndex past;
    std::vector<BlockIndex> fresh;
    std::vector<std::uint32_t> fresh_age;
    bool referenced = false;
  };

  void check(BlockIndex b) const {
    if (b >= size()) throw Error(ErrorCode::unknown_block, "index " + std::to_string(b));
  }

  std::vector<BlockIndex> resolve(std::span<const BlockId> refs) const {
    std::vector<BlockIndex> out;
    out.reserve(refs.size());
    for (const auto& r : refs) {
      auto it = by_id_.find(r);
      if (it == by_id_.end()) throw Error(ErrorCode::unknown_reference, r.short_hex());
      out.push_back(it->second);
    }
    return out;
  }

  void validate_refs(std::span<const BlockIndex> refs) const {
    if (refs.empty()) throw Error(ErrorCode::empty_references, "non-genesis block needs refs");
    for (std::size_t i = 0; i < refs.size(); ++i) {
      if (refs[i] >= size()) throw Error(ErrorCode::unknown_reference, "index out of range");
      for (std::size_t j = 0; j < i; ++j) {
        if (refs[i] == refs[j]) throw Error(ErrorCode::duplicate_reference, id(refs[i]).short_hex());
      }
    }
  }

  const Block& link(std::string_view payload, std::span<const BlockIndex> refs, MinerId miner,
                    BlockIndex parent) {
    Block b;
    b.payload = std::string(payload);
    b.refs.assign(refs.begin(), refs.end());
    b.miner = miner;
    b.parent = parent;
    std::vector<BlockId> ref_ids;
    ref_ids.reserve(refs.size());
    for (BlockIndex r : refs) ref_ids.push_back(id(r));
    b.id = block_digest(payload, ref_ids, miner);
    if (by_id_.contains(b.id)) throw Error(ErrorCode::duplicate_block, b.id.short_hex());
    return append(std::move(b), refs);
  }

  const Block& append(Block b, std::span<const BlockIndex> refs) {
    const auto idx = static_cast<BlockIndex>(blocks_.size());
    b.index = idx;
    b.depth = b.parent == kNoBlock ? 0 : blocks_[b.parent].depth + 1;

    Aux a;
    if (b.parent != kNoBlock) {
      auto fresh = detail::fresh_in_visit_order(*this, refs, b.parent);
      a.fresh.reserve(fresh.size() + 1);
      a.fresh_age.reserve(fresh.size() + 1);
      for (BlockIndex x : fresh) {
        a.fresh.push_back(x);
        a.fresh_age.push_back(inclusion_age(*this, x, b.parent));
      }
    }
    a.fresh.push_back(idx);
    a.fresh_age.push_back(0);
    a.past = union_past(refs, idx);

    by_id_.emplace(b.id, idx);
    links_.push_back({b.parent, b.depth, 1});
    blocks_.push_back(std::move(b));
    aux_.push_back(std::move(a));

    for (BlockIndex r : refs) aux_[r].referenced = true;
    const BlockIndex parent = blocks_[idx].parent;
    if (parent != kNoBlock) {
      aux_[parent].children.push_back(idx);
      for (BlockIndex x = parent; x != kNoBlock; x = links_[x].parent) ++links_[x].subtree_size;
    }
    return blocks_[idx];
  }

  PastIndex union_past(std::span<const BlockIndex> refs, BlockIndex self) const {
    PastIndex out;
    BlockIndex lo = 0;
    for (BlockIndex r : refs) lo = std::max(lo, aux_[r].past.lo);
    out.first_word = lo / 64;
    const std::uint32_t last_word = self / 64;
    out.words.assign(last_word - out.first_word + 1, 0);
    for (BlockIndex r : refs) {
      const PastIndex& p = aux_[r].past;
      const std::uint32_t r_last = r / 64;
      for (std::uint32_t w = out.first_word; w <= r_last; ++w) {
        out.words[w - out.first_word] |= p.words[w - p.first_word];
      }
    }
    auto set_bit = [&](BlockIndex i) {
      out.words[i / 64 - out.first_word] |= std::uint64_t{1} << (i % 64);
    };
    for (BlockIndex i = out.first_word * 64; i < lo; ++i) set_bit(i);
    set_bit(self);
    // Advance the floor over the contiguous prefix of members.
    while (lo <= self && (out.words[lo / 64 - out.first_word] >> (lo % 64) & 1u)) {
      if (lo % 64 == 0 && out.words[lo / 64 - out.first_word] == ~std::uint64_t{0}) {
        lo += 64;
      } else {
        ++lo;
      }
    }
    out.lo = lo;
    const std::uint32_t new_first = std::min<std::uint32_t>(lo / 64, last_word);
    if (new_first > out.first_word) {
      out.words.erase(out.words.begin(), out.words.begin() + (new_first - out.first_word));
      out.first_word = new_first;
    }
    return out;
  }

  struct Link {  // hot fields, kept apart from the block bodies
    BlockIndex parent;
    std::uint32_t depth;
    std::uint32_t subtree_size;
  };

  std::vector<Block> blocks_;
  std::vector<Link> links_;
  std::vector<Aux> aux_;
  std::unordered_map<BlockId, BlockIndex> by_id_;
};

static_assert(LayeredBlockGraph<BlockDag>);

}  // namespace powdag
