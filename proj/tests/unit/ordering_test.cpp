#include "powdag/ordering.hpp"

#include <gtest/gtest.h>

#include "powdag/dag_store.hpp"
#include "powdag/testing/fixtures.hpp"
#include "powdag/testing/oracles.hpp"

namespace powdag {
namespace {

TEST(Ordering, Genesis) {
  BlockDag g;
  EXPECT_EQ(order(g, 0), std::vector<BlockIndex>{0});
  EXPECT_EQ(order_incremental(g, std::vector<BlockIndex>{}, 0), std::vector<BlockIndex>{0});
}

TEST(Ordering, ForkExample) {
  testing::ForkExample f;
  EXPECT_EQ(order(f.dag, f.C), (std::vector<BlockIndex>{f.A, f.B, f.U, f.C}));
  EXPECT_EQ(order(f.dag, f.D), (std::vector<BlockIndex>{f.A, f.B, f.U, f.C, f.CU, f.D}));
  auto prev = order(f.dag, f.C);
  EXPECT_EQ(order_incremental(f.dag, prev, f.D),
            (std::vector<BlockIndex>{f.A, f.B, f.U, f.C, f.CU, f.D}));
  // DD's parent is CW: order(CW) = [A, W, CW], then C's newly included blocks.
  EXPECT_EQ(order(f.dag, f.DD), (std::vector<BlockIndex>{f.A, f.W, f.CW, f.B, f.U, f.C, f.DD}));
}

TEST(Ordering, IncrementalOverGenesisChild) {
  BlockDag g;
  auto b = g.insert_block("b", std::vector<BlockIndex>{0}, MinerId{1}).index;
  EXPECT_EQ(order_incremental(g, std::vector<BlockIndex>{0}, b), (std::vector<BlockIndex>{0, b}));
}

TEST(Ordering, PrefixMismatch) {
  testing::ForkExample f;
  std::vector<BlockIndex> wrong{f.A, f.U, f.B, f.C};
  try {
    order_incremental(f.dag, wrong, f.D);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::prefix_mismatch);
  }
  EXPECT_THROW(order_incremental(f.dag, std::vector<BlockIndex>{f.A, f.B}, f.D), Error);
  EXPECT_THROW(order(f.dag, 99), Error);
}

// Minimal BlockGraph: a bare chain 0 <- 1 <- ... <- n-1.
struct BareChain {
  std::vector<BlockIndex> parents;
  std::vector<BlockIndex> self_refs;
  BlockId fixed_id;

  explicit BareChain(std::size_t n) : parents(n), self_refs(n) {
    for (std::size_t i = 0; i < n; ++i) {
      parents[i] = i == 0 ? kNoBlock : static_cast<BlockIndex>(i - 1);
      self_refs[i] = parents[i];
    }
  }
  std::size_t size() const { return parents.size(); }
  BlockIndex genesis() const { return 0; }
  BlockIndex parent(BlockIndex i) const { return parents[i]; }
  std::uint32_t depth(BlockIndex i) const { return i; }
  std::span<const BlockIndex> refs(BlockIndex i) const {
    return i == 0 ? std::span<const BlockIndex>() : std::span<const BlockIndex>(&self_refs[i], 1);
  }
  std::span<const BlockIndex> children(BlockIndex) const { return {}; }
  const BlockId& id(BlockIndex) const { return fixed_id; }
  bool reaches(BlockIndex from, BlockIndex to) const { return to <= from; }
};
static_assert(BlockGraph<BareChain>);

TEST(Ordering, DeepChainDoesNotRecurse) {
  BareChain g(100001);
  auto o = order(g, 100000);
  ASSERT_EQ(o.size(), 100001u);
  for (BlockIndex i = 0; i < o.size(); ++i) ASSERT_EQ(o[i], i);
}

// Properties on random DAGs: the iterative ordering equals the literal
// recursion, is a topological permutation of past(b), extends the parent's
// order, agrees with the incremental route, and is stable across calls.
TEST(Ordering, RandomDagProperties) {
  for (std::uint64_t seed = 200; seed < 210; ++seed) {
    auto g = testing::random_dag(seed, {.blocks = 250});
    testing::Oracle o(g);
    for (BlockIndex b = 0; b < g.size(); ++b) {
      auto ord = order(g, b);
      ASSERT_EQ(ord, o.order(b)) << "seed " << seed << " block " << b;
      ASSERT_EQ(ord, order(g, b));
      std::vector<BlockIndex> sorted_ord = ord;
      std::sort(sorted_ord.begin(), sorted_ord.end());
      ASSERT_EQ(sorted_ord, g.past(b));
      std::vector<std::size_t> pos(g.size(), 0);
      for (std::size_t i = 0; i < ord.size(); ++i) pos[ord[i]] = i;
      for (BlockIndex x : ord) {
        for (BlockIndex r : g.refs(x)) ASSERT_LT(pos[r], pos[x]);
      }
      if (b == g.genesis()) continue;
      auto parent_order = order(g, g.parent(b));
      ASSERT_LT(parent_order.size(), ord.size());
      ASSERT_TRUE(std::equal(parent_order.begin(), parent_order.end(), ord.begin()));
      ASSERT_EQ(order_incremental(g, parent_order, b), ord);
    }
  }
}

TEST(Ordering, SameBlocksSameOrderAcrossStores) {
  auto g = testing::random_dag(77, {.blocks = 200});
  BlockDag copy;
  for (BlockIndex i = 1; i < g.size(); ++i) {
    const Block& b = g.block(i);
    std::vector<BlockId> refs;
    for (BlockIndex r : b.refs) refs.push_back(g.id(r));
    copy.insert_block(b.payload, refs, b.miner);
  }
  for (BlockIndex i = 0; i < g.size(); ++i) {
    auto a = order(g, i);
    auto c = order(copy, copy.index_of(g.id(i)));
    ASSERT_EQ(a.size(), c.size());
    for (std::size_t k = 0; k < a.size(); ++k) ASSERT_EQ(g.id(a[k]), copy.id(c[k]));
  }
}

}  // namespace
}  // namespace powdag
