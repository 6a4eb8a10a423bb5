#pragma once

#include <random>
#include <string>
#include <vector>

#include "powdag/dag_store.hpp"

namespace powdag::testing {

/// Payload label plus the smallest nonce whose digest satisfies `accept`.
template <class Accept>
std::string grind_payload(const std::string& label, std::span<const BlockId> refs, MinerId miner,
                          Accept&& accept) {
  for (int nonce = 0;; ++nonce) {
    std::string payload = label + "#" + std::to_string(nonce);
    if (accept(block_digest(payload, refs, miner))) return payload;
  }
}

/// The conflict-set example DAG:
///
///        U  <- - - - C (blue) <- D - - -> CU
///  A <-  B  <------- C, CU
///        W  <- CW <- DD - - -> C
///
/// Solid parent edges: B,U,W -> A; C,CU -> B; CW -> W; D -> C; DD -> CW.
/// Dashed references: C -> U, D -> CU, DD -> C. Payload nonces are chosen so
/// that id(W) < id(B) < id(U) and id(C) < id(CU), which makes the chain rule
/// pick exactly those parents.
struct ForkExample {
  BlockDag dag;
  BlockIndex A = 0, B = 0, U = 0, W = 0, C = 0, CU = 0, CW = 0, D = 0, DD = 0;

  ForkExample() {
    A = dag.genesis();
    const BlockId a = dag.id(A);
    const std::vector<BlockId> on_a{a};
    const MinerId m1{1}, m2{2}, m3{3};
    std::string pb = grind_payload("B", on_a, m1, [](const BlockId&) { return true; });
    const BlockId idb = block_digest(pb, on_a, m1);
    std::string pu = grind_payload("U", on_a, m2, [&](const BlockId& x) { return idb < x; });
    std::string pw = grind_payload("W", on_a, m3, [&](const BlockId& x) { return x < idb; });
    B = dag.insert_block(pb, on_a, m1).index;
    U = dag.insert_block(pu, on_a, m2).index;
    W = dag.insert_block(pw, on_a, m3).index;

    const std::vector<BlockId> c_refs{dag.id(B), dag.id(U)};
    const std::vector<BlockId> on_b{dag.id(B)};
    std::string pc = grind_payload("C", c_refs, m1, [](const BlockId&) { return true; });
    const BlockId idc = block_digest(pc, c_refs, m1);
    std::string pcu = grind_payload("CU", on_b, m2, [&](const BlockId& x) { return idc < x; });
    C = dag.insert_block(pc, c_refs, m1).index;
    CU = dag.insert_block(pcu, on_b, m2).index;
    CW = dag.insert_block("CW", std::vector<BlockId>{dag.id(W)}, m3).index;
    D = dag.insert_block("D", std::vector<BlockId>{dag.id(C), dag.id(CU)}, m1).index;
    DD = dag.insert_block("DD", std::vector<BlockId>{dag.id(CW), dag.id(C)}, m3).index;
  }
};

struct RandomDagOptions {
  std::size_t blocks = 200;
  std::uint32_t miners = 4;
  double p_merge = 0.65;   // reference a random subset of current tips
  double p_recent = 0.25;  // extend one of the last `recent_window` blocks
  std::size_t recent_window = 12;
  // otherwise: fork off a uniformly random earlier block
};

/// Random DAG grown through the public insertion path. Mixes tip merges,
/// short forks, and long-range forks so that stale blocks and non-trivial
/// conflict sets appear.
inline BlockDag random_dag(std::uint64_t seed, const RandomDagOptions& opt = {}) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  BlockDag g;
  for (std::size_t i = 1; i < opt.blocks; ++i) {
    std::vector<BlockIndex> refs;
    const double u = unit(rng);
    if (u < opt.p_merge) {
      auto tips = g.tips();
      std::shuffle(tips.begin(), tips.end(), rng);
      std::size_t k = 1 + rng() % std::min<std::size_t>(tips.size(), 3);
      refs.assign(tips.begin(), tips.begin() + k);
    } else if (u < opt.p_merge + opt.p_recent) {
      std::size_t w = std::min(opt.recent_window, g.size());
      refs.push_back(static_cast<BlockIndex>(g.size() - 1 - rng() % w));
    } else {
      refs.push_back(static_cast<BlockIndex>(rng() % g.size()));
    }
    MinerId miner{static_cast<std::uint32_t>(1 + rng() % opt.miners)};
    g.insert_block("blk" + std::to_string(i), refs, miner);
  }
  return g;
}

}  // namespace powdag::testing
