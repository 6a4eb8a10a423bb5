#include "powdag/sim/engine.hpp"

#include <gtest/gtest.h>

#include <sstream>

#include "powdag/sim/report.hpp"
#include "powdag/snapshot.hpp"
#include "powdag/staleness.hpp"

namespace powdag::sim {
namespace {

SimConfig small(std::uint64_t seed = 1) {
  SimConfig c;
  c.p = 12;
  c.penalty = 1000;
  c.base = 1000 * 12 * 12;
  c.rounds = 1500;
  c.seed = seed;
  c.check_invariants = true;
  return c;
}

std::string snapshot(const BlockDag& g) {
  std::stringstream s;
  export_snapshot(g, s);
  return s.str();
}

TEST(Sim, SinglePlayerBuildsOneChain) {
  SimConfig c;
  c.alpha = 0.3;
  c.beta = 0.0;
  c.honest_players = 1;
  c.rounds = 1000;
  c.p = 10;
  c.base = 100000;
  c.check_invariants = true;
  Simulation sim(c);
  SimReport r = sim.run();
  const BlockDag& g = sim.dag();
  ASSERT_GT(g.size(), 200u);
  for (BlockIndex b = 1; b < g.size(); ++b) {
    ASSERT_EQ(g.refs(b).size(), 1u);
    ASSERT_EQ(g.parent(b), b - 1);
  }
  EXPECT_EQ(r.main_chain_length + 1, g.size());
  EXPECT_EQ(r.unfinalized_blocks, 0u);
  for (const auto& [b, e] : sim.ledger().entries()) {
    EXPECT_FALSE(e.stale);
    EXPECT_EQ(e.amount, c.base);
  }
  EXPECT_EQ(r.miner(1).reward, c.base * static_cast<Micro>(r.miner(1).blocks_mined));
  EXPECT_DOUBLE_EQ(r.miner(1).share, 1.0);
  EXPECT_EQ(r.invariants.failures(), 0u);
}

TEST(Sim, IdenticalConfigsGiveIdenticalReports) {
  SimConfig c = small(7);
  c.strategy = parse_strategy("selfish");
  const std::string a = report_json(run(c)).dump();
  const std::string b = report_json(run(c)).dump();
  EXPECT_EQ(a, b);
  c.seed = 8;
  EXPECT_NE(report_json(run(c)).dump(), a);
}

TEST(Sim, ZeroDelayWithholdingIsHonest) {
  for (std::uint64_t seed : {3u, 4u}) {
    SimConfig c = small(seed);
    Simulation honest(c);
    SimReport rh = honest.run();
    c.strategy = parse_strategy("withhold(0)");
    Simulation zero(c);
    SimReport rz = zero.run();
    EXPECT_EQ(snapshot(honest.dag()), snapshot(zero.dag()));
    EXPECT_EQ(rh.miners.back().reward, rz.miners.back().reward);
  }
}

// With everyone honest, two blocks conflict only when they were mined in the
// same round by different players: a later block has seen every earlier one.
TEST(Sim, HonestConflictsAreSameRoundOnly) {
  SimConfig c = small(11);
  c.beta = 0.0;
  Simulation sim(c);
  SimReport r = sim.run();
  const BlockDag& g = sim.dag();
  TipIndex tip(g);
  for (BlockIndex x : sim.view(0).chain().chain()) {
    if (x != g.genesis()) tip.push(x);
  }
  std::size_t with_conflicts = 0;
  for (const auto& [b, e] : sim.ledger().entries()) {
    if (e.conflict_size == 0) continue;
    ++with_conflicts;
    for (BlockIndex y : conflict_set(g, tip, b, c.p)) {
      ASSERT_EQ(sim.mined_round(y), sim.mined_round(b));
      ASSERT_NE(g.block(y).miner, g.block(b).miner);
    }
  }
  EXPECT_GT(with_conflicts, 0u);
  EXPECT_EQ(r.invariants.failures(), 0u);
}

TEST(Sim, FlatSchemePaysHonestBlocksInFull) {
  SimConfig c = small(12);
  c.penalty = 0;
  c.strategy = parse_strategy("selfish");
  SimReport r = run(c);
  for (const auto& m : r.miners) {
    if (m.role != "honest") continue;
    EXPECT_EQ(m.stale_blocks, 0u);
    EXPECT_EQ(m.reward, c.base * static_cast<Micro>(m.blocks_mined));
  }
}

TEST(Sim, EqualPlayersEarnEqualShares) {
  SimConfig c = small(21);
  c.beta = 0.0;
  c.p = 20;
  c.base = 400000;
  c.rounds = 8000;
  SimReport r = run(c);
  ASSERT_EQ(r.miners.size(), 6u);
  EXPECT_EQ(r.miners.back().blocks_mined, 0u);
  double total = 0.0;
  for (const auto& m : r.miners) {
    if (m.role != "honest") continue;
    EXPECT_NEAR(m.share, 0.2, 0.03) << "miner " << m.id;
    total += m.share;
  }
  EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST(Sim, LongWithholdingMakesBlocksStale) {
  SimConfig c;
  c.alpha = 0.8;
  c.beta = 0.1;
  c.p = 20;
  c.rounds = 2000;
  c.seed = 5;
  c.strategy = parse_strategy("withhold(60)");
  c.check_invariants = true;
  Simulation sim(c);
  SimReport r = sim.run();
  const BlockDag& g = sim.dag();
  const MinerReport& adv = r.miners.back();
  ASSERT_GT(adv.blocks_mined, 100u);
  EXPECT_EQ(adv.reward, 0);
  const BlockIndex tip = sim.view(0).tip();
  const StaleSet stale = stale_set(g, tip, c.p);
  std::size_t checked = 0;
  for (const auto& [b, e] : sim.ledger().entries()) {
    if (g.block(b).miner != MinerId{adv.id}) continue;
    EXPECT_TRUE(e.stale);
    EXPECT_EQ(e.amount, 0);
    EXPECT_TRUE(std::binary_search(stale.members.begin(), stale.members.end(), b));
    ++checked;
  }
  EXPECT_EQ(checked, adv.blocks_mined);
  EXPECT_EQ(r.invariants.failures(), 0u);
}

TEST(Sim, InvariantsHoldUnderEveryAdversary) {
  for (const char* s : {"honest", "withhold(4)", "selfish", "no_reference"}) {
    SimConfig c = small(31);
    c.strategy = parse_strategy(s);
    SimReport r = run(c);
    EXPECT_EQ(r.invariants.failures(), 0u) << s;
    EXPECT_GT(r.invariants.inclusion_checks, 1000u) << s;
    EXPECT_GT(r.invariants.finality_rechecks, 1000u) << s;
    EXPECT_GT(r.invariants.parent_checks, 0u) << s;
    EXPECT_EQ(r.unfinalized_blocks, 0u) << s;
    EXPECT_EQ(r.negative_clamped, 0u) << s;
  }
}

TEST(Sim, EventLogIsLineJson) {
  SimConfig c = small(2);
  c.rounds = 100;
  c.strategy = parse_strategy("withhold(2)");
  std::stringstream log;
  run(c, {.event_log = &log});
  std::string line;
  std::size_t mined = 0, released = 0, finalized = 0;
  while (std::getline(log, line)) {
    auto j = nlohmann::json::parse(line);
    ASSERT_TRUE(j.contains("round"));
    const std::string ev = j.at("event");
    mined += ev == "mined";
    released += ev == "released";
    finalized += ev == "finalized";
  }
  EXPECT_GT(mined, 0u);
  EXPECT_GT(released, 0u);
  EXPECT_GT(finalized, 0u);
}

TEST(Sim, InvalidConfigIsRejected) {
  SimConfig c;
  c.alpha = 0.8;
  c.beta = 0.3;
  try {
    run(c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::config_invalid);
  }
}

}  // namespace
}  // namespace powdag::sim
