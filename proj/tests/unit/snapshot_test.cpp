#include "powdag/snapshot.hpp"

#include <gtest/gtest.h>

#include <sstream>

#include "powdag/testing/fixtures.hpp"

namespace powdag {
namespace {

TEST(Snapshot, RoundTripPreservesEverything) {
  auto g = testing::random_dag(77, {.blocks = 150});
  std::stringstream s;
  export_snapshot(g, s);
  const std::string first = s.str();
  BlockDag h = import_snapshot(s);
  ASSERT_EQ(h.size(), g.size());
  for (BlockIndex i = 0; i < g.size(); ++i) {
    EXPECT_EQ(h.id(i), g.id(i));
    EXPECT_EQ(h.parent(i), g.parent(i));
    EXPECT_EQ(h.block(i).miner, g.block(i).miner);
    EXPECT_EQ(h.block(i).payload, g.block(i).payload);
  }
  std::stringstream again;
  export_snapshot(h, again);
  EXPECT_EQ(again.str(), first);
}

std::string forged_snapshot() {
  // G <- A1 <- A2, plus a fork Z off genesis; M refs [A2, Z] but claims Z as parent.
  BlockDag g;
  auto a1 = g.insert_block("a1", std::vector<BlockIndex>{0}, MinerId{1}).index;
  auto a2 = g.insert_block("a2", std::vector<BlockIndex>{a1}, MinerId{1}).index;
  auto z = g.insert_block("z", std::vector<BlockIndex>{0}, MinerId{2}).index;
  g.insert_block_with_parent("m", std::vector<BlockIndex>{a2, z}, MinerId{1}, z);
  std::stringstream s;
  export_snapshot(g, s);
  return s.str();
}

TEST(Snapshot, VerifyRejectsWrongParent) {
  std::stringstream s(forged_snapshot());
  try {
    import_snapshot(s, ParentPolicy::verify);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::parse_error);
    EXPECT_NE(std::string(e.what()).find("line 5"), std::string::npos);
  }
}

TEST(Snapshot, TrustKeepsRecordedParent) {
  std::stringstream s(forged_snapshot());
  BlockDag g = import_snapshot(s, ParentPolicy::trust);
  ASSERT_EQ(g.size(), 5u);
  EXPECT_EQ(g.parent(4), 3u);
  EXPECT_EQ(determine_parent(g, g.refs(4)), 2u);
}

TEST(Snapshot, MalformedInput) {
  auto expect_code = [](const std::string& text, ErrorCode code) {
    std::stringstream s(text);
    try {
      import_snapshot(s);
      ADD_FAILURE() << text;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), code) << text;
    }
  };
  expect_code("{not json}\n", ErrorCode::parse_error);
  expect_code("{\"id\":\"00\"}\n", ErrorCode::parse_error);
  BlockDag g;
  std::stringstream one;
  export_snapshot(g, one);
  std::string genesis_line = one.str();
  std::string bad_ref = genesis_line +
                        "{\"id\":\"" + std::string(64, 'a') + "\",\"payload_hex\":\"\",\"refs\":[\"" +
                        std::string(64, 'b') + "\"],\"miner\":1,\"parent\":null}\n";
  expect_code(bad_ref, ErrorCode::unknown_block);
}

}  // namespace
}  // namespace powdag
