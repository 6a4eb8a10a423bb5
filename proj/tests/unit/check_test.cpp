#include "powdag/check.hpp"

#include <gtest/gtest.h>

#include <sstream>

namespace powdag::check {
namespace {

const Row& find(const Table& t, const std::string& name) {
  for (const Row& r : t.rows()) {
    if (r.name == name) return r;
  }
  throw std::runtime_error("no row " + name);
}

TEST(Check, SmallSuitePasses) {
  SuiteOptions opt;
  opt.dags = 6;
  opt.max_blocks = 300;
  Table t = run_suite(opt);
  std::ostringstream out;
  t.print(out);
  EXPECT_TRUE(t.all_passed()) << out.str();
  EXPECT_GE(t.rows().size(), 12u);
  EXPECT_EQ(out.str().find("FAIL"), std::string::npos);
}

TEST(Check, WrongParentIsCaught) {
  BlockDag g = wrong_parent_fixture();
  ASSERT_EQ(g.parent(6), 5u);  // T stored on Z
  Table t;
  check_dag(g, "fault", {2}, t);
  EXPECT_FALSE(t.all_passed());
  EXPECT_GT(find(t, "stale-ness preserved along parent").failures, 0u);
  EXPECT_GT(find(t, "parent = chain rule from scratch").failures, 0u);
  EXPECT_EQ(find(t, "past = graph search").failures, 0u);
  std::ostringstream out;
  t.print(out);
  EXPECT_NE(out.str().find("FAIL stale-ness preserved along parent"), std::string::npos);
}

TEST(Check, SamplingCoversEndsAndStaysInRange) {
  auto s = detail::sample(1000, 4);
  ASSERT_FALSE(s.empty());
  EXPECT_EQ(s.back(), 999u);
  for (BlockIndex x : s) EXPECT_LT(x, 1000u);
  EXPECT_EQ(detail::sample(3, 10), (std::vector<BlockIndex>{0, 1, 2}));
  EXPECT_TRUE(detail::sample(0, 4).empty());
}

TEST(Check, EmptyRowFailsClosed) {
  Table t;
  t.row("never exercised");
  EXPECT_FALSE(t.all_passed());
}

}  // namespace
}  // namespace powdag::check
