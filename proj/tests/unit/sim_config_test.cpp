#include "powdag/sim/config.hpp"

#include <gtest/gtest.h>

#include <sstream>

namespace powdag::sim {
namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::parse_error;  // sentinel: nothing thrown
}

std::string message_of(const SimConfig& c) {
  try {
    c.validate();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

TEST(SimConfig, DefaultsAreValid) {
  SimConfig c;
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.settle(), 25u * c.p);
  EXPECT_EQ(c.effective_weights().size(), 5u);
}

TEST(SimConfig, ParsesFlatKeyValues) {
  std::stringstream s(
      "# experiment\n"
      "alpha = 0.45\n"
      "beta=0.15   # adversary\n"
      "\n"
      "p = 12\n"
      "strategy = withhold(6)\n"
      "weights = 0.5, 0.25, 0.25\n"
      "honest_players = 3\n"
      "seed = 99\n");
  SimConfig c = parse_config(s);
  EXPECT_DOUBLE_EQ(c.alpha, 0.45);
  EXPECT_DOUBLE_EQ(c.beta, 0.15);
  EXPECT_EQ(c.p, 12u);
  EXPECT_EQ(c.strategy.name, "withhold");
  EXPECT_EQ(c.strategy.k, 6u);
  EXPECT_EQ(c.strategy.label(), "withhold(6)");
  EXPECT_EQ(c.weights, (std::vector<double>{0.5, 0.25, 0.25}));
  EXPECT_EQ(c.seed, 99u);
  EXPECT_NO_THROW(c.validate());
}

TEST(SimConfig, RejectsMalformedInput) {
  auto parse = [](const std::string& text) {
    std::stringstream s(text);
    return parse_config(s);
  };
  EXPECT_EQ(code_of([&] { parse("colour = blue\n"); }), ErrorCode::config_invalid);
  EXPECT_EQ(code_of([&] { parse("alpha = fast\n"); }), ErrorCode::config_invalid);
  EXPECT_EQ(code_of([&] { parse("p = -3\n"); }), ErrorCode::config_invalid);
  EXPECT_EQ(code_of([&] { parse("just words\n"); }), ErrorCode::config_invalid);
  EXPECT_EQ(code_of([&] { parse("strategy = bribe\n"); }), ErrorCode::config_invalid);
  EXPECT_EQ(code_of([&] { parse("strategy = withhold(x)\n"); }), ErrorCode::config_invalid);
  try {
    parse("alpha = 0.3\nbeta = oops\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

TEST(SimConfig, EnforcesMiningAssumptions) {
  SimConfig c;
  c.alpha = 0.7;
  c.beta = 0.3;
  EXPECT_NE(message_of(c).find("alpha + beta < 1"), std::string::npos);
  c.alpha = 0.5;
  c.beta = 0.28;  // 0.5 e^-0.5 = 0.303 < 0.308
  EXPECT_NE(message_of(c).find("alpha*exp(-alpha) >= beta*(1+epsilon)"), std::string::npos);
  c.beta = 0.27;
  EXPECT_EQ(message_of(c), "");
}

TEST(SimConfig, OtherValidation) {
  SimConfig c;
  c.weights = {0.5, 0.5};
  EXPECT_NE(message_of(c).find("expected 5 entries"), std::string::npos);
  c.weights = {0.3, 0.3, 0.3, 0.3, 0.3};
  EXPECT_NE(message_of(c).find("sum to 1"), std::string::npos);
  c.weights.clear();
  c.rounds = 4 * c.p - 1;
  EXPECT_NE(message_of(c).find("at least 4p"), std::string::npos);
  c.rounds = 4 * c.p;
  c.rng = "pcg64";
  EXPECT_NE(message_of(c).find("unsupported"), std::string::npos);
  c.rng = "mt19937_64";
  c.base = c.penalty * c.p * c.p;
  auto warnings = c.validate();
  ASSERT_EQ(warnings.size(), 1u);
  EXPECT_NE(warnings[0].find("penalties"), std::string::npos);
}

TEST(SimConfig, StrategyParameterKeys) {
  std::stringstream s("withhold_k = 7\nstrategy = withhold\nlead_threshold = 3\n");
  SimConfig c = parse_config(s);
  EXPECT_EQ(c.strategy.label(), "withhold(7)");
  EXPECT_EQ(parse_strategy("selfish(2)").lead_threshold, 2u);
  EXPECT_FALSE(parse_strategy("punisher(honest3)").player3_silent);
  EXPECT_TRUE(parse_strategy("punisher").player3_silent);
}

TEST(SimConfig, KeyValueEchoRoundTrips) {
  SimConfig c;
  c.alpha = 0.123456789;
  c.strategy = parse_strategy("selfish(2)");
  c.weights = {0.1, 0.2, 0.3, 0.2, 0.2};
  c.settle_rounds = 77;
  std::stringstream s(c.to_kv());
  SimConfig back = parse_config(s);
  EXPECT_EQ(back.to_kv(), c.to_kv());
  EXPECT_EQ(back.strategy, c.strategy);
}

}  // namespace
}  // namespace powdag::sim
