#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "powdag/rewards.hpp"
#include "powdag/types.hpp"

namespace powdag::sim {

struct StrategySpec {
  std::string name = "honest";  // honest | withhold | selfish | no_reference | punisher
  std::uint32_t k = 0;          // withhold delay in rounds
  std::uint32_t lead_threshold = 1;
  bool player3_silent = true;   // punisher: player 3 keeps its round-1 blocks back

  std::string label() const {
    if (name == "withhold") return "withhold(" + std::to_string(k) + ")";
    if (name == "selfish" && lead_threshold != 1) return "selfish(" + std::to_string(lead_threshold) + ")";
    return name;
  }
  friend bool operator==(const StrategySpec&, const StrategySpec&) = default;
};

struct SimConfig {
  double alpha = 0.5;
  double beta = 0.2;
  double epsilon = 0.1;
  std::uint32_t p = 20;
  Micro penalty = 1000;
  Micro base = 400000;
  std::uint32_t honest_players = 5;
  std::vector<double> weights;  // empty: equal weights
  StrategySpec strategy;
  std::uint64_t rounds = 10000;
  std::optional<std::uint64_t> settle_rounds;  // cap on the settle phase, default 25p
  std::uint64_t seed = 1;
  std::string rng = "mt19937_64";
  bool check_invariants = false;

  RewardParams reward_params() const { return {base, penalty, p}; }
  std::uint64_t settle() const { return settle_rounds.value_or(25ull * p); }
  bool punisher() const { return strategy.name == "punisher"; }
  std::uint32_t players() const { return punisher() ? 4u : honest_players; }

  std::vector<double> effective_weights() const {
    if (!weights.empty()) return weights;
    return std::vector<double>(players(), 1.0 / players());
  }

  /// Throws ConfigInvalid naming the violated condition. Returns warnings.
  std::vector<std::string> validate() const;

  /// One key per line, in a fixed order.
  std::string to_kv() const;
};

namespace detail {

inline std::string trim(std::string s) {
  const char* ws = " \t\r\n";
  auto b = s.find_first_not_of(ws);
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

[[noreturn]] inline void bad(const std::string& key, const std::string& value, const std::string& why) {
  throw Error(ErrorCode::config_invalid, key + " = '" + value + "': " + why);
}

inline double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    double d = std::stod(v, &used);
    if (used != v.size() || !std::isfinite(d)) bad(key, v, "not a number");
    return d;
  } catch (const std::logic_error&) {
    bad(key, v, "not a number");
  }
}

inline std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) bad(key, v, "not a non-negative integer");
  return out;
}

inline std::int64_t to_i64(const std::string& key, const std::string& v) {
  std::int64_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) bad(key, v, "not an integer");
  return out;
}

inline std::uint32_t to_u32(const std::string& key, const std::string& v) {
  auto x = to_u64(key, v);
  if (x > UINT32_MAX) bad(key, v, "out of range");
  return static_cast<std::uint32_t>(x);
}

inline bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  bad(key, v, "expected true or false");
}

inline std::string fmt(double d) {
  std::ostringstream s;
  s.precision(17);
  s << d;
  return s.str();
}

}  // namespace detail

/// Parses "name" or "name(arg)".
inline StrategySpec parse_strategy(const std::string& text) {
  StrategySpec s;
  std::string t = detail::trim(text);
  std::string arg;
  if (auto open = t.find('('); open != std::string::npos) {
    if (t.back() != ')') detail::bad("strategy", text, "unbalanced parenthesis");
    arg = detail::trim(t.substr(open + 1, t.size() - open - 2));
    t = detail::trim(t.substr(0, open));
  }
  s.name = t;
  if (t == "withhold") {
    s.k = arg.empty() ? 0 : detail::to_u32("strategy", arg);
  } else if (t == "selfish") {
    if (!arg.empty()) s.lead_threshold = detail::to_u32("strategy", arg);
  } else if (t == "punisher") {
    if (arg == "honest3") s.player3_silent = false;
    else if (!arg.empty() && arg != "silent3") detail::bad("strategy", text, "expected punisher(silent3) or punisher(honest3)");
  } else if (t == "honest" || t == "no_reference") {
    if (!arg.empty()) detail::bad("strategy", text, "takes no argument");
  } else {
    detail::bad("strategy", text, "unknown strategy");
  }
  return s;
}

/// Applies one key/value pair. Unknown keys are an error.
inline void set_option(SimConfig& c, const std::string& key_in, const std::string& value_in) {
  using namespace detail;
  const std::string key = trim(key_in);
  const std::string v = trim(value_in);
  if (key == "alpha") c.alpha = to_double(key, v);
  else if (key == "beta") c.beta = to_double(key, v);
  else if (key == "epsilon") c.epsilon = to_double(key, v);
  else if (key == "p") c.p = to_u32(key, v);
  else if (key == "penalty") c.penalty = to_i64(key, v);
  else if (key == "base") c.base = to_i64(key, v);
  else if (key == "honest_players") c.honest_players = to_u32(key, v);
  else if (key == "weights") {
    c.weights.clear();
    if (!v.empty()) {
      std::stringstream s(v);
      std::string item;
      while (std::getline(s, item, ',')) c.weights.push_back(to_double(key, trim(item)));
    }
  } else if (key == "strategy") {
    StrategySpec parsed = parse_strategy(v);
    if (v.find('(') == std::string::npos) {  // keep parameters set by their own keys
      parsed.k = c.strategy.k;
      parsed.lead_threshold = c.strategy.lead_threshold;
      parsed.player3_silent = c.strategy.player3_silent;
    }
    c.strategy = parsed;
  } else if (key == "withhold_k") c.strategy.k = to_u32(key, v);
  else if (key == "lead_threshold") c.strategy.lead_threshold = to_u32(key, v);
  else if (key == "player3_silent") c.strategy.player3_silent = to_bool(key, v);
  else if (key == "rounds") c.rounds = to_u64(key, v);
  else if (key == "settle_rounds") c.settle_rounds = to_u64(key, v);
  else if (key == "seed") c.seed = to_u64(key, v);
  else if (key == "rng") c.rng = v;
  else if (key == "check_invariants") c.check_invariants = to_bool(key, v);
  else throw Error(ErrorCode::config_invalid, "unknown key '" + key + "'");
}

/// Flat "key = value" lines; '#' starts a comment.
inline SimConfig parse_config(std::istream& in, SimConfig c = {}) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::config_invalid, "line " + std::to_string(lineno) + ": expected key = value");
    }
    try {
      set_option(c, line.substr(0, eq), line.substr(eq + 1));
    } catch (const Error& e) {
      throw Error(ErrorCode::config_invalid, "line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return c;
}

inline SimConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::config_invalid, "cannot open config '" + path + "'");
  return parse_config(in);
}

inline std::vector<std::string> SimConfig::validate() const {
  auto fail = [](const std::string& why) { throw Error(ErrorCode::config_invalid, why); };
  std::vector<std::string> warnings;
  if (!(alpha > 0.0)) fail("alpha must be positive");
  if (beta < 0.0) fail("beta must be non-negative");
  if (epsilon < 0.0) fail("epsilon must be non-negative");
  if (p == 0) fail("p must be at least 1");
  if (base <= 0) fail("base must be positive");
  if (penalty < 0) fail("penalty must be non-negative");
  if (rng != "mt19937_64") fail("rng '" + rng + "' unsupported; only mt19937_64 is implemented");
  if (punisher()) {
    if (beta != 0.0) warnings.push_back("punisher scenario has no rushing adversary; beta ignored");
    warnings.push_back("punisher scenario: mining-power assumptions are not enforced");
  } else {
    if (honest_players == 0) fail("honest_players must be at least 1");
    if (!(alpha + beta < 1.0)) {
      fail("assumption violated: alpha + beta < 1 (expected blocks per round must stay below one); got " +
           detail::fmt(alpha + beta));
    }
    const double effective = alpha * std::exp(-alpha);
    if (effective < beta * (1.0 + epsilon)) {
      fail("assumption violated: alpha*exp(-alpha) >= beta*(1+epsilon); got " + detail::fmt(effective) +
           " < " + detail::fmt(beta * (1.0 + epsilon)));
    }
  }
  const std::uint32_t n = players();
  if (!weights.empty()) {
    if (weights.size() != n) fail("weights: expected " + std::to_string(n) + " entries");
    double sum = 0.0;
    for (double w : weights) {
      if (w < 0.0) fail("weights must be non-negative");
      sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9) fail("weights must sum to 1; got " + detail::fmt(sum));
  }
  if (!punisher() && rounds < 4ull * p) fail("rounds must be at least 4p so that rewards finalize");
  if (strategy.name == "selfish" && strategy.lead_threshold == 0) fail("selfish lead threshold must be >= 1");
  const double x = static_cast<double>(p);
  if (!reward_params().has_margin(x)) {
    warnings.push_back("base <= penalty*p*p: conflict penalties may exceed the base reward");
  }
  return warnings;
}

inline std::string SimConfig::to_kv() const {
  std::ostringstream s;
  s << "alpha = " << detail::fmt(alpha) << "\n"
    << "beta = " << detail::fmt(beta) << "\n"
    << "epsilon = " << detail::fmt(epsilon) << "\n"
    << "p = " << p << "\n"
    << "penalty = " << penalty << "\n"
    << "base = " << base << "\n"
    << "honest_players = " << honest_players << "\n";
  s << "weights = ";
  for (std::size_t i = 0; i < weights.size(); ++i) s << (i ? "," : "") << detail::fmt(weights[i]);
  s << "\n"
    << "strategy = " << strategy.name << "\n"
    << "withhold_k = " << strategy.k << "\n"
    << "lead_threshold = " << strategy.lead_threshold << "\n"
    << "player3_silent = " << (strategy.player3_silent ? "true" : "false") << "\n"
    << "rounds = " << rounds << "\n"
    << "settle_rounds = " << settle() << "\n"
    << "seed = " << seed << "\n"
    << "rng = " << rng << "\n"
    << "check_invariants = " << (check_invariants ? "true" : "false") << "\n";
  return s.str();
}

}  // namespace powdag::sim
