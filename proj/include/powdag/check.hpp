#pragma once

// Invariant suite behind `powdag-sim check`: the store's incremental
// answers against the brute-force oracles, plus the structural properties
// the reward argument relies on, on random DAGs and hand-built fixtures.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "powdag/dag_store.hpp"
#include "powdag/ordering.hpp"
#include "powdag/rewards.hpp"
#include "powdag/staleness.hpp"
#include "powdag/testing/fixtures.hpp"
#include "powdag/testing/oracles.hpp"
#include "powdag/tip_index.hpp"

namespace powdag::check {

struct Row {
  std::string name;
  std::uint64_t cases = 0;
  std::uint64_t failures = 0;
  std::string first_failure;

  bool passed() const { return failures == 0 && cases > 0; }
};

class Table {
 public:
  void expect(const std::string& name, bool ok, const std::function<std::string()>& detail) {
    Row& r = row(name);
    ++r.cases;
    if (!ok) {
      if (r.failures == 0) r.first_failure = detail();
      ++r.failures;
    }
  }

  Row& row(const std::string& name) {
    auto it = index_.find(name);
    if (it != index_.end()) return rows_[it->second];
    index_[name] = rows_.size();
    rows_.push_back(Row{name, 0, 0, {}});
    return rows_.back();
  }

  const std::vector<Row>& rows() const { return rows_; }
  bool all_passed() const {
    return std::all_of(rows_.begin(), rows_.end(), [](const Row& r) { return r.passed(); });
  }
  std::uint64_t failures() const {
    std::uint64_t n = 0;
    for (const Row& r : rows_) n += r.failures;
    return n;
  }

  void print(std::ostream& out) const {
    for (const Row& r : rows_) {
      out << (r.passed() ? "PASS " : "FAIL ") << r.name << "  (" << r.cases << " cases";
      if (r.failures) out << ", " << r.failures << " failed; first: " << r.first_failure;
      out << ")\n";
    }
  }

 private:
  std::vector<Row> rows_;
  std::map<std::string, std::size_t> index_;
};

/// How many tips to examine per DAG; the oracles are quadratic or worse.
struct Budget {
  std::size_t stale_tips = 16;
  std::size_t conflict_tips = 4;
  std::size_t layered_blocks = 48;
};

namespace detail {

inline std::vector<BlockIndex> sample(std::size_t n, std::size_t want) {
  std::vector<BlockIndex> out;
  if (n == 0) return out;
  if (want >= n) {
    for (BlockIndex i = 0; i < n; ++i) out.push_back(i);
    return out;
  }
  for (std::size_t k = 0; k < want; ++k) out.push_back(static_cast<BlockIndex>(n - 1 - k * (n - 1) / want));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

inline std::string where(const std::string& label, const std::string& what) { return label + ": " + what; }

}  // namespace detail

/// Every check on one DAG. Labels identify the DAG in failure messages.
/// Returns how many stale (tip, block) pairs the sampled tips produced.
inline std::uint64_t check_dag(const BlockDag& g, const std::string& label, const std::vector<std::uint32_t>& ps,
                      Table& t, const Budget& budget = {}) {
  using detail::where;
  std::uint64_t stale_seen = 0;
  const testing::Oracle o(g);
  const auto n = static_cast<BlockIndex>(g.size());

  {
    bool ok = true;
    BlockIndex bad_a = 0, bad_b = 0;
    for (BlockIndex a = 0; a < n && ok; ++a) {
      for (BlockIndex b = 0; b < n; ++b) {
        if (g.reaches(a, b) != o.reaches(a, b)) {
          ok = false;
          bad_a = a;
          bad_b = b;
          break;
        }
      }
    }
    t.expect("past = graph search", ok, [&] {
      return where(label, "reach(" + std::to_string(bad_a) + "," + std::to_string(bad_b) + ")");
    });
  }

  for (BlockIndex b = 1; b < n; ++b) {
    t.expect("parent = chain rule from scratch", g.parent(b) == o.parent(b), [&] {
      return where(label, "block " + std::to_string(b) + " stored parent " + std::to_string(g.parent(b)) +
                              ", recomputed " + std::to_string(o.parent(b)));
    });
  }

  for (BlockIndex b = 0; b < n; ++b) {
    const auto fast = order(g, b);
    t.expect("order = recursive ordering", fast == o.order(b),
             [&] { return where(label, "order(" + std::to_string(b) + ")"); });
    if (b != g.genesis()) {
      bool ok = true;
      try {
        ok = order_incremental(g, order(g, g.parent(b)), b) == fast;
      } catch (const Error&) {
        ok = false;
      }
      t.expect("order extends parent's order", ok,
               [&] { return where(label, "order_incremental(" + std::to_string(b) + ")"); });
    }
  }

  for (std::uint32_t p : ps) {
    const std::string at_p = " p=" + std::to_string(p);
    for (BlockIndex tip : detail::sample(n, budget.stale_tips)) {
      const StaleSet s = stale_set(g, tip, p);
      const std::set<BlockIndex> expected = o.stale_set(tip, p);
      stale_seen += expected.size();
      t.expect("stale set = definition", std::set<BlockIndex>(s.members.begin(), s.members.end()) == expected,
               [&] { return where(label, "tip " + std::to_string(tip) + at_p); });
    }

    // Stale-ness of blocks already in the parent's past carries over: judged
    // independently for the block, and incrementally for its parent.
    for (BlockIndex b : detail::sample(n, budget.layered_blocks)) {
      if (b == g.genesis()) continue;
      const TipIndex at_parent = TipIndex::at(g, g.parent(b));
      const std::set<BlockIndex> judged = o.stale_set(b, p);
      bool ok = true;
      BlockIndex bad = 0;
      for (BlockIndex a = 0; a <= g.parent(b); ++a) {
        if (!at_parent.contains(a)) continue;
        if (judged.contains(a) != at_parent.is_stale(a, p)) {
          ok = false;
          bad = a;
          break;
        }
      }
      t.expect("stale-ness preserved along parent", ok, [&] {
        return where(label, "block " + std::to_string(bad) + " under " + std::to_string(b) + " / parent " +
                                std::to_string(g.parent(b)) + at_p);
      });
    }

    for (BlockIndex tip : detail::sample(n, budget.conflict_tips)) {
      const TipIndex idx = TipIndex::at(g, tip);
      const std::set<BlockIndex> stale = o.stale_set(tip, p);
      const std::vector<BlockIndex> members = o.past(tip);
      std::map<BlockIndex, std::set<BlockIndex>> sets;
      for (BlockIndex b : members) {
        if (stale.contains(b)) continue;
        std::set<BlockIndex> expected;
        for (BlockIndex x : members) {
          if (x != b && !stale.contains(x) && !o.reaches(b, x) && !o.reaches(x, b)) expected.insert(x);
        }
        std::set<BlockIndex> got;
        bool threw = false;
        try {
          for (BlockIndex x : conflict_set(g, idx, b, p)) got.insert(x);
        } catch (const Error&) {
          threw = true;
        }
        t.expect("conflict set = all-pairs", !threw && got == expected, [&] {
          return where(label, "tip " + std::to_string(tip) + " block " + std::to_string(b) + at_p);
        });
        sets[b] = std::move(got);
      }
      bool symmetric = true;
      for (const auto& [y, xs] : sets) {
        for (BlockIndex z : xs) {
          auto it = sets.find(z);
          if (it == sets.end() || !it->second.contains(y)) symmetric = false;
        }
      }
      t.expect("conflict sets symmetric", symmetric,
               [&] { return where(label, "tip " + std::to_string(tip) + at_p); });
    }

    // Conflict sets stop changing once the block is buried deeper than 2p.
    for (BlockIndex a : detail::sample(n, budget.layered_blocks)) {
      if (a == g.genesis()) continue;
      const TipIndex at_a = TipIndex::at(g, a);
      const TipIndex at_parent = TipIndex::at(g, g.parent(a));
      bool ok = true;
      BlockIndex bad = 0;
      for (BlockIndex b = 0; b <= g.parent(a) && ok; ++b) {
        if (!at_parent.contains(b) || at_parent.burial(b) <= 2 * p || at_a.is_stale(b, p)) continue;
        if (conflict_set(g, at_a, b, p) != conflict_set(g, at_parent, b, p)) {
          ok = false;
          bad = b;
        }
      }
      t.expect("conflict set stable after 2p", ok, [&] {
        return where(label, "block " + std::to_string(bad) + " at " + std::to_string(a) + at_p);
      });
    }
  }
  return stale_seen;
}

inline void check_fork_example(Table& t) {
  testing::ForkExample f;
  const BlockIndex tip = f.dag.insert_block("T", std::vector<BlockIndex>{f.D, f.DD}, MinerId{1}).index;
  const auto got = conflict_set(f.dag, tip, f.C, 10);
  t.expect("fork example: conflict set of C", std::set<BlockIndex>(got.begin(), got.end()) ==
                                             std::set<BlockIndex>{f.W, f.CU, f.CW},
           [] { return std::string("conflict_set(C) differs from {W, CU, CW}"); });
  t.expect("fork example: order(D)",
           order(f.dag, f.D) == std::vector<BlockIndex>{f.A, f.B, f.U, f.C, f.CU, f.D},
           [] { return std::string("order(D) differs from [A,B,U,C,CU,D]"); });
  t.expect("fork example: parent(C)", f.dag.parent(f.C) == f.B, [] { return std::string("parent(C) != B"); });
}

/// G <- A1 <- A2 <- A3 <- A4, a fork Z on genesis, and a tip T = [A4, Z]
/// stored with parent Z although the chain rule picks A4. With p = 2, Z is
/// stale in T's true past but not in the stored parent's.
inline BlockDag wrong_parent_fixture() {
  BlockDag g;
  BlockIndex a = g.genesis();
  for (int i = 1; i <= 4; ++i) a = g.insert_block("A" + std::to_string(i), std::vector<BlockIndex>{a}, MinerId{1}).index;
  const BlockIndex z = g.insert_block("Z", std::vector<BlockIndex>{g.genesis()}, MinerId{2}).index;
  g.insert_block_with_parent("T", std::vector<BlockIndex>{a, z}, MinerId{1}, z);
  return g;
}

struct SuiteOptions {
  std::uint32_t dags = 100;
  std::size_t max_blocks = 1000;
  std::uint64_t seed = 1;
  std::vector<std::uint32_t> ps{1, 3};
  Budget budget;
};

/// Random DAG sizes cycle from small to max_blocks; the shape parameters vary
/// so that fork-heavy and merge-heavy graphs both appear.
inline Table run_suite(const SuiteOptions& opt) {
  Table t;
  std::uint64_t stale_seen = 0;
  for (std::uint32_t i = 0; i < opt.dags; ++i) {
    testing::RandomDagOptions shape;
    const std::size_t span = opt.max_blocks > 20 ? opt.max_blocks - 20 : 1;
    shape.blocks = 20 + (static_cast<std::size_t>(i) * 379) % (span + 1);
    if (shape.blocks > opt.max_blocks) shape.blocks = opt.max_blocks;
    shape.p_merge = 0.45 + 0.05 * (i % 6);
    shape.p_recent = 0.2 + 0.05 * (i % 4);
    shape.miners = 2 + i % 5;
    const std::uint64_t seed = opt.seed * 1000003ull + i;
    const BlockDag g = testing::random_dag(seed, shape);
    stale_seen += check_dag(g, "random dag seed " + std::to_string(seed) + " (" + std::to_string(g.size()) + " blocks)", opt.ps, t,
              opt.budget);
  }
  t.expect("random dags contain stale blocks", opt.dags == 0 || stale_seen > 0,
           [] { return std::string("no sampled tip had a stale block; the checks above are too weak"); });
  check_fork_example(t);
  return t;
}

}  // namespace powdag::check
