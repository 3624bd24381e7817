#include <gtest/gtest.h>

#include "support.hpp"
#include "tspbmc/error.hpp"
#include "tspbmc/oracle.hpp"

namespace tspbmc {
namespace {

using testing::library_model;

TEST(Oracle, DepthBelowOne) {
  TiisModel m = library_model("nspkt", "fair", 1);
  EXPECT_THROW(explicit_reach(m, 0), ModelError);
  EXPECT_THROW(iterative_deepening_reach(m, 0), ModelError);
}

TEST(Oracle, LibraryVerdicts) {
  struct Expect {
    const char* protocol;
    const char* scenario;
    int sessions;
    bool attack;
    int depth;
  };
  const Expect cases[] = {
      {"nspkt", "fair", 1, false, 12},           {"nspkt", "fair", 2, false, 12},
      {"nspkt", "mitm1_lowe", 2, true, 5},       {"nspkt_lowe_fixed", "mitm1_lowe_adapted", 2, false, 12},
      {"wmf", "replay", 2, true, 6},             {"wmf", "replay_tight", 2, false, 12},
      {"wmf", "fair", 2, false, 12},             {"dsp", "compromise", 1, true, 4},
      {"dsp", "fair", 1, false, 12},
  };
  for (const Expect& c : cases) {
    OracleResult r = explicit_reach(library_model(c.protocol, c.scenario, c.sessions), 12);
    EXPECT_EQ(r.attack, c.attack) << c.protocol << "/" << c.scenario;
    EXPECT_EQ(r.depth, c.depth) << c.protocol << "/" << c.scenario;
    EXPECT_EQ(r.trace.has_value(), c.attack);
    EXPECT_GT(r.states, 0u);
  }
}

TEST(Oracle, DepthCapBelowAttack) {
  OracleResult r = explicit_reach(library_model("nspkt", "mitm1_lowe", 2), 4);
  EXPECT_FALSE(r.attack);
  EXPECT_EQ(r.depth, 4);
}

TEST(Oracle, BreadthFirstMatchesDeepening) {
  const std::pair<const char*, const char*> cases[] = {
      {"nspkt", "mitm1_lowe"}, {"wmf", "replay"}, {"wmf", "replay_tight"}, {"dsp", "compromise"}};
  for (const auto& [p, s] : cases) {
    TiisModel m = library_model(p, s, p == std::string("dsp") ? 1 : 2);
    OracleResult bfs = explicit_reach(m, 8);
    OracleResult ids = iterative_deepening_reach(m, 8);
    EXPECT_EQ(bfs.attack, ids.attack) << p << "/" << s;
    EXPECT_EQ(bfs.depth, ids.depth) << p << "/" << s;
    if (ids.trace) EXPECT_TRUE(replay(*ids.trace, m)) << p << "/" << s;
  }
}

TEST(Oracle, AgreesWithSolver) {
  if (!testing::solver_available()) GTEST_SKIP() << "z3 not on PATH";
  const std::tuple<const char*, const char*, int> cases[] = {
      {"nspkt", "fair", 1}, {"nspkt", "mitm1_lowe", 2}, {"wmf", "replay", 2},
      {"wmf", "replay_tight", 2}, {"dsp", "compromise", 1}, {"dsp", "fair", 1}};
  for (const auto& [p, s, k] : cases) {
    TiisModel m = library_model(p, s, k);
    Verdict v = iterate_bounds(m, testing::test_solver(8));
    OracleResult r = explicit_reach(m, 8);
    EXPECT_EQ(v.outcome == Verdict::Outcome::attack_found, r.attack) << p << "/" << s;
    if (r.attack) EXPECT_EQ(v.bound, r.depth) << p << "/" << s;
  }
}

}  // namespace
}  // namespace tspbmc
