#include <gtest/gtest.h>

#include <cstdlib>

#include "support.hpp"
#include "tspbmc/error.hpp"
#include "tspbmc/sexpr.hpp"
#include "tspbmc/subprocess.hpp"

namespace tspbmc {
namespace {

using testing::library_model;
using testing::solver_available;

TEST(Rational, ParseForms) {
  EXPECT_EQ(parse_rational("3"), Rational(3));
  EXPECT_EQ(parse_rational("-2"), Rational(-2));
  EXPECT_EQ(parse_rational("0.25"), Rational(1, 4));
  EXPECT_EQ(parse_rational("3/2"), Rational(3, 2));
  EXPECT_EQ(parse_rational("6/4"), Rational(3, 2));
  EXPECT_THROW(parse_rational("1/0"), Error);
  EXPECT_THROW(parse_rational("x"), Error);
  EXPECT_THROW(parse_rational(""), Error);
  EXPECT_EQ(rational_to_string(Rational(3)), "3/1");
  EXPECT_EQ(rational_to_short_string(Rational(3)), "3");
  EXPECT_EQ(rational_to_short_string(Rational(7, 2)), "7/2");
}

TEST(Rational, SmtlibRoundTripGrid) {
  for (long long p = -40; p <= 40; ++p)
    for (long long q = 1; q <= 25; ++q) {
      Rational r(p, q);
      ASSERT_EQ(sexpr_to_rational(parse_sexpr(rational_to_smtlib(r))), r) << rational_to_smtlib(r);
      ASSERT_EQ(sexpr_to_rational(rational_to_sexpr(r)), r);
      ASSERT_EQ(parse_rational(rational_to_string(r)), r);
    }
  EXPECT_EQ(rational_to_smtlib(Rational(3)), "3.0");
  EXPECT_EQ(rational_to_smtlib(Rational(3, 2)), "(/ 3.0 2.0)");
  EXPECT_EQ(rational_to_smtlib(Rational(-1)), "(- 1.0)");
}

TEST(SExpr, SolverReply) {
  auto e = parse_sexpr("((x true) (t_1_1 (/ 3.0 2.0)) (tau_2 (- 1.0)) (y false))");
  ASSERT_TRUE(e.is_list);
  ASSERT_EQ(e.list.size(), 4u);
  EXPECT_EQ(std::get<bool>(sexpr_to_value(e.list[0].list[1])), true);
  EXPECT_EQ(std::get<Rational>(sexpr_to_value(e.list[1].list[1])), Rational(3, 2));
  EXPECT_EQ(std::get<Rational>(sexpr_to_value(e.list[2].list[1])), Rational(-1));
  EXPECT_EQ(std::get<bool>(sexpr_to_value(e.list[3].list[1])), false);
  EXPECT_EQ(print_sexpr(e.list[1]), "(t_1_1 (/ 3.0 2.0))");
  EXPECT_EQ(sexpr_to_rational(parse_sexpr("(/ (- 3.0) 4.0)")), Rational(-3, 4));
}

TEST(SExpr, Completeness) {
  EXPECT_FALSE(sexpr_complete(""));
  EXPECT_FALSE(sexpr_complete("((a b)"));
  EXPECT_TRUE(sexpr_complete("((a b))\n"));
  EXPECT_TRUE(sexpr_complete("sat\n"));
  EXPECT_FALSE(sexpr_complete("sa"));
  EXPECT_EQ(parse_sexprs("sat ((a 1))").size(), 2u);
  EXPECT_THROW(parse_sexpr("(a"), Error);
  EXPECT_THROW(parse_sexpr(")"), Error);
  EXPECT_THROW(parse_sexpr("a b"), Error);
}

TEST(SolverConfig, Validation) {
  SolverConfig c;
  EXPECT_NO_THROW(c.validate());
  c.timeout_seconds = 0;
  EXPECT_THROW(c.validate(), ModelError);
  c.timeout_seconds = 1;
  c.max_bound = 0;
  EXPECT_THROW(c.validate(), ModelError);
  c.max_bound.reset();
  EXPECT_EQ(c.effective_max_bound(library_model("nspkt", "fair", 2)), 12);
}

TEST(SolverConfig, EnvironmentDefault) {
  ::setenv("TSPBMC_SOLVER", "cvc5 --lang smt2", 1);
  EXPECT_EQ(default_solver_command(), "cvc5 --lang smt2");
  ::unsetenv("TSPBMC_SOLVER");
  EXPECT_EQ(default_solver_command(), "z3 -in");
}

TEST(Subprocess, SplitCommand) {
  EXPECT_EQ(split_command("z3 -in"), (std::vector<std::string>{"z3", "-in"}));
  EXPECT_EQ(split_command("'my solver' -x \"a b\""), (std::vector<std::string>{"my solver", "-x", "a b"}));
}

TEST(RunSolver, MissingBinary) {
  SmtScript s = encode({library_model("nspkt", "fair", 1), 1});
  SolverConfig c;
  c.command = "/nonexistent/solver-binary";
  RawResult r = run_solver(s, c);
  EXPECT_EQ(r.status, SolverStatus::error);
  Verdict v = iterate_bounds(library_model("nspkt", "fair", 1), c);
  EXPECT_EQ(v.outcome, Verdict::Outcome::inconclusive);
  EXPECT_EQ(v.bound, 1);
}

TEST(RunSolver, GarbageReplyIsError) {
  SmtScript s = encode({library_model("nspkt", "fair", 1), 1});
  SolverConfig c;
  c.command = "sh -c 'echo hello; cat > /dev/null'";
  RawResult r = run_solver(s, c);
  EXPECT_EQ(r.status, SolverStatus::error);
}

TEST(RunSolver, Timeout) {
  SmtScript s = encode({library_model("nspkt", "fair", 1), 1});
  SolverConfig c;
  c.command = "sleep 30";
  c.timeout_seconds = 0.3;
  RawResult r = run_solver(s, c);
  EXPECT_EQ(r.status, SolverStatus::timeout);
}

TEST(RunSolver, TrivialScripts) {
  if (!solver_available()) GTEST_SKIP() << "z3 not on PATH";
  SolverConfig c = testing::test_solver(1);
  SmtScript sat;
  sat.text = "(set-logic QF_LRA)\n(declare-const x Real)\n(declare-const b Bool)\n(assert (= x (/ 7.0 3.0)))\n(assert b)\n(check-sat)\n";
  sat.symbols = {"b", "x"};
  RawResult r = run_solver(sat, c);
  ASSERT_EQ(r.status, SolverStatus::sat) << r.raw_output << r.solver_stderr;
  EXPECT_EQ(std::get<Rational>(r.values.at("x")), Rational(7, 3));
  EXPECT_TRUE(std::get<bool>(r.values.at("b")));

  SmtScript unsat;
  unsat.text = "(set-logic QF_LRA)\n(declare-const x Real)\n(assert (< x 0.0))\n(assert (> x 1.0))\n(check-sat)\n";
  unsat.symbols = {"x"};
  EXPECT_EQ(run_solver(unsat, c).status, SolverStatus::unsat);
}

TEST(IterateBounds, Verdicts) {
  if (!solver_available()) GTEST_SKIP() << "z3 not on PATH";
  Verdict fair = iterate_bounds(library_model("nspkt", "fair", 1), testing::test_solver(6));
  EXPECT_EQ(fair.outcome, Verdict::Outcome::no_attack);
  EXPECT_EQ(fair.bound, 6);
  EXPECT_EQ(fair.log.size(), 6u);
  Verdict mitm = iterate_bounds(library_model("nspkt", "mitm1_lowe", 2), testing::test_solver(12));
  ASSERT_EQ(mitm.outcome, Verdict::Outcome::attack_found);
  EXPECT_EQ(mitm.bound, 5);
  ASSERT_TRUE(mitm.result && mitm.script);
  for (const std::string& sym : mitm.script->symbols) EXPECT_TRUE(mitm.result->values.count(sym)) << sym;
}

}  // namespace
}  // namespace tspbmc
