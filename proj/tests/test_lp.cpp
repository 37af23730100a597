#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>

#include "helpers.hpp"
#include "oracles.hpp"
#include "rcg/rcg.hpp"

using rcg::kInf;
using rcg::LinearProgram;
using rcg::LpOutcome;
using rcg::LpStatus;
using rcg::SimplexOptions;

TEST_CASE("minimize x subject to x >= 1 via variable bound") {
  LinearProgram lp;
  lp.c = {1.0};
  lp.lower = {1.0};
  lp.upper = {kInf};
  const LpOutcome out = rcg::solve(lp);
  REQUIRE(out.status == LpStatus::optimal);
  CHECK(out.z[0] == Catch::Approx(1.0).margin(1e-9));
  CHECK(out.objective == Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("minimize x subject to x >= 1 via inequality row") {
  LinearProgram lp;
  lp.c = {1.0};
  lp.le_rows = {{-1.0}};  // -x <= -1
  lp.le_rhs = {-1.0};
  const LpOutcome out = rcg::solve(lp);
  REQUIRE(out.status == LpStatus::optimal);
  CHECK(out.z[0] == Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("minimize -x with x >= 0 and no upper bound is unbounded") {
  LinearProgram lp;
  lp.c = {-1.0};
  lp.lower = {0.0};
  lp.upper = {kInf};
  CHECK(rcg::solve(lp).status == LpStatus::unbounded);
}

TEST_CASE("x >= 3 and x <= 2 is infeasible") {
  LinearProgram lp;
  lp.c = {0.0};
  lp.le_rows = {{-1.0}, {1.0}};
  lp.le_rhs = {-3.0, 2.0};
  CHECK(rcg::solve(lp).status == LpStatus::infeasible);
}

TEST_CASE("feasibility of the worst-case core system of the three-agent example") {
  const rcg::ValueFunction vbar = fixtures::three_firm_vbar();
  const rcg::CoreCertificate cert = rcg::core_nonempty(vbar);
  REQUIRE(cert.feasible);
  CHECK(rcg::in_core(cert.witness, vbar, 1e-8));
}

TEST_CASE("feasible_point rejects x1 >= 3, x2 >= 3, x1 + x2 = 5") {
  const LpOutcome out = rcg::feasible_point(
      {{1.0, 1.0}}, {5.0}, {{1.0, 0.0}, {0.0, 1.0}}, {3.0, 3.0});
  CHECK(out.status == LpStatus::infeasible);
}

TEST_CASE("feasible_point with no constraints returns the origin") {
  const LpOutcome out = rcg::feasible_point({}, {}, {}, {}, {}, 1);
  REQUIRE(out.status == LpStatus::optimal);
  REQUIRE(out.z.size() == 1);
  CHECK(out.z[0] == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("optimal outcomes satisfy the stated residual bounds") {
  LinearProgram lp;
  lp.c = {1.0, 2.0, -1.0};
  lp.eq_rows = {{1.0, 1.0, 1.0}};
  lp.eq_rhs = {4.0};
  lp.le_rows = {{1.0, -1.0, 0.0}};
  lp.le_rhs = {1.0};
  lp.lower = {0.0, 0.0, 0.0};
  lp.upper = {3.0, 3.0, 3.0};
  const LpOutcome out = rcg::solve(lp);
  REQUIRE(out.status == LpStatus::optimal);
  CHECK(out.primal_residual <= 1e-9);
  CHECK(out.complementary_slackness <= 1e-8);
  CHECK(std::abs(out.duality_gap) <= 1e-7);
}

TEST_CASE("bounded variables flip to their upper bounds") {
  LinearProgram lp;
  lp.c = {-1.0, -1.0};
  lp.le_rows = {{1.0, 1.0}};
  lp.le_rhs = {5.0};
  lp.lower = {0.0, 0.0};
  lp.upper = {1.0, 1.0};
  const LpOutcome out = rcg::solve(lp);
  REQUIRE(out.status == LpStatus::optimal);
  CHECK(out.z[0] == Catch::Approx(1.0).margin(1e-9));
  CHECK(out.z[1] == Catch::Approx(1.0).margin(1e-9));
  CHECK(out.objective == Catch::Approx(-2.0).margin(1e-9));
}

TEST_CASE("duplicate equality rows are handled by pinning, not rejected") {
  LinearProgram lp;
  lp.c = {1.0, 1.0};
  lp.eq_rows = {{1.0, 1.0}, {1.0, 1.0}};
  lp.eq_rhs = {2.0, 2.0};
  lp.lower = {0.0, 0.0};
  lp.upper = {kInf, kInf};
  const LpOutcome out = rcg::solve(lp);
  REQUIRE(out.status == LpStatus::optimal);
  CHECK(out.objective == Catch::Approx(2.0).margin(1e-9));
}

TEST_CASE("a tiny pivot budget reports iteration_cap") {
  LinearProgram lp;
  lp.c = {1.0, 2.0, -1.0, 0.5};
  lp.eq_rows = {{1.0, 1.0, 1.0, 1.0}};
  lp.eq_rhs = {4.0};
  lp.le_rows = {{1.0, -1.0, 0.0, 2.0}, {0.0, 1.0, 1.0, -1.0}};
  lp.le_rhs = {1.0, 2.0};
  lp.lower = {0.0, 0.0, 0.0, 0.0};
  lp.upper = {3.0, 3.0, 3.0, 3.0};
  SimplexOptions opts;
  opts.max_pivots = 1;
  CHECK(rcg::solve(lp, opts).status == LpStatus::iteration_cap);
}

TEST_CASE("resolving from the optimal basis takes zero pivots") {
  LinearProgram lp;
  lp.c = {1.0, 2.0, -1.0};
  lp.eq_rows = {{1.0, 1.0, 1.0}};
  lp.eq_rhs = {4.0};
  lp.le_rows = {{1.0, -1.0, 0.0}};
  lp.le_rhs = {1.0};
  lp.lower = {0.0, 0.0, 0.0};
  lp.upper = {3.0, 3.0, 3.0};
  const LpOutcome first = rcg::solve(lp);
  REQUIRE(first.status == LpStatus::optimal);
  const LpOutcome again = rcg::solve(lp, {}, &first.basis);
  REQUIRE(again.status == LpStatus::optimal);
  CHECK(again.pivots == 0);
  CHECK(again.objective == Catch::Approx(first.objective).margin(1e-12));
}

TEST_CASE("random boxed programs match the vertex-enumeration oracle") {
  rcg::detail::Rng rng(0x5051u);
  int solved = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const fixtures::RandomLp rl = fixtures::random_lp(rng);
    const LpOutcome out = rcg::solve(rl.lp);
    const oracle::LpResult ref = oracle::lp_enumerate(
        rl.lp.c, rl.lp.eq_rows, rl.lp.eq_rhs, rl.lp.le_rows, rl.lp.le_rhs,
        rl.lp.lower, rl.lp.upper);
    INFO("trial " << trial);
    if (ref.feasible) {
      REQUIRE(out.status == LpStatus::optimal);
      CHECK(out.objective == Catch::Approx(ref.objective).margin(1e-7));
      CHECK(std::abs(out.duality_gap) <= 1e-7);
      ++solved;
    } else {
      REQUIRE(out.status == LpStatus::infeasible);
    }
  }
  CHECK(solved >= 10);  // the mix must actually exercise the optimal path
}
