#include <doctest.h>

#include "bimax/driver.hpp"
#include "bimax/instances.hpp"
#include "bimax/serialize.hpp"

using namespace bimax;

TEST_SUITE("driver") {

TEST_CASE("outer iteration count of the stochastic branch") {
    CHECK(compute_stochastic_K(1, 0, 0.1, 4) == 210);
    CHECK(compute_stochastic_K(0, 0, 1, 0) == 1);
    CHECK(compute_stochastic_K(3.5, -1, 0.05, 8) == 2240);
    CHECK(compute_stochastic_K(1, 0, 0.3, 0) == 23);
    CHECK_THROWS_AS(compute_stochastic_K(-1, 0, 0.1, 1), std::invalid_argument);
}

TEST_CASE("config defaults and validation") {
    SolverConfig c;
    c.eps = 0.04;
    CHECK(c.rho_value() == doctest::Approx(25));
    CHECK(c.eps_hat_value() == doctest::Approx(0.008));
    CHECK_NOTHROW(c.validate());
    auto bad = c;
    bad.eps = 0.3;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = c;
    bad.eps = 0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = c;
    bad.K = 0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = c;
    bad.primal_init = Vector::Zero(3);
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = c;
    bad.L_override = -1;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("initialization meets its gap") {
    const auto toy = make_toy_unconstrained();
    for (double x : {-1.0, 0.0, 0.7}) {
        const Vector x1 = Vector::Constant(1, x);
        auto [y1, y2] = initialize(toy.problem, x1, 1e-3);
        CHECK(lower_gap(toy.problem, x1, y1, y2) <= 1e-3);
        CHECK(lower_gap(toy.problem, x1, y1, y2) >= -1e-12);
    }
    CHECK_THROWS_AS(initialize(toy.problem, Vector::Constant(1, 2.0), 1e-3), std::invalid_argument);
}

TEST_CASE("deterministic toy run") {
    const auto toy = make_toy_unconstrained();
    SolverConfig c;
    c.eps = 0.1;
    c.checkpoint_every = 20;
    const auto r = solve_deterministic(toy.problem, c);
    CHECK(r.terminated_by == TerminationReason::StepNorm);
    CHECK(r.kkt.max_residual() <= 10 * c.eps);
    CHECK(r.rho == doctest::Approx(10));
    for (size_t i = 1; i < r.trace.size(); ++i)
        CHECK(r.trace[i].oracle_calls_total > r.trace[i - 1].oracle_calls_total);
    const double start = *r.trace.front().max_dual_penalty;
    int checkpoints = 0;
    for (const auto &rec : r.trace)
        if (rec.max_dual_penalty) {
            ++checkpoints;
            CHECK(*rec.max_dual_penalty <= start + r.checkpoint_growth_bound);
        }
    CHECK(checkpoints >= 3);
}

TEST_CASE("identical config gives identical results") {
    const auto toy = make_toy_unconstrained();
    SolverConfig c;
    c.eps = 0.2;
    const auto a = solve_deterministic(toy.problem, c), b = solve_deterministic(toy.problem, c);
    CHECK(dump_stable(result_to_json(a)) == dump_stable(result_to_json(b)));

    c.mode = SolveMode::Stochastic;
    c.K = 4;
    c.sapd_T = 50;
    c.seed = 9;
    auto oa = make_noisy(toy.problem, 0.1, 0.1, 3), ob = make_noisy(toy.problem, 0.1, 0.1, 3);
    const auto sa = solve_stochastic(oa, c), sb = solve_stochastic(ob, c);
    CHECK(dump_stable(result_to_json(sa)) == dump_stable(result_to_json(sb)));
    CHECK(sa.primal == sb.primal);
}

TEST_CASE("a stationary start stops at once") {
    const auto toy = make_toy_unconstrained();
    SolverConfig c;
    c.eps = 0.1;
    auto [u, v] = toy_unconstrained_kkt(c.rho_value());
    c.primal_init = u;
    c.dual_init = v;
    const auto r = solve_deterministic(toy.problem, c);
    CHECK(r.terminated_by == TerminationReason::StepNorm);
    CHECK(r.outer_iterations == 1);
    CHECK((r.primal - u).norm() < 1e-3);
}

TEST_CASE("budgets") {
    const auto toy = make_toy_unconstrained();
    SolverConfig c;
    c.eps = 0.01;
    c.max_oracle_calls = 2000;
    CHECK(solve_deterministic(toy.problem, c).terminated_by == TerminationReason::OracleBudget);
    c.max_oracle_calls = 10'000'000;
    c.max_outer_iterations = 2;
    const auto r = solve_deterministic(toy.problem, c);
    CHECK(r.terminated_by == TerminationReason::OuterBudget);
    CHECK(r.outer_iterations == 2);
}

TEST_CASE("stochastic budget caps the inner iterations") {
    const auto toy = make_toy_unconstrained();
    SolverConfig c;
    c.eps = 0.2;
    c.mode = SolveMode::Stochastic;
    c.K = 5;
    c.sapd_T = 1'000'000;
    c.max_oracle_calls = 50'000;
    auto o = make_noisy(toy.problem, 0.1, 0.1, 2);
    const auto r = solve_stochastic(o, c);
    CHECK(r.terminated_by == TerminationReason::OracleBudget);
    CHECK(r.sapd_T_clamped);
    CHECK(r.oracle.total() <= c.max_oracle_calls + 6);
}

TEST_CASE("stochastic branch keeps the sampled iterate") {
    const auto toy = make_toy_unconstrained();
    SolverConfig c;
    c.eps = 0.2;
    c.mode = SolveMode::Stochastic;
    c.K = 1;
    c.sapd_T = 30;
    auto o = make_noisy(toy.problem, 0, 0, 1);
    const auto one = solve_stochastic(o, c);
    CHECK(one.sampled_k == 1);
    CHECK(one.outer_iterations == 1);
    CHECK(one.terminated_by == TerminationReason::KReached);

    c.K = 6;
    c.stop_at_sampled_k = true;
    auto o2 = make_noisy(toy.problem, 0, 0, 1);
    const auto r = solve_stochastic(o2, c);
    REQUIRE(r.sampled_k);
    CHECK(r.outer_iterations == *r.sampled_k);
    CHECK(r.trace.back().oracle_calls_total == r.oracle.total());
}

}
