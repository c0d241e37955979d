#include <doctest.h>

#include <random>

#include "bimax/constrained.hpp"
#include "bimax/instances.hpp"
#include "bimax/problem.hpp"
#include "oracles.hpp"

using namespace bimax;

TEST_SUITE("constrained") {

TEST_CASE("toy constants") {
    const auto toy = make_toy_constrained();
    CHECK(toy.problem.D_Y1() == doctest::Approx(2));
    CHECK(toy.problem.dual_bound() == doctest::Approx(8));
    CHECK(toy.analytic_solution[0] == 0.5);
    CHECK(toy.analytic_solution[1] == 0.5);
}

TEST_CASE("toy analytic KKT point") {
    const auto toy = make_toy_constrained();
    for (double rho : {1.0, 10.0, 1000.0}) {
        auto [u, v] = toy_constrained_kkt(rho);
        const auto r = constrained_kkt(toy.problem, u, v, rho);
        CHECK(r.max_residual() <= 1e-8);
        CHECK(r.lambda_bar[0] == doctest::Approx(1.0));
    }
    CHECK_THROWS_AS(toy_constrained_kkt(0.5), std::invalid_argument);
}

TEST_CASE("toy lower value is x1, exactly and through the saddle") {
    const auto toy = make_toy_constrained();
    auto generic = toy.problem;
    generic.affine.reset();
    for (double x : {0.0, 0.1, 0.25, 0.5}) {
        const Vector x1 = Vector::Constant(1, x);
        CHECK(lower_optimal_value(toy.problem, x1).value == doctest::Approx(x).epsilon(1e-12));
        const auto est = lower_optimal_value(generic, x1, 1e-6);
        CHECK(est.converged);
        CHECK(std::abs(est.value - x) <= 1e-6);
    }
    CHECK(lower_suboptimality(toy.problem, Vector::Constant(1, 0.2), Vector::Constant(1, 0.7)) ==
          doctest::Approx(0.5));
    CHECK(constraint_violation(toy.problem, Vector::Constant(1, 0.5), Vector::Constant(1, 0.2)) ==
          doctest::Approx(0.3));
}

TEST_CASE("gap bound precondition") {
    const auto toy = make_toy_constrained();
    CHECK(gap_bound_precondition_holds(toy.problem, 0.125, 1.0));
    CHECK_FALSE(gap_bound_precondition_holds(toy.problem, 0.13, 1.0));
    auto [u, v] = toy_constrained_kkt(1);
    CHECK(constrained_kkt(toy.problem, u, v, 1.0, 0.2).warning.has_value());
    CHECK_FALSE(constrained_kkt(toy.problem, u, v, 1.0, 0.1).warning.has_value());
}

TEST_CASE("linear closed forms match brute force") {
    const auto inst = gen_linear(3, 3, 2, 5);
    const auto cp = linear_problem(inst);
    const auto P = reformulate(cp);
    REQUIRE(P.closed_form_pd);
    auto numeric = P;
    numeric.closed_form_pd.reset();
    const double B = cp.dual_bound();
    CHECK(B == 200);
    std::mt19937_64 rng(1);
    const auto box = ProxFunction::box(3, -1, 1);
    const auto dual_box = ProxFunction::box(2, 0, B);
    for (int t = 0; t < 10; ++t) {
        const Vector x1 = sample_domain(box, rng), y1 = sample_domain(box, rng);
        const Vector y2 = sample_domain(dual_box, rng);
        const Vector g = inst.A_tilde * x1 + inst.B_tilde * y1 - inst.b_tilde;
        const double p_ref = inst.d_tilde.dot(y1) + B * g.cwiseMax(0).sum();
        const Vector coef = inst.d_tilde + inst.B_tilde.transpose() * y2;
        const double d_ref = y2.dot(inst.A_tilde * x1 - inst.b_tilde) +
                             oracle::box_vertex_min(coef, -Vector::Ones(3), Vector::Ones(3));
        CHECK(P.closed_form_pd->p(x1, y1) == doctest::Approx(p_ref).epsilon(1e-12));
        CHECK(P.closed_form_pd->d(x1, y2) == doctest::Approx(d_ref).epsilon(1e-12));
        CHECK(std::abs(primal_value(numeric, x1, y1, 1e-8).value - p_ref) <= 1e-7 * std::max(1.0, std::abs(p_ref)));
        CHECK(std::abs(dual_value(numeric, x1, y2, 1e-8).value - d_ref) <= 1e-7 * std::max(1.0, std::abs(d_ref)));

        const auto lp = oracle::vertex_enumeration(inst.d_tilde, inst.B_tilde,
                                                   inst.b_tilde - inst.A_tilde * x1,
                                                   -Vector::Ones(3), Vector::Ones(3));
        if (std::isfinite(lp.value))
            CHECK(lower_optimal_value(cp, x1).value == doctest::Approx(lp.value).epsilon(1e-9));
        else
            CHECK_THROWS_AS(lower_optimal_value(cp, x1), std::runtime_error);
    }
}

TEST_CASE("no constraints") {
    ConstrainedBilevelProblem cp;
    cp.n_x1 = 1;
    cp.n_y1 = 2;
    cp.n_con = 0;
    cp.eval_f1 = [](const Vector &x, const Vector &y) { return x[0] * x[0] + y.squaredNorm(); };
    cp.grad_f1 = [](const Vector &x, const Vector &y) {
        Vector g(3);
        g << 2 * x[0], 2 * y;
        return g;
    };
    cp.eval_fbar1 = [](const Vector &x, const Vector &y) { return 0.5 * (y.array() - x[0]).square().sum(); };
    cp.grad_fbar1 = [](const Vector &x, const Vector &y) {
        Vector g(3);
        g << -(y.array() - x[0]).sum(), (y.array() - x[0]).matrix();
        return g;
    };
    cp.g_bar = [](const Vector &, const Vector &) { return ConstraintValue{Vector(0), Matrix(0, 3)}; };
    cp.prox_f2 = ProxFunction::box(1, -1, 1);
    cp.prox_fbar2 = ProxFunction::box(2, 0, 1);
    cp.L_fbar = 4;
    cp.L_grad_f1 = 2;
    cp.L_grad_fbar1 = 3;
    cp.slater_margin = 1;
    cp.slater_point = [](const Vector &) { return Vector::Constant(2, 0.5); };
    cp.f_low = 0;
    cp.validate();
    const auto P = reformulate(cp);
    CHECK(P.layout.n_y2 == 0);
    // argmin over [0,1]^2 of ||y - x||^2 / 2 at x = -0.5 is y = 0 with value 0.25.
    CHECK(std::abs(lower_optimal_value(cp, Vector::Constant(1, -0.5), 1e-9).value - 0.25) <= 1e-8);
    CHECK(constraint_violation(cp, Vector::Zero(1), Vector::Zero(2)) == 0);
}

}
