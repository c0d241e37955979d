#include <doctest.h>

#include <random>

#include "bimax/instances.hpp"
#include "bimax/penalty.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace bimax;

namespace {

void check_fd(const PenaltyProblem &pen, std::mt19937_64 &rng, int points) {
    const auto &P = pen.base;
    const Index nu = P.layout.primal_size(), nv = P.layout.dual_size();
    for (int t = 0; t < points; ++t) {
        const Vector u = sample_domain(pen.prox_primal, rng), v = sample_domain(pen.prox_dual, rng);
        Vector gu, gv;
        penalty_gradient(pen, u, v, gu, gv);
        auto fu = [&](const Vector &w) { return penalty_P1(pen, w, v); };
        auto fv = [&](const Vector &w) { return penalty_P1(pen, u, w); };
        CHECK(gu.size() == nu);
        CHECK(gv.size() == nv);
        CHECK(oracle::relative_error(gu, oracle::central_difference(fu, u)) <= 1e-6);
        CHECK(oracle::relative_error(gv, oracle::central_difference(fv, v)) <= 1e-6);
    }
}

} // namespace

TEST_SUITE("penalty") {

TEST_CASE("bilinear x1 derivative is x2") {
    auto pen = assemble_penalty(fixture::bilinear(), 3.0);
    const auto &L = pen.base.layout;
    const Vector u = L.primal(Vector::Constant(1, 0.4), Vector::Constant(1, -0.2),
                              Vector::Constant(1, 0.9));
    const Vector v = L.dual(Vector::Constant(1, -0.6), Vector::Constant(1, 0.1),
                            Vector::Constant(1, 0.5));
    Vector gu, gv;
    penalty_gradient(pen, u, v, gu, gv);
    CHECK(gu[0] == doctest::Approx(-0.6));
}

TEST_CASE("toy x1 derivative by hand") {
    auto pen = assemble_penalty(make_toy_unconstrained().problem, 10.0);
    const auto &L = pen.base.layout;
    const Vector u = L.primal(Vector::Constant(1, 1), Vector::Zero(1), Vector::Zero(1));
    const Vector v = L.dual(Vector::Zero(1), Vector::Constant(1, 2), Vector::Zero(1));
    Vector gu, gv;
    penalty_gradient(pen, u, v, gu, gv);
    CHECK(gu[0] == doctest::Approx(20 + 2 * (1 - 0.3)));
}

TEST_CASE("one gradient costs one f1 call and two ftilde1 calls") {
    auto pen = assemble_penalty(make_toy_unconstrained().problem, 2.0);
    GradientOracle o(pen.base);
    Vector gu, gv;
    penalty_gradient(pen, o, Vector::Zero(3), Vector::Zero(3), gu, gv);
    CHECK(o.counter().calls_f1 == 1);
    CHECK(o.counter().calls_ftilde1 == 2);
}

TEST_CASE("assembled gradient matches finite differences") {
    std::mt19937_64 rng(2);
    check_fd(assemble_penalty(make_toy_unconstrained().problem, 7.0), rng, 20);
    check_fd(assemble_penalty(fixture::bilinear(), 4.0), rng, 20);
    check_fd(assemble_penalty(fixture::planar(), 12.0), rng, 20);
}

TEST_CASE("subproblem constants") {
    auto pen = assemble_penalty(fixture::bilinear(), 1.0);
    pen.L_grad_P1 = 5;
    const auto sub = build_subproblem(pen, Vector::Zero(3), Vector::Zero(3), 0.1, 4.0);
    CHECK(sub.rho1 == doctest::Approx(10));
    CHECK(sub.rho2 == doctest::Approx(0.0125));
    CHECK(sub.sigma_x == doctest::Approx(5));
    CHECK(sub.sigma_y == doctest::Approx(0.0125));
    CHECK(sub.L_grad_hbar == doctest::Approx(15));
}

TEST_CASE("subproblem gradient at the centers is the penalty gradient") {
    auto pen = assemble_penalty(make_toy_unconstrained().problem, 5.0);
    const Vector cu = Eigen::Vector3d(0.1, -0.4, 0.3), cv = Eigen::Vector3d(0.2, 0.5, -0.1);
    const auto sub = build_subproblem(pen, cu, cv, 0.1, pen.base.D2());
    GradientOracle o(pen.base);
    auto model = make_saddle_model(sub, o);
    Vector gu, gv, pu, pv;
    model.gradient(cu, cv, gu, gv);
    penalty_gradient(pen, cu, cv, pu, pv);
    CHECK((gu - pu).norm() < 1e-14);
    CHECK((gv - pv).norm() < 1e-14);
}

TEST_CASE("subproblem is strongly convex in the primal block") {
    auto pen = assemble_penalty(make_toy_unconstrained().problem, 20.0);
    std::mt19937_64 rng(4);
    std::normal_distribution<double> N(0, 1);
    const Vector cu = Vector::Zero(3), cv = Vector::Zero(3);
    const auto sub = build_subproblem(pen, cu, cv, 0.05, pen.base.D2());
    for (int t = 0; t < 30; ++t) {
        const Vector u = sample_domain(pen.prox_primal, rng), v = sample_domain(pen.prox_dual, rng);
        Vector d(3);
        for (int i = 0; i < 3; ++i)
            d[i] = N(rng);
        d.normalize();
        const double h = 1e-3;
        const double curv = (subproblem_hbar(sub, u + h * d, v) - 2 * subproblem_hbar(sub, u, v) +
                             subproblem_hbar(sub, u - h * d, v)) /
                            (h * h);
        CHECK(curv >= sub.sigma_x * (1 - 1e-6));
    }
}

TEST_CASE("penalty variance combines both oracles") {
    auto pen = assemble_penalty(make_toy_unconstrained().problem, 3.0);
    auto o = make_noisy(pen.base, 0.5, 0.2, 1);
    CHECK(penalty_variance(pen, o) == doctest::Approx(3 * 0.25 + 6 * 9 * 0.04));
}

TEST_CASE("rho must be positive") {
    CHECK_THROWS_AS(assemble_penalty(fixture::bilinear(), 0.0), std::invalid_argument);
}

}
