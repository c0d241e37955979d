#include <doctest.h>

#include "bimax/instances.hpp"
#include "bimax/problem.hpp"
#include "fixtures.hpp"

using namespace bimax;

TEST_SUITE("problem") {

TEST_CASE("oracle counts every gradient call once") {
    GradientOracle o(fixture::bilinear());
    const Vector one = Vector::Ones(1);
    o.grad_f1(one, one, one, one);
    o.grad_ftilde1(one, one, one);
    o.grad_ftilde1(one, one, one);
    CHECK(o.counter().calls_f1 == 1);
    CHECK(o.counter().calls_ftilde1 == 2);
    CHECK(o.counter().total() == 3);
}

TEST_CASE("zero noise reproduces the exact oracle bitwise") {
    const auto toy = make_toy_unconstrained();
    auto noisy = make_noisy(toy.problem, 0, 0, 42);
    GradientOracle exact(toy.problem);
    const Vector a = Vector::Constant(1, 0.3), b = Vector::Constant(1, -0.7);
    CHECK((noisy.grad_f1(a, b, a, b).array() == exact.grad_f1(a, b, a, b).array()).all());
    CHECK((noisy.grad_ftilde1(a, b, a).array() == exact.grad_ftilde1(a, b, a).array()).all());
}

TEST_CASE("noise has the requested variance") {
    const auto toy = make_toy_unconstrained();
    auto noisy = make_noisy(toy.problem, 1.0, 0.0, 9);
    const Vector a = Vector::Constant(1, 0.1);
    const Vector g0 = toy.problem.grad_f1(a, a, a, a);
    double s = 0;
    const int n = 10000;
    for (int i = 0; i < n; ++i)
        s += (noisy.grad_f1(a, a, a, a) - g0).squaredNorm();
    const double var = s / n;
    CHECK(var >= 0.9);
    CHECK(var <= 1.1);
}

TEST_CASE("same seed gives the same noise stream") {
    const auto toy = make_toy_unconstrained();
    auto n1 = make_noisy(toy.problem, 0.5, 0.5, 7), n2 = make_noisy(toy.problem, 0.5, 0.5, 7);
    const Vector a = Vector::Constant(1, 0.2);
    for (int i = 0; i < 10; ++i)
        CHECK((n1.grad_ftilde1(a, a, a) - n2.grad_ftilde1(a, a, a)).norm() == 0);
    n1.reset();
    auto n3 = make_noisy(toy.problem, 0.5, 0.5, 7);
    CHECK((n1.grad_f1(a, a, a, a) - n3.grad_f1(a, a, a, a)).norm() == 0);
    CHECK(n1.counter().total() == 1);
}

TEST_CASE("toy gap values") {
    const auto &p = make_toy_unconstrained().problem;
    for (double x : {-0.8, 0.0, 0.4}) {
        const Vector x1 = Vector::Constant(1, x);
        CHECK(std::abs(lower_gap(p, x1, x1, Vector::Zero(1))) < 1e-12);
    }
    CHECK(lower_gap(p, Vector::Zero(1), Vector::Ones(1), Vector::Zero(1)) ==
          doctest::Approx(0.5));
}

TEST_CASE("reference values match the closed forms on the toy") {
    auto p = make_toy_unconstrained().problem;
    auto q = p;
    q.closed_form_pd.reset();
    const Vector x1 = Vector::Constant(1, 0.2), y1 = Vector::Constant(1, -0.5),
                 y2 = Vector::Constant(1, 0.6);
    CHECK(primal_value(q, x1, y1).value == doctest::Approx(primal_value(p, x1, y1).value).epsilon(1e-7));
    CHECK(dual_value(q, x1, y2).value == doctest::Approx(dual_value(p, x1, y2).value).epsilon(1e-7));
    // max over x2 of -x2^2 is attained at 0
    const auto m = max_upper_value(p, x1, y1, y2);
    CHECK(m.value == doctest::Approx(0.01 + 0.25).epsilon(1e-7));
}

TEST_CASE("validation rejects mismatched domains") {
    auto p = fixture::bilinear();
    p.prox_f2 = ProxFunction::box(2, -1, 1);
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    auto q = fixture::bilinear();
    q.prox_f3 = ProxFunction::zero(1);
    CHECK_THROWS_AS(q.validate(), std::invalid_argument);
}

}
