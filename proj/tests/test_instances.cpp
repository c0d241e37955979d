#include <doctest.h>

#include "bimax/instances.hpp"
#include "bimax/kkt.hpp"

using namespace bimax;

TEST_SUITE("instances") {

TEST_CASE("linear shapes") {
    const auto inst = gen_linear(7, 5, 4, 2);
    CHECK(inst.c.size() == 7);
    CHECK(inst.d.size() == 5);
    CHECK(inst.d_tilde.size() == 5);
    CHECK(inst.A_tilde.rows() == 4);
    CHECK(inst.A_tilde.cols() == 7);
    CHECK(inst.B_tilde.rows() == 4);
    CHECK(inst.B_tilde.cols() == 5);
    CHECK(inst.b_tilde.size() == 4);
    CHECK(inst.active_set.size() == 2);
    CHECK(inst.y_hat.cwiseAbs().maxCoeff() <= 1);
    const auto cp = linear_problem(inst);
    CHECK(cp.dual_bound() == 200);
    const auto P = reformulate(cp);
    CHECK(P.layout.primal_size() == 7 + 5 + 4);
    CHECK(P.layout.dual_size() == 5 + 4);
}

TEST_CASE("planted lower-level certificate holds") {
    for (std::uint64_t s = 0; s < 20; ++s) {
        const auto inst = gen_linear(10, 8, 5, s);
        CHECK(planted_certificate_residual(inst) <= 1e-10);
        for (Index i : inst.active_set)
            CHECK(inst.multipliers[i] >= 0.1);
    }
}

TEST_CASE("generation is deterministic in the seed") {
    const auto a = gen_linear(6, 6, 3, 11), b = gen_linear(6, 6, 3, 11), c = gen_linear(6, 6, 3, 12);
    CHECK(a.c == b.c);
    CHECK(a.B_tilde == b.B_tilde);
    CHECK(a.b_tilde == b.b_tilde);
    CHECK(a.d_tilde == b.d_tilde);
    CHECK(a.c != c.c);
    CHECK_THROWS_AS(gen_linear(0, 2, 2, 1), std::invalid_argument);
    CHECK_THROWS_AS(gen_linear(2, 2, 2, 1, -1), std::invalid_argument);
}

TEST_CASE("toy instances") {
    const auto u = make_toy_unconstrained();
    CHECK(u.info.variant == ToyVariant::UnconstrainedSaddle);
    CHECK(u.problem.layout.primal_size() == 3);
    auto [p, d] = toy_unconstrained_kkt(0);
    CHECK(p[0] == doctest::Approx(0.3));
    CHECK(p[1] == doctest::Approx(0.0));
    const auto c = make_toy_constrained();
    CHECK(c.info.variant == ToyVariant::ConstrainedScalar);
    CHECK(c.upper_value == 0.25);
}

}
