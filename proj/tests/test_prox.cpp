#include <doctest.h>

#include <cmath>
#include <random>

#include "bimax/prox.hpp"
#include "oracles.hpp"

using namespace bimax;

TEST_SUITE("prox") {

TEST_CASE("box projection clamps componentwise") {
    auto box = ProxFunction::box(3, -1, 1);
    Vector v(3);
    v << 2, -3, 0.5;
    CHECK((prox(box, v, 1.0) - Eigen::Vector3d(1, -1, 0.5)).norm() == 0);
    CHECK(prox(ProxFunction::box(2, -1, 1), Vector::Zero(2), 7.0).norm() == 0);
}

TEST_CASE("truncated simplex matches grid search") {
    auto ts = ProxFunction::truncated_simplex(3, 0.5);
    const Vector v = Eigen::Vector3d(1, 1, 0);
    const Vector z = prox(ts, v, 1.0);
    CHECK((z - Eigen::Vector3d(0.5, 0.5, 0)).norm() < 1e-12);
    CHECK((z - oracle::grid_truncated_simplex_3d(v, 0.5, 1e-3)).norm() < 2e-3);

    std::mt19937_64 rng(3);
    std::normal_distribution<double> N(0, 1);
    for (double cap : {0.4, 0.7, 1.0}) {
        auto fn = ProxFunction::truncated_simplex(3, cap);
        for (int t = 0; t < 20; ++t) {
            const Vector w = Eigen::Vector3d(N(rng), N(rng), N(rng));
            const Vector p = prox(fn, w, 0.3);
            CHECK(std::abs(p.sum() - 1) < 1e-10);
            CHECK(p.minCoeff() >= 0);
            CHECK(p.maxCoeff() <= cap + 1e-12);
            CHECK((p - oracle::grid_truncated_simplex_3d(w, cap, 2e-3)).norm() < 4e-3);
        }
    }
}

TEST_CASE("truncated simplex projection is idempotent and nonexpansive") {
    auto fn = ProxFunction::truncated_simplex(6, 0.3);
    std::mt19937_64 rng(5);
    std::normal_distribution<double> N(0, 2);
    for (int t = 0; t < 50; ++t) {
        Vector a(6), b(6);
        for (int i = 0; i < 6; ++i) {
            a[i] = N(rng);
            b[i] = N(rng);
        }
        const Vector pa = prox(fn, a, 1.0), pb = prox(fn, b, 1.0);
        CHECK((prox(fn, pa, 1.0) - pa).norm() < 1e-12);
        CHECK((pa - pb).norm() <= (a - b).norm() + 1e-12);
    }
}

TEST_CASE("diameters") {
    CHECK(domain_diameter(ProxFunction::box(4, -1, 1)) == doctest::Approx(4.0));
    CHECK(domain_diameter(ProxFunction::box(1, 0, 200)) == doctest::Approx(200.0));
    CHECK(domain_diameter(ProxFunction::truncated_simplex(2, 1)) == doctest::Approx(std::sqrt(2.0)));
    // With cap 0.5 in 4-D the farthest vertices are (.5,.5,0,0) and (0,0,.5,.5).
    CHECK(domain_diameter(ProxFunction::truncated_simplex(4, 0.5)) == doctest::Approx(1.0));
    auto sum = ProxFunction::separable_sum({ProxFunction::box(1, 0, 3), ProxFunction::box(1, 0, 4)});
    CHECK(domain_diameter(sum) == doctest::Approx(5.0));
}

TEST_CASE("normal cone distance") {
    auto b1 = ProxFunction::box(1, -1, 1);
    CHECK(normal_cone_distance(b1, Vector::Ones(1), Vector::Constant(1, -2)) == 0);
    CHECK(normal_cone_distance(b1, Vector::Zero(1), Vector::Constant(1, 3)) ==
          doctest::Approx(3.0));
    auto b2 = ProxFunction::box(2, -1, 1);
    const Vector x = Eigen::Vector2d(1, 0), g = Eigen::Vector2d(0.5, -0.5);
    CHECK(normal_cone_distance(b2, x, g) == doctest::Approx(std::sqrt(0.5)));
}

TEST_CASE("normal cone distance agrees with a grid over 2-D fixtures") {
    const std::vector<Vector> square = {Eigen::Vector2d(-1, -1), Eigen::Vector2d(1, -1),
                                        Eigen::Vector2d(1, 1), Eigen::Vector2d(-1, 1)};
    const std::vector<Vector> simplex = {Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 1)};
    auto b2 = ProxFunction::box(2, -1, 1);
    auto s2 = ProxFunction::truncated_simplex(2, 1);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> U(-2, 2);
    const std::vector<Vector> box_points = {Eigen::Vector2d(1, 1), Eigen::Vector2d(-1, 0.3),
                                            Eigen::Vector2d(0.2, -1), Eigen::Vector2d(0.1, 0.4)};
    for (const auto &x : box_points)
        for (int t = 0; t < 5; ++t) {
            const Vector g = Eigen::Vector2d(U(rng), U(rng));
            CHECK(std::abs(normal_cone_distance(b2, x, g) -
                           oracle::grid_normal_cone_distance(square, x, g, 3, 2e-3)) < 1e-3);
        }
    for (const Vector &x : {Vector(Eigen::Vector2d(1, 0)), Vector(Eigen::Vector2d(0.3, 0.7))})
        for (int t = 0; t < 5; ++t) {
            const Vector g = Eigen::Vector2d(U(rng), U(rng));
            CHECK(std::abs(normal_cone_distance(s2, x, g) -
                           oracle::grid_normal_cone_distance(simplex, x, g, 3, 2e-3)) < 1e-3);
        }
}

TEST_CASE("separable sum scales each block") {
    auto sum = ProxFunction::separable_sum({ProxFunction::box(2, 0, 1), ProxFunction::zero(1)},
                                           {1.0, 5.0});
    CHECK(sum.dim() == 3);
    const Vector v = Eigen::Vector3d(2, -1, 4);
    CHECK((prox(sum, v, 0.5) - Eigen::Vector3d(1, 0, 4)).norm() == 0);
    CHECK(in_domain(sum, Eigen::Vector3d(0.5, 0.5, 100)));
    CHECK_FALSE(in_domain(sum, Eigen::Vector3d(1.5, 0.5, 0)));
}

TEST_CASE("sampled points lie in the domain") {
    std::mt19937_64 rng(1);
    auto fn = ProxFunction::separable_sum(
        {ProxFunction::box(3, -2, 1), ProxFunction::truncated_simplex(5, 0.25)});
    for (int t = 0; t < 20; ++t)
        CHECK(in_domain(fn, sample_domain(fn, rng)));
}

TEST_CASE("invalid construction throws") {
    CHECK_THROWS_AS(ProxFunction::truncated_simplex(3, 0.2), std::invalid_argument);
    CHECK_THROWS_AS(ProxFunction::box(Eigen::Vector2d(0, 1), Eigen::Vector2d(1, 0)),
                    std::invalid_argument);
}

}
