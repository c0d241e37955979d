#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "bimax/constrained.hpp"
#include "bimax/problem.hpp"

namespace bimax {

/// min c'x + d'y over x in [-1,1]^n with y in argmin { d~'z | A~x + B~z <= b~, z in [-1,1]^m }.
struct LinearInstance {
    Index n = 0, m = 0, l = 0;
    Vector c, d, d_tilde;
    Matrix A_tilde, B_tilde;
    Vector b_tilde;
    /// Planted lower-level optimum at x = 0, with its multipliers.
    Vector y_hat, multipliers;
    std::vector<Index> active_set;
    double B_dual = 200;
    std::uint64_t seed = 0;
    int attempts = 1;
};

/// Entries of A~, B~ have standard deviation 0.01 and those of y_hat 0.1 before
/// projection onto [-1,1]^m. Throws after 100 degenerate draws.
LinearInstance gen_linear(Index n, Index m, Index l, std::uint64_t seed, double B_dual = 200);

/// Largest violation among stationarity, primal/dual feasibility and complementary
/// slackness of y_hat at x = 0.
double planted_certificate_residual(const LinearInstance &inst);

ConstrainedBilevelProblem linear_problem(const LinearInstance &inst);

enum class ToyVariant { UnconstrainedSaddle, ConstrainedScalar, GroupDro };

struct ToyInstance {
    ToyVariant variant = ToyVariant::UnconstrainedSaddle;
    std::optional<Vector> analytic_solution;
};

struct ToyUnconstrained {
    BilevelMinimaxProblem problem;
    /// (x1, y1, y2) = (0.15, 0.15, 0).
    Vector analytic_kkt;
    ToyInstance info;
};

/// f = (x1 - 0.3)^2 + y1^2 - x2^2, f~ = (y1 - x1)^2/2 - y2^2/2, all on [-1,1].
ToyUnconstrained make_toy_unconstrained();

/// Exact KKT point of the penalized toy at penalty rho: primal (x1,y1,y2), dual (x2,z1,z2).
/// Tends to the analytic point as rho grows.
std::pair<Vector, Vector> toy_unconstrained_kkt(double rho);

struct ToyConstrained {
    ConstrainedBilevelProblem problem;
    /// (x1, y1) = (0.5, 0.5).
    Vector analytic_solution;
    double upper_value = 0.25;
    ToyInstance info;
};

/// X1 = [0,0.5], Y1 = [-1,1], f = (y1 - 1)^2, fbar = z1, gbar = x1 - z1, G = 0.5.
ToyConstrained make_toy_constrained();

/// KKT point of the reformulated toy at penalty rho >= 1: primal (x1,y1,y2) = (0.5,0.5,1),
/// dual (z1,z2) = (0.5, 1 - 1/rho).
std::pair<Vector, Vector> toy_constrained_kkt(double rho);

} // namespace bimax
