#pragma once

#include "bimax/optfom.hpp"
#include "bimax/problem.hpp"
#include "bimax/sapd.hpp"

namespace bimax {

/// P_rho(u, v) = P1(u, v) + P2(u) - P3(v) with u = (x1, y1, y2), v = (x2, z1, z2).
struct PenaltyProblem {
    BilevelMinimaxProblem base;
    double rho = 0;
    double L_grad_P1 = 0;
    /// f2 on x1, rho f~2 on y1, rho f~3 on y2.
    ProxFunction prox_primal;
    /// f3 on x2, rho f~2 on z1, rho f~3 on z2.
    ProxFunction prox_dual;
};

PenaltyProblem assemble_penalty(const BilevelMinimaxProblem &problem, double rho);

double penalty_P1(const PenaltyProblem &penalty, const Vector &u, const Vector &v);
/// P1 + P2 - P3, which equals f + rho (f~(x1, y1, z2) - f~(x1, z1, y2)).
double penalty_value(const PenaltyProblem &penalty, const Vector &u, const Vector &v);

/// Gradient of P1 from one f1 call and two f~1 calls.
void penalty_gradient(const PenaltyProblem &penalty, GradientOracle &oracle, const Vector &u,
                      const Vector &v, Vector &gu, Vector &gv);
/// Uncounted exact gradient.
void penalty_gradient(const PenaltyProblem &penalty, const Vector &u, const Vector &v,
                      Vector &gu, Vector &gv);

/// min_u max_v P1(u,v) + P2(u) - P3(v) + rho1/2 ||u - center_primal||^2
///                                      - rho2/2 ||v - center_dual||^2.
struct ScscSubproblem {
    const PenaltyProblem *penalty = nullptr;
    double rho1 = 0, rho2 = 0;
    Vector center_primal, center_dual;
    double sigma_x = 0, sigma_y = 0, L_grad_hbar = 0;
};

ScscSubproblem build_subproblem(const PenaltyProblem &penalty, const Vector &center_primal,
                                const Vector &center_dual, double eps, double D2);

/// The subproblem as a saddle model whose gradient calls go through oracle.
SaddleModel make_saddle_model(const ScscSubproblem &sub, GradientOracle &oracle);

/// Value of the smooth part h-bar.
double subproblem_hbar(const ScscSubproblem &sub, const Vector &u, const Vector &v);

OptFomResult optfom(double eps_bar, const Vector &x0, const Vector &y0, const ScscSubproblem &sub,
                    GradientOracle &oracle, const OptFomOptions &options = {});

SapdParams sapd_params(double eps_hat, const ScscSubproblem &sub, double delta_sq,
                       std::int64_t T_ceiling = 10'000'000);

SapdResult sapd(double eps_hat, const Vector &x0, const Vector &y0, const ScscSubproblem &sub,
                GradientOracle &oracle, std::int64_t T_ceiling = 10'000'000);

/// Variance bound 3 delta_f^2 + 6 rho^2 delta_f~^2 of the sampled P1 gradient.
double penalty_variance(const PenaltyProblem &penalty, const GradientOracle &oracle);

} // namespace bimax
