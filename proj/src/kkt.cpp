#include "bimax/kkt.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bimax {

namespace {

PenaltyProblem unchecked_penalty(const BilevelMinimaxProblem &problem, double rho) {
    PenaltyProblem pen;
    pen.base = problem;
    pen.rho = rho;
    pen.L_grad_P1 = problem.L_grad_f1 + 2 * rho * problem.L_grad_ftilde1;
    pen.prox_primal =
        ProxFunction::separable_sum({problem.prox_f2, problem.prox_ftilde2, problem.prox_ftilde3});
    pen.prox_dual =
        ProxFunction::separable_sum({problem.prox_f3, problem.prox_ftilde2, problem.prox_ftilde3});
    return pen;
}

} // namespace

double ConstrainedKktReport::max_residual() const {
    return std::max({stationarity_xy, stationarity_z1, z1_infeasibility, z1_complementarity,
                     y1_suboptimality, y1_infeasibility, y1_complementarity});
}

double KktReport::max_residual() const {
    return std::max({primal_block_residual, x2_residual, z1_residual, z2_residual});
}

std::pair<double, double> pd_stationarity(const PenaltyProblem &pen, const Vector &primal,
                                          const Vector &dual) {
    Vector gu, gv;
    penalty_gradient(pen, primal, dual, gu, gv);
    return {normal_cone_distance(pen.prox_primal, primal, gu),
            normal_cone_distance(pen.prox_dual, dual, -gv)};
}

KktReport kkt_report(const BilevelMinimaxProblem &problem, double rho, const Vector &primal,
                     const Vector &dual, double gap_tol) {
    if (!(rho >= 0))
        throw std::invalid_argument("kkt_report: rho must be nonnegative");
    const auto &L = problem.layout;
    if (primal.size() != L.primal_size() || dual.size() != L.dual_size())
        throw std::invalid_argument("kkt_report: block sizes do not match the layout");
    const PenaltyProblem pen = unchecked_penalty(problem, rho);
    Vector gu, gv;
    penalty_gradient(pen, primal, dual, gu, gv);

    KktReport r;
    r.rho_used = rho;
    r.primal_block_residual = normal_cone_distance(pen.prox_primal, primal, gu);
    const Vector mg = -gv;
    r.x2_residual = normal_cone_distance(problem.prox_f3, L.x2(dual), L.x2(mg));
    r.z1_residual = normal_cone_distance(problem.prox_ftilde2, L.z1(dual), L.z1(mg));
    r.z2_residual = normal_cone_distance(problem.prox_ftilde3, L.z2(dual), L.z2(mg));
    r.dual_block_residual = std::sqrt(r.x2_residual * r.x2_residual +
                                      r.z1_residual * r.z1_residual +
                                      r.z2_residual * r.z2_residual);
    auto gap = lower_gap_estimate(problem, L.x1(primal), L.y1(primal), L.y2(primal), gap_tol);
    r.feasibility_gap = gap.value;
    r.feasibility_gap_error = gap.error_bound;
    return r;
}

KktReport kkt_report(const BilevelMinimaxProblem &problem, const PenaltyProblem &penalty,
                     const Vector &primal, const Vector &dual, double gap_tol) {
    return kkt_report(problem, penalty.rho, primal, dual, gap_tol);
}

double nearly_kkt_distance(const Vector &candidate, const Vector &certified) {
    if (candidate.size() != certified.size())
        throw std::invalid_argument("nearly_kkt_distance: size mismatch");
    return (candidate - certified).norm();
}

} // namespace bimax
