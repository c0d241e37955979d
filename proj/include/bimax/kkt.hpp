#pragma once

#include <optional>
#include <string>
#include <utility>

#include "bimax/penalty.hpp"
#include "bimax/problem.hpp"

namespace bimax {

/// Residuals of an approximate KKT point of a bilevel problem with a convex
/// inequality-constrained lower level, with multipliers lambda = rho z2 and
/// lambda_bar = y2.
struct ConstrainedKktReport {
    double stationarity_xy = 0;
    double stationarity_z1 = 0;
    double z1_infeasibility = 0;
    double z1_complementarity = 0;
    double y1_suboptimality = 0;
    double y1_infeasibility = 0;
    double y1_complementarity = 0;
    Vector lambda, lambda_bar;
    /// Set when eps exceeds min(rho L_fbar / 4, rho G / 4).
    std::optional<std::string> warning;

    double max_residual() const;
};

struct KktReport {
    double primal_block_residual = 0;
    double x2_residual = 0, z1_residual = 0, z2_residual = 0;
    double dual_block_residual = 0;
    /// p(x1, y1) - d(x1, y2).
    double feasibility_gap = 0;
    double feasibility_gap_error = 0;
    double rho_used = 0;
    std::optional<ConstrainedKktReport> constrained;

    /// Largest stationarity residual (feasibility gap excluded).
    double max_residual() const;
};

/// (dist(0, grad_u P1 + dP2(u)), dist(0, -grad_v P1 + dP3(v))).
std::pair<double, double> pd_stationarity(const PenaltyProblem &penalty, const Vector &primal,
                                          const Vector &dual);

/// Residuals of the penalized KKT conditions at penalty parameter rho >= 0.
KktReport kkt_report(const BilevelMinimaxProblem &problem, double rho, const Vector &primal,
                     const Vector &dual, double gap_tol = 1e-8);
KktReport kkt_report(const BilevelMinimaxProblem &problem, const PenaltyProblem &penalty,
                     const Vector &primal, const Vector &dual, double gap_tol = 1e-8);

double nearly_kkt_distance(const Vector &candidate_primal, const Vector &certified_primal);

} // namespace bimax
