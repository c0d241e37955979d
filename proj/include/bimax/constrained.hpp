#pragma once

#include <functional>
#include <optional>

#include "bimax/kkt.hpp"
#include "bimax/problem.hpp"
#include "bimax/trace.hpp"

namespace bimax {

struct ConstraintValue {
    Vector values;
    /// l x (n_x1 + n_y1).
    Matrix jacobian;
};

/// fbar1(x1, y1) = phi(x1) + c_y' y1 and gbar(x1, y1) = G_x x1 + G_y y1 - g0.
struct AffineLowerLevel {
    Vector c_y;
    Matrix G_x, G_y;
    Vector g0;
};

/// min_{x1,y1} f1(x1,y1) + f2(x1)  s.t.  y1 in argmin_z { fbar1(x1,z) + fbar2(z) | gbar(x1,z) <= 0 }.
struct ConstrainedBilevelProblem {
    Index n_x1 = 0, n_y1 = 0, n_con = 0;

    std::function<double(const Vector &, const Vector &)> eval_f1;
    /// Gradient over (x1, y1), concatenated.
    std::function<Vector(const Vector &, const Vector &)> grad_f1;
    std::function<double(const Vector &, const Vector &)> eval_fbar1;
    std::function<Vector(const Vector &, const Vector &)> grad_fbar1;
    std::function<ConstraintValue(const Vector &, const Vector &)> g_bar;

    ProxFunction prox_f2, prox_fbar2;

    double L_fbar = 0, L_grad_f1 = 0, L_grad_fbar1 = 0, L_grad_gbar = 0, L_gbar = 0;
    /// Slater margin G: gbar(x1, slater_point(x1)) <= -G for every x1.
    double slater_margin = 0;
    std::function<Vector(const Vector &)> slater_point;
    /// Replaces 2 L_fbar D_Y1 / G when set.
    std::optional<double> dual_bound_override;
    double f_low = 0;
    std::optional<AffineLowerLevel> affine;

    double D_Y1() const;
    /// B = 2 L_fbar D_Y1 / G unless overridden.
    double dual_bound() const;
    /// Throws std::invalid_argument on inconsistent data, including a failed sampled
    /// midpoint-convexity check of gbar in y1.
    void validate() const;
};

/// Lagrangian form with ftilde1 = fbar1 + y2' gbar and ftilde3 the indicator of [0,B]^l.
BilevelMinimaxProblem reformulate(const ConstrainedBilevelProblem &cp);

/// fbar*(x1) = min { fbar1(x1,y1) + fbar2(y1) | gbar(x1,y1) <= 0 }. Exact for affine lower
/// levels, otherwise through the Lagrangian saddle over Y1 x [0,B]^l.
ValueEstimate lower_optimal_value(const ConstrainedBilevelProblem &cp, const Vector &x1,
                                  double tol = 1e-8);

/// fbar(x1,y1) - fbar*(x1); may be slightly negative within tolerance.
double lower_suboptimality(const ConstrainedBilevelProblem &cp, const Vector &x1,
                           const Vector &y1, double tol = 1e-8);
double constraint_violation(const ConstrainedBilevelProblem &cp, const Vector &x1,
                            const Vector &y1);

/// eps <= min(rho L_fbar / 4, rho G / 4).
bool gap_bound_precondition_holds(const ConstrainedBilevelProblem &cp, double eps, double rho);

/// Residuals with lambda_bar = y2 and lambda = rho z2. When eps > 0 the precondition
/// is checked and a warning attached on failure.
ConstrainedKktReport constrained_kkt(const ConstrainedBilevelProblem &cp, const Vector &x1,
                                     const Vector &y1, const Vector &z1, const Vector &y2,
                                     const Vector &z2, double rho, double eps = 0,
                                     double ref_tol = 1e-8);
/// Same, reading the blocks from reformulated primal (x1,y1,y2) and dual (z1,z2) vectors.
ConstrainedKktReport constrained_kkt(const ConstrainedBilevelProblem &cp, const Vector &primal,
                                     const Vector &dual, double rho, double eps = 0,
                                     double ref_tol = 1e-8);

/// Trace metrics in the original variables: f(x1,y1), fbar - fbar*, ||[gbar]_+|| and ||gbar||.
TraceMetrics constrained_metrics(const ConstrainedBilevelProblem &cp, double tol = 1e-8);

} // namespace bimax
