#include "bimax/penalty.hpp"

#include <algorithm>
#include <stdexcept>

namespace bimax {

namespace {

template <class F1, class Ft1>
void route_gradient(const PenaltyProblem &pen, F1 &&grad_f1, Ft1 &&grad_ft1, const Vector &u,
                    const Vector &v, Vector &gu, Vector &gv) {
    const auto &L = pen.base.layout;
    const Vector x1 = L.x1(u), y1 = L.y1(u), y2 = L.y2(u);
    const Vector x2 = L.x2(v), z1 = L.z1(v), z2 = L.z2(v);
    const double rho = pen.rho;

    const Vector g = grad_f1(x1, x2, y1, y2);      // (x1, x2, y1, y2)
    const Vector ga = grad_ft1(x1, y1, z2);        // at (x1, y1, z2)
    const Vector gb = grad_ft1(x1, z1, y2);        // at (x1, z1, y2)
    const Index nx1 = L.n_x1, nx2 = L.n_x2, ny1 = L.n_y1, ny2 = L.n_y2;

    gu.resize(L.primal_size());
    gv.resize(L.dual_size());
    L.x1(gu) = g.segment(0, nx1) + rho * (ga.segment(0, nx1) - gb.segment(0, nx1));
    L.y1(gu) = g.segment(nx1 + nx2, ny1) + rho * ga.segment(nx1, ny1);
    L.y2(gu) = g.segment(nx1 + nx2 + ny1, ny2) - rho * gb.segment(nx1 + ny1, ny2);
    L.x2(gv) = g.segment(nx1, nx2);
    L.z1(gv) = -rho * gb.segment(nx1, ny1);
    L.z2(gv) = rho * ga.segment(nx1 + ny1, ny2);
}

} // namespace

PenaltyProblem assemble_penalty(const BilevelMinimaxProblem &problem, double rho) {
    if (!(rho > 0))
        throw std::invalid_argument("assemble_penalty: rho must be positive");
    problem.validate();
    PenaltyProblem pen;
    pen.base = problem;
    pen.rho = rho;
    pen.L_grad_P1 = problem.L_grad_f1 + 2 * rho * problem.L_grad_ftilde1;
    pen.prox_primal = ProxFunction::separable_sum(
        {problem.prox_f2, problem.prox_ftilde2, problem.prox_ftilde3}, {1.0, rho, rho});
    pen.prox_dual = ProxFunction::separable_sum(
        {problem.prox_f3, problem.prox_ftilde2, problem.prox_ftilde3}, {1.0, rho, rho});
    return pen;
}

double penalty_P1(const PenaltyProblem &pen, const Vector &u, const Vector &v) {
    const auto &L = pen.base.layout;
    const Vector x1 = L.x1(u), y1 = L.y1(u), y2 = L.y2(u);
    const Vector x2 = L.x2(v), z1 = L.z1(v), z2 = L.z2(v);
    return pen.base.eval_f1(x1, x2, y1, y2) +
           pen.rho * (pen.base.eval_ftilde1(x1, y1, z2) - pen.base.eval_ftilde1(x1, z1, y2));
}

double penalty_value(const PenaltyProblem &pen, const Vector &u, const Vector &v) {
    return penalty_P1(pen, u, v) + prox_value(pen.prox_primal, u) - prox_value(pen.prox_dual, v);
}

void penalty_gradient(const PenaltyProblem &pen, GradientOracle &oracle, const Vector &u,
                      const Vector &v, Vector &gu, Vector &gv) {
    route_gradient(
        pen,
        [&](const Vector &a, const Vector &b, const Vector &c, const Vector &d) {
            return oracle.grad_f1(a, b, c, d);
        },
        [&](const Vector &a, const Vector &b, const Vector &c) {
            return oracle.grad_ftilde1(a, b, c);
        },
        u, v, gu, gv);
}

void penalty_gradient(const PenaltyProblem &pen, const Vector &u, const Vector &v, Vector &gu,
                      Vector &gv) {
    route_gradient(pen, pen.base.grad_f1, pen.base.grad_ftilde1, u, v, gu, gv);
}

ScscSubproblem build_subproblem(const PenaltyProblem &pen, const Vector &center_primal,
                                const Vector &center_dual, double eps, double D2) {
    if (!(eps > 0) || !(D2 > 0))
        throw std::invalid_argument("build_subproblem: eps and D2 must be positive");
    ScscSubproblem sub;
    sub.penalty = &pen;
    sub.rho1 = 2 * pen.L_grad_P1;
    sub.rho2 = eps / (2 * D2);
    sub.center_primal = center_primal;
    sub.center_dual = center_dual;
    sub.sigma_x = pen.L_grad_P1;
    sub.sigma_y = eps / (2 * D2);
    sub.L_grad_hbar = pen.L_grad_P1 + std::max(sub.rho1, sub.rho2);
    return sub;
}

SaddleModel make_saddle_model(const ScscSubproblem &sub, GradientOracle &oracle) {
    SaddleModel m;
    m.p = sub.penalty->prox_primal;
    m.q = sub.penalty->prox_dual;
    m.sigma_x = sub.sigma_x;
    m.sigma_y = sub.sigma_y;
    m.L_grad = sub.L_grad_hbar;
    const ScscSubproblem *s = &sub;
    GradientOracle *o = &oracle;
    m.gradient = [s, o](const Vector &u, const Vector &v, Vector &gu, Vector &gv) {
        penalty_gradient(*s->penalty, *o, u, v, gu, gv);
        gu += s->rho1 * (u - s->center_primal);
        gv -= s->rho2 * (v - s->center_dual);
    };
    return m;
}

double subproblem_hbar(const ScscSubproblem &sub, const Vector &u, const Vector &v) {
    return penalty_P1(*sub.penalty, u, v) + 0.5 * sub.rho1 * (u - sub.center_primal).squaredNorm() -
           0.5 * sub.rho2 * (v - sub.center_dual).squaredNorm();
}

OptFomResult optfom(double eps_bar, const Vector &x0, const Vector &y0, const ScscSubproblem &sub,
                    GradientOracle &oracle, const OptFomOptions &options) {
    return optfom(eps_bar, x0, y0, make_saddle_model(sub, oracle), options);
}

double penalty_variance(const PenaltyProblem &pen, const GradientOracle &oracle) {
    return 3 * oracle.variance_f() + 6 * pen.rho * pen.rho * oracle.variance_ftilde();
}

SapdParams sapd_params(double eps_hat, const ScscSubproblem &sub, double delta_sq,
                       std::int64_t T_ceiling) {
    return sapd_params(eps_hat, sub.sigma_x, sub.sigma_y, sub.L_grad_hbar, delta_sq,
                       domain_diameter(sub.penalty->prox_primal),
                       domain_diameter(sub.penalty->prox_dual), T_ceiling);
}

SapdResult sapd(double eps_hat, const Vector &x0, const Vector &y0, const ScscSubproblem &sub,
                GradientOracle &oracle, std::int64_t T_ceiling) {
    auto P = sapd_params(eps_hat, sub, penalty_variance(*sub.penalty, oracle), T_ceiling);
    return sapd(P, x0, y0, make_saddle_model(sub, oracle));
}

} // namespace bimax
