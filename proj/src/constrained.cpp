#include "bimax/constrained.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "bimax/box_lp.hpp"
#include "bimax/reference.hpp"

namespace bimax {

namespace {

Vector positive_part(const Vector &v) { return v.cwiseMax(0.0); }

bool is_box(const ProxFunction &f) { return f.kind() == ProxFunction::Kind::BoxIndicator; }

void check_convexity(const ConstrainedBilevelProblem &cp) {
    if (cp.n_con == 0)
        return;
    std::mt19937_64 rng(0x5eed);
    for (int s = 0; s < 16; ++s) {
        const Vector x1 = sample_domain(cp.prox_f2, rng);
        const Vector a = sample_domain(cp.prox_fbar2, rng), b = sample_domain(cp.prox_fbar2, rng);
        const Vector ga = cp.g_bar(x1, a).values, gb = cp.g_bar(x1, b).values;
        const Vector gm = cp.g_bar(x1, 0.5 * (a + b)).values;
        const double slack = 1e-9 * (1 + ga.cwiseAbs().maxCoeff() + gb.cwiseAbs().maxCoeff());
        if (((gm - 0.5 * (ga + gb)).array() > slack).any())
            throw std::invalid_argument("constrained: gbar fails the midpoint convexity check");
    }
}

} // namespace

double ConstrainedBilevelProblem::D_Y1() const { return domain_diameter(prox_fbar2); }

double ConstrainedBilevelProblem::dual_bound() const {
    if (dual_bound_override)
        return *dual_bound_override;
    return 2 * L_fbar * D_Y1() / slater_margin;
}

void ConstrainedBilevelProblem::validate() const {
    if (n_x1 < 1 || n_y1 < 1 || n_con < 0)
        throw std::invalid_argument("constrained: need n_x1 >= 1, n_y1 >= 1, n_con >= 0");
    if (prox_f2.dim() != n_x1 || prox_fbar2.dim() != n_y1)
        throw std::invalid_argument("constrained: prox domains do not match dimensions");
    if (!eval_f1 || !grad_f1 || !eval_fbar1 || !grad_fbar1 || (n_con > 0 && !g_bar))
        throw std::invalid_argument("constrained: missing oracle");
    if (!(slater_margin > 0))
        throw std::invalid_argument("constrained: Slater margin G must be positive");
    if (!(L_fbar >= 0) || !(L_grad_f1 >= 0) || !(L_grad_fbar1 >= 0) || !(L_grad_gbar >= 0) ||
        !(L_gbar >= 0) || !std::isfinite(f_low))
        throw std::invalid_argument("constrained: missing or invalid constants");
    const double B = dual_bound();
    if (!(B > 0) || !std::isfinite(B))
        throw std::invalid_argument("constrained: dual bound B must be finite and positive");
    if (affine) {
        const auto &a = *affine;
        if (a.c_y.size() != n_y1 || a.G_x.rows() != n_con || a.G_x.cols() != n_x1 ||
            a.G_y.rows() != n_con || a.G_y.cols() != n_y1 || a.g0.size() != n_con)
            throw std::invalid_argument("constrained: affine data has wrong shape");
    }
    check_convexity(*this);
}

BilevelMinimaxProblem reformulate(const ConstrainedBilevelProblem &cp) {
    cp.validate();
    const Index nx = cp.n_x1, ny = cp.n_y1, l = cp.n_con;
    const double B = cp.dual_bound();

    BilevelMinimaxProblem p;
    p.layout = {nx, 0, ny, l};
    auto f1 = cp.eval_f1;
    auto gf1 = cp.grad_f1;
    p.eval_f1 = [f1](const Vector &x1, const Vector &, const Vector &y1, const Vector &) {
        return f1(x1, y1);
    };
    p.grad_f1 = [gf1, nx, ny, l](const Vector &x1, const Vector &, const Vector &y1,
                                 const Vector &) {
        Vector g = Vector::Zero(nx + ny + l);
        g.head(nx + ny) = gf1(x1, y1);
        return g;
    };
    auto fb = cp.eval_fbar1;
    auto gfb = cp.grad_fbar1;
    auto gbar = cp.g_bar;
    p.eval_ftilde1 = [fb, gbar, l](const Vector &x1, const Vector &y1, const Vector &y2) {
        double v = fb(x1, y1);
        if (l > 0)
            v += y2.dot(gbar(x1, y1).values);
        return v;
    };
    p.grad_ftilde1 = [gfb, gbar, nx, ny, l](const Vector &x1, const Vector &y1, const Vector &y2) {
        Vector g(nx + ny + l);
        g.head(nx + ny) = gfb(x1, y1);
        if (l > 0) {
            ConstraintValue c = gbar(x1, y1);
            g.head(nx + ny) += c.jacobian.transpose() * y2;
            g.tail(l) = c.values;
        }
        return g;
    };
    p.prox_f2 = cp.prox_f2;
    p.prox_f3 = ProxFunction::zero(0);
    p.prox_ftilde2 = cp.prox_fbar2;
    p.prox_ftilde3 = ProxFunction::box(l, 0.0, B);
    p.L_grad_f1 = cp.L_grad_f1;
    p.L_grad_ftilde1 =
        cp.L_grad_fbar1 + B * std::sqrt(static_cast<double>(l)) * cp.L_grad_gbar + 2 * cp.L_gbar;
    p.f_low = cp.f_low;

    if (cp.affine && is_box(cp.prox_fbar2)) {
        const AffineLowerLevel a = *cp.affine;
        const Vector lo = cp.prox_fbar2.lo(), hi = cp.prox_fbar2.hi();
        const Vector y0 = Vector::Zero(ny);
        ClosedFormPd pd;
        pd.p = [fb, gbar, B, l](const Vector &x1, const Vector &y1) {
            double v = fb(x1, y1);
            if (l > 0)
                v += B * positive_part(gbar(x1, y1).values).sum();
            return v;
        };
        pd.d = [fb, a, lo, hi, y0](const Vector &x1, const Vector &y2) {
            const Vector coef = a.c_y + a.G_y.transpose() * y2;
            double v = fb(x1, y0) + y2.dot(a.G_x * x1 - a.g0);
            for (Index j = 0; j < coef.size(); ++j)
                v += std::min(coef[j] * lo[j], coef[j] * hi[j]);
            return v;
        };
        p.closed_form_pd = pd;
        p.lower_saddle = [a, lo, hi, B](const Vector &x1) {
            auto lp = solve_box_lp(a.c_y, a.G_y, a.g0 - a.G_x * x1, lo, hi);
            if (lp.status != LpStatus::Optimal)
                throw std::runtime_error("lower_saddle: lower-level LP not solved");
            return std::make_pair(lp.z, Vector(lp.lambda.cwiseMin(B)));
        };
    }
    return p;
}

ValueEstimate lower_optimal_value(const ConstrainedBilevelProblem &cp, const Vector &x1,
                                  double tol) {
    if (cp.affine && is_box(cp.prox_fbar2)) {
        const auto &a = *cp.affine;
        const Vector y0 = Vector::Zero(cp.n_y1);
        auto lp = solve_box_lp(a.c_y, a.G_y, a.g0 - a.G_x * x1, cp.prox_fbar2.lo(),
                               cp.prox_fbar2.hi());
        if (lp.status == LpStatus::Infeasible)
            throw std::runtime_error("lower_optimal_value: lower level infeasible");
        const double phi = cp.eval_fbar1(x1, y0);
        return {phi + lp.value, 0, lp.status == LpStatus::Optimal};
    }
    if (cp.n_con == 0) {
        SmoothObjective obj;
        obj.value = [&](const Vector &y) { return cp.eval_fbar1(x1, y); };
        obj.gradient = [&](const Vector &y) {
            return Vector(cp.grad_fbar1(x1, y).tail(cp.n_y1));
        };
        obj.L_grad = cp.L_grad_fbar1;
        return reference_value(obj, Sense::Minimize, cp.prox_fbar2, tol);
    }
    const Index ny = cp.n_y1, l = cp.n_con;
    SaddleObjective obj;
    obj.value = [&](const Vector &y, const Vector &lam) {
        return cp.eval_fbar1(x1, y) + lam.dot(cp.g_bar(x1, y).values);
    };
    obj.gradient = [&](const Vector &y, const Vector &lam) {
        ConstraintValue c = cp.g_bar(x1, y);
        Vector g(ny + l);
        g.head(ny) = cp.grad_fbar1(x1, y).tail(ny) +
                     c.jacobian.rightCols(ny).transpose() * lam;
        g.tail(l) = c.values;
        return g;
    };
    const double B = cp.dual_bound();
    obj.L_grad = cp.L_grad_fbar1 + B * std::sqrt(static_cast<double>(l)) * cp.L_grad_gbar +
                 2 * cp.L_gbar;
    return reference_saddle(obj, cp.prox_fbar2, ProxFunction::box(l, 0.0, B), tol).estimate;
}

double lower_suboptimality(const ConstrainedBilevelProblem &cp, const Vector &x1,
                           const Vector &y1, double tol) {
    return cp.eval_fbar1(x1, y1) + prox_value(cp.prox_fbar2, y1) -
           lower_optimal_value(cp, x1, tol).value;
}

double constraint_violation(const ConstrainedBilevelProblem &cp, const Vector &x1,
                            const Vector &y1) {
    if (cp.n_con == 0)
        return 0;
    return positive_part(cp.g_bar(x1, y1).values).norm();
}

bool gap_bound_precondition_holds(const ConstrainedBilevelProblem &cp, double eps, double rho) {
    return eps <= std::min(rho * cp.L_fbar / 4, rho * cp.slater_margin / 4);
}

ConstrainedKktReport constrained_kkt(const ConstrainedBilevelProblem &cp, const Vector &x1,
                                     const Vector &y1, const Vector &z1, const Vector &y2,
                                     const Vector &z2, double rho, double eps, double ref_tol) {
    const Index nx = cp.n_x1, ny = cp.n_y1, l = cp.n_con;
    if (x1.size() != nx || y1.size() != ny || z1.size() != ny || y2.size() != l ||
        z2.size() != l)
        throw std::invalid_argument("constrained_kkt: block sizes do not match");
    const double B = cp.dual_bound();
    const auto box = ProxFunction::box(l, 0.0, B);
    if (!in_domain(box, y2) || !in_domain(box, z2))
        throw std::invalid_argument("constrained_kkt: multipliers outside [0,B]^l");

    ConstrainedKktReport r;
    r.lambda_bar = y2;
    r.lambda = rho * z2;

    ConstraintValue gy, gz;
    if (l > 0) {
        gy = cp.g_bar(x1, y1);
        gz = cp.g_bar(x1, z1);
    } else {
        gy = {Vector(0), Matrix(0, nx + ny)};
        gz = gy;
    }

    Vector g = cp.grad_f1(x1, y1) + rho * cp.grad_fbar1(x1, y1) +
               gy.jacobian.transpose() * r.lambda;
    const Vector gfz = cp.grad_fbar1(x1, z1);
    const Vector jz = gz.jacobian.transpose() * r.lambda_bar;
    g.head(nx) -= rho * (gfz.head(nx) + jz.head(nx));
    const auto xy_domain = ProxFunction::separable_sum({cp.prox_f2, cp.prox_fbar2});
    Vector xy(nx + ny);
    xy << x1, y1;
    r.stationarity_xy = normal_cone_distance(xy_domain, xy, g);
    r.stationarity_z1 =
        normal_cone_distance(cp.prox_fbar2, z1, rho * (gfz.tail(ny) + jz.tail(ny)));

    r.z1_infeasibility = positive_part(gz.values).norm();
    r.z1_complementarity = std::abs(r.lambda_bar.dot(gz.values));
    r.y1_suboptimality = lower_suboptimality(cp, x1, y1, ref_tol);
    r.y1_infeasibility = positive_part(gy.values).norm();
    r.y1_complementarity = std::abs(r.lambda.dot(gy.values));

    if (eps > 0 && !gap_bound_precondition_holds(cp, eps, rho))
        r.warning = "eps exceeds min(rho L_fbar / 4, rho G / 4); the O(eps) mapping is not "
                    "guaranteed";
    return r;
}

ConstrainedKktReport constrained_kkt(const ConstrainedBilevelProblem &cp, const Vector &primal,
                                     const Vector &dual, double rho, double eps, double ref_tol) {
    const BlockLayout L{cp.n_x1, 0, cp.n_y1, cp.n_con};
    return constrained_kkt(cp, L.x1(primal), L.y1(primal), L.z1(dual), L.y2(primal), L.z2(dual),
                           rho, eps, ref_tol);
}

TraceMetrics constrained_metrics(const ConstrainedBilevelProblem &cp, double tol) {
    return [&cp, tol](const Vector &u, const Vector &, TraceRecord &rec) {
        const Vector x1 = u.head(cp.n_x1), y1 = u.segment(cp.n_x1, cp.n_y1);
        rec.upper_objective = cp.eval_f1(x1, y1) + prox_value(cp.prox_f2, x1);
        rec.lower_optimality_gap = lower_suboptimality(cp, x1, y1, tol);
        if (cp.n_con > 0) {
            const Vector g = cp.g_bar(x1, y1).values;
            rec.infeasibility = positive_part(g).norm();
            rec.infeasibility_raw = g.norm();
        } else {
            rec.infeasibility = rec.infeasibility_raw = 0;
        }
    };
}

} // namespace bimax
