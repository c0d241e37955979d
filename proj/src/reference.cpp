#include "bimax/reference.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>


namespace bimax {

ReferenceSolution reference_solve(const SmoothObjective &objective, Sense sense,
                                  const ProxFunction &domain, double tol,
                                  std::int64_t max_iterations) {
    if (!(tol > 0))
        throw std::invalid_argument("reference_solve: tol must be positive");
    const double diam = domain_diameter(domain);
    if (!std::isfinite(diam))
        throw std::invalid_argument("reference_solve: unbounded domain");
    const double sign = sense == Sense::Minimize ? 1.0 : -1.0;
    const Vector center = domain_center(domain);

    ReferenceSolution sol;
    if (diam == 0 || domain.dim() == 0) {
        sol.argopt = prox(domain, center, 1.0);
        sol.estimate = {objective.value(sol.argopt), 0, true};
        return sol;
    }

    // Minimize F(v) = sign * phi(v) + mu/2 ||v - center||^2 over the domain.
    const double mu_reg = objective.modulus > 0 ? 0.0 : tol / (2 * diam * diam);
    const double mu = objective.modulus + mu_reg;
    const double bias = 0.5 * mu_reg * diam * diam;
    const double L = objective.L_grad + mu_reg;
    const double step = 1 / std::max(L, mu);
    auto grad_F = [&](const Vector &v) -> Vector {
        return sign * objective.gradient(v) + mu_reg * (v - center);
    };
    auto value_F = [&](const Vector &v) {
        return sign * objective.value(v) + 0.5 * mu_reg * (v - center).squaredNorm();
    };

    Vector x = prox(domain, center, 1.0), y = x;
    double t = 1;
    double gap_bound = INFINITY;
    Vector best = x;
    std::int64_t it = 0;
    for (; it < max_iterations; ++it) {
        Vector gy = grad_F(y);
        Vector x_new = prox(domain, y - step * gy, step);
        if (it % 8 == 0) {
            // F(x+) - F* <= 2 ||G(x)||^2 / mu with G the gradient map at x.
            Vector G = prox_gradient_map(domain, x, grad_F(x), step);
            double bound = 2 * G.squaredNorm() / mu;
            if (bound < gap_bound) {
                gap_bound = bound;
                best = prox(domain, x - step * grad_F(x), step);
            }
            if (gap_bound <= tol / 4)
                break;
        }
        // Function-value restart keeps the iteration monotone near the solution.
        if (value_F(x_new) > value_F(x)) {
            t = 1;
            y = x;
            continue;
        }
        double t_new = 0.5 * (1 + std::sqrt(1 + 4 * t * t));
        y = x_new + ((t - 1) / t_new) * (x_new - x);
        x = x_new;
        t = t_new;
    }
    sol.argopt = best;
    sol.iterations = it;
    sol.estimate.value = objective.value(best);
    sol.estimate.error_bound = bias + gap_bound;
    sol.estimate.converged = gap_bound <= tol / 4;
    return sol;
}

SaddleReference reference_saddle(const SaddleObjective &objective, const ProxFunction &X,
                                 const ProxFunction &Y, double tol,
                                 std::int64_t max_gradient_calls) {
    if (!(tol > 0))
        throw std::invalid_argument("reference_saddle: tol must be positive");
    const double dx = domain_diameter(X), dy = domain_diameter(Y);
    if (!std::isfinite(dx) || !std::isfinite(dy))
        throw std::invalid_argument("reference_saddle: unbounded domain");
    const Index nx = X.dim();
    const double step = 1 / std::max(objective.L_grad, 1e-12);
    std::int64_t calls = 0;
    auto grad = [&](const Vector &x, const Vector &y) {
        ++calls;
        return objective.gradient(x, y);
    };

    // Duality gap bracket [min_x phi(x, y), max_y phi(x, y)] around the saddle value.
    struct Bracket {
        double lower, upper;
    };
    auto bracket = [&](const Vector &x, const Vector &y) {
        SmoothObjective in_y;
        in_y.value = [&](const Vector &v) { return objective.value(x, v); };
        in_y.gradient = [&](const Vector &v) { return Vector(objective.gradient(x, v).tail(v.size())); };
        in_y.L_grad = objective.L_grad;
        SmoothObjective in_x;
        in_x.value = [&](const Vector &u) { return objective.value(u, y); };
        in_x.gradient = [&](const Vector &u) { return Vector(objective.gradient(u, y).head(nx)); };
        in_x.L_grad = objective.L_grad;
        const auto up = reference_value(in_y, Sense::Maximize, Y, tol / 4);
        const auto lo = reference_value(in_x, Sense::Minimize, X, tol / 4);
        return Bracket{lo.value - lo.error_bound, up.value + up.error_bound};
    };

    Vector x = prox(X, domain_center(X), 1.0), y = prox(Y, domain_center(Y), 1.0);
    Vector x_sum = Vector::Zero(x.size()), y_sum = Vector::Zero(y.size());
    std::int64_t t = 0, next_check = 64;
    SaddleReference out;
    Bracket best{-INFINITY, INFINITY};
    auto consider = [&](const Vector &cx, const Vector &cy) {
        const Bracket b = bracket(cx, cy);
        if (b.upper - b.lower < best.upper - best.lower) {
            best = b;
            out.x = cx;
            out.y = cy;
        }
    };
    // Extragradient; both the last and the averaged iterate are certified by the gap.
    while (calls < max_gradient_calls) {
        const Vector g = grad(x, y);
        const Vector xh = prox(X, x - step * g.head(nx), step);
        const Vector yh = prox(Y, y + step * g.tail(y.size()), step);
        const Vector gh = grad(xh, yh);
        x = prox(X, x - step * gh.head(nx), step);
        y = prox(Y, y + step * gh.tail(y.size()), step);
        x_sum += xh;
        y_sum += yh;
        if (++t == next_check) {
            consider(x, y);
            consider(x_sum / static_cast<double>(t), y_sum / static_cast<double>(t));
            if (best.upper - best.lower <= 2 * tol)
                break;
            next_check += std::max<std::int64_t>(64, next_check / 2);
        }
    }
    if (out.x.size() == 0)
        consider(x, y);
    out.estimate.value = 0.5 * (best.lower + best.upper);
    out.estimate.error_bound = 0.5 * (best.upper - best.lower);
    out.estimate.converged = out.estimate.error_bound <= tol;
    return out;
}

} // namespace bimax
