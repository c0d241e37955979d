#include "bimax/optfom.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace bimax {

namespace {

double first_min(double a, double b) { return a <= b ? a : b; }

struct CountedGradient {
    const SaddleModel &model;
    std::int64_t calls = 0;

    void operator()(const Vector &x, const Vector &y, Vector &gx, Vector &gy) {
        model.gradient(x, y, gx, gy);
        ++calls;
    }
};

double certificate_impl(CountedGradient &grad, const SaddleModel &model, double zeta_hat,
                        const Vector &x, const Vector &y, Vector &x_hat, Vector &y_hat) {
    Vector gx, gy, hx, hy;
    grad(x, y, gx, gy);
    x_hat = prox(model.p, x - zeta_hat * gx, zeta_hat);
    y_hat = prox(model.q, y + zeta_hat * gy, zeta_hat);
    // zeta_hat^{-1}(x - x_hat) and zeta_hat^{-1}(y_hat - y) without cancellation.
    Vector mx = prox_gradient_map(model.p, x, gx, zeta_hat);
    Vector my = -prox_gradient_map(model.q, y, -gy, zeta_hat);
    grad(x_hat, y_hat, hx, hy);
    double rx = (mx - (gx - hx)).squaredNorm();
    double ry = (my - (gy - hy)).squaredNorm();
    return std::sqrt(rx + ry);
}

} // namespace

OptFomParams optfom_params(double sigma_x, double sigma_y, double L) {
    if (!(sigma_x > 0) || !(sigma_y > 0) || !(L > 0))
        throw std::invalid_argument("optfom: sigma_x, sigma_y, L must be positive");
    OptFomParams P;
    P.alpha_bar = first_min(1.0, std::sqrt(8 * sigma_y / sigma_x));
    P.eta_z = sigma_x / 2;
    P.eta_y = first_min(1 / (2 * sigma_y), 4 / (P.alpha_bar * sigma_x));
    P.zeta = 1 / (2 * std::sqrt(5.0) * (1 + 8 * L / sigma_x));
    P.gamma_x = P.gamma_y = 8 / sigma_x;
    P.zeta_hat = first_min(sigma_x, sigma_y) / (L * L);
    return P;
}

double certificate(const SaddleModel &model, const Vector &x, const Vector &y, Vector *x_hat,
                   Vector *y_hat) {
    const auto P = optfom_params(model.sigma_x, model.sigma_y, model.L_grad);
    CountedGradient grad{model};
    Vector xh, yh;
    double c = certificate_impl(grad, model, P.zeta_hat, x, y, xh, yh);
    if (x_hat)
        *x_hat = std::move(xh);
    if (y_hat)
        *y_hat = std::move(yh);
    return c;
}

OptFomResult optfom(double eps_bar, const Vector &x0, const Vector &y0, const SaddleModel &model,
                    const OptFomOptions &options) {
    if (!(eps_bar > 0))
        throw std::invalid_argument("optfom: eps_bar must be positive");
    if (x0.size() != model.p.dim() || y0.size() != model.q.dim())
        throw std::invalid_argument("optfom: starting point dimension mismatch");
    const double sx = model.sigma_x, sy = model.sigma_y;
    const auto P = optfom_params(sx, sy, model.L_grad);
    const double step_x = P.zeta * P.gamma_x, step_y = P.zeta * P.gamma_y;

    CountedGradient grad{model};
    OptFomResult res;
    Vector xh, yh;
    const double entry = certificate_impl(grad, model, P.zeta_hat, x0, y0, xh, yh);
    res.x_hat = res.x_last = xh;
    res.y_hat = res.y_last = yh;
    res.certificate = entry;
    if (options.callback)
        options.callback(0, entry, grad.calls);
    if (entry <= eps_bar) {
        res.converged = true;
        res.gradient_calls = grad.calls;
        return res;
    }

    Vector z = -sx * x0, z_f = z, y = y0, y_f = y0;
    Vector gx, gy, ax, ay, bx, by;
    // a_x = grad_x h^ + sx (x - z_g / sx) / 2 and a_y = -grad_y h^ + sy y + sx (y - y_g) / 8,
    // where grad h^ = grad h - (sx x, -sy y).
    auto eval_a = [&](const Vector &x, const Vector &yy, const Vector &z_g, const Vector &y_g) {
        grad(x, yy, gx, gy);
        ax = gx - sx * x + 0.5 * (sx * x - z_g);
        ay = -gy + sx * (yy - y_g) / 8;
    };
    auto over_budget = [&] { return grad.calls >= options.max_gradient_calls; };

    for (std::int64_t k = 0;; ++k) {
        if (over_budget() || (options.max_outer_iterations > 0 && k >= options.max_outer_iterations)) {
            res.budget_exceeded = true;
            break;
        }
        const Vector z_g = P.alpha_bar * z + (1 - P.alpha_bar) * z_f;
        const Vector y_g = P.alpha_bar * y + (1 - P.alpha_bar) * y_f;
        const Vector x_m = -z_g / sx;
        const Vector &y_m = y_g;

        eval_a(x_m, y_m, z_g, y_g);
        Vector wx = x_m - step_x * ax, wy = y_m - step_y * ay;
        const Vector x_0 = prox(model.p, wx, step_x), y_0 = prox(model.q, wy, step_y);
        bx = (wx - x_0) / step_x;
        by = (wy - y_0) / step_y;

        Vector x_t = x_0, y_t = y_0;
        std::int64_t t = 0;
        bool inner_capped = false;
        for (;;) {
            eval_a(x_t, y_t, z_g, y_g);
            double lhs = P.gamma_x * (ax + bx).squaredNorm() + P.gamma_y * (ay + by).squaredNorm();
            double rhs = (x_t - x_m).squaredNorm() / P.gamma_x + (y_t - y_m).squaredNorm() / P.gamma_y;
            if (!(lhs > rhs))
                break;
            if (t >= options.max_inner_iterations || over_budget()) {
                inner_capped = true;
                break;
            }
            const double beta = 2.0 / static_cast<double>(t + 3);
            const Vector ax_t = ax, ay_t = ay;
            Vector x_half = x_t + beta * (x_0 - x_t) - step_x * (ax_t + bx);
            Vector y_half = y_t + beta * (y_0 - y_t) - step_y * (ay_t + by);
            eval_a(x_half, y_half, z_g, y_g);
            wx = x_t + beta * (x_0 - x_t) - step_x * ax;
            wy = y_t + beta * (y_0 - y_t) - step_y * ay;
            x_t = prox(model.p, wx, step_x);
            y_t = prox(model.q, wy, step_y);
            bx = (wx - x_t) / step_x;
            by = (wy - y_t) / step_y;
            ++t;
        }
        res.inner_iterations += t;

        const Vector &x_f = x_t;
        y_f = y_t;
        z_f = (gx - sx * x_f) + bx;
        const Vector w_f = -(gy + sy * y_f) + by;
        z = z + (P.eta_z / sx) * (z_f - z) - P.eta_z * (x_f + z_f / sx);
        y = y + (P.eta_y * sy) * (y_f - y) - P.eta_y * (w_f + sy * y_f);
        const Vector x = -z / sx;

        double cert = certificate_impl(grad, model, P.zeta_hat, x, y, xh, yh);
        res.iters = k + 1;
        res.x_last = xh;
        res.y_last = yh;
        if (options.callback)
            options.callback(k + 1, cert, grad.calls);
        if (cert < res.certificate || !std::isfinite(res.certificate)) {
            res.certificate = cert;
            res.x_hat = xh;
            res.y_hat = yh;
        }
        if (cert <= eps_bar) {
            res.converged = true;
            break;
        }
        if (!std::isfinite(cert) || cert > options.divergence_factor * entry) {
            res.diverged = true;
            break;
        }
        if (inner_capped) {
            res.budget_exceeded = true;
            break;
        }
    }
    res.gradient_calls = grad.calls;
    return res;
}

} // namespace bimax
