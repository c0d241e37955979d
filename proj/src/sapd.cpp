#include "bimax/sapd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace bimax {

SapdParams sapd_params(double eps_hat, double sx, double sy, double L, double delta_sq,
                       double Dp, double Dq, std::int64_t T_ceiling) {
    if (!(eps_hat > 0) || !(sx > 0) || !(sy > 0) || !(L > 0) || !(delta_sq >= 0) ||
        !(Dp >= 0) || !(Dq >= 0) || T_ceiling < 1)
        throw std::invalid_argument("sapd_params: invalid inputs");
    SapdParams P;
    P.beta = std::min({0.5, sy / sx, sx / sy});
    const double b = P.beta;
    P.theta_bar_1 = 1 - b * (L + sx) * sy / (4 * L * L) *
                            (std::sqrt(1 + 8 * sx * L * L / (b * sy * (L + sx) * (L + sx))) - 1);
    P.theta_bar_2 = 1 - (1 - b) * (1 - b) / 32 * sy * sy / (L * L) *
                            (std::sqrt(1 + 64 * L * L / ((1 - b) * (1 - b) * sy * sy)) - 1);
    P.psi = std::min(std::sqrt(b * sx / (2 * sy)), (1 - b) / 4);
    P.xi_x = 1 + P.psi;
    P.xi_y = (27 + 3 * b) / 2 + sy / sx * P.psi;
    if (delta_sq > 0) {
        const double e2 = eps_hat * eps_hat;
        P.theta_dbar_1 = std::max(0.0, 1 - sx * e2 / (12 * P.xi_x * delta_sq));
        P.theta_dbar_2 = std::max(0.0, 1 - sy * e2 / (12 * P.xi_y * delta_sq));
    }
    P.theta = std::max({P.theta_bar_1, P.theta_bar_2, P.theta_dbar_1, P.theta_dbar_2});
    if (!(P.theta < 1) || !(P.theta > 0))
        throw std::invalid_argument("sapd_params: momentum parameter outside (0, 1)");
    P.tau = (1 - P.theta) / (sx * P.theta);
    P.sigma = (1 - P.theta) / (sy * P.theta);

    double worst = 0;
    for (double th : {P.theta_bar_1, P.theta_bar_2, P.theta_dbar_1, P.theta_dbar_2})
        worst = std::max(worst, 1 / (1 - th));
    double ratio = (6 * sx * Dp * Dp + 6 * sy * Dq * Dq) / (eps_hat * eps_hat);
    // A start already within tolerance still takes one step.
    double log_term = ratio > 1 ? std::log(ratio) : 0.0;
    P.T_formula = std::ceil(1 + log_term * worst);
    if (!(P.T_formula <= static_cast<double>(T_ceiling))) {
        P.T = T_ceiling;
        P.T_clamped = true;
    } else {
        P.T = static_cast<std::int64_t>(P.T_formula);
    }
    return P;
}

SapdResult sapd(const SapdParams &P, const Vector &x0, const Vector &y0,
                const SaddleModel &model,
                const std::function<void(std::int64_t, std::int64_t)> &callback) {
    if (x0.size() != model.p.dim() || y0.size() != model.q.dim())
        throw std::invalid_argument("sapd: starting point dimension mismatch");
    SapdResult res;
    Vector x = x0, y = y0, gx, gy, gy_prev, unused;
    Vector q_tilde = Vector::Zero(y.size());
    model.gradient(x, y, unused, gy_prev);
    res.gradient_calls = 1;
    for (std::int64_t k = 0; k < P.T; ++k) {
        Vector s = gy_prev + P.theta * q_tilde;
        y = prox(model.q, y + P.sigma * s, P.sigma);
        model.gradient(x, y, gx, unused);
        x = prox(model.p, x - P.tau * gx, P.tau);
        res.gradient_calls += 1;
        if (k + 1 < P.T) {
            // This sample is reused as the next iteration's dual gradient.
            model.gradient(x, y, unused, gy);
            res.gradient_calls += 1;
            q_tilde = gy - gy_prev;
            gy_prev.swap(gy);
        }
        if (callback)
            callback(k + 1, res.gradient_calls);
    }
    res.x = std::move(x);
    res.y = std::move(y);
    res.iterations = P.T;
    return res;
}

} // namespace bimax
