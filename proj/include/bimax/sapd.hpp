#pragma once

#include <cstdint>
#include <functional>

#include "bimax/saddle.hpp"

namespace bimax {

struct SapdParams {
    double tau = 0, sigma = 0, theta = 0;
    std::int64_t T = 0;
    /// True when the formula's T exceeded the ceiling.
    bool T_clamped = false;
    double T_formula = 0;
    double beta = 0, psi = 0, xi_x = 0, xi_y = 0;
    double theta_bar_1 = 0, theta_bar_2 = 0, theta_dbar_1 = 0, theta_dbar_2 = 0;
};

/// Step sizes, momentum and iteration count of SAPD for target accuracy eps_hat in the
/// sigma-weighted squared distance, gradient variance delta_sq and domain diameters Dp, Dq.
SapdParams sapd_params(double eps_hat, double sigma_x, double sigma_y, double L_grad_hbar,
                       double delta_sq, double Dp, double Dq,
                       std::int64_t T_ceiling = 10'000'000);

struct SapdResult {
    Vector x, y;
    std::int64_t iterations = 0;
    std::int64_t gradient_calls = 0;
};

/// Runs exactly params.T iterations of the stochastic accelerated primal-dual method.
SapdResult sapd(const SapdParams &params, const Vector &x0, const Vector &y0,
                const SaddleModel &model,
                const std::function<void(std::int64_t k, std::int64_t calls)> &callback = {});

} // namespace bimax
