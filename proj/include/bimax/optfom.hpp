#pragma once

#include <cstdint>
#include <functional>

#include "bimax/saddle.hpp"

namespace bimax {

struct OptFomParams {
    double alpha_bar, eta_z, eta_y, zeta, gamma_x, gamma_y, zeta_hat;
};

OptFomParams optfom_params(double sigma_x, double sigma_y, double L_grad_hbar);

struct OptFomOptions {
    std::int64_t max_gradient_calls = 1'000'000;
    std::int64_t max_inner_iterations = 100'000;
    /// Outer iteration cap; 0 means no cap.
    std::int64_t max_outer_iterations = 0;
    /// Abort when the certificate exceeds this multiple of its entry value.
    double divergence_factor = 10;
    std::function<void(std::int64_t k, double certificate, std::int64_t gradient_calls)> callback;
};

struct OptFomResult {
    /// Prox-gradient point with the smallest certificate seen.
    Vector x_hat, y_hat;
    /// Prox-gradient point of the last iterate.
    Vector x_last, y_last;
    std::int64_t iters = 0;
    std::int64_t inner_iterations = 0;
    std::int64_t gradient_calls = 0;
    double certificate = 0;
    bool converged = false;
    bool budget_exceeded = false;
    bool diverged = false;
};

/// Prox-gradient stationarity certificate at (x, y). Writes the prox-gradient points to
/// x_hat, y_hat when given. Costs two gradient evaluations.
double certificate(const SaddleModel &model, const Vector &x, const Vector &y,
                   Vector *x_hat = nullptr, Vector *y_hat = nullptr);

/// Optimal first-order method for strongly-convex-strongly-concave composite saddle
/// problems. Returns a point whose certificate is at most eps_bar unless a cap is hit,
/// in which case the best point seen is returned.
OptFomResult optfom(double eps_bar, const Vector &x0, const Vector &y0, const SaddleModel &model,
                    const OptFomOptions &options = {});

} // namespace bimax
