#pragma once

#include <functional>

#include "bimax/prox.hpp"

namespace bimax {

/// min_x max_y h(x, y) + p(x) - q(y) with h smooth, sigma_x-strongly convex in x and
/// sigma_y-strongly concave in y. The gradient may be stochastic.
struct SaddleModel {
    std::function<void(const Vector &x, const Vector &y, Vector &gx, Vector &gy)> gradient;
    ProxFunction p, q;
    double sigma_x = 0, sigma_y = 0, L_grad = 0;
};

} // namespace bimax
