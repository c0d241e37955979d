#pragma once

#include <cstdint>
#include <functional>

#include "bimax/problem.hpp"

namespace bimax {

struct SmoothObjective {
    std::function<double(const Vector &)> value;
    std::function<Vector(const Vector &)> gradient;
    /// Lipschitz constant of the gradient.
    double L_grad = 0;
    /// Known strong convexity (for minimization) or strong concavity (for maximization).
    double modulus = 0;
};

enum class Sense { Minimize, Maximize };

struct ReferenceSolution {
    Vector argopt;
    ValueEstimate estimate;
    std::int64_t iterations = 0;
};

/// High-accuracy optimal value of a smooth convex (or concave, for Maximize) objective
/// over a compact prox-friendly domain. Without a known modulus the objective is
/// regularized by mu/2 ||v - center||^2 with mu = tol / (2 diam^2), and the bias is
/// included in the reported error bound.
ReferenceSolution reference_solve(const SmoothObjective &objective, Sense sense,
                                  const ProxFunction &domain, double tol = 1e-8,
                                  std::int64_t max_iterations = 2'000'000);

inline ValueEstimate reference_value(const SmoothObjective &objective, Sense sense,
                                     const ProxFunction &domain, double tol = 1e-8) {
    return reference_solve(objective, sense, domain, tol).estimate;
}

struct SaddleObjective {
    std::function<double(const Vector &, const Vector &)> value;
    /// Gradient over (x, y), concatenated.
    std::function<Vector(const Vector &, const Vector &)> gradient;
    double L_grad = 0;
};

struct SaddleReference {
    Vector x, y;
    ValueEstimate estimate;
};

/// Optimal value of min_x max_y phi(x, y) for phi convex-concave and smooth on compact
/// prox-friendly domains. Runs extragradient and certifies the value by the duality gap
/// of the last or averaged iterate; error_bound is half that gap.
SaddleReference reference_saddle(const SaddleObjective &objective, const ProxFunction &X,
                                 const ProxFunction &Y, double tol = 1e-6,
                                 std::int64_t max_gradient_calls = 20'000'000);

} // namespace bimax
