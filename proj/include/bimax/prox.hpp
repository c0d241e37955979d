#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace bimax {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Membership tolerance used by domain checks.
inline constexpr double kDomainTol = 1e-9;

/// A closed convex function with a cheap proximal map: indicators of boxes and
/// truncated simplices, the zero function, and separable sums of those.
class ProxFunction {
  public:
    enum class Kind { BoxIndicator, TruncatedSimplexIndicator, Zero, SeparableSum };

    ProxFunction() = default;

    static ProxFunction box(Vector lo, Vector hi);
    static ProxFunction box(Index n, double lo, double hi);
    /// Indicator of {x : sum(x) = 1, 0 <= x <= cap}.
    static ProxFunction truncated_simplex(Index n, double cap = 1);
    static ProxFunction zero(Index n);
    /// Sum of parts acting on consecutive coordinate ranges, part i scaled by scales[i].
    static ProxFunction separable_sum(std::vector<ProxFunction> parts,
                                      std::vector<double> scales = {});

    Kind kind() const { return kind_; }
    Index dim() const { return dim_; }
    const Vector &lo() const { return lo_; }
    const Vector &hi() const { return hi_; }
    double cap() const { return cap_; }
    const std::vector<ProxFunction> &parts() const { return parts_; }
    const std::vector<double> &scales() const { return scales_; }
    const std::vector<Index> &offsets() const { return offsets_; }

  private:
    Kind kind_ = Kind::Zero;
    Index dim_ = 0;
    Vector lo_, hi_;
    double cap_ = 1;
    std::vector<ProxFunction> parts_;
    std::vector<double> scales_;
    std::vector<Index> offsets_;
};

/// argmin_x 0.5 ||x - v||^2 + step * fn(x).
Vector prox(const ProxFunction &fn, const Vector &v, double step);

/// (x - prox(x - step * g)) / step, evaluated without cancellation on boxes.
Vector prox_gradient_map(const ProxFunction &fn, const Vector &x, const Vector &g,
                         double step);

/// Largest distance between two points of the domain; +inf for unbounded domains.
double domain_diameter(const ProxFunction &fn);

/// dist(0, g + N(x)) where N is the normal cone of the domain. Exact for boxes;
/// other sets use the unit-step projected-gradient residual ||x - P(x - g)||.
double normal_cone_distance(const ProxFunction &fn, const Vector &x, const Vector &g);

bool in_domain(const ProxFunction &fn, const Vector &x, double tol = kDomainTol);

/// Function value: 0 on the domain of an indicator, +inf outside.
double prox_value(const ProxFunction &fn, const Vector &x);

/// A central point of the domain (box midpoint, simplex barycenter, origin).
Vector domain_center(const ProxFunction &fn);

/// A random domain point; boxes are sampled uniformly.
Vector sample_domain(const ProxFunction &fn, std::mt19937_64 &rng);

} // namespace bimax
