#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <utility>

#include "bimax/prox.hpp"

namespace bimax {

/// Sizes of the variable groups. The primal block is (x1, y1, y2) and the dual
/// block is (x2, z1, z2), where z1 mirrors y1 and z2 mirrors y2.
struct BlockLayout {
    Index n_x1 = 0, n_x2 = 0, n_y1 = 0, n_y2 = 0;

    Index primal_size() const { return n_x1 + n_y1 + n_y2; }
    Index dual_size() const { return n_x2 + n_y1 + n_y2; }

    template <class V> auto x1(V &&u) const { return u.segment(0, n_x1); }
    template <class V> auto y1(V &&u) const { return u.segment(n_x1, n_y1); }
    template <class V> auto y2(V &&u) const { return u.segment(n_x1 + n_y1, n_y2); }
    template <class V> auto x2(V &&v) const { return v.segment(0, n_x2); }
    template <class V> auto z1(V &&v) const { return v.segment(n_x2, n_y1); }
    template <class V> auto z2(V &&v) const { return v.segment(n_x2 + n_y1, n_y2); }

    Vector primal(const Vector &x1, const Vector &y1, const Vector &y2) const;
    Vector dual(const Vector &x2, const Vector &z1, const Vector &z2) const;
};

/// Evaluators for p(x1, y1) = max_z2 f~(x1, y1, z2) and d(x1, y2) = min_z1 f~(x1, z1, y2).
/// Either may be left empty.
struct ClosedFormPd {
    std::function<double(const Vector &x1, const Vector &y1)> p;
    std::function<double(const Vector &x1, const Vector &y2)> d;
};

/// min_{x1,y1,y2} max_{x2} f(x1,x2,y1,y2) subject to (y1,y2) being a saddle point of
/// f~(x1,.,.), with f = f1 + f2(x1) - f3(x2) and f~ = f~1 + f~2(y1) - f~3(y2).
struct BilevelMinimaxProblem {
    BlockLayout layout;

    std::function<double(const Vector &, const Vector &, const Vector &, const Vector &)> eval_f1;
    /// Gradient over (x1, x2, y1, y2), concatenated.
    std::function<Vector(const Vector &, const Vector &, const Vector &, const Vector &)> grad_f1;
    std::function<double(const Vector &, const Vector &, const Vector &)> eval_ftilde1;
    /// Gradient over (x1, y1, y2), concatenated.
    std::function<Vector(const Vector &, const Vector &, const Vector &)> grad_ftilde1;

    ProxFunction prox_f2, prox_f3, prox_ftilde2, prox_ftilde3;

    double L_grad_f1 = 0;
    double L_grad_ftilde1 = 0;
    double f_low = 0;
    /// Known strong convexity of f~1 in y1, strong concavity of f~1 in y2 and of f1 in x2
    /// (zero when unknown); used only by reference value solves.
    double mu_ftilde_y1 = 0, mu_ftilde_y2 = 0, mu_f_x2 = 0;

    std::optional<ClosedFormPd> closed_form_pd;
    /// Exact lower-level saddle point (y1, y2) at fixed x1, when the instance has one.
    std::function<std::pair<Vector, Vector>(const Vector &x1)> lower_saddle;

    /// Diameter of dom f2 x dom f~2 x dom f~3.
    double D1() const;
    /// Diameter of dom f3 x dom f~2 x dom f~3.
    double D2() const;
    /// Throws std::invalid_argument when dimensions or constants are inconsistent.
    void validate() const;
};

/// f(x1, x2, y1, y2) including the prox parts.
double eval_f(const BilevelMinimaxProblem &problem, const Vector &x1, const Vector &x2,
              const Vector &y1, const Vector &y2);
/// f~(x1, y1, y2) including the prox parts.
double eval_ftilde(const BilevelMinimaxProblem &problem, const Vector &x1, const Vector &y1,
                   const Vector &y2);

struct OracleCounter {
    std::int64_t calls_f1 = 0;
    std::int64_t calls_ftilde1 = 0;

    std::int64_t total() const { return calls_f1 + calls_ftilde1; }
};

/// Counted access to the gradients of f1 and f~1. The base class is exact.
class GradientOracle {
  public:
    explicit GradientOracle(BilevelMinimaxProblem problem);
    virtual ~GradientOracle() = default;

    Vector grad_f1(const Vector &x1, const Vector &x2, const Vector &y1, const Vector &y2);
    Vector grad_ftilde1(const Vector &x1, const Vector &y1, const Vector &y2);

    const BilevelMinimaxProblem &problem() const { return problem_; }
    const OracleCounter &counter() const { return counter_; }
    /// Variance bounds (delta_f^2, delta_f~^2) of the returned gradients.
    virtual double variance_f() const { return 0; }
    virtual double variance_ftilde() const { return 0; }

  protected:
    virtual Vector sample_f1(const Vector &x1, const Vector &x2, const Vector &y1,
                             const Vector &y2);
    virtual Vector sample_ftilde1(const Vector &x1, const Vector &y1, const Vector &y2);

    BilevelMinimaxProblem problem_;
    OracleCounter counter_;
};

/// Unbiased sampled gradients, e.g. minibatch estimates. The generator is owned by the
/// oracle.
struct GradientSamplers {
    std::function<Vector(const Vector &, const Vector &, const Vector &, const Vector &,
                         std::mt19937_64 &)>
        grad_f1;
    std::function<Vector(const Vector &, const Vector &, const Vector &, std::mt19937_64 &)>
        grad_ftilde1;
};

/// Stochastic gradients with variance at most delta_f^2 and delta_ftilde^2. By default the
/// noise is isotropic Gaussian added to the exact gradient; custom samplers replace it.
class StochasticOracle : public GradientOracle {
  public:
    StochasticOracle(BilevelMinimaxProblem base, double delta_f, double delta_ftilde,
                     std::uint64_t rng_seed);
    StochasticOracle(BilevelMinimaxProblem base, GradientSamplers samplers, double delta_f,
                     double delta_ftilde, std::uint64_t rng_seed);

    double delta_f() const { return delta_f_; }
    double delta_ftilde() const { return delta_ftilde_; }
    std::uint64_t rng_seed() const { return seed_; }
    double variance_f() const override { return delta_f_ * delta_f_; }
    double variance_ftilde() const override { return delta_ftilde_ * delta_ftilde_; }
    /// Restart the noise stream and the call counter.
    void reset();

  protected:
    Vector sample_f1(const Vector &x1, const Vector &x2, const Vector &y1,
                     const Vector &y2) override;
    Vector sample_ftilde1(const Vector &x1, const Vector &y1, const Vector &y2) override;

  private:
    void add_noise(Vector &g, double delta);

    double delta_f_, delta_ftilde_;
    std::uint64_t seed_;
    std::optional<GradientSamplers> samplers_;
    std::mt19937_64 rng_;
};

StochasticOracle make_noisy(const BilevelMinimaxProblem &problem, double delta_f,
                            double delta_ftilde, std::uint64_t seed);

struct ValueEstimate {
    double value = 0;
    /// Bound on |value - exact|.
    double error_bound = 0;
    bool converged = true;
};

/// p(x1, y1) - d(x1, y2), from closed forms when available, else from reference solves.
ValueEstimate lower_gap_estimate(const BilevelMinimaxProblem &problem, const Vector &x1,
                                 const Vector &y1, const Vector &y2, double tol = 1e-8);
double lower_gap(const BilevelMinimaxProblem &problem, const Vector &x1, const Vector &y1,
                 const Vector &y2, double tol = 1e-8);

ValueEstimate primal_value(const BilevelMinimaxProblem &problem, const Vector &x1,
                           const Vector &y1, double tol = 1e-8);
ValueEstimate dual_value(const BilevelMinimaxProblem &problem, const Vector &x1,
                         const Vector &y2, double tol = 1e-8);

/// max over x2 of f(x1, x2, y1, y2).
ValueEstimate max_upper_value(const BilevelMinimaxProblem &problem, const Vector &x1,
                              const Vector &y1, const Vector &y2, double tol = 1e-8);

} // namespace bimax
