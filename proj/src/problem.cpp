#include "bimax/problem.hpp"

#include <cmath>
#include <stdexcept>

#include "bimax/reference.hpp"

namespace bimax {

Vector BlockLayout::primal(const Vector &x1, const Vector &y1, const Vector &y2) const {
    Vector u(primal_size());
    u << x1, y1, y2;
    return u;
}

Vector BlockLayout::dual(const Vector &x2, const Vector &z1, const Vector &z2) const {
    Vector v(dual_size());
    v << x2, z1, z2;
    return v;
}

double BilevelMinimaxProblem::D1() const {
    double a = domain_diameter(prox_f2), b = domain_diameter(prox_ftilde2),
           c = domain_diameter(prox_ftilde3);
    return std::sqrt(a * a + b * b + c * c);
}

double BilevelMinimaxProblem::D2() const {
    double a = domain_diameter(prox_f3), b = domain_diameter(prox_ftilde2),
           c = domain_diameter(prox_ftilde3);
    return std::sqrt(a * a + b * b + c * c);
}

void BilevelMinimaxProblem::validate() const {
    const auto &L = layout;
    if (L.n_x1 < 1 || L.n_y1 < 1 || L.n_x2 < 0 || L.n_y2 < 0)
        throw std::invalid_argument("problem: need n_x1 >= 1, n_y1 >= 1, other dims >= 0");
    if (prox_f2.dim() != L.n_x1 || prox_f3.dim() != L.n_x2 || prox_ftilde2.dim() != L.n_y1 ||
        prox_ftilde3.dim() != L.n_y2)
        throw std::invalid_argument("problem: prox domains do not match the block layout");
    if (!eval_f1 || !grad_f1 || !eval_ftilde1 || !grad_ftilde1)
        throw std::invalid_argument("problem: missing oracle");
    if (!(L_grad_f1 >= 0) || !(L_grad_ftilde1 >= 0) || !std::isfinite(f_low))
        throw std::invalid_argument("problem: invalid constants");
    if (!std::isfinite(D1()) || !std::isfinite(D2()))
        throw std::invalid_argument("problem: domains must be compact");
}

double eval_f(const BilevelMinimaxProblem &problem, const Vector &x1, const Vector &x2,
              const Vector &y1, const Vector &y2) {
    return problem.eval_f1(x1, x2, y1, y2) + prox_value(problem.prox_f2, x1) -
           prox_value(problem.prox_f3, x2);
}

double eval_ftilde(const BilevelMinimaxProblem &problem, const Vector &x1, const Vector &y1,
                   const Vector &y2) {
    return problem.eval_ftilde1(x1, y1, y2) + prox_value(problem.prox_ftilde2, y1) -
           prox_value(problem.prox_ftilde3, y2);
}

GradientOracle::GradientOracle(BilevelMinimaxProblem problem) : problem_(std::move(problem)) {}

Vector GradientOracle::grad_f1(const Vector &x1, const Vector &x2, const Vector &y1,
                               const Vector &y2) {
    ++counter_.calls_f1;
    return sample_f1(x1, x2, y1, y2);
}

Vector GradientOracle::grad_ftilde1(const Vector &x1, const Vector &y1, const Vector &y2) {
    ++counter_.calls_ftilde1;
    return sample_ftilde1(x1, y1, y2);
}

Vector GradientOracle::sample_f1(const Vector &x1, const Vector &x2, const Vector &y1,
                                 const Vector &y2) {
    return problem_.grad_f1(x1, x2, y1, y2);
}

Vector GradientOracle::sample_ftilde1(const Vector &x1, const Vector &y1, const Vector &y2) {
    return problem_.grad_ftilde1(x1, y1, y2);
}

StochasticOracle::StochasticOracle(BilevelMinimaxProblem base, double delta_f,
                                   double delta_ftilde, std::uint64_t rng_seed)
    : GradientOracle(std::move(base)), delta_f_(delta_f), delta_ftilde_(delta_ftilde),
      seed_(rng_seed), rng_(rng_seed) {
    if (!(delta_f >= 0) || !(delta_ftilde >= 0))
        throw std::invalid_argument("make_noisy: deltas must be nonnegative");
}

StochasticOracle::StochasticOracle(BilevelMinimaxProblem base, GradientSamplers samplers,
                                   double delta_f, double delta_ftilde, std::uint64_t rng_seed)
    : StochasticOracle(std::move(base), delta_f, delta_ftilde, rng_seed) {
    samplers_ = std::move(samplers);
}

void StochasticOracle::reset() {
    rng_.seed(seed_);
    counter_ = {};
}

void StochasticOracle::add_noise(Vector &g, double delta) {
    if (delta == 0 || g.size() == 0)
        return;
    std::normal_distribution<double> normal(0.0, delta / std::sqrt(static_cast<double>(g.size())));
    for (Index i = 0; i < g.size(); ++i)
        g[i] += normal(rng_);
}

Vector StochasticOracle::sample_f1(const Vector &x1, const Vector &x2, const Vector &y1,
                                   const Vector &y2) {
    if (samplers_ && samplers_->grad_f1)
        return samplers_->grad_f1(x1, x2, y1, y2, rng_);
    Vector g = problem_.grad_f1(x1, x2, y1, y2);
    add_noise(g, delta_f_);
    return g;
}

Vector StochasticOracle::sample_ftilde1(const Vector &x1, const Vector &y1, const Vector &y2) {
    if (samplers_ && samplers_->grad_ftilde1)
        return samplers_->grad_ftilde1(x1, y1, y2, rng_);
    Vector g = problem_.grad_ftilde1(x1, y1, y2);
    add_noise(g, delta_ftilde_);
    return g;
}

StochasticOracle make_noisy(const BilevelMinimaxProblem &problem, double delta_f,
                            double delta_ftilde, std::uint64_t seed) {
    return StochasticOracle(problem, delta_f, delta_ftilde, seed);
}

ValueEstimate primal_value(const BilevelMinimaxProblem &problem, const Vector &x1,
                           const Vector &y1, double tol) {
    if (problem.closed_form_pd && problem.closed_form_pd->p)
        return {problem.closed_form_pd->p(x1, y1), 0, true};
    const auto &L = problem.layout;
    SmoothObjective obj;
    obj.value = [&](const Vector &z2) { return problem.eval_ftilde1(x1, y1, z2); };
    obj.gradient = [&](const Vector &z2) {
        return Vector(problem.grad_ftilde1(x1, y1, z2).tail(L.n_y2));
    };
    obj.L_grad = problem.L_grad_ftilde1;
    obj.modulus = problem.mu_ftilde_y2;
    auto est = reference_value(obj, Sense::Maximize, problem.prox_ftilde3, tol);
    est.value += prox_value(problem.prox_ftilde2, y1);
    return est;
}

ValueEstimate dual_value(const BilevelMinimaxProblem &problem, const Vector &x1,
                         const Vector &y2, double tol) {
    if (problem.closed_form_pd && problem.closed_form_pd->d)
        return {problem.closed_form_pd->d(x1, y2), 0, true};
    const auto &L = problem.layout;
    SmoothObjective obj;
    obj.value = [&](const Vector &z1) { return problem.eval_ftilde1(x1, z1, y2); };
    obj.gradient = [&](const Vector &z1) {
        return Vector(problem.grad_ftilde1(x1, z1, y2).segment(L.n_x1, L.n_y1));
    };
    obj.L_grad = problem.L_grad_ftilde1;
    obj.modulus = problem.mu_ftilde_y1;
    auto est = reference_value(obj, Sense::Minimize, problem.prox_ftilde2, tol);
    est.value -= prox_value(problem.prox_ftilde3, y2);
    return est;
}

ValueEstimate lower_gap_estimate(const BilevelMinimaxProblem &problem, const Vector &x1,
                                 const Vector &y1, const Vector &y2, double tol) {
    auto p = primal_value(problem, x1, y1, tol / 2);
    auto d = dual_value(problem, x1, y2, tol / 2);
    return {p.value - d.value, p.error_bound + d.error_bound, p.converged && d.converged};
}

double lower_gap(const BilevelMinimaxProblem &problem, const Vector &x1, const Vector &y1,
                 const Vector &y2, double tol) {
    return lower_gap_estimate(problem, x1, y1, y2, tol).value;
}

ValueEstimate max_upper_value(const BilevelMinimaxProblem &problem, const Vector &x1,
                              const Vector &y1, const Vector &y2, double tol) {
    const auto &L = problem.layout;
    const double f2 = prox_value(problem.prox_f2, x1);
    if (L.n_x2 == 0)
        return {problem.eval_f1(x1, Vector(0), y1, y2) + f2, 0, true};
    SmoothObjective obj;
    obj.value = [&](const Vector &x2) { return problem.eval_f1(x1, x2, y1, y2); };
    obj.gradient = [&](const Vector &x2) {
        return Vector(problem.grad_f1(x1, x2, y1, y2).segment(L.n_x1, L.n_x2));
    };
    obj.L_grad = problem.L_grad_f1;
    obj.modulus = problem.mu_f_x2;
    auto est = reference_value(obj, Sense::Maximize, problem.prox_f3, tol);
    est.value += f2;
    return est;
}

} // namespace bimax
