#include "bimax/driver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "bimax/optfom.hpp"
#include "bimax/sapd.hpp"

namespace bimax {

const char *to_string(TerminationReason reason) {
    switch (reason) {
    case TerminationReason::StepNorm:
        return "StepNorm";
    case TerminationReason::OuterBudget:
        return "OuterBudget";
    case TerminationReason::OracleBudget:
        return "OracleBudget";
    case TerminationReason::KReached:
        return "K_reached";
    case TerminationReason::UserCriterion:
        return "UserCriterion";
    }
    return "unknown";
}

const char *to_string(SolveMode mode) {
    return mode == SolveMode::Deterministic ? "det" : "stoch";
}

double SolverConfig::rho_value() const { return rho ? *rho : 1 / eps; }

double SolverConfig::eps_hat_value() const { return eps_hat ? *eps_hat : std::pow(eps, 1.5); }

void SolverConfig::validate() const {
    if (!(eps > 0) || eps > 0.25)
        throw std::invalid_argument("config: eps must lie in (0, 1/4]");
    if (!(rho_value() > 0))
        throw std::invalid_argument("config: rho must be positive");
    if (!(eps_hat_value() > 0))
        throw std::invalid_argument("config: eps_hat must be positive");
    if (max_oracle_calls <= 0 || max_outer_iterations <= 0)
        throw std::invalid_argument("config: budgets must be positive");
    if (K && *K < 1)
        throw std::invalid_argument("config: K must be >= 1");
    if (L_override && !(*L_override > 0))
        throw std::invalid_argument("config: L override must be positive");
    if (sapd_T && *sapd_T < 1)
        throw std::invalid_argument("config: SAPD T must be >= 1");
    if (primal_init.has_value() != dual_init.has_value())
        throw std::invalid_argument("config: primal and dual starting blocks go together");
}

std::pair<Vector, Vector> initialize(const BilevelMinimaxProblem &problem, const Vector &x1_0,
                                     double eps) {
    GradientOracle oracle(problem);
    return initialize(problem, x1_0, eps, oracle);
}

std::pair<Vector, Vector> initialize(const BilevelMinimaxProblem &problem, const Vector &x1_0,
                                     double eps, GradientOracle &oracle) {
    if (!(eps > 0))
        throw std::invalid_argument("initialize: eps must be positive");
    if (x1_0.size() != problem.layout.n_x1 || !in_domain(problem.prox_f2, x1_0))
        throw std::invalid_argument("initialize: x1_0 must lie in dom f2");
    const auto &L = problem.layout;

    if (problem.lower_saddle) {
        auto [y1, y2] = problem.lower_saddle(x1_0);
        if (lower_gap(problem, x1_0, y1, y2) <= eps)
            return {y1, y2};
    }

    const ProxFunction &P = problem.prox_ftilde2, &Q = problem.prox_ftilde3;
    const double d1 = domain_diameter(P), d2 = domain_diameter(Q);
    const double dmax = std::max(d1, d2);
    const double mu = dmax > 0 ? eps / (4 * dmax * dmax) : eps;
    const Vector c1 = domain_center(P), c2 = domain_center(Q);

    SaddleModel m;
    m.p = P;
    m.q = Q;
    m.sigma_x = mu + problem.mu_ftilde_y1;
    m.sigma_y = mu + problem.mu_ftilde_y2;
    m.L_grad = problem.L_grad_ftilde1 + mu;
    m.gradient = [&](const Vector &y1, const Vector &y2, Vector &g1, Vector &g2) {
        const Vector g = oracle.grad_ftilde1(x1_0, y1, y2);
        g1 = g.segment(L.n_x1, L.n_y1) + mu * (y1 - c1);
        g2 = g.tail(L.n_y2) - mu * (y2 - c2);
    };

    double tol = (d1 + d2) > 0 ? eps / (2 * (d1 + d2)) : eps;
    Vector y1 = prox(P, c1, 1.0), y2 = prox(Q, c2, 1.0);
    double gap = INFINITY;
    OptFomOptions opts;
    opts.max_gradient_calls = 50'000'000;
    opts.divergence_factor = INFINITY;
    for (int attempt = 0; attempt <= 5; ++attempt) {
        auto r = optfom(tol, y1, y2, m, opts);
        y1 = r.x_hat;
        y2 = r.y_hat;
        gap = lower_gap(problem, x1_0, y1, y2);
        if (gap <= eps)
            return {y1, y2};
        tol /= 2;
    }
    throw std::runtime_error("initialize: lower gap " + std::to_string(gap) +
                             " above eps after 5 refinements");
}

TraceMetrics default_metrics(const BilevelMinimaxProblem &problem, double tol) {
    return [&problem, tol](const Vector &u, const Vector &, TraceRecord &rec) {
        const auto &L = problem.layout;
        const Vector x1 = L.x1(u), y1 = L.y1(u), y2 = L.y2(u);
        rec.upper_objective = max_upper_value(problem, x1, y1, y2, tol).value;
        const double gap = lower_gap(problem, x1, y1, y2, tol);
        rec.lower_optimality_gap = gap;
        rec.infeasibility = gap;
        rec.infeasibility_raw = gap;
    };
}

StopRule composite_stop_rule(double eps_k_max, double infeasibility_max, double lower_gap_max) {
    return [=](const TraceRecord &r) {
        return r.eps_k <= eps_k_max && r.infeasibility <= infeasibility_max &&
               r.lower_optimality_gap <= lower_gap_max;
    };
}

std::int64_t compute_stochastic_K(double f0_max, double f_low, double eps, double D2) {
    if (!(eps > 0) || !(D2 >= 0) || !(f0_max >= f_low))
        throw std::invalid_argument("compute_stochastic_K: needs eps > 0, D2 >= 0, f0_max >= f_low");
    const double v = (f0_max + 1 - f_low + eps * D2 / 4) / (eps * eps);
    // Values that are integers up to rounding are not pushed to the next integer.
    const double r = std::round(v);
    if (std::abs(v - r) <= 1e-9 * std::max(1.0, r))
        return static_cast<std::int64_t>(r);
    return static_cast<std::int64_t>(std::ceil(v));
}

namespace {

using Clock = std::chrono::steady_clock;

struct Run {
    const BilevelMinimaxProblem &problem;
    const SolverConfig &config;
    TraceMetrics metrics;
    PenaltyProblem pen;
    GradientOracle &oracle;
    OracleCounter offset;
    Clock::time_point t0 = Clock::now();
    std::int64_t inner_steps = 0;
    SolveResult res;

    Run(const BilevelMinimaxProblem &p, const SolverConfig &c, const TraceMetrics &m,
        GradientOracle &o)
        : problem(p), config(c), metrics(m ? m : default_metrics(p, c.reference_tol)),
          pen(assemble_penalty(p, c.rho_value())), oracle(o) {
        if (config.L_override)
            pen.L_grad_P1 = *config.L_override;
        res.rho = pen.rho;
        res.eps_hat = config.eps_hat_value();
        res.L_grad_P1 = pen.L_grad_P1;
        res.D2 = problem.D2();
        const double eps = config.eps, L = pen.L_grad_P1, D2 = res.D2;
        res.checkpoint_growth_bound =
            eps * D2 / 4 + 2 * res.eps_hat * res.eps_hat * (1 / L + 4 * D2 * D2 * L / (eps * eps));
    }

    OracleCounter calls() const {
        OracleCounter c = oracle.counter();
        c.calls_f1 += offset.calls_f1;
        c.calls_ftilde1 += offset.calls_ftilde1;
        return c;
    }

    bool over_budget() const { return calls().total() >= config.max_oracle_calls; }

    std::pair<Vector, Vector> start(GradientOracle &init_oracle) {
        const auto &L = problem.layout;
        if (config.primal_init) {
            const Vector &u = *config.primal_init, &v = *config.dual_init;
            if (u.size() != L.primal_size() || v.size() != L.dual_size())
                throw std::invalid_argument("config: starting blocks have wrong sizes");
            return {u, v};
        }
        Vector x1 = config.x1_init ? *config.x1_init
                                   : prox(problem.prox_f2, Vector::Zero(L.n_x1), 1.0);
        auto [y1, y2] = initialize(problem, x1, config.eps, init_oracle);
        const Vector x2 = prox(problem.prox_f3, Vector::Zero(L.n_x2), 1.0);
        return {L.primal(x1, y1, y2), L.dual(x2, y1, y2)};
    }

    void checkpoint(TraceRecord &rec, const Vector &u, const Vector &v) {
        const auto &L = problem.layout;
        rec.kkt = kkt_report(problem, pen.rho, u, v, config.reference_tol);
        const double upper =
            max_upper_value(problem, L.x1(u), L.y1(u), L.y2(u), config.reference_tol).value;
        rec.max_dual_penalty = upper + pen.rho * rec.kkt->feasibility_gap;
    }

    TraceRecord record(std::int64_t k, double eps_k, double step, const Vector &u,
                       const Vector &v) {
        TraceRecord rec;
        rec.outer_k = k;
        const OracleCounter c = calls();
        rec.oracle_calls_f1 = c.calls_f1;
        rec.oracle_calls_ftilde1 = c.calls_ftilde1;
        rec.oracle_calls_total = c.total();
        rec.inner_steps = inner_steps;
        rec.eps_k = eps_k;
        rec.primal_step_norm = step;
        metrics(u, v, rec);
        if (config.record_wall_time)
            rec.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - t0)
                              .count();
        const bool periodic = config.checkpoint_every > 0 && k > 0 &&
                              k % config.checkpoint_every == 0;
        if (k == 0 || periodic)
            checkpoint(rec, u, v);
        return rec;
    }

    void finish(const Vector &u, const Vector &v, const Vector &last_u, const Vector &last_v) {
        res.primal = u;
        res.dual = v;
        res.kkt = kkt_report(problem, pen.rho, u, v, config.reference_tol);
        res.oracle = calls();
        if (!res.trace.back().kkt)
            checkpoint(res.trace.back(), last_u, last_v);
    }
};

} // namespace

SolveResult solve_deterministic(const BilevelMinimaxProblem &problem, const SolverConfig &config,
                                const TraceMetrics &metrics, const StopRule &stop) {
    config.validate();
    GradientOracle oracle(problem);
    Run run(problem, config, metrics, oracle);
    auto &res = run.res;
    const double eps = config.eps, eps_hat = res.eps_hat;
    const double step_tol = eps / (4 * run.pen.L_grad_P1);

    auto [u, v] = run.start(oracle);
    res.initial_gap = lower_gap(problem, problem.layout.x1(u), problem.layout.y1(u),
                                problem.layout.y2(u), config.reference_tol);
    res.trace.push_back(run.record(0, eps_hat, 0, u, v));
    res.center_primal = u;
    res.center_dual = v;

    res.terminated_by = TerminationReason::OuterBudget;
    for (std::int64_t k = 0; k < config.max_outer_iterations; ++k) {
        if (run.over_budget()) {
            res.terminated_by = TerminationReason::OracleBudget;
            break;
        }
        const double eps_k = eps_hat / static_cast<double>(k + 1);
        const ScscSubproblem sub = build_subproblem(run.pen, u, v, eps, res.D2);
        OptFomOptions opts;
        opts.max_gradient_calls =
            std::max<std::int64_t>(1, (config.max_oracle_calls - run.calls().total()) / 3);
        opts.max_outer_iterations = config.optfom_max_iterations;
        opts.divergence_factor = INFINITY;
        const OptFomResult r = optfom(eps_k, u, v, sub, oracle, opts);
        run.inner_steps += r.iters;

        // Under an iteration cap the best certificate can be the entry point, which would
        // freeze the outer loop, so the last iterate is used instead.
        const bool capped = !r.converged && config.optfom_max_iterations > 0 &&
                            r.iters >= config.optfom_max_iterations;
        const Vector &next_u = capped ? r.x_last : r.x_hat;
        const Vector &next_v = capped ? r.y_last : r.y_hat;
        const double step = (next_u - u).norm();
        res.center_primal = u;
        res.center_dual = v;
        u = next_u;
        v = next_v;
        res.outer_iterations = k + 1;
        res.trace.push_back(run.record(k + 1, eps_k, step, u, v));

        if (r.budget_exceeded && run.over_budget()) {
            res.terminated_by = TerminationReason::OracleBudget;
            break;
        }
        if (r.converged && step <= step_tol) {
            res.terminated_by = TerminationReason::StepNorm;
            break;
        }
        if (stop && stop(res.trace.back())) {
            res.terminated_by = TerminationReason::UserCriterion;
            break;
        }
        if (run.over_budget()) {
            res.terminated_by = TerminationReason::OracleBudget;
            break;
        }
    }
    run.finish(u, v, u, v);
    return res;
}

SolveResult solve_stochastic(StochasticOracle &oracle, const SolverConfig &config,
                             const TraceMetrics &metrics) {
    config.validate();
    const BilevelMinimaxProblem &problem = oracle.problem();
    Run run(problem, config, metrics, oracle);
    auto &res = run.res;
    const auto &L = problem.layout;

    GradientOracle init_oracle(problem);
    auto [u, v] = run.start(init_oracle);
    run.offset = init_oracle.counter();
    res.initial_gap = lower_gap(problem, L.x1(u), L.y1(u), L.y2(u), config.reference_tol);

    if (config.K) {
        res.K = *config.K;
    } else {
        const double f0 =
            max_upper_value(problem, L.x1(u), L.y1(u), L.y2(u), config.reference_tol).value;
        res.f0_max_estimate = f0;
        res.K = compute_stochastic_K(std::max(f0, problem.f_low), problem.f_low, config.eps,
                                     res.D2);
        res.notes.push_back("K from the single-run surrogate of E[max f] at the start point");
    }
    std::mt19937_64 rng(config.seed);
    const std::int64_t k_prime = std::uniform_int_distribution<std::int64_t>(1, res.K)(rng);
    res.sampled_k = k_prime;
    res.notes.push_back("k' drawn before the loop; only the k'-th iterate is kept");

    const double delta_sq = penalty_variance(run.pen, oracle);
    res.trace.push_back(run.record(0, res.eps_hat, 0, u, v));

    Vector keep_u = u, keep_v = v;
    res.center_primal = u;
    res.center_dual = v;
    res.terminated_by = TerminationReason::KReached;
    for (std::int64_t k = 0; k < res.K; ++k) {
        if (run.over_budget()) {
            res.terminated_by = TerminationReason::OracleBudget;
            break;
        }
        const ScscSubproblem sub = build_subproblem(run.pen, u, v, config.eps, res.D2);
        SapdParams P = sapd_params(res.eps_hat, sub, delta_sq, config.sapd_T_ceiling);
        if (config.sapd_T)
            P.T = *config.sapd_T;
        // At most two penalty gradients per iteration, three oracle calls each.
        const std::int64_t T_budget =
            std::max<std::int64_t>(1, (config.max_oracle_calls - run.calls().total()) / 6);
        if (P.T > T_budget) {
            P.T = T_budget;
            P.T_clamped = true;
        }
        res.sapd_T_clamped = res.sapd_T_clamped || P.T_clamped;
        const SapdResult r = sapd(P, u, v, make_saddle_model(sub, oracle));
        run.inner_steps += r.iterations;

        const double step = (r.x - u).norm();
        if (k + 1 == k_prime) {
            keep_u = r.x;
            keep_v = r.y;
            res.center_primal = u;
            res.center_dual = v;
        }
        u = r.x;
        v = r.y;
        res.outer_iterations = k + 1;
        res.trace.push_back(run.record(k + 1, res.eps_hat, step, u, v));
        if (config.stop_at_sampled_k && k + 1 == k_prime)
            break;
    }
    if (res.outer_iterations < k_prime) {
        keep_u = u;
        keep_v = v;
        res.notes.push_back("budget hit before k'; returning the last iterate");
    }
    run.finish(keep_u, keep_v, u, v);
    return res;
}

} // namespace bimax
