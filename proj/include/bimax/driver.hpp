#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bimax/kkt.hpp"
#include "bimax/penalty.hpp"
#include "bimax/problem.hpp"
#include "bimax/trace.hpp"

namespace bimax {

enum class SolveMode { Deterministic, Stochastic };

enum class TerminationReason { StepNorm, OuterBudget, OracleBudget, KReached, UserCriterion };

const char *to_string(TerminationReason reason);
const char *to_string(SolveMode mode);

struct SolverConfig {
    double eps = 1e-2;
    /// Defaults to 1 / eps.
    std::optional<double> rho;
    /// Defaults to eps^1.5.
    std::optional<double> eps_hat;
    /// Outer iterations of the stochastic branch; computed from the K formula when unset.
    std::optional<std::int64_t> K;
    SolveMode mode = SolveMode::Deterministic;
    std::int64_t max_oracle_calls = 10'000'000;
    std::int64_t max_outer_iterations = 1'000'000;
    std::uint64_t seed = 0;
    /// Replaces L_grad_P1 in the subproblem constants.
    std::optional<double> L_override;
    /// Per-subproblem OptFOM iteration cap (0 = none).
    std::int64_t optfom_max_iterations = 0;
    std::int64_t sapd_T_ceiling = 10'000'000;
    /// Fixed SAPD iteration count instead of the formula.
    std::optional<std::int64_t> sapd_T;
    /// Starting x1; the projection of 0 onto dom f2 when unset.
    std::optional<Vector> x1_init;
    /// Full starting blocks; skip initialization when both are set.
    std::optional<Vector> primal_init, dual_init;
    /// Extra checkpoint every this many outer iterations (0 = first and last only).
    std::int64_t checkpoint_every = 0;
    /// Stochastic branch: end the loop at the sampled iterate k' instead of running all K.
    bool stop_at_sampled_k = false;
    double reference_tol = 1e-8;
    bool record_wall_time = false;

    double rho_value() const;
    double eps_hat_value() const;
    /// Throws std::invalid_argument when an invariant fails.
    void validate() const;
};

struct SolveResult {
    Vector primal, dual;
    KktReport kkt;
    std::vector<TraceRecord> trace;
    TerminationReason terminated_by = TerminationReason::StepNorm;
    std::optional<std::int64_t> sampled_k;
    /// Centers of the subproblem that produced the returned point.
    Vector center_primal, center_dual;
    OracleCounter oracle;
    std::int64_t outer_iterations = 0;
    std::int64_t K = 0;
    double rho = 0, eps_hat = 0, L_grad_P1 = 0, D2 = 0;
    double initial_gap = 0;
    /// eps D2 / 4 + 2 eps_hat^2 (1/L + 4 D2^2 L / eps^2).
    double checkpoint_growth_bound = 0;
    /// Surrogate for E[max f] used in the K formula.
    std::optional<double> f0_max_estimate;
    bool sapd_T_clamped = false;
    std::vector<std::string> notes;
};

/// Lower-level starting point with p(x1_0, y1) - d(x1_0, y2) <= eps, found by OptFOM on a
/// regularized lower saddle. Gradient calls go through oracle when given.
std::pair<Vector, Vector> initialize(const BilevelMinimaxProblem &problem, const Vector &x1_0,
                                     double eps);
std::pair<Vector, Vector> initialize(const BilevelMinimaxProblem &problem, const Vector &x1_0,
                                     double eps, GradientOracle &oracle);

/// Gap, objective and infeasibility from p - d and max over x2 of f.
TraceMetrics default_metrics(const BilevelMinimaxProblem &problem, double tol = 1e-8);

/// Stop once eps_k, infeasibility and lower optimality gap are all within their thresholds.
StopRule composite_stop_rule(double eps_k_max = 0.01, double infeasibility_max = 0.01,
                             double lower_gap_max = 0.01);

SolveResult solve_deterministic(const BilevelMinimaxProblem &problem, const SolverConfig &config,
                                const TraceMetrics &metrics = {}, const StopRule &stop = {});

/// Stochastic branch; gradients come from oracle and k' is drawn from the config seed.
SolveResult solve_stochastic(StochasticOracle &oracle, const SolverConfig &config,
                             const TraceMetrics &metrics = {});

/// ceil((f0_max + 1 - f_low + eps D2 / 4) / eps^2).
std::int64_t compute_stochastic_K(double f0_max_estimate, double f_low, double eps, double D2);

} // namespace bimax
