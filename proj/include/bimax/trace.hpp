#pragma once

#include <cstdint>
#include <functional>
#include <optional>

#include "bimax/kkt.hpp"

namespace bimax {

/// One row of a solver trace, written per outer iteration. Record 0 describes the
/// initialized point.
struct TraceRecord {
    std::int64_t outer_k = 0;
    std::int64_t oracle_calls_total = 0;
    std::int64_t oracle_calls_f1 = 0;
    std::int64_t oracle_calls_ftilde1 = 0;
    /// Cumulative OptFOM outer iterations or SAPD iterations.
    std::int64_t inner_steps = 0;
    double upper_objective = 0;
    double lower_optimality_gap = 0;
    /// ||[gbar]_+|| on constrained families, p - d otherwise.
    double infeasibility = 0;
    /// ||gbar|| on constrained families, p - d otherwise.
    double infeasibility_raw = 0;
    double eps_k = 0;
    double primal_step_norm = 0;
    std::int64_t wall_ms = 0;
    /// Present on checkpoint records.
    std::optional<KktReport> kkt;
    /// max over the dual block of P_rho at the primal iterate (checkpoints only).
    std::optional<double> max_dual_penalty;
};

/// Fills the objective and gap fields of a record from a primal/dual pair.
using TraceMetrics =
    std::function<void(const Vector &primal, const Vector &dual, TraceRecord &record)>;

/// Returns true to stop after the given record.
using StopRule = std::function<bool(const TraceRecord &record)>;

} // namespace bimax
