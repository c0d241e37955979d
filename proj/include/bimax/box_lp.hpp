#pragma once

#include "bimax/prox.hpp"

namespace bimax {

enum class LpStatus { Optimal, Infeasible, IterationLimit };

struct BoxLpResult {
    Vector z;
    /// Multipliers of A z <= b: lambda >= 0 with c + A' lambda in -N_box(z).
    Vector lambda;
    double value = 0;
    LpStatus status = LpStatus::Optimal;
    Index pivots = 0;
};

/// min c'z  s.t.  A z <= b,  lo <= z <= hi  (all bounds finite).
/// Bounded-variable primal simplex with Bland's rule.
BoxLpResult solve_box_lp(const Vector &c, const Matrix &A, const Vector &b, const Vector &lo,
                         const Vector &hi, Index max_pivots = 100000);

} // namespace bimax
