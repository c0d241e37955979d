#include "bimax/box_lp.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace bimax {

namespace {

constexpr double kPivotTol = 1e-11;
constexpr double kCostTol = 1e-11;

// Tableau over w = z - lo in [0, ub], slacks s >= 0 and artificials a >= 0, rows
// scaled so the initial basis is the identity.
struct Tableau {
    Matrix T;              // B^{-1} [A_w | S | Art]
    Vector xB;             // basic values
    Vector ub;             // upper bounds, +inf for slacks and artificials
    std::vector<Index> basis;
    std::vector<char> at_upper;
    std::vector<char> is_basic;
    std::vector<char> frozen;
    Index pivots = 0;

    double value_of(Index j) const {
        return at_upper[j] ? ub[j] : 0.0;
    }

    // Returns false on iteration limit. Unboundedness cannot occur on the shipped
    // problems since every cost-bearing variable is boxed.
    bool run(const Vector &cost, Index max_pivots) {
        const Index m = T.rows(), N = T.cols();
        Vector cB(m);
        for (;;) {
            for (Index i = 0; i < m; ++i)
                cB[i] = cost[basis[i]];
            Index enter = -1;
            double dir = 0;
            for (Index j = 0; j < N; ++j) {
                if (is_basic[j] || frozen[j])
                    continue;
                const double d = cost[j] - cB.dot(T.col(j));
                if (!at_upper[j] && d < -kCostTol && ub[j] > 0) {
                    enter = j;
                    dir = 1;
                    break;
                }
                if (at_upper[j] && d > kCostTol) {
                    enter = j;
                    dir = -1;
                    break;
                }
            }
            if (enter < 0)
                return true;
            if (pivots >= max_pivots)
                return false;

            double t = ub[enter];
            Index leave = -1;
            bool leave_to_upper = false;
            for (Index i = 0; i < m; ++i) {
                const double a = dir * T(i, enter);
                double lim;
                bool to_upper;
                if (a > kPivotTol) {
                    lim = xB[i] / a;
                    to_upper = false;
                } else if (a < -kPivotTol && std::isfinite(ub[basis[i]])) {
                    lim = (ub[basis[i]] - xB[i]) / (-a);
                    to_upper = true;
                } else {
                    continue;
                }
                lim = std::max(lim, 0.0);
                if (lim < t || (lim == t && leave >= 0 && basis[i] < basis[leave])) {
                    t = lim;
                    leave = i;
                    leave_to_upper = to_upper;
                }
            }
            if (!std::isfinite(t))
                throw std::runtime_error("solve_box_lp: unbounded direction");
            ++pivots;

            xB -= (dir * t) * T.col(enter);
            if (leave < 0) {
                at_upper[enter] = !at_upper[enter];
                continue;
            }
            const double entering_value = dir > 0 ? t : ub[enter] - t;
            const Index out = basis[leave];
            is_basic[out] = 0;
            at_upper[out] = leave_to_upper;
            xB[leave] = entering_value;
            basis[leave] = enter;
            is_basic[enter] = 1;
            at_upper[enter] = 0;

            const double piv = T(leave, enter);
            T.row(leave) /= piv;
            for (Index i = 0; i < m; ++i) {
                if (i == leave)
                    continue;
                const double f = T(i, enter);
                if (f != 0)
                    T.row(i) -= f * T.row(leave);
            }
        }
    }
};

} // namespace

BoxLpResult solve_box_lp(const Vector &c, const Matrix &A, const Vector &b, const Vector &lo,
                         const Vector &hi, Index max_pivots) {
    const Index n = c.size(), m = A.rows();
    if (A.cols() != n || b.size() != m || lo.size() != n || hi.size() != n)
        throw std::invalid_argument("solve_box_lp: dimension mismatch");
    if (!lo.allFinite() || !hi.allFinite() || (hi.array() < lo.array()).any())
        throw std::invalid_argument("solve_box_lp: bounds must be finite with lo <= hi");

    const Vector r = b - A * lo;
    const Index N = n + 2 * m;
    Tableau tab;
    tab.T = Matrix::Zero(m, N);
    tab.xB.resize(m);
    tab.ub = Vector::Constant(N, std::numeric_limits<double>::infinity());
    tab.ub.head(n) = hi - lo;
    tab.basis.resize(m);
    tab.at_upper.assign(N, 0);
    tab.is_basic.assign(N, 0);
    tab.frozen.assign(N, 0);

    Vector phase1 = Vector::Zero(N);
    for (Index i = 0; i < m; ++i) {
        const double s = r[i] >= 0 ? 1.0 : -1.0;
        tab.T.row(i).head(n) = s * A.row(i);
        tab.T(i, n + i) = s;
        tab.T(i, n + m + i) = 1;
        tab.xB[i] = s * r[i];
        if (r[i] >= 0) {
            tab.basis[i] = n + i;
            tab.frozen[n + m + i] = 1;
        } else {
            tab.basis[i] = n + m + i;
            phase1[n + m + i] = 1;
        }
        tab.is_basic[tab.basis[i]] = 1;
    }
    BoxLpResult res;
    if (!tab.run(phase1, max_pivots)) {
        res.status = LpStatus::IterationLimit;
        return res;
    }
    double infeas = 0;
    for (Index i = 0; i < m; ++i)
        if (tab.basis[i] >= n + m)
            infeas += tab.xB[i];
    const double scale = 1 + r.lpNorm<Eigen::Infinity>();
    if (infeas > 1e-9 * scale) {
        res.status = LpStatus::Infeasible;
        res.pivots = tab.pivots;
        return res;
    }
    for (Index j = n + m; j < N; ++j) {
        tab.frozen[j] = 1;
        tab.ub[j] = 0;
    }

    Vector phase2 = Vector::Zero(N);
    phase2.head(n) = c;
    if (!tab.run(phase2, max_pivots))
        res.status = LpStatus::IterationLimit;

    Vector w(n);
    for (Index j = 0; j < n; ++j)
        w[j] = tab.value_of(j);
    for (Index i = 0; i < m; ++i)
        if (tab.basis[i] < n)
            w[tab.basis[i]] = tab.xB[i];
    res.z = (lo + w).cwiseMax(lo).cwiseMin(hi);
    Vector cB(m);
    for (Index i = 0; i < m; ++i)
        cB[i] = phase2[tab.basis[i]];
    res.lambda.resize(m);
    for (Index i = 0; i < m; ++i)
        res.lambda[i] = std::max(0.0, -cB.dot(tab.T.col(n + i)));
    res.value = c.dot(res.z);
    res.pivots = tab.pivots;
    return res;
}

} // namespace bimax
