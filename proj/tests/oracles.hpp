#pragma once

// Brute-force reference computations, written without the library's algorithms.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

struct LpOptimum {
    double value = std::numeric_limits<double>::infinity();
    Vector z;
};

/// min c'z s.t. A z <= b, lo <= z <= hi, by enumerating every vertex of the polytope.
inline LpOptimum vertex_enumeration(const Vector &c, const Matrix &A, const Vector &b,
                                    const Vector &lo, const Vector &hi) {
    const Index m = c.size(), l = A.rows();
    const Index rows = l + 2 * m;
    Matrix H(rows, m);
    Vector r(rows);
    H.topRows(l) = A;
    r.head(l) = b;
    H.block(l, 0, m, m) = Matrix::Identity(m, m);
    r.segment(l, m) = hi;
    H.bottomRows(m) = -Matrix::Identity(m, m);
    r.tail(m) = -lo;

    LpOptimum best;
    std::vector<int> pick(static_cast<size_t>(rows), 0);
    std::fill(pick.end() - m, pick.end(), 1);
    do {
        Matrix S(m, m);
        Vector t(m);
        Index k = 0;
        for (Index i = 0; i < rows; ++i)
            if (pick[static_cast<size_t>(i)]) {
                S.row(k) = H.row(i);
                t[k++] = r[i];
            }
        Eigen::FullPivLU<Matrix> lu(S);
        if (lu.rank() < m)
            continue;
        Vector z = lu.solve(t);
        if (((H * z - r).array() > 1e-9).any())
            continue;
        const double v = c.dot(z);
        if (v < best.value) {
            best.value = v;
            best.z = z;
        }
    } while (std::next_permutation(pick.begin(), pick.end()));
    return best;
}

/// min over the vertices of a box of a linear function.
inline double box_vertex_min(const Vector &c, const Vector &lo, const Vector &hi) {
    const Index m = c.size();
    double best = std::numeric_limits<double>::infinity();
    for (long mask = 0; mask < (1L << m); ++mask) {
        double v = 0;
        for (Index i = 0; i < m; ++i)
            v += c[i] * ((mask >> i) & 1 ? hi[i] : lo[i]);
        best = std::min(best, v);
    }
    return best;
}

/// dist(0, g + N_C(x)) for a 2-D polytope C given by its vertices, searching normal vectors
/// w on a grid of spacing h over [-R, R]^2. w is normal at x when <w, v - x> <= 0 for
/// every vertex v.
inline double grid_normal_cone_distance(const std::vector<Vector> &vertices, const Vector &x,
                                        const Vector &g, double R, double h) {
    double best = g.norm();
    const int n = static_cast<int>(std::lround(R / h));
    for (int i = -n; i <= n; ++i)
        for (int j = -n; j <= n; ++j) {
            const Vector w = Eigen::Vector2d(i * h, j * h);
            bool normal = true;
            for (const auto &v : vertices)
                if (w.dot(v - x) > 1e-12) {
                    normal = false;
                    break;
                }
            if (normal)
                best = std::min(best, (g + w).norm());
        }
    return best;
}

/// Projection onto {z : sum z = 1, 0 <= z <= cap} in 3-D by scanning a grid of the plane.
inline Vector grid_truncated_simplex_3d(const Vector &v, double cap, double h) {
    Vector best(3);
    double best_d = std::numeric_limits<double>::infinity();
    const int n = static_cast<int>(std::lround(cap / h));
    for (int i = 0; i <= n; ++i)
        for (int j = 0; j <= n; ++j) {
            const double a = i * h, b = j * h, c = 1 - a - b;
            if (c < -1e-12 || c > cap + 1e-12)
                continue;
            const Vector z = Eigen::Vector3d(a, b, c);
            const double d = (z - v).squaredNorm();
            if (d < best_d) {
                best_d = d;
                best = z;
            }
        }
    return best;
}

/// Central differences of f at x with step h.
inline Vector central_difference(const std::function<double(const Vector &)> &f, const Vector &x,
                                 double h = 1e-6) {
    Vector g(x.size());
    for (Index i = 0; i < x.size(); ++i) {
        Vector a = x, b = x;
        a[i] += h;
        b[i] -= h;
        g[i] = (f(a) - f(b)) / (2 * h);
    }
    return g;
}

inline double relative_error(const Vector &a, const Vector &b) {
    return (a - b).lpNorm<Eigen::Infinity>() / std::max(1.0, b.lpNorm<Eigen::Infinity>());
}

struct LineFit {
    double a = 0, b = 0, r2 = 0;
};

/// Least squares y = a + b x with its coefficient of determination.
inline LineFit fit_line(const std::vector<double> &x, const std::vector<double> &y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    LineFit f;
    f.b = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    f.a = (sy - f.b * sx) / n;
    const double mean = sy / n;
    double ss_res = 0, ss_tot = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        ss_res += std::pow(y[i] - f.a - f.b * x[i], 2);
        ss_tot += std::pow(y[i] - mean, 2);
    }
    f.r2 = ss_tot > 0 ? 1 - ss_res / ss_tot : 1;
    return f;
}

/// Uniform point strictly inside the box, at least margin away from every face.
inline Vector interior_point(const Vector &lo, const Vector &hi, std::mt19937_64 &rng,
                             double margin = 1e-3) {
    Vector x(lo.size());
    for (Index i = 0; i < lo.size(); ++i) {
        std::uniform_real_distribution<double> U(lo[i] + margin, hi[i] - margin);
        x[i] = U(rng);
    }
    return x;
}

} // namespace oracle
