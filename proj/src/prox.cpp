#include "bimax/prox.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace bimax {

namespace {

void check_dim(const ProxFunction &fn, const Vector &v, const char *what) {
    if (v.size() != fn.dim())
        throw std::invalid_argument(std::string(what) + ": dimension mismatch (expected " +
                                    std::to_string(fn.dim()) + ", got " +
                                    std::to_string(v.size()) + ")");
}

double effective_cap(const ProxFunction &fn) { return std::min(fn.cap(), 1.0); }

Vector project_truncated_simplex(const Vector &v, double cap) {
    const Index n = v.size();
    auto mass = [&](double tau) {
        return (v.array() - tau).max(0.0).min(cap).sum();
    };
    double lo = v.minCoeff() - cap; // mass(lo) = n * cap >= 1
    double hi = v.maxCoeff();       // mass(hi) = 0
    for (int it = 0; it < 200 && hi - lo > 1e-12 * std::max(1.0, std::abs(hi)); ++it) {
        double mid = 0.5 * (lo + hi);
        (mass(mid) > 1 ? lo : hi) = mid;
    }
    double tau = 0.5 * (lo + hi);
    // Solve the linear piece containing tau exactly.
    double free_sum = 0;
    Index n_free = 0, n_capped = 0;
    for (Index i = 0; i < n; ++i) {
        double w = v[i] - tau;
        if (w >= cap)
            ++n_capped;
        else if (w > 0) {
            free_sum += v[i];
            ++n_free;
        }
    }
    if (n_free > 0)
        tau = (free_sum + static_cast<double>(n_capped) * cap - 1) / static_cast<double>(n_free);
    return (v.array() - tau).max(0.0).min(cap).matrix();
}

double simplex_diameter(Index n, double cap) {
    if (n > 64)
        return std::sqrt(2.0);
    const double c = cap;
    const Index k = static_cast<Index>(std::floor(1 / c + 1e-12));
    double r = 1 - static_cast<double>(k) * c;
    if (r < 1e-14)
        r = 0;
    const Index R = r > 0 ? 1 : 0;
    const Index support = k + R;
    const double norm2 = static_cast<double>(k) * c * c + r * r;
    // Vertices are permutations of (c,...,c, r, 0,...,0); enumerate overlap patterns.
    double best = 0;
    for (Index a = 0; a <= k; ++a)
        for (Index b = 0; b <= R; ++b)
            for (Index cc = 0; cc <= R; ++cc)
                for (Index d = 0; d <= R; ++d) {
                    if (a + b > k || a + cc > k || b + d > R || cc + d > R)
                        continue;
                    if (2 * support - (a + b + cc + d) > n)
                        continue;
                    double inner = static_cast<double>(a) * c * c +
                                   static_cast<double>(b + cc) * c * r +
                                   static_cast<double>(d) * r * r;
                    best = std::max(best, 2 * norm2 - 2 * inner);
                }
    return std::sqrt(best);
}

} // namespace

ProxFunction ProxFunction::box(Vector lo, Vector hi) {
    if (lo.size() != hi.size())
        throw std::invalid_argument("box: lo/hi size mismatch");
    if ((lo.array() > hi.array()).any())
        throw std::invalid_argument("box: lo > hi");
    ProxFunction f;
    f.kind_ = Kind::BoxIndicator;
    f.dim_ = lo.size();
    f.lo_ = std::move(lo);
    f.hi_ = std::move(hi);
    return f;
}

ProxFunction ProxFunction::box(Index n, double lo, double hi) {
    return box(Vector::Constant(n, lo), Vector::Constant(n, hi));
}

ProxFunction ProxFunction::truncated_simplex(Index n, double cap) {
    if (n < 1 || !(cap > 0) || static_cast<double>(n) * cap < 1 - 1e-12)
        throw std::invalid_argument("truncated_simplex: infeasible (n * cap < 1)");
    ProxFunction f;
    f.kind_ = Kind::TruncatedSimplexIndicator;
    f.dim_ = n;
    f.cap_ = cap;
    return f;
}

ProxFunction ProxFunction::zero(Index n) {
    ProxFunction f;
    f.dim_ = n;
    return f;
}

ProxFunction ProxFunction::separable_sum(std::vector<ProxFunction> parts,
                                         std::vector<double> scales) {
    if (scales.empty())
        scales.assign(parts.size(), 1.0);
    if (scales.size() != parts.size())
        throw std::invalid_argument("separable_sum: one scale per part");
    for (double s : scales)
        if (!(s > 0))
            throw std::invalid_argument("separable_sum: scales must be positive");
    ProxFunction f;
    f.kind_ = Kind::SeparableSum;
    Index offset = 0;
    for (const auto &p : parts) {
        f.offsets_.push_back(offset);
        offset += p.dim();
    }
    f.dim_ = offset;
    f.parts_ = std::move(parts);
    f.scales_ = std::move(scales);
    return f;
}

Vector prox(const ProxFunction &fn, const Vector &v, double step) {
    check_dim(fn, v, "prox");
    if (!(step > 0))
        throw std::invalid_argument("prox: step must be positive");
    switch (fn.kind()) {
    case ProxFunction::Kind::BoxIndicator:
        return v.cwiseMax(fn.lo()).cwiseMin(fn.hi());
    case ProxFunction::Kind::TruncatedSimplexIndicator:
        return project_truncated_simplex(v, effective_cap(fn));
    case ProxFunction::Kind::Zero:
        return v;
    case ProxFunction::Kind::SeparableSum: {
        Vector out(v.size());
        for (std::size_t i = 0; i < fn.parts().size(); ++i) {
            const auto &p = fn.parts()[i];
            out.segment(fn.offsets()[i], p.dim()) =
                prox(p, v.segment(fn.offsets()[i], p.dim()), step * fn.scales()[i]);
        }
        return out;
    }
    }
    return v;
}

Vector prox_gradient_map(const ProxFunction &fn, const Vector &x, const Vector &g,
                         double step) {
    check_dim(fn, x, "prox_gradient_map");
    check_dim(fn, g, "prox_gradient_map");
    switch (fn.kind()) {
    case ProxFunction::Kind::BoxIndicator: {
        Vector out(x.size());
        for (Index i = 0; i < x.size(); ++i) {
            double w = x[i] - step * g[i];
            if (w < fn.lo()[i])
                out[i] = (x[i] - fn.lo()[i]) / step;
            else if (w > fn.hi()[i])
                out[i] = (x[i] - fn.hi()[i]) / step;
            else
                out[i] = g[i];
        }
        return out;
    }
    case ProxFunction::Kind::Zero:
        return g;
    case ProxFunction::Kind::SeparableSum: {
        Vector out(x.size());
        for (std::size_t i = 0; i < fn.parts().size(); ++i) {
            const auto &p = fn.parts()[i];
            Index o = fn.offsets()[i];
            // Every shipped part is an indicator or zero, whose prox ignores the scale.
            out.segment(o, p.dim()) =
                prox_gradient_map(p, x.segment(o, p.dim()), g.segment(o, p.dim()), step);
        }
        return out;
    }
    default:
        return (x - prox(fn, x - step * g, step)) / step;
    }
}

double domain_diameter(const ProxFunction &fn) {
    switch (fn.kind()) {
    case ProxFunction::Kind::BoxIndicator:
        return (fn.hi() - fn.lo()).norm();
    case ProxFunction::Kind::TruncatedSimplexIndicator:
        return simplex_diameter(fn.dim(), effective_cap(fn));
    case ProxFunction::Kind::Zero:
        return fn.dim() == 0 ? 0.0 : std::numeric_limits<double>::infinity();
    case ProxFunction::Kind::SeparableSum: {
        double s = 0;
        for (const auto &p : fn.parts()) {
            double d = domain_diameter(p);
            s += d * d;
        }
        return std::sqrt(s);
    }
    }
    return 0;
}

bool in_domain(const ProxFunction &fn, const Vector &x, double tol) {
    if (x.size() != fn.dim())
        return false;
    if (!x.allFinite())
        return false;
    switch (fn.kind()) {
    case ProxFunction::Kind::BoxIndicator:
        return ((x - fn.lo()).array() >= -tol).all() && ((fn.hi() - x).array() >= -tol).all();
    case ProxFunction::Kind::TruncatedSimplexIndicator:
        return (x.array() >= -tol).all() && (x.array() <= effective_cap(fn) + tol).all() &&
               std::abs(x.sum() - 1) <= tol * std::max<double>(1, static_cast<double>(x.size()));
    case ProxFunction::Kind::Zero:
        return true;
    case ProxFunction::Kind::SeparableSum:
        for (std::size_t i = 0; i < fn.parts().size(); ++i) {
            const auto &p = fn.parts()[i];
            if (!in_domain(p, x.segment(fn.offsets()[i], p.dim()), tol))
                return false;
        }
        return true;
    }
    return false;
}

double normal_cone_distance(const ProxFunction &fn, const Vector &x, const Vector &g) {
    check_dim(fn, x, "normal_cone_distance");
    check_dim(fn, g, "normal_cone_distance");
    if (!in_domain(fn, x))
        throw std::domain_error("normal_cone_distance: x outside domain");
    switch (fn.kind()) {
    case ProxFunction::Kind::BoxIndicator: {
        double s = 0;
        for (Index i = 0; i < x.size(); ++i) {
            bool at_lo = x[i] <= fn.lo()[i] + kDomainTol;
            bool at_hi = x[i] >= fn.hi()[i] - kDomainTol;
            double r = g[i];
            if (at_lo && at_hi)
                r = 0;
            else if (at_hi)
                r = std::max(g[i], 0.0);
            else if (at_lo)
                r = std::min(g[i], 0.0);
            s += r * r;
        }
        return std::sqrt(s);
    }
    case ProxFunction::Kind::Zero:
        return g.norm();
    case ProxFunction::Kind::TruncatedSimplexIndicator: {
        // N(x) = {lam 1 - mu on zero coordinates + nu on capped ones}, mu, nu >= 0.
        const double cap = effective_cap(fn);
        std::vector<int> side(static_cast<std::size_t>(x.size()));
        for (Index i = 0; i < x.size(); ++i)
            side[static_cast<std::size_t>(i)] =
                x[i] <= kDomainTol ? -1 : (x[i] >= cap - kDomainTol ? 1 : 0);
        auto phi = [&](double lam) {
            double s = 0;
            for (Index i = 0; i < x.size(); ++i) {
                double r = g[i] + lam;
                const int k = side[static_cast<std::size_t>(i)];
                if (k < 0)
                    r = std::min(r, 0.0);
                else if (k > 0)
                    r = std::max(r, 0.0);
                s += r * r;
            }
            return s;
        };
        std::vector<double> knots;
        for (Index i = 0; i < x.size(); ++i)
            knots.push_back(-g[i]);
        std::sort(knots.begin(), knots.end());
        double best = INFINITY;
        for (std::size_t j = 0; j <= knots.size(); ++j) {
            const double a = j == 0 ? -INFINITY : knots[j - 1];
            const double b = j == knots.size() ? INFINITY : knots[j];
            double sum = 0;
            int cnt = 0;
            const double mid = std::isfinite(a) && std::isfinite(b) ? 0.5 * (a + b)
                               : std::isfinite(a)                   ? a + 1
                               : std::isfinite(b)                   ? b - 1
                                                                    : 0;
            for (Index i = 0; i < x.size(); ++i) {
                const double r = g[i] + mid;
                const int k = side[static_cast<std::size_t>(i)];
                if (k == 0 || (k < 0 && r < 0) || (k > 0 && r > 0)) {
                    sum += g[i];
                    ++cnt;
                }
            }
            double lam = cnt > 0 ? -sum / cnt : mid;
            lam = std::clamp(lam, a, b);
            best = std::min(best, phi(lam));
            if (std::isfinite(a))
                best = std::min(best, phi(a));
        }
        return std::sqrt(best);
    }
    case ProxFunction::Kind::SeparableSum: {
        double s = 0;
        for (std::size_t i = 0; i < fn.parts().size(); ++i) {
            const auto &p = fn.parts()[i];
            Index o = fn.offsets()[i];
            double d = normal_cone_distance(p, x.segment(o, p.dim()), g.segment(o, p.dim()));
            s += d * d;
        }
        return std::sqrt(s);
    }
    default:
        return (x - prox(fn, x - g, 1.0)).norm();
    }
}

double prox_value(const ProxFunction &fn, const Vector &x) {
    if (fn.kind() == ProxFunction::Kind::Zero)
        return 0;
    return in_domain(fn, x) ? 0.0 : std::numeric_limits<double>::infinity();
}

Vector domain_center(const ProxFunction &fn) {
    switch (fn.kind()) {
    case ProxFunction::Kind::BoxIndicator:
        return 0.5 * (fn.lo() + fn.hi());
    case ProxFunction::Kind::TruncatedSimplexIndicator:
        return Vector::Constant(fn.dim(), 1.0 / static_cast<double>(fn.dim()));
    case ProxFunction::Kind::Zero:
        return Vector::Zero(fn.dim());
    case ProxFunction::Kind::SeparableSum: {
        Vector out(fn.dim());
        for (std::size_t i = 0; i < fn.parts().size(); ++i)
            out.segment(fn.offsets()[i], fn.parts()[i].dim()) = domain_center(fn.parts()[i]);
        return out;
    }
    }
    return Vector::Zero(fn.dim());
}

Vector sample_domain(const ProxFunction &fn, std::mt19937_64 &rng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Vector out(fn.dim());
    switch (fn.kind()) {
    case ProxFunction::Kind::BoxIndicator:
        for (Index i = 0; i < fn.dim(); ++i)
            out[i] = fn.lo()[i] + unif(rng) * (fn.hi()[i] - fn.lo()[i]);
        return out;
    case ProxFunction::Kind::TruncatedSimplexIndicator: {
        std::exponential_distribution<double> expo(1.0);
        for (Index i = 0; i < fn.dim(); ++i)
            out[i] = expo(rng);
        return project_truncated_simplex(out / out.sum(), effective_cap(fn));
    }
    case ProxFunction::Kind::Zero: {
        std::normal_distribution<double> normal(0.0, 1.0);
        for (Index i = 0; i < fn.dim(); ++i)
            out[i] = normal(rng);
        return out;
    }
    case ProxFunction::Kind::SeparableSum:
        for (std::size_t i = 0; i < fn.parts().size(); ++i)
            out.segment(fn.offsets()[i], fn.parts()[i].dim()) = sample_domain(fn.parts()[i], rng);
        return out;
    }
    return out;
}

} // namespace bimax
