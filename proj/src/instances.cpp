#include "bimax/instances.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include <Eigen/SVD>

#include "bimax/box_lp.hpp"
#include "bimax/kkt.hpp"

namespace bimax {

namespace {

Vector normal_vector(Index n, double sd, std::mt19937_64 &rng) {
    std::normal_distribution<double> N(0.0, sd);
    Vector v(n);
    for (Index i = 0; i < n; ++i)
        v[i] = N(rng);
    return v;
}

Matrix normal_matrix(Index r, Index c, double sd, std::mt19937_64 &rng) {
    std::normal_distribution<double> N(0.0, sd);
    Matrix M(r, c);
    for (Index i = 0; i < r; ++i)
        for (Index j = 0; j < c; ++j)
            M(i, j) = N(rng);
    return M;
}

double abs_normal(std::mt19937_64 &rng) {
    std::normal_distribution<double> N(0.0, 1.0);
    return std::abs(N(rng));
}

} // namespace

LinearInstance gen_linear(Index n, Index m, Index l, std::uint64_t seed, double B_dual) {
    if (n < 1 || m < 1 || l < 1)
        throw std::invalid_argument("gen_linear: n, m, l must be >= 1");
    if (!(B_dual > 0))
        throw std::invalid_argument("gen_linear: B must be positive");
    std::mt19937_64 rng(seed);
    LinearInstance inst;
    inst.n = n;
    inst.m = m;
    inst.l = l;
    inst.seed = seed;
    inst.B_dual = B_dual;

    for (int attempt = 1; attempt <= 100; ++attempt) {
        inst.attempts = attempt;
        inst.c = normal_vector(n, 1.0, rng);
        inst.d = normal_vector(m, 1.0, rng);
        inst.A_tilde = normal_matrix(l, n, 0.01, rng);
        inst.B_tilde = normal_matrix(l, m, 0.01, rng);
        inst.y_hat = normal_vector(m, 0.1, rng).cwiseMax(-1.0).cwiseMin(1.0);

        std::vector<Index> order(l);
        std::iota(order.begin(), order.end(), Index{0});
        std::shuffle(order.begin(), order.end(), rng);
        const Index n_active = (l + 1) / 2;
        inst.active_set.assign(order.begin(), order.begin() + n_active);
        std::sort(inst.active_set.begin(), inst.active_set.end());

        const Vector By = inst.B_tilde * inst.y_hat;
        inst.b_tilde = By;
        inst.multipliers = Vector::Zero(l);
        std::vector<char> active(l, 0);
        for (Index i : inst.active_set)
            active[i] = 1;
        for (Index i = 0; i < l; ++i) {
            if (active[i])
                inst.multipliers[i] = abs_normal(rng) + 0.1;
            else
                inst.b_tilde[i] += abs_normal(rng) + 0.1;
        }
        Vector nu = Vector::Zero(m);
        bool at_bound = false;
        for (Index j = 0; j < m; ++j) {
            if (inst.y_hat[j] >= 1) {
                nu[j] = abs_normal(rng);
                at_bound = true;
            } else if (inst.y_hat[j] <= -1) {
                nu[j] = -abs_normal(rng);
                at_bound = true;
            }
        }
        if (!at_bound && inst.active_set.empty())
            continue;
        inst.d_tilde = -inst.B_tilde.transpose() * inst.multipliers - nu;
        return inst;
    }
    throw std::runtime_error("gen_linear: 100 degenerate draws");
}

double planted_certificate_residual(const LinearInstance &inst) {
    const Vector slack = inst.B_tilde * inst.y_hat - inst.b_tilde;
    const auto box = ProxFunction::box(inst.m, -1.0, 1.0);
    const Vector grad = inst.d_tilde + inst.B_tilde.transpose() * inst.multipliers;
    const double stationarity = normal_cone_distance(box, inst.y_hat, grad);
    const double primal = slack.cwiseMax(0.0).maxCoeff();
    const double dual = (-inst.multipliers).cwiseMax(0.0).maxCoeff();
    const double comp = inst.multipliers.cwiseProduct(slack).cwiseAbs().maxCoeff();
    return std::max({stationarity, primal, dual, comp});
}

ConstrainedBilevelProblem linear_problem(const LinearInstance &inst) {
    const Index n = inst.n, m = inst.m, l = inst.l;
    ConstrainedBilevelProblem cp;
    cp.n_x1 = n;
    cp.n_y1 = m;
    cp.n_con = l;
    const Vector c = inst.c, d = inst.d, dt = inst.d_tilde, bt = inst.b_tilde;
    const Matrix At = inst.A_tilde, Bt = inst.B_tilde;
    Matrix J(l, n + m);
    J << At, Bt;

    cp.eval_f1 = [c, d](const Vector &x, const Vector &y) { return c.dot(x) + d.dot(y); };
    cp.grad_f1 = [c, d](const Vector &, const Vector &) {
        Vector g(c.size() + d.size());
        g << c, d;
        return g;
    };
    cp.eval_fbar1 = [dt](const Vector &, const Vector &y) { return dt.dot(y); };
    cp.grad_fbar1 = [n, dt](const Vector &, const Vector &) {
        Vector g = Vector::Zero(n + dt.size());
        g.tail(dt.size()) = dt;
        return g;
    };
    cp.g_bar = [At, Bt, bt, J](const Vector &x, const Vector &y) {
        return ConstraintValue{At * x + Bt * y - bt, J};
    };
    cp.prox_f2 = ProxFunction::box(n, -1.0, 1.0);
    cp.prox_fbar2 = ProxFunction::box(m, -1.0, 1.0);

    cp.L_fbar = dt.norm();
    cp.L_grad_f1 = 0;
    cp.L_grad_fbar1 = 0;
    cp.L_grad_gbar = 0;
    cp.L_gbar = Eigen::JacobiSVD<Matrix>(J).singularValues()(0);
    cp.dual_bound_override = inst.B_dual;
    // Margin implied by the configured dual bound through B = 2 L_fbar D_Y1 / G.
    cp.slater_margin = 2 * cp.L_fbar * cp.D_Y1() / inst.B_dual;
    cp.slater_point = [Bt, At, bt, m](const Vector &x) {
        // max t  s.t.  B~z + t 1 <= b~ - A~x,  z in [-1,1]^m,  t in [-10,10].
        const Index l = Bt.rows();
        Matrix A(l, m + 1);
        A << Bt, Vector::Ones(l);
        Vector cost = Vector::Zero(m + 1);
        cost[m] = -1;
        Vector lo = Vector::Constant(m + 1, -1.0), hi = Vector::Constant(m + 1, 1.0);
        lo[m] = -10;
        hi[m] = 10;
        auto r = solve_box_lp(cost, A, bt - At * x, lo, hi);
        return Vector(r.z.head(m));
    };
    cp.f_low = -c.lpNorm<1>() - d.lpNorm<1>();
    AffineLowerLevel aff;
    aff.c_y = dt;
    aff.G_x = At;
    aff.G_y = Bt;
    aff.g0 = bt;
    cp.affine = aff;
    return cp;
}

std::pair<Vector, Vector> toy_unconstrained_kkt(double rho) {
    if (!(rho >= 0))
        throw std::invalid_argument("toy_unconstrained_kkt: rho must be nonnegative");
    const double delta = -0.3 / (rho + 1);
    const double x1 = (0.3 - delta) / 2, y1 = (0.3 + delta) / 2;
    Vector primal(3), dual(3);
    primal << x1, y1, 0.0;
    dual << 0.0, x1, 0.0;
    return {primal, dual};
}

ToyUnconstrained make_toy_unconstrained() {
    ToyUnconstrained t;
    auto &p = t.problem;
    p.layout = {1, 1, 1, 1};
    p.eval_f1 = [](const Vector &x1, const Vector &x2, const Vector &y1, const Vector &) {
        return (x1[0] - 0.3) * (x1[0] - 0.3) + y1[0] * y1[0] - x2[0] * x2[0];
    };
    p.grad_f1 = [](const Vector &x1, const Vector &x2, const Vector &y1, const Vector &) {
        Vector g(4);
        g << 2 * (x1[0] - 0.3), -2 * x2[0], 2 * y1[0], 0.0;
        return g;
    };
    p.eval_ftilde1 = [](const Vector &x1, const Vector &y1, const Vector &y2) {
        const double r = y1[0] - x1[0];
        return 0.5 * r * r - 0.5 * y2[0] * y2[0];
    };
    p.grad_ftilde1 = [](const Vector &x1, const Vector &y1, const Vector &y2) {
        const double r = y1[0] - x1[0];
        Vector g(3);
        g << -r, r, -y2[0];
        return g;
    };
    p.prox_f2 = p.prox_f3 = p.prox_ftilde2 = p.prox_ftilde3 = ProxFunction::box(1, -1.0, 1.0);
    p.L_grad_f1 = 2;
    p.L_grad_ftilde1 = 2;
    p.f_low = -1;
    p.mu_ftilde_y1 = 1;
    p.mu_ftilde_y2 = 1;
    p.mu_f_x2 = 2;
    ClosedFormPd pd;
    pd.p = [](const Vector &x1, const Vector &y1) {
        const double r = y1[0] - x1[0];
        return 0.5 * r * r;
    };
    pd.d = [](const Vector &, const Vector &y2) { return -0.5 * y2[0] * y2[0]; };
    p.closed_form_pd = pd;
    p.validate();

    t.analytic_kkt = Vector(3);
    t.analytic_kkt << 0.15, 0.15, 0.0;
    t.info.variant = ToyVariant::UnconstrainedSaddle;
    t.info.analytic_solution = t.analytic_kkt;

    const double rho_check = 1000;
    auto [u, v] = toy_unconstrained_kkt(rho_check);
    auto rep = kkt_report(p, rho_check, u, v);
    if (rep.max_residual() > 1e-9)
        throw std::logic_error("make_toy_unconstrained: analytic KKT point fails its check");
    return t;
}

std::pair<Vector, Vector> toy_constrained_kkt(double rho) {
    if (!(rho >= 1))
        throw std::invalid_argument("toy_constrained_kkt: needs rho >= 1");
    Vector primal(3), dual(2);
    primal << 0.5, 0.5, 1.0;
    dual << 0.5, 1 - 1 / rho;
    return {primal, dual};
}

ToyConstrained make_toy_constrained() {
    ToyConstrained t;
    auto &cp = t.problem;
    cp.n_x1 = 1;
    cp.n_y1 = 1;
    cp.n_con = 1;
    cp.eval_f1 = [](const Vector &, const Vector &y) { return (y[0] - 1) * (y[0] - 1); };
    cp.grad_f1 = [](const Vector &, const Vector &y) {
        Vector g(2);
        g << 0.0, 2 * (y[0] - 1);
        return g;
    };
    cp.eval_fbar1 = [](const Vector &, const Vector &y) { return y[0]; };
    cp.grad_fbar1 = [](const Vector &, const Vector &) {
        Vector g(2);
        g << 0.0, 1.0;
        return g;
    };
    cp.g_bar = [](const Vector &x, const Vector &y) {
        ConstraintValue c;
        c.values = Vector::Constant(1, x[0] - y[0]);
        c.jacobian = Matrix(1, 2);
        c.jacobian << 1.0, -1.0;
        return c;
    };
    cp.prox_f2 = ProxFunction::box(1, 0.0, 0.5);
    cp.prox_fbar2 = ProxFunction::box(1, -1.0, 1.0);
    cp.L_fbar = 1;
    cp.L_grad_f1 = 2;
    cp.L_grad_fbar1 = 0;
    cp.L_grad_gbar = 0;
    cp.L_gbar = std::sqrt(2.0);
    cp.slater_margin = 0.5;
    cp.slater_point = [](const Vector &) { return Vector::Constant(1, 1.0); };
    cp.f_low = 0;
    AffineLowerLevel aff;
    aff.c_y = Vector::Constant(1, 1.0);
    aff.G_x = Matrix::Constant(1, 1, 1.0);
    aff.G_y = Matrix::Constant(1, 1, -1.0);
    aff.g0 = Vector::Zero(1);
    cp.affine = aff;
    cp.validate();

    t.analytic_solution = Vector(2);
    t.analytic_solution << 0.5, 0.5;
    t.info.variant = ToyVariant::ConstrainedScalar;
    t.info.analytic_solution = t.analytic_solution;

    const double rho_check = 100;
    auto [u, v] = toy_constrained_kkt(rho_check);
    if (constrained_kkt(cp, u, v, rho_check).max_residual() > 1e-8)
        throw std::logic_error("make_toy_constrained: analytic point fails its check");
    return t;
}

} // namespace bimax
