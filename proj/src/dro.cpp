#include "bimax/dro.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <random>
#include <stdexcept>

#include "bimax/reference.hpp"

namespace bimax {

namespace {

double softplus(double t) { return std::max(t, 0.0) + std::log1p(std::exp(-std::abs(t))); }

struct GroupGrad {
    double loss = 0;
    Matrix gW;
    Vector gy;
};

// Mean logistic loss of label * y1' W a over the selected rows and its gradient.
GroupGrad group_eval(const Matrix &X, const std::vector<Index> *rows, int label, const Matrix &W,
                     const Vector &y1) {
    const Vector v = W.transpose() * y1; // score direction in input space
    const Index n = rows ? static_cast<Index>(rows->size()) : X.rows();
    GroupGrad out;
    Vector xc = Vector::Zero(X.cols());
    for (Index t = 0; t < n; ++t) {
        const Index i = rows ? (*rows)[t] : t;
        const double s = label * X.row(i).dot(v);
        out.loss += softplus(-s);
        const double c = -label / (1 + std::exp(s));
        xc += c * X.row(i).transpose();
    }
    out.loss /= n;
    xc /= n;
    out.gW = y1 * xc.transpose();
    out.gy = W * xc;
    return out;
}

std::vector<Index> draw_rows(Index n, Index k, std::mt19937_64 &rng) {
    std::vector<Index> idx(n);
    std::iota(idx.begin(), idx.end(), Index{0});
    if (k >= n)
        return idx;
    for (Index i = 0; i < k; ++i) {
        std::uniform_int_distribution<Index> pick(i, n - 1);
        std::swap(idx[i], idx[pick(rng)]);
    }
    idx.resize(k);
    return idx;
}

struct Layout {
    Index h, d, G;
    Index nW() const { return h * d; }
    Index nx1() const { return h * d + 1; }
};

Matrix unpack_W(const Layout &L, const Vector &x1) {
    return Eigen::Map<const Matrix>(x1.data(), L.h, L.d);
}

// Gradient of y2' losses(split) over (W, y1) with per-group row selections.
void weighted_grad(const std::vector<DroGroup> &groups, DroSplit split, const Matrix &W,
                   const Vector &y1, const Vector &weights,
                   const std::vector<std::vector<Index>> *rows, Vector &losses, Matrix &gW,
                   Vector &gy) {
    const Index G = static_cast<Index>(groups.size());
    losses.resize(G);
    gW = Matrix::Zero(W.rows(), W.cols());
    gy = Vector::Zero(W.rows());
    for (Index g = 0; g < G; ++g) {
        const Matrix &X = split == DroSplit::Train ? groups[g].train : groups[g].val;
        GroupGrad e = group_eval(X, rows ? &(*rows)[g] : nullptr, groups[g].label, W, y1);
        losses[g] = e.loss;
        gW += weights[g] * e.gW;
        gy += weights[g] * e.gy;
    }
}

Vector simplex_weights(const Vector &losses, double eta) {
    const Index G = losses.size();
    const Vector target = Vector::Constant(G, 1.0 / G) + losses / eta;
    return prox(ProxFunction::truncated_simplex(G, 1.0), target, 1.0);
}

Vector train_losses(const std::vector<DroGroup> &groups, const Matrix &W, const Vector &y1) {
    Vector losses(groups.size());
    for (size_t g = 0; g < groups.size(); ++g)
        losses[g] = group_eval(groups[g].train, nullptr, groups[g].label, W, y1).loss;
    return losses;
}

// min over the head box of p(x1, y1), whose gradient follows from the closed-form
// maximizing weights.
std::pair<Vector, Vector> lower_solution(const std::vector<DroGroup> &groups,
                                         const DroConfig &cfg, const ProxFunction &head_box,
                                         const Vector &x1, double tol) {
    const Layout L{cfg.encoder_dim, cfg.input_dim, cfg.groups};
    const Matrix W = unpack_W(L, x1);
    const double eta = x1[L.nW()];
    auto p_value = [&](const Vector &y1) {
        const Vector losses = train_losses(groups, W, y1);
        const Vector w = simplex_weights(losses, eta);
        return w.dot(losses) - 0.5 * eta * (w.array() - 1.0 / L.G).matrix().squaredNorm() +
               cfg.ridge * y1.squaredNorm();
    };
    SmoothObjective obj;
    obj.value = p_value;
    obj.gradient = [&](const Vector &y1) {
        const Vector w = simplex_weights(train_losses(groups, W, y1), eta);
        Vector losses, gy;
        Matrix gW;
        weighted_grad(groups, DroSplit::Train, W, y1, w, nullptr, losses, gW, gy);
        return Vector(gy + 2 * cfg.ridge * y1);
    };
    const double RW = W.norm();
    obj.L_grad = 0.25 * RW * RW + 2 * cfg.ridge + L.G * RW * RW / eta;
    obj.modulus = 2 * cfg.ridge;
    const Vector y1 = reference_solve(obj, Sense::Minimize, head_box, tol).argopt;
    return {y1, simplex_weights(train_losses(groups, W, y1), eta)};
}

} // namespace

Matrix dro_encoder(const DroInstance &inst, const Vector &x1) {
    const Layout L{inst.config.encoder_dim, inst.config.input_dim, inst.config.groups};
    return unpack_W(L, x1);
}

double dro_eta(const Vector &x1) { return x1[x1.size() - 1]; }

Vector dro_group_losses(const DroInstance &inst, const Vector &x1, const Vector &y1,
                        DroSplit split) {
    const Matrix W = dro_encoder(inst, x1);
    Vector losses(inst.groups.size());
    for (size_t g = 0; g < inst.groups.size(); ++g) {
        const auto &grp = inst.groups[g];
        losses[g] =
            group_eval(split == DroSplit::Train ? grp.train : grp.val, nullptr, grp.label, W, y1)
                .loss;
    }
    return losses;
}

double dro_worst_group_loss(const DroInstance &inst, const Vector &x1, const Vector &y1,
                            DroSplit split) {
    return dro_group_losses(inst, x1, y1, split).maxCoeff();
}

std::pair<Vector, Vector> dro_lower_solution(const DroInstance &inst, const Vector &x1,
                                             double tol) {
    return lower_solution(inst.groups, inst.config, inst.problem.prox_ftilde2, x1, tol);
}

DroInstance gen_dro(const DroConfig &cfg) {
    if (cfg.groups < 2)
        throw std::invalid_argument("gen_dro: need at least 2 groups");
    if (cfg.cap * cfg.groups < 1 || cfg.cap <= 0)
        throw std::invalid_argument("gen_dro: cap p makes the validation simplex empty");
    if (cfg.input_dim < 2 || cfg.encoder_dim < 1 || cfg.minibatch < 1)
        throw std::invalid_argument("gen_dro: invalid dimensions");
    if (!(cfg.minority > 0) || !(cfg.eta_min > 0) || cfg.eta_max < cfg.eta_min ||
        !(cfg.ridge > 0))
        throw std::invalid_argument("gen_dro: invalid minority share, eta range or ridge");

    const Index G = cfg.groups, d = cfg.input_dim, h = cfg.encoder_dim;
    const Index n_major = G >= 3 ? 2 : 1;
    std::vector<Index> train_sizes(G), val_sizes(G, cfg.n_val / G);
    const Index small = std::max<Index>(1, std::llround(cfg.minority * cfg.n_train));
    Index used = 0;
    for (Index g = n_major; g < G; ++g) {
        train_sizes[g] = g == G - 1 ? small : 2 * small;
        used += train_sizes[g];
    }
    if (used >= cfg.n_train)
        throw std::invalid_argument("gen_dro: minority groups exhaust the training set");
    for (Index g = 0; g < n_major; ++g)
        train_sizes[g] = (cfg.n_train - used) / n_major + (g < (cfg.n_train - used) % n_major);
    for (Index g = 0; g < G; ++g)
        if (train_sizes[g] < 1 || val_sizes[g] < 1)
            throw std::invalid_argument("gen_dro: every group needs a sample in each split");

    DroInstance inst;
    inst.config = cfg;
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> N(0.0, 1.0);
    auto sample = [&](int label, int attr, Index n) {
        Matrix X(n, d);
        for (Index i = 0; i < n; ++i) {
            X(i, 0) = label * cfg.core_signal + cfg.core_noise * N(rng);
            X(i, 1) = attr * cfg.spurious_signal + cfg.spurious_noise * N(rng);
            for (Index j = 2; j < d; ++j)
                X(i, j) = N(rng);
        }
        return X;
    };
    double max_norm = 0;
    for (Index g = 0; g < G; ++g) {
        DroGroup grp;
        grp.label = g % 2 == 0 ? 1 : -1;
        grp.attribute = g < n_major ? grp.label : -grp.label;
        grp.train = sample(grp.label, grp.attribute, train_sizes[g]);
        grp.val = sample(grp.label, grp.attribute, val_sizes[g]);
        max_norm = std::max({max_norm, grp.train.rowwise().norm().maxCoeff(),
                             grp.val.rowwise().norm().maxCoeff()});
        inst.groups.push_back(std::move(grp));
    }
    inst.feature_scale = 1 / max_norm;
    for (auto &grp : inst.groups) {
        grp.train *= inst.feature_scale;
        grp.val *= inst.feature_scale;
    }

    const Layout L{h, d, G};
    inst.x1_init.resize(L.nx1());
    std::normal_distribution<double> Ninit(0.0, 0.5);
    for (Index i = 0; i < L.nW(); ++i)
        inst.x1_init[i] = std::clamp(Ninit(rng), -cfg.encoder_bound, cfg.encoder_bound);
    inst.x1_init[L.nW()] = cfg.eta_max;

    const auto groups = std::make_shared<const std::vector<DroGroup>>(inst.groups);
    const double lam = cfg.ridge;
    auto &p = inst.problem;
    p.layout = {L.nx1(), G, h, G};

    p.eval_f1 = [groups, L, lam](const Vector &x1, const Vector &x2, const Vector &y1,
                                 const Vector &) {
        const Matrix W = unpack_W(L, x1);
        double v = lam * W.squaredNorm();
        for (Index g = 0; g < L.G; ++g)
            v += x2[g] * group_eval((*groups)[g].val, nullptr, (*groups)[g].label, W, y1).loss;
        return v;
    };
    auto grad_f1 = [groups, L, lam](const Vector &x1, const Vector &x2, const Vector &y1,
                                    const std::vector<std::vector<Index>> *rows) {
        const Matrix W = unpack_W(L, x1);
        Vector losses, gy;
        Matrix gW;
        weighted_grad(*groups, DroSplit::Val, W, y1, x2, rows, losses, gW, gy);
        gW += 2 * lam * W;
        Vector g = Vector::Zero(L.nx1() + L.G + L.h + L.G);
        g.head(L.nW()) = Eigen::Map<const Vector>(gW.data(), L.nW());
        g.segment(L.nx1(), L.G) = losses;
        g.segment(L.nx1() + L.G, L.h) = gy;
        return g;
    };
    p.grad_f1 = [grad_f1](const Vector &x1, const Vector &x2, const Vector &y1, const Vector &) {
        return grad_f1(x1, x2, y1, nullptr);
    };

    p.eval_ftilde1 = [groups, L, lam](const Vector &x1, const Vector &y1, const Vector &y2) {
        const Matrix W = unpack_W(L, x1);
        const double eta = x1[L.nW()];
        double v = lam * y1.squaredNorm() -
                   0.5 * eta * (y2.array() - 1.0 / L.G).matrix().squaredNorm();
        for (Index g = 0; g < L.G; ++g)
            v += y2[g] * group_eval((*groups)[g].train, nullptr, (*groups)[g].label, W, y1).loss;
        return v;
    };
    auto grad_ft = [groups, L, lam](const Vector &x1, const Vector &y1, const Vector &y2,
                                    const std::vector<std::vector<Index>> *rows) {
        const Matrix W = unpack_W(L, x1);
        const double eta = x1[L.nW()];
        const Vector dev = (y2.array() - 1.0 / L.G).matrix();
        Vector losses, gy;
        Matrix gW;
        weighted_grad(*groups, DroSplit::Train, W, y1, y2, rows, losses, gW, gy);
        Vector g(L.nx1() + L.h + L.G);
        g.head(L.nW()) = Eigen::Map<const Vector>(gW.data(), L.nW());
        g[L.nW()] = -0.5 * dev.squaredNorm();
        g.segment(L.nx1(), L.h) = gy + 2 * lam * y1;
        g.tail(L.G) = losses - eta * dev;
        return g;
    };
    p.grad_ftilde1 = [grad_ft](const Vector &x1, const Vector &y1, const Vector &y2) {
        return grad_ft(x1, y1, y2, nullptr);
    };

    Vector lo(L.nx1()), hi(L.nx1());
    lo.head(L.nW()).setConstant(-cfg.encoder_bound);
    hi.head(L.nW()).setConstant(cfg.encoder_bound);
    lo[L.nW()] = cfg.eta_min;
    hi[L.nW()] = cfg.eta_max;
    p.prox_f2 = ProxFunction::box(lo, hi);
    p.prox_f3 = ProxFunction::truncated_simplex(G, cfg.cap);
    p.prox_ftilde2 = ProxFunction::box(h, -cfg.head_bound, cfg.head_bound);
    p.prox_ftilde3 = ProxFunction::truncated_simplex(G, 1.0);

    // Features have norm <= 1, so the score gradient is bounded by sqrt(RW^2 + Ry^2)
    // and its Hessian by 1.
    const double RW = cfg.encoder_bound * std::sqrt(static_cast<double>(h * d));
    const double Ry = cfg.head_bound * std::sqrt(static_cast<double>(h));
    const double Gl = std::sqrt(RW * RW + Ry * Ry);
    const double Hl = 0.25 * Gl * Gl + 1;
    const double rootG = std::sqrt(static_cast<double>(G));
    p.L_grad_f1 = Hl + 2 * lam + rootG * Gl;
    p.L_grad_ftilde1 = Hl + 2 * lam + cfg.eta_max + rootG * Gl + 1;
    p.f_low = 0;
    p.mu_ftilde_y1 = 2 * lam;
    p.mu_ftilde_y2 = cfg.eta_min;
    p.mu_f_x2 = 0;

    ClosedFormPd pd;
    pd.p = [groups, L, lam](const Vector &x1, const Vector &y1) {
        const Matrix W = unpack_W(L, x1);
        const double eta = x1[L.nW()];
        const Vector losses = train_losses(*groups, W, y1);
        const Vector w = simplex_weights(losses, eta);
        return w.dot(losses) - 0.5 * eta * (w.array() - 1.0 / L.G).matrix().squaredNorm() +
               lam * y1.squaredNorm();
    };
    p.closed_form_pd = pd;
    p.validate();

    const Index mb = cfg.minibatch;
    auto draw = [groups, mb](DroSplit split, std::mt19937_64 &rng) {
        std::vector<std::vector<Index>> rows;
        for (const auto &grp : *groups)
            rows.push_back(draw_rows(split == DroSplit::Train ? grp.train.rows() : grp.val.rows(),
                                     mb, rng));
        return rows;
    };
    inst.samplers.grad_f1 = [grad_f1, draw](const Vector &x1, const Vector &x2, const Vector &y1,
                                            const Vector &, std::mt19937_64 &rng) {
        const auto rows = draw(DroSplit::Val, rng);
        return grad_f1(x1, x2, y1, &rows);
    };
    inst.samplers.grad_ftilde1 = [grad_ft, draw](const Vector &x1, const Vector &y1,
                                                 const Vector &y2, std::mt19937_64 &rng) {
        const auto rows = draw(DroSplit::Train, rng);
        return grad_ft(x1, y1, y2, &rows);
    };

    // Minibatch noise at the starting point with the lower level solved.
    auto [y1_0, y2_0] = dro_lower_solution(inst, inst.x1_init, 1e-8);
    const ProxFunction head_box = p.prox_ftilde2;
    p.lower_saddle = [groups, cfg, head_box](const Vector &x1) {
        return lower_solution(*groups, cfg, head_box, x1, 1e-10);
    };
    const Vector x2_0 = prox(p.prox_f3, Vector::Zero(G), 1.0);
    const Vector gf = p.grad_f1(inst.x1_init, x2_0, y1_0, y2_0);
    const Vector gt = p.grad_ftilde1(inst.x1_init, y1_0, y2_0);
    std::mt19937_64 vrng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
    double sf = 0, st = 0;
    const int draws = 200;
    for (int t = 0; t < draws; ++t) {
        sf += (inst.samplers.grad_f1(inst.x1_init, x2_0, y1_0, y2_0, vrng) - gf).squaredNorm();
        st += (inst.samplers.grad_ftilde1(inst.x1_init, y1_0, y2_0, vrng) - gt).squaredNorm();
    }
    inst.delta_f = std::sqrt(sf / draws);
    inst.delta_ftilde = std::sqrt(st / draws);
    return inst;
}

StochasticOracle dro_oracle(const DroInstance &inst, std::uint64_t seed) {
    return StochasticOracle(inst.problem, inst.samplers, inst.delta_f, inst.delta_ftilde, seed);
}

} // namespace bimax
