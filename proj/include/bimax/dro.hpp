#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "bimax/problem.hpp"

namespace bimax {

/// Synthetic group-DRO hyperparameter tuning with a linear encoder W (h x d) and a linear
/// head y1 (h). Groups pair a label b with a spurious attribute a; groups 0 and 1 have
/// a = b, groups 2 and 3 have a = -b and are the minorities.
struct DroConfig {
    int groups = 4;
    Index n_train = 600;
    Index n_val = 200;
    /// Share of the smallest training group; the next minority gets twice as much.
    double minority = 0.03;
    Index input_dim = 5;
    Index encoder_dim = 2;
    double ridge = 0.1;
    /// Cap of the truncated validation simplex.
    double cap = 1.0;
    /// Samples per group and gradient call; groups smaller than this contribute all rows.
    Index minibatch = 16;
    double eta_min = 0.05, eta_max = 1.0;
    double encoder_bound = 1.0, head_bound = 2.0;
    double core_signal = 1.0, core_noise = 1.0;
    double spurious_signal = 2.0, spurious_noise = 0.5;
    std::uint64_t seed = 0;
};

struct DroGroup {
    int label = 1, attribute = 1;
    /// Rows are feature vectors.
    Matrix train, val;
};

struct DroInstance {
    DroConfig config;
    std::vector<DroGroup> groups;
    /// Factor applied to every feature so that all samples have norm <= 1.
    double feature_scale = 1;
    /// Starting encoder and eta, also the untuned baseline.
    Vector x1_init;
    BilevelMinimaxProblem problem;
    GradientSamplers samplers;
    /// Root mean squared minibatch gradient error at the starting point.
    double delta_f = 0, delta_ftilde = 0;
};

enum class DroSplit { Train, Val };

DroInstance gen_dro(const DroConfig &config);

/// Minibatch oracle for the instance.
StochasticOracle dro_oracle(const DroInstance &inst, std::uint64_t seed);

/// x1 = (vec W column-major, eta).
Matrix dro_encoder(const DroInstance &inst, const Vector &x1);
double dro_eta(const Vector &x1);

/// Per-group mean logistic losses.
Vector dro_group_losses(const DroInstance &inst, const Vector &x1, const Vector &y1,
                        DroSplit split);
double dro_worst_group_loss(const DroInstance &inst, const Vector &x1, const Vector &y1,
                            DroSplit split = DroSplit::Val);

/// Lower-level saddle (y1, y2) at fixed x1 to the given accuracy in y1.
std::pair<Vector, Vector> dro_lower_solution(const DroInstance &inst, const Vector &x1,
                                             double tol = 1e-10);

} // namespace bimax
