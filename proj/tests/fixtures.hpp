#pragma once

#include "bimax/problem.hpp"

namespace fixture {

using bimax::Vector;

/// f1 = x1 x2 and ftilde1 = y1 y2 on unit boxes, one coordinate per block.
inline bimax::BilevelMinimaxProblem bilinear() {
    bimax::BilevelMinimaxProblem p;
    p.layout = {1, 1, 1, 1};
    p.eval_f1 = [](const Vector &x1, const Vector &x2, const Vector &, const Vector &) {
        return x1[0] * x2[0];
    };
    p.grad_f1 = [](const Vector &x1, const Vector &x2, const Vector &, const Vector &) {
        Vector g(4);
        g << x2[0], x1[0], 0.0, 0.0;
        return g;
    };
    p.eval_ftilde1 = [](const Vector &, const Vector &y1, const Vector &y2) {
        return y1[0] * y2[0];
    };
    p.grad_ftilde1 = [](const Vector &, const Vector &y1, const Vector &y2) {
        Vector g(3);
        g << 0.0, y2[0], y1[0];
        return g;
    };
    p.prox_f2 = p.prox_f3 = p.prox_ftilde2 = p.prox_ftilde3 = bimax::ProxFunction::box(1, -1, 1);
    p.L_grad_f1 = 1;
    p.L_grad_ftilde1 = 1;
    p.f_low = -1;
    return p;
}

/// Two-dimensional primal and dual blocks: n_x1 = n_y1 = n_x2 = 1 and no y2,
/// f1 = (x1 - 0.2)^2 + x1 y1 + y1^2 - x2^2 + 0.3 x2, ftilde1 = (y1 - x1)^2 / 2.
inline bimax::BilevelMinimaxProblem planar() {
    bimax::BilevelMinimaxProblem p;
    p.layout = {1, 1, 1, 0};
    p.eval_f1 = [](const Vector &x1, const Vector &x2, const Vector &y1, const Vector &) {
        return (x1[0] - 0.2) * (x1[0] - 0.2) + x1[0] * y1[0] + y1[0] * y1[0] -
               x2[0] * x2[0] + 0.3 * x2[0];
    };
    p.grad_f1 = [](const Vector &x1, const Vector &x2, const Vector &y1, const Vector &) {
        Vector g(3);
        g << 2 * (x1[0] - 0.2) + y1[0], -2 * x2[0] + 0.3, x1[0] + 2 * y1[0];
        return g;
    };
    p.eval_ftilde1 = [](const Vector &x1, const Vector &y1, const Vector &) {
        return 0.5 * (y1[0] - x1[0]) * (y1[0] - x1[0]);
    };
    p.grad_ftilde1 = [](const Vector &x1, const Vector &y1, const Vector &) {
        Vector g(2);
        g << x1[0] - y1[0], y1[0] - x1[0];
        return g;
    };
    p.prox_f2 = p.prox_f3 = p.prox_ftilde2 = bimax::ProxFunction::box(1, -1, 1);
    p.prox_ftilde3 = bimax::ProxFunction::box(0, 0, 0);
    p.L_grad_f1 = 3;
    p.L_grad_ftilde1 = 2;
    p.f_low = -2;
    return p;
}

} // namespace fixture
