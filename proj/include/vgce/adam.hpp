#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "vgce/tensor.hpp"

namespace vgce {

// Adam with bias correction. One state covers a whole parameter set; the
// step counter advances once per adam_step call.
struct AdamState {
    double lr = 5e-5;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    long step_count = 0;
    std::vector<Tensor2D> first_moment;
    std::vector<Tensor2D> second_moment;

    void reset(std::span<const Tensor2D* const> params) {
        first_moment.clear();
        second_moment.clear();
        for (const Tensor2D* p : params) {
            first_moment.emplace_back(p->rows, p->cols);
            second_moment.emplace_back(p->rows, p->cols);
        }
        step_count = 0;
    }
};

inline void adam_step(std::span<Tensor2D* const> params,
                      std::span<const Tensor2D* const> grads,
                      AdamState& state) {
    if (params.size() != grads.size())
        throw error("adam_step: params/grads count mismatch");
    if (state.first_moment.size() != params.size())
        throw error("adam_step: state not initialized for this parameter set");
    ++state.step_count;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step_count));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step_count));
    for (size_t p = 0; p < params.size(); ++p) {
        Tensor2D& x = *params[p];
        const Tensor2D& g = *grads[p];
        Tensor2D& m = state.first_moment[p];
        Tensor2D& v = state.second_moment[p];
        if (!x.same_shape(g) || !x.same_shape(m))
            throw error("adam_step: shape mismatch at parameter " + std::to_string(p));
        for (size_t i = 0; i < x.size(); ++i) {
            m.data[i] = state.beta1 * m.data[i] + (1.0 - state.beta1) * g.data[i];
            v.data[i] = state.beta2 * v.data[i] + (1.0 - state.beta2) * g.data[i] * g.data[i];
            const double mhat = m.data[i] / bc1;
            const double vhat = v.data[i] / bc2;
            x.data[i] -= state.lr * mhat / (std::sqrt(vhat) + state.epsilon);
        }
    }
}

} // namespace vgce
