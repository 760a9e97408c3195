#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "vgce/tensor.hpp"

namespace vgce {

struct GradCheckReport {
    double max_rel_err = 0.0;
    bool pass = false;
    std::string worst_param;
    int worst_index = -1;
    double worst_analytic = 0.0;
    double worst_numeric = 0.0;
};

// Central-difference check of analytic gradients. `loss` re-evaluates the
// scalar objective from the current contents of `params` (which are
// perturbed in place and restored). Relative error uses denominator
// max(|analytic|, |numeric|, 1e-8).
inline GradCheckReport finite_difference_check(
    const std::function<double()>& loss,
    std::span<Tensor2D* const> params,
    std::span<const Tensor2D* const> analytic_grads,
    double step, double tolerance,
    std::span<const std::string> param_names = {}) {
    if (step <= 0.0) throw error("finite_difference_check: step must be positive");
    if (params.size() != analytic_grads.size())
        throw error("finite_difference_check: params/grads count mismatch");
    GradCheckReport report;
    for (size_t p = 0; p < params.size(); ++p) {
        Tensor2D& x = *params[p];
        const Tensor2D& g = *analytic_grads[p];
        if (!x.same_shape(g))
            throw error("finite_difference_check: gradient shape mismatch");
        for (size_t i = 0; i < x.size(); ++i) {
            const double saved = x.data[i];
            x.data[i] = saved + step;
            const double f_plus = loss();
            x.data[i] = saved - step;
            const double f_minus = loss();
            x.data[i] = saved;
            if (!std::isfinite(f_plus) || !std::isfinite(f_minus))
                throw error("finite_difference_check: non-finite loss evaluation");
            const double numeric = (f_plus - f_minus) / (2.0 * step);
            const double analytic = g.data[i];
            const double denom = std::max({std::fabs(analytic), std::fabs(numeric), 1e-8});
            const double rel = std::fabs(analytic - numeric) / denom;
            if (rel > report.max_rel_err) {
                report.max_rel_err = rel;
                report.worst_param = p < param_names.size() ? param_names[p]
                                                            : "param" + std::to_string(p);
                report.worst_index = static_cast<int>(i);
                report.worst_analytic = analytic;
                report.worst_numeric = numeric;
            }
        }
    }
    report.pass = report.max_rel_err < tolerance;
    return report;
}

} // namespace vgce
