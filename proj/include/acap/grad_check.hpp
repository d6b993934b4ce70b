#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "acap/graph.hpp"

namespace acap {

struct GradCheckReport {
    double max_rel_error = 0.0;
    std::string worst_param;
    std::size_t worst_index = 0;
    double analytic = 0.0;
    double numeric = 0.0;
};

// Central finite differences against the analytic gradients of `loss_fn`.
// loss_fn must be deterministic, must return the loss, and must leave the
// analytic gradients accumulated in the store (i.e. build a tape and call
// backward). Per-element error is |a - n| / max(|a|, |n|, 1e-3); the
// denominator floor keeps finite-difference truncation noise on near-zero
// gradients from dominating the report.
inline GradCheckReport grad_check_report(ParamStore& params,
                                         const std::function<double(ParamStore&)>& loss_fn,
                                         double epsilon = 1e-5) {
    if (!(epsilon >= 1e-6 && epsilon <= 1e-4)) {
        throw ConfigError("grad_check epsilon must lie in [1e-6, 1e-4]");
    }

    params.zero_grads();
    const double base = loss_fn(params);
    std::vector<Tensor> analytic;
    analytic.reserve(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) analytic.push_back(params[i].grad);

    params.zero_grads();
    const double replay = loss_fn(params);
    if (base != replay) {
        throw ContractError("loss_fn is not deterministic: " + std::to_string(base) + " vs " +
                            std::to_string(replay));
    }

    GradCheckReport report;
    for (std::size_t i = 0; i < params.size(); ++i) {
        Param& p = params[i];
        for (std::size_t j = 0; j < p.value.numel(); ++j) {
            const double saved = p.value[j];
            p.value[j] = saved + epsilon;
            params.zero_grads();
            const double up = loss_fn(params);
            p.value[j] = saved - epsilon;
            params.zero_grads();
            const double down = loss_fn(params);
            p.value[j] = saved;

            const double numeric = (up - down) / (2.0 * epsilon);
            const double a = analytic[i][j];
            const double denom = std::max({std::abs(a), std::abs(numeric), 1e-3});
            const double rel = std::abs(a - numeric) / denom;
            if (rel > report.max_rel_error) {
                report.max_rel_error = rel;
                report.worst_param = p.name;
                report.worst_index = j;
                report.analytic = a;
                report.numeric = numeric;
            }
        }
    }
    params.zero_grads();
    return report;
}

inline double grad_check(ParamStore& params,
                         const std::function<double(ParamStore&)>& loss_fn,
                         double epsilon = 1e-5) {
    return grad_check_report(params, loss_fn, epsilon).max_rel_error;
}

}  // namespace acap
