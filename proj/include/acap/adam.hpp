#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "acap/graph.hpp"

namespace acap {

struct AdamConfig {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

// Adam with bias correction. Moments are kept in ParamStore order; `step`
// consumes the accumulated gradients and zeroes them afterwards.
class AdamState {
public:
    AdamState(const ParamStore& params, AdamConfig cfg = {}) : cfg_(cfg) {
        m_.reserve(params.size());
        v_.reserve(params.size());
        for (std::size_t i = 0; i < params.size(); ++i) {
            m_.push_back(Tensor::zeros(params[i].value.shape));
            v_.push_back(Tensor::zeros(params[i].value.shape));
        }
    }

    std::uint64_t step_count() const { return t_; }
    const AdamConfig& config() const { return cfg_; }

    void step(ParamStore& params) {
        if (params.size() != m_.size()) {
            throw ContractError("optimizer state does not match parameter store");
        }
        for (std::size_t i = 0; i < params.size(); ++i) {
            if (!params[i].grad.all_finite()) {
                throw DivergenceError("non-finite gradient in parameter " + params[i].name);
            }
        }
        ++t_;
        const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
        const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
        for (std::size_t i = 0; i < params.size(); ++i) {
            Param& p = params[i];
            Tensor& m = m_[i];
            Tensor& v = v_[i];
            for (std::size_t j = 0; j < p.value.numel(); ++j) {
                const double g = p.grad[j];
                m[j] = cfg_.beta1 * m[j] + (1.0 - cfg_.beta1) * g;
                v[j] = cfg_.beta2 * v[j] + (1.0 - cfg_.beta2) * g * g;
                const double mhat = m[j] / bc1;
                const double vhat = v[j] / bc2;
                p.value[j] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.epsilon);
            }
            p.grad.fill(0.0);
        }
    }

private:
    AdamConfig cfg_;
    std::uint64_t t_ = 0;
    std::vector<Tensor> m_;
    std::vector<Tensor> v_;
};

}  // namespace acap
