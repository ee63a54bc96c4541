#pragma once

#include <cmath>
#include <vector>

#include "lpfno/autodiff/graph.hpp"

namespace lpfno::optim {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// Adam with bias correction. Moment buffers live in float64 regardless of
/// the parameter dtype, keyed by registration order; the whole update is a
/// pure function of (state, gradients), so training trajectories are
/// reproducible bit-for-bit.
template <typename T>
class Adam {
public:
    explicit Adam(AdamConfig cfg = {}) : cfg_(cfg) {}

    const AdamConfig& config() const { return cfg_; }
    void set_lr(double lr) { cfg_.lr = lr; }
    std::size_t step_count() const { return t_; }

    void step(std::vector<autodiff::NamedParam<T>>& params) {
        if (m_.empty()) {
            for (const auto& p : params) {
                m_.emplace_back(p.var.value().shape());
                v_.emplace_back(p.var.value().shape());
            }
        }
        if (m_.size() != params.size())
            throw InvalidArgument("optimizer state holds " + std::to_string(m_.size()) +
                                  " parameters, step got " + std::to_string(params.size()));
        ++t_;
        const double bc1 = 1.0 - std::pow(cfg_.beta1, double(t_));
        const double bc2 = 1.0 - std::pow(cfg_.beta2, double(t_));
        for (std::size_t p = 0; p < params.size(); ++p) {
            Tensor<T>& value = params[p].var.mutable_value();
            const Tensor<T>& grad = params[p].var.node().accumulated_grad;
            if (!grad.empty() && !grad.all_finite())
                throw NumericalError("non-finite gradient in parameter '" + params[p].name + "'");
            if (!grad.empty() && !grad.same_shape(value))
                throw InvalidArgument("gradient shape mismatch in parameter '" + params[p].name +
                                      "'");
            for (std::size_t i = 0; i < value.size(); ++i) {
                const double g = grad.empty() ? 0.0 : double(grad[i]);
                m_[p][i] = cfg_.beta1 * m_[p][i] + (1.0 - cfg_.beta1) * g;
                v_[p][i] = cfg_.beta2 * v_[p][i] + (1.0 - cfg_.beta2) * g * g;
                const double mhat = m_[p][i] / bc1;
                const double vhat = v_[p][i] / bc2;
                value[i] = T(double(value[i]) - cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps));
            }
        }
    }

private:
    AdamConfig cfg_;
    std::size_t t_ = 0;
    std::vector<Tensor<double>> m_, v_;
};

/// Step decay: base * gamma^floor(epoch/step).
inline double step_lr(std::size_t epoch, double base_lr, std::size_t step, double gamma) {
    if (step == 0) throw InvalidArgument("step_lr: step must be positive");
    return base_lr * std::pow(gamma, double(epoch / step));
}

/// Decade drop every 100 epochs: base * 0.1^floor(epoch/100).
inline double step_lr(std::size_t epoch, double base_lr) {
    return step_lr(epoch, base_lr, 100, 0.1);
}

}  // namespace lpfno::optim
