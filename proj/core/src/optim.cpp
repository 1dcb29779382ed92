#include "paws/optim.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "paws/errors.hpp"

namespace paws {

std::set<std::size_t> exclusion_policy(const std::vector<bool>& bias_flags) {
    std::set<std::size_t> out;
    for (std::size_t i = 0; i < bias_flags.size(); ++i) {
        if (bias_flags[i]) out.insert(i);
    }
    return out;
}

OptimizerState make_optimizer(const std::vector<const Matrix*>& params,
                              const std::vector<bool>& bias_flags, double momentum,
                              double weight_decay) {
    if (momentum < 0.0 || momentum >= 1.0) {
        throw DomainError("make_optimizer: momentum must lie in [0, 1), got " +
                          std::to_string(momentum));
    }
    if (weight_decay < 0.0) {
        throw DomainError("make_optimizer: weight_decay must be nonnegative");
    }
    if (params.size() != bias_flags.size()) {
        throw ShapeError("make_optimizer: " + std::to_string(params.size()) + " params vs " +
                         std::to_string(bias_flags.size()) + " bias flags");
    }
    OptimizerState state;
    state.momentum = momentum;
    state.weight_decay = weight_decay;
    state.excluded_from_decay = exclusion_policy(bias_flags);
    state.velocity.reserve(params.size());
    for (const Matrix* p : params) state.velocity.emplace_back(p->rows(), p->cols());
    return state;
}

void sgd_momentum_step(const std::vector<Matrix*>& params, const std::vector<Matrix>& grads,
                       OptimizerState& state, double lr) {
    if (params.size() != grads.size() || params.size() != state.velocity.size()) {
        throw ShapeError("sgd_momentum_step: params/grads/velocity counts differ");
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
        Matrix& p = *params[i];
        const Matrix& g = grads[i];
        Matrix& v = state.velocity[i];
        require_same_shape(p, g, "sgd_momentum_step grad");
        require_same_shape(p, v, "sgd_momentum_step velocity");
        const bool decay = state.weight_decay > 0.0 && !state.excluded_from_decay.contains(i);
        auto pd = p.data();
        auto gd = g.data();
        auto vd = v.data();
        for (std::size_t e = 0; e < pd.size(); ++e) {
            const double grad = gd[e] + (decay ? state.weight_decay * pd[e] : 0.0);
            vd[e] = state.momentum * vd[e] - lr * grad;
            pd[e] += vd[e];
        }
    }
    ++state.step_count;
}

std::size_t LrSchedule::warmup_steps() const {
    const double steps = warmup_epochs * static_cast<double>(steps_per_epoch);
    return static_cast<std::size_t>(std::llround(steps));
}

double lr_at(const LrSchedule& schedule, std::size_t global_step) {
    const std::size_t warmup = schedule.warmup_steps();
    const std::size_t total = schedule.total_steps();
    if (global_step >= total) return schedule.final_lr;
    if (global_step < warmup) {
        const double t = static_cast<double>(global_step) / static_cast<double>(warmup);
        return schedule.start_lr + (schedule.peak_lr - schedule.start_lr) * t;
    }
    if (total == warmup) return schedule.peak_lr;
    const double progress = static_cast<double>(global_step - warmup) /
                            static_cast<double>(total - warmup);
    return schedule.final_lr + (schedule.peak_lr - schedule.final_lr) *
                                   (1.0 + std::cos(std::numbers::pi * progress)) / 2.0;
}

}  // namespace paws
