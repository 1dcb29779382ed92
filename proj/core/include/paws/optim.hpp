#pragma once

#include <cstddef>
#include <cstdint>
#include <set>
#include <vector>

#include "paws/matrix.hpp"

namespace paws {

/// Classical (heavy-ball) momentum:
///   v <- beta * v - lr * (grad + weight_decay * param)
///   param <- param + v
/// The learning rate multiplies the gradient inside the velocity update. This
/// is deliberately not the common framework variant (v <- beta*v + grad;
/// param <- param - lr*v), which under a varying learning rate behaves like
/// classical momentum with an effective momentum of beta * lr_t / lr_{t-1}.
struct OptimizerState {
    std::vector<Matrix> velocity;  // shapes mirror the parameters
    double momentum = 0.9;         // beta in [0, 1)
    double weight_decay = 1e-6;    // lambda >= 0
    std::set<std::size_t> excluded_from_decay;
    std::uint64_t step_count = 0;
};

/// Bias parameters are excluded from weight decay.
std::set<std::size_t> exclusion_policy(const std::vector<bool>& bias_flags);

OptimizerState make_optimizer(const std::vector<const Matrix*>& params,
                              const std::vector<bool>& bias_flags, double momentum,
                              double weight_decay);

/// One in-place update; grads must align with params.
void sgd_momentum_step(const std::vector<Matrix*>& params, const std::vector<Matrix>& grads,
                       OptimizerState& state, double lr);

/// Linear warmup from start_lr to peak_lr, then cosine decay to final_lr.
struct LrSchedule {
    double warmup_epochs = 0.0;  // may be fractional
    double start_lr = 0.0;
    double peak_lr = 0.0;
    double final_lr = 0.0;
    std::size_t total_epochs = 0;
    std::size_t steps_per_epoch = 0;

    std::size_t total_steps() const { return total_epochs * steps_per_epoch; }
    std::size_t warmup_steps() const;
};

/// Learning rate at a global step. Continuous at the warmup/cosine junction;
/// clamps to final_lr past the end of the schedule.
double lr_at(const LrSchedule& schedule, std::size_t global_step);

}  // namespace paws
