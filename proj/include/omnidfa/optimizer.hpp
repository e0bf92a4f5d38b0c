#pragma once

#include <cstdint>
#include <span>

#include "omnidfa/encoder.hpp"

namespace omnidfa {

struct AdamWHyper {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double weight_decay = 0.0;
};

struct OptimizerState {
    ParameterSet first_moment;
    ParameterSet second_moment;
    std::uint64_t step = 0;
    AdamWHyper hyper;

    static OptimizerState for_parameters(const ParameterSet& params, double weight_decay);
};

/// One AdamW update of a flat tensor. `step` is the 1-based step count used
/// for bias correction. Decay is applied first: p <- p - lr * wd * p.
void adamw_update(std::span<double> param, std::span<const double> grad, std::span<double> first_moment,
                  std::span<double> second_moment, std::uint64_t step, double lr, const AdamWHyper& hyper);

/// Updates every tensor, then re-projects the real center onto the unit
/// sphere. Throws NonFiniteGradient (naming the tensor) before touching
/// anything if a gradient entry is NaN or infinite.
void optimizer_step(ParameterSet& params, const ParameterSet& grads, OptimizerState& opt, double lr);

/// Linear warmup from 0 to base_lr, then cosine annealing down to min_lr.
double lr_at(std::uint64_t step, std::uint64_t total_steps, std::uint64_t warmup_steps, double base_lr, double min_lr);

}  // namespace omnidfa
