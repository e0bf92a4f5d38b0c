#include "omnidfa/optimizer.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "omnidfa/error.hpp"

namespace omnidfa {

OptimizerState OptimizerState::for_parameters(const ParameterSet& params, double weight_decay) {
    OptimizerState opt;
    opt.first_moment = ParameterSet::zeros(params.shape());
    opt.second_moment = ParameterSet::zeros(params.shape());
    opt.hyper.weight_decay = weight_decay;
    return opt;
}

void adamw_update(std::span<double> param, std::span<const double> grad, std::span<double> first_moment,
                  std::span<double> second_moment, std::uint64_t step, double lr, const AdamWHyper& hyper) {
    const double correction1 = 1.0 - std::pow(hyper.beta1, static_cast<double>(step));
    const double correction2 = 1.0 - std::pow(hyper.beta2, static_cast<double>(step));
    for (std::size_t i = 0; i < param.size(); ++i) {
        param[i] -= lr * hyper.weight_decay * param[i];
        first_moment[i] = hyper.beta1 * first_moment[i] + (1.0 - hyper.beta1) * grad[i];
        second_moment[i] = hyper.beta2 * second_moment[i] + (1.0 - hyper.beta2) * grad[i] * grad[i];
        const double m_hat = first_moment[i] / correction1;
        const double v_hat = second_moment[i] / correction2;
        param[i] -= lr * m_hat / (std::sqrt(v_hat) + hyper.epsilon);
    }
}

void optimizer_step(ParameterSet& params, const ParameterSet& grads, OptimizerState& opt, double lr) {
    const EncoderShape shape = params.shape();
    if (!(grads.shape() == shape) || !(opt.first_moment.shape() == shape) || !(opt.second_moment.shape() == shape)) {
        throw Error(ErrorCode::InvalidArgument, "optimizer state shape differs from parameters");
    }
    grads.for_each_tensor([](std::string_view name, std::span<const double> g) {
        if (!all_finite(g)) throw Error(ErrorCode::NonFiniteGradient, "gradient of " + std::string(name) + " is not finite");
    });

    ++opt.step;
    std::vector<std::span<double>> p, m, v;
    std::vector<std::span<const double>> g;
    params.for_each_tensor([&](std::string_view, std::span<double> t) { p.push_back(t); });
    opt.first_moment.for_each_tensor([&](std::string_view, std::span<double> t) { m.push_back(t); });
    opt.second_moment.for_each_tensor([&](std::string_view, std::span<double> t) { v.push_back(t); });
    grads.for_each_tensor([&](std::string_view, std::span<const double> t) { g.push_back(t); });
    for (std::size_t k = 0; k < p.size(); ++k) adamw_update(p[k], g[k], m[k], v[k], opt.step, lr, opt.hyper);
    project_real_center(params);
}

double lr_at(std::uint64_t step, std::uint64_t total_steps, std::uint64_t warmup_steps, double base_lr, double min_lr) {
    if (step > total_steps) throw Error(ErrorCode::InvalidArgument, "lr step beyond the schedule");
    if (step < warmup_steps) return base_lr * static_cast<double>(step) / static_cast<double>(warmup_steps);
    if (total_steps == warmup_steps) return base_lr;
    const double progress =
        static_cast<double>(step - warmup_steps) / static_cast<double>(total_steps - warmup_steps);
    return min_lr + 0.5 * (base_lr - min_lr) * (1.0 + std::cos(std::numbers::pi * progress));
}

}  // namespace omnidfa
