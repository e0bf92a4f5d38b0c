#include "omnidfa/boundary.hpp"

#include <algorithm>
#include <cmath>

#include "omnidfa/error.hpp"

namespace omnidfa {

double deviation(std::span<const double> z, std::span<const double> center) {
    if (z.size() != center.size()) throw Error(ErrorCode::InvalidArgument, "embedding and center dimensions differ");
    return 1.0 - dot(z, center);
}

double quantile(std::span<const double> sorted, double p) {
    if (sorted.empty()) throw Error(ErrorCode::EmptyDeviations, "quantile of an empty list");
    const double position = p * static_cast<double>(sorted.size() - 1);
    const auto lower = static_cast<std::size_t>(std::floor(position));
    const std::size_t upper = std::min(lower + 1, sorted.size() - 1);
    const double frac = position - static_cast<double>(lower);
    return sorted[lower] + frac * (sorted[upper] - sorted[lower]);
}

double tukey_upper_fence(std::span<const double> values) {
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const double q1 = quantile(sorted, 0.25);
    const double q3 = quantile(sorted, 0.75);
    return q3 + 1.5 * (q3 - q1);
}

BoundaryState update_boundary(const BoundaryState& state, std::span<const double> real_deviations) {
    if (real_deviations.empty()) throw Error(ErrorCode::EmptyDeviations, "boundary update needs real deviations");
    for (double d : real_deviations) {
        if (!std::isfinite(d)) throw Error(ErrorCode::InvalidArgument, "deviation is not finite");
    }
    // No deviation exceeds 2, so clamping keeps gamma in range without changing any verdict.
    const double fence = std::min(tukey_upper_fence(real_deviations), 2.0);
    BoundaryState next = state;
    if (!state.initialized) {
        next.gamma = fence;
        next.initialized = true;
    } else {
        next.gamma = state.beta * state.gamma + (1.0 - state.beta) * fence;
    }
    return next;
}

Decision classify(std::span<const double> z, std::span<const double> center, const BoundaryState& state) {
    if (!state.initialized) throw Error(ErrorCode::BoundaryUninitialized, "boundary has not seen any real samples");
    Decision d;
    d.score = deviation(z, center);
    d.verdict = d.score > state.gamma ? Verdict::Fake : Verdict::Real;
    return d;
}

}  // namespace omnidfa
