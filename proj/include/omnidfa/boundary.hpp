#pragma once

#include <span>
#include <vector>

#include "omnidfa/core.hpp"

namespace omnidfa {

/// Authenticity threshold in cosine-distance units, tracked with momentum.
struct BoundaryState {
    double gamma = 0.0;
    double beta = 0.99;
    bool initialized = false;

    bool operator==(const BoundaryState&) const = default;
};

enum class Verdict { Real, Fake };

struct Decision {
    Verdict verdict = Verdict::Real;
    double score = 0.0;
};

/// 1 - z.c, in [0, 2] for unit vectors.
double deviation(std::span<const double> z, std::span<const double> center);

/// Linear-interpolation quantile at position p * (n - 1) of the sorted values.
double quantile(std::span<const double> sorted, double p);

/// Upper Tukey fence Q3 + 1.5 (Q3 - Q1).
double tukey_upper_fence(std::span<const double> values);

/// First call sets gamma to the fence (clamped to 2); later calls blend
/// gamma <- beta * gamma + (1 - beta) * fence. Throws EmptyDeviations.
BoundaryState update_boundary(const BoundaryState& state, std::span<const double> real_deviations);

/// Fake iff deviation > gamma. Throws BoundaryUninitialized.
Decision classify(std::span<const double> z, std::span<const double> center, const BoundaryState& state);

}  // namespace omnidfa
