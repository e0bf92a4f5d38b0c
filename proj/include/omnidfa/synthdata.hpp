#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "omnidfa/core.hpp"
#include "omnidfa/manifest.hpp"
#include "omnidfa/rng.hpp"

namespace omnidfa {

/// Seeded fingerprint simulator settings.
///
/// Real sample:         base + noise
/// Fake sample, class g: base + strength * tile(Phi_g) + noise
///
/// `base` is white noise smoothed with a Gaussian of `base_smoothness` cells and
/// rescaled to per-cell std `base_amplitude`. Phi_g is a zero-mean
/// `fingerprint_period` x `fingerprint_period` tile of unit Frobenius norm,
/// repeated across the grid like an upsampling artifact.
struct SimulatorConfig {
    std::size_t generator_count = 12;
    double fingerprint_strength = 0.6;
    double noise_sigma = 0.25;
    double base_smoothness = 2.0;
    double base_amplitude = 1.0;
    std::size_t fingerprint_period = 4;
    std::size_t grid_height = 32;
    std::size_t grid_width = 32;
    std::size_t train_per_class = 500;
    std::size_t test_per_class = 100;
    std::uint64_t seed = 0;

    static constexpr double kMaxPatternOverlap = 0.3;

    void validate() const;
};

struct FoldSplit {
    std::vector<std::vector<int>> folds;

    std::size_t fold_count() const noexcept { return folds.size(); }
    /// Generator ids in every fold except `holdout`.
    std::vector<int> training_classes(std::size_t holdout) const;
};

/// Per-class fingerprint tiles, each period*period values, row-major.
std::vector<Vector> generate_patterns(const SimulatorConfig& cfg);

/// Tile expanded over the full grid (unnormalized; norm grows with tile count).
SignalGrid tile_pattern(const Vector& tile, std::size_t period, std::size_t height, std::size_t width);

/// Full dataset in manifest form. Deterministic in cfg.
Manifest generate_dataset(const SimulatorConfig& cfg);

/// The noise-free smooth base of one sample, exposed for oracles.
SignalGrid generate_base(const SimulatorConfig& cfg, RandomStream& rng);

/// values -> round(v * levels) / levels. levels must be positive.
SignalGrid quantize(const SignalGrid& grid, double levels);

/// Separable Gaussian blur with symmetric (half-sample) reflection padding.
/// Kernel radius is ceil(3 sigma); sigma == 0 returns the input unchanged.
SignalGrid smooth(const SignalGrid& grid, double sigma);

/// Balanced random partition of [0, generator_count) into fold_count folds.
FoldSplit split_folds(std::size_t generator_count, std::size_t fold_count, std::uint64_t seed);

}  // namespace omnidfa
