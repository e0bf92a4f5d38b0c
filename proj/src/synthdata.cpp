#include "omnidfa/synthdata.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "omnidfa/error.hpp"
#include "omnidfa/rng.hpp"

namespace omnidfa {
namespace {

constexpr int kPatternRetries = 100;
constexpr int kDecorrelationSweeps = 200;

void require(bool condition, const std::string& message) {
    if (!condition) throw Error(ErrorCode::InvalidArgument, message);
}

// Symmetric reflection about the half-sample edge: ... b a | a b c ... c b | b ...
std::size_t reflect(std::ptrdiff_t i, std::size_t n) {
    const auto period = static_cast<std::ptrdiff_t>(2 * n);
    std::ptrdiff_t m = i % period;
    if (m < 0) m += period;
    return m < static_cast<std::ptrdiff_t>(n) ? static_cast<std::size_t>(m) : static_cast<std::size_t>(period - 1 - m);
}

Vector gaussian_kernel(double sigma) {
    const auto radius = static_cast<std::ptrdiff_t>(std::ceil(3.0 * sigma));
    Vector kernel(static_cast<std::size_t>(2 * radius + 1));
    double total = 0.0;
    for (std::ptrdiff_t k = -radius; k <= radius; ++k) {
        const double w = std::exp(-static_cast<double>(k * k) / (2.0 * sigma * sigma));
        kernel[static_cast<std::size_t>(k + radius)] = w;
        total += w;
    }
    for (double& w : kernel) w /= total;
    return kernel;
}

void center_and_normalize(Vector& tile) {
    double mean = 0.0;
    for (double v : tile) mean += v;
    mean /= static_cast<double>(tile.size());
    for (double& v : tile) v -= mean;
    const double n = norm2(tile);
    for (double& v : tile) v /= n;
}

double max_overlap(const std::vector<Vector>& tiles) {
    double worst = 0.0;
    for (std::size_t i = 0; i < tiles.size(); ++i) {
        for (std::size_t j = i + 1; j < tiles.size(); ++j) worst = std::max(worst, std::abs(dot(tiles[i], tiles[j])));
    }
    return worst;
}

// Pushes apart pairs whose overlap exceeds the bound; true once all pairs comply.
bool decorrelate(std::vector<Vector>& tiles, double bound) {
    for (int sweep = 0; sweep < kDecorrelationSweeps; ++sweep) {
        if (max_overlap(tiles) <= bound) return true;
        for (std::size_t i = 0; i < tiles.size(); ++i) {
            for (std::size_t j = i + 1; j < tiles.size(); ++j) {
                const double c = dot(tiles[i], tiles[j]);
                if (std::abs(c) <= bound) continue;
                const Vector ti = tiles[i];
                for (std::size_t k = 0; k < ti.size(); ++k) {
                    tiles[i][k] -= 0.5 * c * tiles[j][k];
                    tiles[j][k] -= 0.5 * c * ti[k];
                }
                center_and_normalize(tiles[i]);
                center_and_normalize(tiles[j]);
            }
        }
    }
    return max_overlap(tiles) <= bound;
}

std::string sample_id(const ClassLabel& label, Split split, std::size_t index) {
    char buf[48];
    if (label.is_real()) {
        std::snprintf(buf, sizeof buf, "real-%s-%06zu", std::string(to_string(split)).c_str(), index);
    } else {
        std::snprintf(buf, sizeof buf, "g%02d-%s-%06zu", label.generator_id(), std::string(to_string(split)).c_str(), index);
    }
    return buf;
}

}  // namespace

void SimulatorConfig::validate() const {
    require(generator_count >= 3, "generator_count must be at least 3");
    require(fingerprint_strength >= 0.0, "fingerprint_strength must be nonnegative");
    require(noise_sigma >= 0.0, "noise_sigma must be nonnegative");
    require(base_smoothness >= 0.0, "base_smoothness must be nonnegative");
    require(base_amplitude >= 0.0, "base_amplitude must be nonnegative");
    require(fingerprint_period >= 2, "fingerprint_period must be at least 2");
    require(grid_height > 0 && grid_width > 0, "grid dimensions must be positive");
}

std::vector<int> FoldSplit::training_classes(std::size_t holdout) const {
    if (holdout >= folds.size()) throw Error(ErrorCode::InvalidArgument, "holdout fold out of range");
    std::vector<int> ids;
    for (std::size_t f = 0; f < folds.size(); ++f) {
        if (f != holdout) ids.insert(ids.end(), folds[f].begin(), folds[f].end());
    }
    std::sort(ids.begin(), ids.end());
    return ids;
}

std::vector<Vector> generate_patterns(const SimulatorConfig& cfg) {
    cfg.validate();
    auto rng = seeded_rng(cfg.seed, "patterns");
    const std::size_t cells = cfg.fingerprint_period * cfg.fingerprint_period;
    for (int attempt = 0; attempt < kPatternRetries; ++attempt) {
        std::vector<Vector> tiles(cfg.generator_count, Vector(cells));
        for (auto& tile : tiles) {
            for (double& v : tile) v = rng.normal();
            center_and_normalize(tile);
        }
        if (decorrelate(tiles, SimulatorConfig::kMaxPatternOverlap)) return tiles;
    }
    throw Error(ErrorCode::PatternCollision, "could not reach pattern overlap <= 0.3 for " +
                                                 std::to_string(cfg.generator_count) + " generators");
}

SignalGrid tile_pattern(const Vector& tile, std::size_t period, std::size_t height, std::size_t width) {
    SignalGrid grid(height, width);
    for (std::size_t r = 0; r < height; ++r) {
        for (std::size_t c = 0; c < width; ++c) grid(r, c) = tile[(r % period) * period + (c % period)];
    }
    return grid;
}

SignalGrid generate_base(const SimulatorConfig& cfg, RandomStream& rng) {
    SignalGrid white(cfg.grid_height, cfg.grid_width);
    for (double& v : white.values()) v = rng.normal();
    if (cfg.base_smoothness <= 0.0) {
        for (double& v : white.values()) v *= cfg.base_amplitude;
        return white;
    }
    SignalGrid base = smooth(white, cfg.base_smoothness);
    // A separable kernel k scales white-noise variance by (sum k^2)^2.
    const Vector kernel = gaussian_kernel(cfg.base_smoothness);
    double energy = 0.0;
    for (double w : kernel) energy += w * w;
    const double scale = cfg.base_amplitude / energy;
    for (double& v : base.values()) v *= scale;
    return base;
}

Manifest generate_dataset(const SimulatorConfig& cfg) {
    cfg.validate();
    const auto tiles = generate_patterns(cfg);
    std::vector<SignalGrid> imprints;
    imprints.reserve(tiles.size());
    for (const auto& tile : tiles) {
        imprints.push_back(tile_pattern(tile, cfg.fingerprint_period, cfg.grid_height, cfg.grid_width));
    }

    Manifest manifest;
    manifest.generator_count = cfg.generator_count;
    manifest.grid_height = cfg.grid_height;
    manifest.grid_width = cfg.grid_width;

    std::vector<ClassLabel> labels{ClassLabel::real()};
    for (std::size_t g = 0; g < cfg.generator_count; ++g) labels.push_back(ClassLabel::generator(static_cast<int>(g)));

    for (const auto& label : labels) {
        for (const Split split : {Split::Train, Split::Test}) {
            const std::size_t count = split == Split::Train ? cfg.train_per_class : cfg.test_per_class;
            for (std::size_t i = 0; i < count; ++i) {
                LabeledSample sample;
                sample.id = sample_id(label, split, i);
                sample.label = label;
                sample.split = split;
                // One stream per sample: generation order never shifts another sample.
                auto rng = seeded_rng(cfg.seed, "sample/" + sample.id);
                SignalGrid grid = generate_base(cfg, rng);
                auto values = grid.values();
                if (label.is_fake()) {
                    const auto imprint = imprints[static_cast<std::size_t>(label.generator_id())].values();
                    for (std::size_t k = 0; k < values.size(); ++k) values[k] += cfg.fingerprint_strength * imprint[k];
                }
                for (double& v : values) v += cfg.noise_sigma * rng.normal();
                sample.grid = std::move(grid);
                manifest.samples.push_back(std::move(sample));
            }
        }
    }
    return manifest;
}

SignalGrid quantize(const SignalGrid& grid, double levels) {
    if (!(levels > 0.0)) throw Error(ErrorCode::InvalidArgument, "quantize levels must be positive");
    SignalGrid out = grid;
    for (double& v : out.values()) v = std::round(v * levels) / levels;
    return out;
}

SignalGrid smooth(const SignalGrid& grid, double sigma) {
    if (!(sigma >= 0.0)) throw Error(ErrorCode::InvalidArgument, "smooth sigma must be nonnegative");
    if (sigma == 0.0) return grid;
    const Vector kernel = gaussian_kernel(sigma);
    const auto radius = static_cast<std::ptrdiff_t>(kernel.size() / 2);
    const std::size_t h = grid.height();
    const std::size_t w = grid.width();

    SignalGrid rows(h, w);
    for (std::size_t r = 0; r < h; ++r) {
        for (std::size_t c = 0; c < w; ++c) {
            double acc = 0.0;
            for (std::ptrdiff_t k = -radius; k <= radius; ++k) {
                acc += kernel[static_cast<std::size_t>(k + radius)] *
                       grid(r, reflect(static_cast<std::ptrdiff_t>(c) + k, w));
            }
            rows(r, c) = acc;
        }
    }
    SignalGrid out(h, w);
    for (std::size_t r = 0; r < h; ++r) {
        for (std::size_t c = 0; c < w; ++c) {
            double acc = 0.0;
            for (std::ptrdiff_t k = -radius; k <= radius; ++k) {
                acc += kernel[static_cast<std::size_t>(k + radius)] *
                       rows(reflect(static_cast<std::ptrdiff_t>(r) + k, h), c);
            }
            out(r, c) = acc;
        }
    }
    return out;
}

FoldSplit split_folds(std::size_t generator_count, std::size_t fold_count, std::uint64_t seed) {
    if (fold_count == 0 || fold_count > generator_count) {
        throw Error(ErrorCode::InvalidArgument, "fold_count must be in [1, generator_count]");
    }
    std::vector<int> ids(generator_count);
    for (std::size_t g = 0; g < generator_count; ++g) ids[g] = static_cast<int>(g);
    auto rng = seeded_rng(seed, "folds");
    shuffle(ids, rng);

    FoldSplit split;
    split.folds.resize(fold_count);
    const std::size_t base = generator_count / fold_count;
    const std::size_t extra = generator_count % fold_count;
    std::size_t next = 0;
    for (std::size_t f = 0; f < fold_count; ++f) {
        const std::size_t size = base + (f < extra ? 1 : 0);
        split.folds[f].assign(ids.begin() + static_cast<std::ptrdiff_t>(next),
                              ids.begin() + static_cast<std::ptrdiff_t>(next + size));
        std::sort(split.folds[f].begin(), split.folds[f].end());
        next += size;
    }
    return split;
}

}  // namespace omnidfa
