#include <doctest.h>

#include <cmath>
#include <numeric>
#include <set>

#include "omnidfa/synthdata.hpp"
#include "support.hpp"

using namespace omnidfa;
using oracle::error_of;

namespace {

SimulatorConfig small_config() {
    SimulatorConfig cfg;
    cfg.generator_count = 4;
    cfg.train_per_class = 40;
    cfg.test_per_class = 10;
    cfg.grid_height = 16;
    cfg.grid_width = 16;
    cfg.seed = 11;
    return cfg;
}

double grid_mean(const SignalGrid& g) {
    const auto v = g.values();
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

TEST_CASE("fingerprint tiles are zero mean, unit norm and weakly overlapping") {
    SimulatorConfig cfg;
    cfg.seed = 3;
    const auto tiles = generate_patterns(cfg);
    REQUIRE(tiles.size() == 12);
    for (std::size_t i = 0; i < tiles.size(); ++i) {
        CHECK(std::abs(std::accumulate(tiles[i].begin(), tiles[i].end(), 0.0)) < 1e-12);
        CHECK(std::abs(norm2(tiles[i]) - 1.0) < 1e-12);
        for (std::size_t j = i + 1; j < tiles.size(); ++j) {
            CHECK(std::abs(dot(tiles[i], tiles[j])) <= SimulatorConfig::kMaxPatternOverlap + 1e-12);
        }
    }
}

TEST_CASE("too many generators for the tile space collide") {
    SimulatorConfig cfg;
    cfg.fingerprint_period = 2;
    cfg.generator_count = 10;
    CHECK(error_of([&] { generate_patterns(cfg); }) == ErrorCode::PatternCollision);
}

TEST_CASE("simulator config validation") {
    SimulatorConfig cfg;
    cfg.generator_count = 2;
    CHECK(error_of([&] { cfg.validate(); }) == ErrorCode::InvalidArgument);
    cfg = {};
    cfg.noise_sigma = -1.0;
    CHECK(error_of([&] { cfg.validate(); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("tile_pattern repeats the tile") {
    const Vector tile{1, 2, 3, 4};
    const auto g = tile_pattern(tile, 2, 3, 5);
    CHECK(g(0, 0) == 1);
    CHECK(g(0, 3) == 2);
    CHECK(g(2, 4) == 1);
    CHECK(g(1, 1) == 4);
}

TEST_CASE("dataset layout and determinism") {
    const auto cfg = small_config();
    const auto a = generate_dataset(cfg);
    const auto b = generate_dataset(cfg);
    CHECK(a.samples == b.samples);
    CHECK(a.samples.size() == (cfg.generator_count + 1) * (cfg.train_per_class + cfg.test_per_class));
    std::set<std::string> ids;
    for (const auto& s : a.samples) ids.insert(s.id);
    CHECK(ids.size() == a.samples.size());
    CHECK(a.samples.front().id == "real-train-000000");

    auto other = cfg;
    other.seed = 12;
    CHECK(generate_dataset(other).samples[0].grid != a.samples[0].grid);
}

TEST_CASE("alpha zero leaves fakes indistinguishable by mean") {
    auto cfg = small_config();
    cfg.fingerprint_strength = 0.0;
    const auto m = generate_dataset(cfg);
    std::vector<double> fake, real;
    for (const auto& s : m.samples) (s.label.is_fake() ? fake : real).push_back(grid_mean(s.grid));
    auto stats = [](const std::vector<double>& v) {
        const double mu = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
        double var = 0.0;
        for (double x : v) var += (x - mu) * (x - mu);
        return std::pair{mu, var / (v.size() - 1)};
    };
    const auto [mf, vf] = stats(fake);
    const auto [mr, vr] = stats(real);
    const double stderr_diff = std::sqrt(vf / fake.size() + vr / real.size());
    CHECK(std::abs(mf - mr) <= 3.0 * stderr_diff);
}

TEST_CASE("noise-free fakes are attributed perfectly by the nearest pattern") {
    auto cfg = small_config();
    cfg.noise_sigma = 0.0;
    cfg.fingerprint_strength = 1.0;
    const auto m = generate_dataset(cfg);
    const auto tiles = generate_patterns(cfg);
    std::vector<SignalGrid> imprints;
    for (const auto& t : tiles) imprints.push_back(tile_pattern(t, cfg.fingerprint_period, cfg.grid_height, cfg.grid_width));

    std::size_t correct = 0, total = 0;
    for (const auto& s : m.samples) {
        if (!s.label.is_fake()) continue;
        auto rng = seeded_rng(cfg.seed, "sample/" + s.id);
        const auto base = generate_base(cfg, rng);
        int best = -1;
        double best_score = -1e300;
        for (std::size_t g = 0; g < imprints.size(); ++g) {
            double score = 0.0;
            for (std::size_t k = 0; k < s.grid.size(); ++k) {
                score += (s.grid.values()[k] - base.values()[k]) * imprints[g].values()[k];
            }
            if (score > best_score) {
                best_score = score;
                best = static_cast<int>(g);
            }
        }
        correct += best == s.label.generator_id();
        ++total;
    }
    CHECK(correct == total);
}

TEST_CASE("separability between two fake classes grows with alpha") {
    auto separability = [](double alpha) {
        auto cfg = small_config();
        cfg.fingerprint_strength = alpha;
        const auto m = generate_dataset(cfg);
        std::vector<const SignalGrid*> a, b;
        for (const auto& s : m.samples) {
            if (s.label == ClassLabel::generator(0)) a.push_back(&s.grid);
            if (s.label == ClassLabel::generator(1)) b.push_back(&s.grid);
        }
        const std::size_t n = a[0]->size();
        auto mean = [n](const std::vector<const SignalGrid*>& g) {
            Vector mu(n, 0.0);
            for (const auto* x : g) {
                for (std::size_t k = 0; k < n; ++k) mu[k] += x->values()[k] / static_cast<double>(g.size());
            }
            return mu;
        };
        const Vector ma = mean(a), mb = mean(b);
        Vector w(n);
        for (std::size_t k = 0; k < n; ++k) w[k] = ma[k] - mb[k];
        auto projected_var = [&](const std::vector<const SignalGrid*>& g, const Vector& mu) {
            double v = 0.0;
            for (const auto* x : g) {
                double p = 0.0;
                for (std::size_t k = 0; k < n; ++k) p += (x->values()[k] - mu[k]) * w[k];
                v += p * p;
            }
            return v / static_cast<double>(g.size() - 1);
        };
        const double between = dot(w, w);
        return between * between / (projected_var(a, ma) + projected_var(b, mb));
    };
    const double s02 = separability(0.2), s06 = separability(0.6), s10 = separability(1.0);
    CHECK(s02 < s06);
    CHECK(s06 < s10);
}

TEST_CASE("quantize") {
    CHECK(quantize(SignalGrid(1, 1, {2.3}), 1.0)(0, 0) == 2.0);
    CHECK(quantize(SignalGrid(1, 1, {-0.26}), 4.0)(0, 0) == -0.25);
    CHECK(error_of([] { quantize(SignalGrid(1, 1), 0.0); }) == ErrorCode::InvalidArgument);
    auto rng = seeded_rng(0, "quantize");
    for (int trial = 0; trial < 100; ++trial) {
        SignalGrid g(8, 8);
        for (double& v : g.values()) v = rng.normal() * 3.0;
        const double q = rng.uniform(1.0, 100.0);
        const auto out = quantize(g, q);
        const auto fine = quantize(g, 1e9);
        for (std::size_t k = 0; k < g.size(); ++k) {
            CHECK(std::abs(out.values()[k] - g.values()[k]) <= 1.0 / (2.0 * q) + 1e-15);
            CHECK(std::abs(fine.values()[k] - g.values()[k]) <= 1e-8);
        }
    }
}

TEST_CASE("smooth") {
    auto rng = seeded_rng(0, "smooth");
    SignalGrid g(12, 9);
    for (double& v : g.values()) v = rng.normal();
    CHECK(smooth(g, 0.0) == g);
    const auto constant = smooth(SignalGrid(7, 5, 2.5), 1.7);
    for (double v : constant.values()) CHECK(std::abs(v - 2.5) < 1e-12);
    for (const double sigma : {0.3, 1.0, 2.0, 4.0}) {
        CHECK(std::abs(grid_mean(smooth(g, sigma)) - grid_mean(g)) < 1e-6);
    }
    CHECK(error_of([&] { smooth(g, -1.0); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("corruptions are deterministic on a deterministic dataset") {
    const auto a = generate_dataset(small_config());
    const auto b = generate_dataset(small_config());
    CHECK(smooth(quantize(a.samples[5].grid, 8), 1.0) == smooth(quantize(b.samples[5].grid, 8), 1.0));
}

TEST_CASE("class folds partition the generators") {
    const auto split = split_folds(12, 3, 7);
    REQUIRE(split.fold_count() == 3);
    std::set<int> all;
    for (const auto& f : split.folds) {
        CHECK(f.size() == 4);
        all.insert(f.begin(), f.end());
    }
    CHECK(all.size() == 12);
    CHECK(*all.begin() == 0);
    CHECK(*all.rbegin() == 11);
    CHECK(split_folds(12, 3, 7).folds == split.folds);

    for (std::size_t h = 0; h < 3; ++h) {
        const auto train = split.training_classes(h);
        CHECK(train.size() == 8);
        for (int id : split.folds[h]) CHECK(std::find(train.begin(), train.end(), id) == train.end());
    }

    const auto big = split_folds(45, 3, 1);
    for (const auto& f : big.folds) CHECK(f.size() == 15);
    CHECK(error_of([] { split_folds(3, 4, 0); }) == ErrorCode::InvalidArgument);
}
