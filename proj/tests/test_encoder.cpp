#include <doctest.h>

#include <cmath>

#include "omnidfa/encoder.hpp"
#include "omnidfa/rng.hpp"
#include "support.hpp"

using namespace omnidfa;
using oracle::error_of;

namespace {

SignalGrid ramp(std::size_t h, std::size_t w) {
    SignalGrid g(h, w);
    for (std::size_t r = 0; r < h; ++r) {
        for (std::size_t c = 0; c < w; ++c) g(r, c) = static_cast<double>(r * w + c);
    }
    return g;
}

SignalGrid noise_grid(std::size_t h, std::size_t w, RandomStream& rng) {
    SignalGrid g(h, w);
    for (double& v : g.values()) v = rng.normal();
    return g;
}

double upstream_loss(const ParameterSet& p, const ViewPair& views, const Vector& u) {
    return dot(forward(p, views).embedding, u);
}

}  // namespace

TEST_CASE("views of a grid that is exactly one crop") {
    const auto g = ramp(16, 16);
    auto rng = seeded_rng(0, "views");
    for (const auto mode : {ViewMode::EvalCenter, ViewMode::TrainRandom}) {
        const auto v = make_views(g, 16, mode, &rng);
        CHECK(v.global_view == Vector(g.values().begin(), g.values().end()));
        CHECK(v.local_view == v.global_view);
    }
}

TEST_CASE("global view pools the shorter edge down to the crop") {
    const auto g = ramp(64, 32);
    const auto v = make_views(g, 16, ViewMode::EvalCenter);
    REQUIRE(v.global_view.size() == 256);
    // Pooled grid is 32 x 16; the center 16 x 16 window starts at pooled row 8.
    for (std::size_t i = 0; i < 16; ++i) {
        for (std::size_t j = 0; j < 16; ++j) {
            const std::size_t r = 2 * (i + 8), c = 2 * j;
            const double expected = (g(r, c) + g(r, c + 1) + g(r + 1, c) + g(r + 1, c + 1)) / 4.0;
            CHECK(v.global_view[i * 16 + j] == doctest::Approx(expected).epsilon(1e-14));
        }
    }
    // Local view: native-resolution center crop.
    CHECK(v.local_view[0] == g(24, 8));
    CHECK(v.local_view[255] == g(39, 23));
}

TEST_CASE("area resize with a fractional factor preserves the mean") {
    auto rng = seeded_rng(2, "resize");
    const auto g = noise_grid(30, 45, rng);
    const auto r = area_resize(g, 16);
    CHECK(r.height() == 16);
    CHECK(r.width() == 24);
    double a = 0.0, b = 0.0;
    for (double v : g.values()) a += v;
    for (double v : r.values()) b += v;
    CHECK(a / g.size() == doctest::Approx(b / r.size()).epsilon(1e-12));
}

TEST_CASE("view errors and determinism") {
    CHECK(error_of([] { make_views(SignalGrid(15, 40), 16, ViewMode::EvalCenter); }) == ErrorCode::GridTooSmall);
    auto rng = seeded_rng(0, "views");
    const auto g = noise_grid(32, 32, rng);
    const auto a = make_views(g, 16, ViewMode::EvalCenter);
    const auto b = make_views(g, 16, ViewMode::EvalCenter);
    CHECK(a.global_view == b.global_view);
    CHECK(a.local_view == b.local_view);
    auto r1 = seeded_rng(4, "views");
    auto r2 = seeded_rng(4, "views");
    CHECK(make_views(g, 16, ViewMode::TrainRandom, &r1).local_view ==
          make_views(g, 16, ViewMode::TrainRandom, &r2).local_view);
}

TEST_CASE("initialization") {
    auto rng = seeded_rng(0, "init");
    const EncoderShape shape{8, 6, 4};
    const auto p = init_parameters(shape, rng);
    CHECK(p.shape() == shape);
    CHECK(p.parameter_count() == 2 * (6 * 64 + 6) + (6 * 12 + 6) + (4 * 6 + 4) + 4);
    const double s = 1.0 / std::sqrt(64.0);
    for (double w : p.global_weight.data) CHECK(std::abs(w) <= s);
    for (double b : p.local_bias) CHECK(b == 0.0);
    CHECK(p.output_bias[0] == 0.1);
    CHECK(std::abs(norm2(p.real_center) - 1.0) < 1e-12);
}

TEST_CASE("forward with constructed biases") {
    const EncoderShape shape{4, 3, 5};
    auto p = ParameterSet::zeros(shape);
    const ViewPair views{Vector(16, 1.0), Vector(16, -1.0)};
    p.output_bias = {1, 0, 0, 0, 0};
    auto z = forward(p, views).embedding;
    CHECK(z == Vector{1, 0, 0, 0, 0});
    p.output_bias = {3, 4, 0, 0, 0};
    z = forward(p, views).embedding;
    CHECK(z[0] == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(z[1] == doctest::Approx(0.8).epsilon(1e-15));
    p.output_bias = Vector(5, 0.0);
    CHECK(error_of([&] { forward(p, views); }) == ErrorCode::ZeroFeatureNorm);
}

TEST_CASE("forward outputs are unit norm") {
    auto rng = seeded_rng(1, "norm");
    const auto p = init_parameters({8, 16, 8}, rng);
    for (int t = 0; t < 1000; ++t) {
        const auto g = noise_grid(12, 12, rng);
        const auto z = forward(p, make_views(g, 8, ViewMode::TrainRandom, &rng)).embedding;
        REQUIRE(std::abs(norm2(z) - 1.0) < 1e-10);
    }
}

TEST_CASE("backward kills radial upstream and is linear in it") {
    auto rng = seeded_rng(2, "radial");
    const auto p = init_parameters({8, 6, 4}, rng);
    const auto cache = forward(p, make_views(noise_grid(8, 8, rng), 8, ViewMode::EvalCenter));
    Vector radial = cache.embedding;
    for (double& v : radial) v *= 2.5;
    const auto g = backward(p, cache, radial);
    g.for_each_tensor([](std::string_view, std::span<const double> t) {
        for (double v : t) CHECK(std::abs(v) < 1e-14);
    });
    const auto zero = backward(p, cache, Vector(4, 0.0));
    CHECK(zero == ParameterSet::zeros(p.shape()));
}

TEST_CASE("backward matches central finite differences") {
    auto rng = seeded_rng(3, "fd");
    for (int trial = 0; trial < 3; ++trial) {
        auto p = init_parameters({6, 5, 4}, rng);
        for (double& b : p.hidden_bias) b = rng.uniform(-0.5, 0.5);
        const auto views = make_views(noise_grid(9, 7, rng), 6, ViewMode::EvalCenter);
        const auto u = oracle::random_unit(4, rng);
        const auto grads = backward(p, forward(p, views), u);

        std::vector<std::span<double>> params;
        p.for_each_tensor([&](std::string_view name, std::span<double> t) {
            if (name != "real_center") params.push_back(t);
        });
        std::vector<std::span<const double>> analytic;
        grads.for_each_tensor([&](std::string_view name, std::span<const double> t) {
            if (name != "real_center") analytic.push_back(t);
        });
        double worst = 0.0;
        for (std::size_t t = 0; t < params.size(); ++t) {
            for (std::size_t k = 0; k < params[t].size(); ++k) {
                const double fd = oracle::central_difference([&] { return upstream_loss(p, views, u); }, params[t][k], 1e-5);
                worst = std::max(worst, oracle::relative_error(fd, analytic[t][k]));
            }
        }
        CHECK(worst <= 1e-4);
    }
}

TEST_CASE("embedding is invariant to positive scaling of the output layer") {
    auto rng = seeded_rng(4, "scale");
    auto p = init_parameters({8, 6, 4}, rng);
    const auto views = make_views(noise_grid(8, 8, rng), 8, ViewMode::EvalCenter);
    const auto z = forward(p, views).embedding;
    for (double& w : p.output_weight.data) w *= 3.7;
    for (double& b : p.output_bias) b *= 3.7;
    const auto z2 = forward(p, views).embedding;
    for (std::size_t k = 0; k < z.size(); ++k) CHECK(std::abs(z[k] - z2[k]) < 1e-8);
}

TEST_CASE("stale cache is rejected") {
    auto rng = seeded_rng(5, "stale");
    const auto small = init_parameters({4, 3, 2}, rng);
    const auto big = init_parameters({4, 5, 2}, rng);
    const auto cache = forward(small, make_views(noise_grid(4, 4, rng), 4, ViewMode::EvalCenter));
    CHECK(error_of([&] { backward(big, cache, Vector(2, 1.0)); }) == ErrorCode::StaleCache);
}

TEST_CASE("parallel embedding equals serial embedding") {
    auto rng = seeded_rng(6, "embed");
    const auto p = init_parameters({8, 6, 4}, rng);
    std::vector<SignalGrid> grids;
    for (int i = 0; i < 25; ++i) grids.push_back(noise_grid(10, 10, rng));
    std::vector<const SignalGrid*> ptrs;
    for (const auto& g : grids) ptrs.push_back(&g);
    const auto serial = embed_grids(p, ptrs, 1);
    const auto parallel = embed_grids(p, ptrs, 4);
    REQUIRE(serial.size() == parallel.size());
    for (std::size_t i = 0; i < serial.size(); ++i) {
        CHECK(std::equal(serial[i].values().begin(), serial[i].values().end(), parallel[i].values().begin()));
    }
}
