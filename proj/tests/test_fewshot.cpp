#include <doctest.h>

#include <cmath>
#include <set>

#include "omnidfa/fewshot.hpp"
#include "omnidfa/synthdata.hpp"
#include "omnidfa/trainer.hpp"
#include "support.hpp"

using namespace omnidfa;
using oracle::error_of;

namespace {

ClassPool make_pool(std::size_t classes, std::size_t per_class) {
    ClassPool pool;
    std::size_t next = 0;
    for (std::size_t c = 0; c < classes; ++c) {
        for (std::size_t i = 0; i < per_class; ++i) pool[static_cast<int>(c) + 100].push_back(next++);
    }
    return pool;
}

std::vector<UnitEmbedding> random_embeddings(std::size_t n, std::size_t d, RandomStream& rng) {
    std::vector<UnitEmbedding> out;
    for (std::size_t i = 0; i < n; ++i) out.emplace_back(oracle::random_unit(d, rng));
    return out;
}

}  // namespace

TEST_CASE("episode shape over a fifteen-class pool") {
    const auto pool = make_pool(15, 25);
    EpisodeSpec spec;
    auto rng = episode_rng(spec, 0);
    const auto e = sample_episode(pool, spec, rng);
    CHECK(std::set<int>(e.classes.begin(), e.classes.end()).size() == 5);
    std::set<std::size_t> items;
    for (std::size_t c = 0; c < 5; ++c) {
        CHECK(e.support[c].size() == 5);
        CHECK(e.query[c].size() == 15);
        const auto& members = pool.at(e.classes[c]);
        for (auto i : e.support[c]) CHECK(std::find(members.begin(), members.end(), i) != members.end());
        items.insert(e.support[c].begin(), e.support[c].end());
        items.insert(e.query[c].begin(), e.query[c].end());
    }
    CHECK(items.size() == 5 * 20);
}

TEST_CASE("episode edge cases") {
    const auto pool = make_pool(4, 20);
    EpisodeSpec spec;
    spec.way = 4;
    auto rng = episode_rng(spec, 3);
    const auto e = sample_episode(pool, spec, rng);
    CHECK(std::set<int>(e.classes.begin(), e.classes.end()) == std::set<int>{100, 101, 102, 103});

    auto a = episode_rng(spec, 7);
    auto b = episode_rng(spec, 7);
    const auto ea = sample_episode(pool, spec, a);
    const auto eb = sample_episode(pool, spec, b);
    CHECK(ea.classes == eb.classes);
    CHECK(ea.support == eb.support);
    CHECK(ea.query == eb.query);

    spec.way = 5;
    CHECK(error_of([&] { sample_episode(pool, spec, rng); }) == ErrorCode::InsufficientClassSamples);
    spec.way = 2;
    spec.query_per_class = 16;
    CHECK(error_of([&] { sample_episode(pool, spec, rng); }) == ErrorCode::InsufficientClassSamples);
}

TEST_CASE("class selection is uniform over the pool") {
    const auto pool = make_pool(12, 20);
    EpisodeSpec spec;
    std::map<int, int> counts;
    const int m = 2000;
    for (int i = 0; i < m; ++i) {
        auto rng = episode_rng(spec, static_cast<std::size_t>(i));
        for (int c : sample_episode(pool, spec, rng).classes) counts[c]++;
    }
    const double p = 5.0 / 12.0;
    const double stderr_count = std::sqrt(m * p * (1.0 - p));
    for (const auto& [id, n] : counts) CHECK(std::abs(n - m * p) <= 5.0 * stderr_count);
}

TEST_CASE("prototypes") {
    auto rng = seeded_rng(1, "proto");
    const auto z = random_embeddings(6, 4, rng);
    auto bank = build_prototypes({{3, {z[0]}}});
    for (std::size_t k = 0; k < 4; ++k) CHECK(bank.prototypes[0][k] == doctest::Approx(z[0][k]).epsilon(1e-15));
    bank = build_prototypes({{3, {z[1], z[1]}}});
    for (std::size_t k = 0; k < 4; ++k) CHECK(bank.prototypes[0][k] == doctest::Approx(z[1][k]).epsilon(1e-15));

    bank = build_prototypes({{1, {z[0], z[1], z[2]}}, {2, {z[3], z[4]}}});
    Vector mean(4, 0.0);
    for (int i = 0; i < 3; ++i) {
        for (std::size_t k = 0; k < 4; ++k) mean[k] += z[i][k];
    }
    const double n = std::sqrt(mean[0] * mean[0] + mean[1] * mean[1] + mean[2] * mean[2] + mean[3] * mean[3]);
    for (std::size_t k = 0; k < 4; ++k) CHECK(std::abs(bank.prototypes[0][k] - mean[k] / n) <= 1e-12);

    Vector neg(z[0].values().begin(), z[0].values().end());
    for (double& v : neg) v = -v;
    CHECK(error_of([&] { build_prototypes({{1, {z[0], UnitEmbedding(neg)}}}); }) == ErrorCode::DegenerateMean);
}

TEST_CASE("query classification") {
    const PrototypeBank orth{{4, 9}, {{1, 0, 0}, {0, 1, 0}}};
    auto m = classify_query(Vector{1, 0, 0}, orth);
    CHECK(m.class_id == 4);
    CHECK(m.similarity == 1.0);
    CHECK(classify_query(Vector{0, 1, 0}, orth).class_id == 9);
    const double h = std::sqrt(0.5);
    CHECK(classify_query(Vector{h, h, 0}, orth).class_id == 4);
    const PrototypeBank reversed{{9, 4}, {{0, 1, 0}, {1, 0, 0}}};
    CHECK(classify_query(Vector{h, h, 0}, reversed).class_id == 4);

    auto rng = seeded_rng(2, "query");
    PrototypeBank bank;
    for (int c = 0; c < 6; ++c) {
        bank.class_ids.push_back(c * 3);
        bank.prototypes.push_back(oracle::random_unit(5, rng));
    }
    for (int q = 0; q < 200; ++q) {
        const auto z = oracle::random_unit(5, rng);
        int best = -1;
        double best_sim = -2.0;
        for (std::size_t c = 0; c < bank.prototypes.size(); ++c) {
            double s = 0.0;
            for (std::size_t k = 0; k < 5; ++k) s += z[k] * bank.prototypes[c][k];
            if (s > best_sim) {
                best_sim = s;
                best = bank.class_ids[c];
            }
        }
        CHECK(classify_query(z, bank).class_id == best);

        // Joint sign flip of one coordinate is an orthogonal map.
        auto zf = z;
        zf[2] = -zf[2];
        PrototypeBank flipped = bank;
        for (auto& p : flipped.prototypes) p[2] = -p[2];
        CHECK(classify_query(zf, flipped).class_id == best);
    }
}

TEST_CASE("episodes on random embeddings sit at chance") {
    auto rng = seeded_rng(3, "chance");
    const auto pool = make_pool(10, 30);
    const auto emb = random_embeddings(300, 8, rng);
    EpisodeSpec spec;
    const auto r = run_episodes(emb, pool, spec);
    CHECK(r.episode_accuracies.size() == 1000);
    CHECK(std::abs(r.mean_accuracy - 0.2) <= 3.0 * r.ci95 / 1.96);
}

TEST_CASE("episodes on separated embeddings are perfect and reproducible") {
    const auto pool = make_pool(6, 25);
    std::vector<UnitEmbedding> emb;
    auto rng = seeded_rng(4, "separated");
    for (std::size_t c = 0; c < 6; ++c) {
        for (std::size_t i = 0; i < 25; ++i) {
            Vector v(8, 0.0);
            v[c] = 1.0;
            v[6] = rng.uniform(-0.1, 0.1);
            emb.push_back(UnitEmbedding::normalize(v));
        }
    }
    EpisodeSpec spec;
    spec.episode_count = 100;
    const auto r = run_episodes(emb, pool, spec);
    CHECK(r.mean_accuracy == 1.0);
    CHECK(r.ci95 == 0.0);

    spec.episode_count = 1;
    spec.seed = 9;
    const auto one = run_episodes(emb, pool, spec);
    CHECK(one.episode_accuracies.size() == 1);
    CHECK(run_episodes(emb, pool, spec).mean_accuracy == one.mean_accuracy);
}

TEST_CASE("parallel episodes equal serial episodes") {
    auto rng = seeded_rng(5, "parallel");
    const auto pool = make_pool(8, 25);
    const auto emb = random_embeddings(200, 6, rng);
    EpisodeSpec spec;
    spec.episode_count = 300;
    const auto serial = run_episodes(emb, pool, spec, 1);
    const auto parallel = run_episodes(emb, pool, spec, 4);
    CHECK(serial.episode_accuracies == parallel.episode_accuracies);
    CHECK(serial.mean_accuracy == parallel.mean_accuracy);
}

TEST_CASE("trained encoder separates noise-free unseen generators") {
    SimulatorConfig sim;
    sim.noise_sigma = 0.0;
    sim.fingerprint_strength = 1.0;
    sim.train_per_class = 500;
    sim.test_per_class = 30;
    sim.seed = 4;
    const auto data = generate_dataset(sim);
    std::vector<LabeledSample> train_set;
    for (const auto& s : data.samples) {
        if (s.split == Split::Train && !(s.label.is_fake() && s.label.generator_id() < 4)) train_set.push_back(s);
    }
    RunConfig cfg;
    cfg.epochs = 20;
    const auto trained = train(cfg, train_set);
    CHECK(trained.checkpoint.training_classes == std::vector<int>{4, 5, 6, 7, 8, 9, 10, 11});

    EpisodeSpec spec;
    spec.way = 4;
    spec.episode_count = 100;
    const auto r = run_episodes(trained.checkpoint, data.samples, spec);
    CHECK(r.mean_accuracy == 1.0);
}
