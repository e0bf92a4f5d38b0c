#include "omnidfa/fewshot.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "omnidfa/encoder.hpp"
#include "omnidfa/error.hpp"
#include "omnidfa/parallel.hpp"

namespace omnidfa {
namespace {

template <typename T>
std::vector<T> draw_distinct(std::vector<T> pool, std::size_t count, RandomStream& rng) {
    for (std::size_t k = 0; k < count; ++k) {
        const auto j = k + static_cast<std::size_t>(rng.index(pool.size() - k));
        std::swap(pool[k], pool[j]);
    }
    pool.resize(count);
    return pool;
}

}  // namespace

void EpisodeSpec::validate() const {
    if (way < 2) throw Error(ErrorCode::InvalidArgument, "way must be at least 2");
    if (shot < 1 || query_per_class < 1 || episode_count < 1) {
        throw Error(ErrorCode::InvalidArgument, "shot, query_per_class and episode_count must be positive");
    }
}

RandomStream episode_rng(const EpisodeSpec& spec, std::size_t index) {
    return seeded_rng(spec.seed, "episode/" + std::to_string(index));
}

Episode sample_episode(const ClassPool& pool, const EpisodeSpec& spec, RandomStream& rng) {
    spec.validate();
    if (pool.size() < spec.way) {
        throw Error(ErrorCode::InsufficientClassSamples, "pool has " + std::to_string(pool.size()) +
                                                             " classes, episode needs " + std::to_string(spec.way));
    }
    std::vector<int> ids;
    for (const auto& [id, members] : pool) ids.push_back(id);

    Episode episode;
    episode.classes = draw_distinct(ids, spec.way, rng);
    const std::size_t needed = spec.shot + spec.query_per_class;
    for (int id : episode.classes) {
        const auto& members = pool.at(id);
        if (members.size() < needed) {
            throw Error(ErrorCode::InsufficientClassSamples, "class " + std::to_string(id) + " has " +
                                                                 std::to_string(members.size()) + " items, needs " +
                                                                 std::to_string(needed));
        }
        auto drawn = draw_distinct(members, needed, rng);
        episode.support.emplace_back(drawn.begin(), drawn.begin() + static_cast<std::ptrdiff_t>(spec.shot));
        episode.query.emplace_back(drawn.begin() + static_cast<std::ptrdiff_t>(spec.shot), drawn.end());
    }
    return episode;
}

PrototypeBank build_prototypes(const std::vector<std::pair<int, std::vector<UnitEmbedding>>>& support) {
    PrototypeBank bank;
    for (const auto& [id, members] : support) {
        if (members.empty()) throw Error(ErrorCode::InvalidArgument, "class " + std::to_string(id) + " has no support");
        if (std::find(bank.class_ids.begin(), bank.class_ids.end(), id) != bank.class_ids.end()) {
            throw Error(ErrorCode::InvalidArgument, "duplicate prototype class " + std::to_string(id));
        }
        Vector mean(members.front().dim(), 0.0);
        for (const auto& z : members) {
            for (std::size_t k = 0; k < mean.size(); ++k) mean[k] += z[k];
        }
        for (double& v : mean) v /= static_cast<double>(members.size());
        const double n = norm2(mean);
        if (!(n >= 1e-12)) throw Error(ErrorCode::DegenerateMean, "support mean of class " + std::to_string(id) + " vanishes");
        for (double& v : mean) v /= n;
        bank.class_ids.push_back(id);
        bank.prototypes.push_back(std::move(mean));
    }
    return bank;
}

QueryMatch classify_query(std::span<const double> z, const PrototypeBank& bank) {
    if (bank.class_ids.empty()) throw Error(ErrorCode::InvalidArgument, "empty prototype bank");
    QueryMatch best;
    for (std::size_t c = 0; c < bank.class_ids.size(); ++c) {
        const double s = dot(z, bank.prototypes[c]);
        const bool better = best.class_id < 0 || s > best.similarity ||
                            (s == best.similarity && bank.class_ids[c] < best.class_id);
        if (better) best = {bank.class_ids[c], s};
    }
    return best;
}

FewShotResult run_episodes(std::span<const UnitEmbedding> embeddings, const ClassPool& pool, const EpisodeSpec& spec,
                           std::size_t threads) {
    spec.validate();
    FewShotResult result;
    result.episode_accuracies.assign(spec.episode_count, 0.0);
    parallel_for(spec.episode_count, threads, [&](std::size_t index) {
        auto rng = episode_rng(spec, index);
        const Episode episode = sample_episode(pool, spec, rng);
        std::vector<std::pair<int, std::vector<UnitEmbedding>>> support;
        for (std::size_t c = 0; c < episode.classes.size(); ++c) {
            std::vector<UnitEmbedding> members;
            for (std::size_t item : episode.support[c]) members.push_back(embeddings[item]);
            support.emplace_back(episode.classes[c], std::move(members));
        }
        const PrototypeBank bank = build_prototypes(support);
        std::size_t correct = 0;
        std::size_t total = 0;
        for (std::size_t c = 0; c < episode.classes.size(); ++c) {
            for (std::size_t item : episode.query[c]) {
                correct += classify_query(embeddings[item].values(), bank).class_id == episode.classes[c] ? 1 : 0;
                ++total;
            }
        }
        result.episode_accuracies[index] = static_cast<double>(correct) / static_cast<double>(total);
    });

    const auto m = static_cast<double>(spec.episode_count);
    double sum = 0.0;
    for (double a : result.episode_accuracies) sum += a;
    result.mean_accuracy = sum / m;
    if (spec.episode_count > 1) {
        double sq = 0.0;
        for (double a : result.episode_accuracies) sq += (a - result.mean_accuracy) * (a - result.mean_accuracy);
        result.ci95 = 1.96 * std::sqrt(sq / (m - 1.0)) / std::sqrt(m);
    }
    return result;
}

FewShotResult run_episodes(const Checkpoint& checkpoint, std::span<const LabeledSample> samples,
                           const EpisodeSpec& spec, std::size_t threads) {
    const auto& seen = checkpoint.training_classes;
    std::vector<const SignalGrid*> grids;
    ClassPool pool;
    for (const auto& s : samples) {
        if (s.split != Split::Test || !s.label.is_fake()) continue;
        const int id = s.label.generator_id();
        if (std::find(seen.begin(), seen.end(), id) != seen.end()) continue;
        pool[id].push_back(grids.size());
        grids.push_back(&s.grid);
    }
    // Open-set guarantee: no episode class was seen in training.
    for (const auto& [id, members] : pool) {
        if (std::find(seen.begin(), seen.end(), id) != seen.end()) {
            throw Error(ErrorCode::InvalidArgument, "episode class " + std::to_string(id) + " was seen in training");
        }
    }
    const auto embeddings = embed_grids(checkpoint.params, grids, threads);
    return run_episodes(embeddings, pool, spec, threads);
}

}  // namespace omnidfa
