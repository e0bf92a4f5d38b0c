#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "omnidfa/checkpoint.hpp"
#include "omnidfa/core.hpp"
#include "omnidfa/rng.hpp"

namespace omnidfa {

struct EpisodeSpec {
    std::size_t way = 5;
    std::size_t shot = 5;
    std::size_t query_per_class = 15;
    std::size_t episode_count = 1000;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Class id -> indices of that class's items in some embedding table.
using ClassPool = std::map<int, std::vector<std::size_t>>;

struct Episode {
    std::vector<int> classes;
    std::vector<std::vector<std::size_t>> support;  // per class, `shot` items
    std::vector<std::vector<std::size_t>> query;    // per class, `query_per_class` items
};

/// `way` classes without replacement, then shot + query items without
/// replacement inside each. Throws InsufficientClassSamples.
Episode sample_episode(const ClassPool& pool, const EpisodeSpec& spec, RandomStream& rng);

/// Episode `index` always uses its own stream, so serial and parallel runs agree.
RandomStream episode_rng(const EpisodeSpec& spec, std::size_t index);

struct PrototypeBank {
    std::vector<int> class_ids;
    std::vector<Vector> prototypes;  // unit norm
};

/// Renormalized mean of each class's support embeddings. Throws DegenerateMean.
PrototypeBank build_prototypes(const std::vector<std::pair<int, std::vector<UnitEmbedding>>>& support);

struct QueryMatch {
    int class_id = -1;
    double similarity = 0.0;
};

/// Highest cosine similarity; ties go to the lowest class id.
QueryMatch classify_query(std::span<const double> z, const PrototypeBank& bank);

struct FewShotResult {
    double mean_accuracy = 0.0;
    double ci95 = 0.0;  // 1.96 * standard error over episodes
    std::vector<double> episode_accuracies;
};

/// Episodes over precomputed embeddings; `pool` indexes into `embeddings`.
FewShotResult run_episodes(std::span<const UnitEmbedding> embeddings, const ClassPool& pool, const EpisodeSpec& spec,
                           std::size_t threads = 1);

/// Embeds the test-split fakes whose generator the checkpoint never trained
/// on (EvalCenter views) and runs the episodes over them.
FewShotResult run_episodes(const Checkpoint& checkpoint, std::span<const LabeledSample> samples,
                           const EpisodeSpec& spec, std::size_t threads = 1);

}  // namespace omnidfa
