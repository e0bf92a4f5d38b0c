#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "omnidfa/checkpoint.hpp"
#include "omnidfa/config.hpp"
#include "omnidfa/core.hpp"
#include "omnidfa/rng.hpp"

namespace omnidfa {

/// Draws mixed fake/real batches from a fixed training set. Returned values
/// are indices into that set: fakes first, then reals, each group drawn
/// without replacement.
class BatchComposer {
public:
    explicit BatchComposer(std::span<const LabeledSample> train_set);

    /// Throws InsufficientSamples if either pool is too small.
    std::vector<std::size_t> compose(std::size_t fake_batch, std::size_t real_batch, RandomStream& rng,
                                     FakeSampling sampling = FakeSampling::Uniform) const;

    std::size_t fake_count() const noexcept { return fakes_.size(); }
    std::size_t real_count() const noexcept { return reals_.size(); }
    std::size_t fake_class_count() const noexcept { return by_class_.size(); }
    std::vector<int> fake_classes() const;

private:
    std::vector<std::size_t> fakes_;
    std::vector<std::size_t> reals_;
    std::vector<std::pair<int, std::vector<std::size_t>>> by_class_;
};

std::vector<std::size_t> compose_batch(std::span<const LabeledSample> train_set, std::size_t fake_batch,
                                       std::size_t real_batch, RandomStream& rng,
                                       FakeSampling sampling = FakeSampling::Uniform);

/// Corrupts a training grid: with probability augment_prob each, quantize
/// with log-uniform levels in [quantize_min, quantize_max], then smooth with
/// sigma uniform in [smooth_min, smooth_max].
SignalGrid augment_grid(const SignalGrid& grid, const RunConfig& config, RandomStream& rng);

struct EpochRecord {
    std::size_t epoch = 0;
    double mean_supcon = 0.0;
    double mean_center = 0.0;
    double gamma = 0.0;
    double lr = 0.0;
    double probe_loss = 0.0;
};

struct TrainReport {
    std::vector<EpochRecord> epochs;
    std::string checkpoint_path;
};

struct TrainResult {
    Checkpoint checkpoint;
    TrainReport report;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Runs the full loop: compose batch -> augment -> views -> forward ->
/// combined loss -> backward -> AdamW step -> boundary update. A fixed probe
/// batch is held out of the training pool and scored after every epoch.
TrainResult train(const RunConfig& config, std::span<const LabeledSample> train_set,
                  const EpochCallback& on_epoch = {});

void save_train_report(const TrainReport& report, const std::filesystem::path& path);

}  // namespace omnidfa
