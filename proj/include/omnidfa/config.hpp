#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

namespace omnidfa {

enum class BoundaryCadence { PerBatch, PerEpoch };
enum class FakeSampling { Uniform, Stratified };
/// Which samples form the softmax denominator of the contrastive loss.
enum class DenominatorSet { AllButAnchor, PositivesOnly };

/// Training run configuration. Stored on disk as `key = value` lines.
struct RunConfig {
    std::size_t embed_dim = 32;
    std::size_t hidden_dim = 64;
    std::size_t crop_size = 16;
    double temperature = 0.07;
    double lambda_center = 0.01;
    double momentum = 0.99;
    std::size_t fake_batch = 32;
    std::size_t real_batch = 4;
    std::size_t epochs = 20;
    std::size_t warmup_epochs = 2;
    double base_lr = 1e-3;
    double min_lr = 0.0;
    double weight_decay = 1e-2;
    std::uint64_t seed = 0;

    // Training-time corruption ranges; each corruption fires with augment_prob.
    bool augment = true;
    double augment_prob = 0.5;
    double quantize_min = 8.0;
    double quantize_max = 64.0;
    double smooth_min = 0.1;
    double smooth_max = 2.0;

    BoundaryCadence boundary_cadence = BoundaryCadence::PerBatch;
    FakeSampling fake_sampling = FakeSampling::Uniform;
    DenominatorSet denominator = DenominatorSet::AllButAnchor;

    /// Throws InvalidConfig on any violated invariant.
    void validate() const;

    /// Applies one `key = value` pair. Unknown keys throw InvalidConfig.
    void set(const std::string& key, const std::string& value);

    /// Ordered key/value view, used for saving and for checkpoint echo.
    std::map<std::string, std::string> to_map() const;

    bool operator==(const RunConfig&) const = default;
};

RunConfig load_run_config(const std::filesystem::path& path);
void save_run_config(const RunConfig& config, const std::filesystem::path& path);

/// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);

}  // namespace omnidfa
