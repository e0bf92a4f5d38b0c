#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "omnidfa/boundary.hpp"
#include "omnidfa/config.hpp"
#include "omnidfa/encoder.hpp"

namespace omnidfa {

/// Everything needed to resume or evaluate a run. Stored as canonical JSON
/// (sorted keys, shortest round-trip doubles) so save -> load -> save is
/// byte-identical.
struct Checkpoint {
    static constexpr int kVersion = 1;

    RunConfig config;
    ParameterSet params;
    BoundaryState boundary;
    std::vector<int> training_classes;  // generator ids seen in training
    std::map<std::string, std::uint64_t> rng_positions;

    bool operator==(const Checkpoint&) const = default;
};

std::string checkpoint_to_string(const Checkpoint& checkpoint);
Checkpoint checkpoint_from_string(const std::string& text);

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
/// Throws IoFailure or MalformedCheckpoint.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace omnidfa
