#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

#include "omnidfa/core.hpp"

namespace omnidfa {

/// A labeled sample collection plus the header facts every record obeys.
///
/// On disk: one JSON object per line. Line 1 is the header
///   {"version":1,"generator_count":G,"grid_height":H,"grid_width":W}
/// and each following line is a record
///   {"id":"...","label":"real"|"gen:<k>","split":"train"|"test","values":[H*W reals]}
struct Manifest {
    static constexpr int kVersion = 1;

    std::size_t generator_count = 0;
    std::size_t grid_height = 0;
    std::size_t grid_width = 0;
    std::vector<LabeledSample> samples;
};

/// Errors: IoFailure, MalformedRecord (with line number), DuplicateId,
/// UnknownGenerator.
Manifest load_manifest(const std::filesystem::path& path);

/// Checks the same invariants load_manifest does before writing.
void save_manifest(const Manifest& manifest, const std::filesystem::path& path);

void validate_manifest(const Manifest& manifest);

}  // namespace omnidfa
