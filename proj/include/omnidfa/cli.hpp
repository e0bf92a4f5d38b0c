#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "omnidfa/synthdata.hpp"

namespace omnidfa {

/// Sidecar written next to a synthesized manifest.
struct DatasetMeta {
    SimulatorConfig simulator;
    std::uint64_t fold_seed = 0;
    FoldSplit folds;
};

void save_dataset_meta(const DatasetMeta& meta, const std::filesystem::path& path);
DatasetMeta load_dataset_meta(const std::filesystem::path& path);

/// Entry point shared by the `omnidfa` binary and the tests.
/// Returns 0 on success, 1 on domain errors, 2 on usage errors.
int run_cli(int argc, const char* const* argv);
int run_cli(const std::vector<std::string>& args);

}  // namespace omnidfa
