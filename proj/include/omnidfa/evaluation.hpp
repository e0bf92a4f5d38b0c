#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "omnidfa/checkpoint.hpp"
#include "omnidfa/core.hpp"
#include "omnidfa/fewshot.hpp"
#include "omnidfa/metrics.hpp"

namespace omnidfa {

enum class CorruptionKind { None, Quantize, Smooth };

struct Corruption {
    CorruptionKind kind = CorruptionKind::None;
    double value = 0.0;

    /// "none", "quantize:<levels>" or "smooth:<sigma>".
    static Corruption parse(std::string_view text);
    std::string to_string() const;
    SignalGrid apply(const SignalGrid& grid) const;
};

/// Which test-split fakes enter a detection run. Auto means generators the
/// checkpoint never trained on, or every generator if there are none.
enum class FakeSelection { Auto, Unseen, Seen, All };

FakeSelection parse_fake_selection(std::string_view text);

struct DetectionResult {
    Corruption corruption;
    AccuracySuite accuracy;
    double ap = 0.0;
    std::size_t fake_count = 0;
    std::size_t real_count = 0;
    std::map<std::string, double> per_class_accuracy;  // "real", "gen:<k>"
};

/// Scores every selected test-split sample against the checkpoint's real
/// center and boundary, after applying `corruption`.
DetectionResult evaluate_detection(const Checkpoint& checkpoint, std::span<const LabeledSample> samples,
                                   const Corruption& corruption = {}, FakeSelection selection = FakeSelection::Auto,
                                   std::size_t threads = 1);

void save_detection_result(const DetectionResult& result, const std::filesystem::path& path);
std::string detection_result_to_string(const DetectionResult& result);

struct FewShotReport {
    EpisodeSpec spec;
    FewShotResult result;
};

void save_fewshot_result(const FewShotReport& report, const std::filesystem::path& path);
std::string fewshot_result_to_string(const FewShotReport& report);

/// Aligned text table over any mix of detection and few-shot result files.
std::string render_report(std::span<const std::filesystem::path> result_files);

/// Aligned table of detection results (used by robustness sweeps).
std::string render_detection_table(std::span<const DetectionResult> results);

}  // namespace omnidfa
