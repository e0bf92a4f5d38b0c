#pragma once

#include <span>
#include <vector>

namespace omnidfa {

/// Scores are fakeness values in [0, 2]; `truths[i]` and `verdicts[i]` are
/// true for fake.
struct ScoredVerdicts {
    std::vector<double> scores;
    std::vector<bool> truths;
    std::vector<bool> verdicts;

    void validate() const;
};

struct AccuracySuite {
    double fake_acc = 0.0;
    double real_acc = 0.0;
    double acc = 0.0;
};

/// Throws OneSidedGroundTruth unless both fakes and reals are present.
AccuracySuite accuracy_suite(const ScoredVerdicts& v);

/// Grid-swept average precision. Scores are halved onto [0, 1]; at each
/// threshold t in {0, step, ..., 1} an item is predicted fake iff score >= t.
/// Precision with no predicted positives is 1. Points are ordered by recall
/// (ties: higher precision first) and AP = sum_k (R_k - R_{k-1}) P_k.
/// Throws NoPositives when no truth is fake.
double average_precision(std::span<const double> scores, const std::vector<bool>& truths, double step = 0.05);

}  // namespace omnidfa
