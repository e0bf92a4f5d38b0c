#include "omnidfa/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "omnidfa/error.hpp"

namespace omnidfa {

void ScoredVerdicts::validate() const {
    if (scores.empty()) throw Error(ErrorCode::InvalidArgument, "no scored items");
    if (truths.size() != scores.size() || verdicts.size() != scores.size()) {
        throw Error(ErrorCode::InvalidArgument, "scores, truths and verdicts differ in length");
    }
    for (double s : scores) {
        if (!std::isfinite(s)) throw Error(ErrorCode::InvalidArgument, "score is not finite");
    }
}

AccuracySuite accuracy_suite(const ScoredVerdicts& v) {
    v.validate();
    std::size_t fakes = 0, reals = 0, fake_hits = 0, real_hits = 0;
    for (std::size_t i = 0; i < v.truths.size(); ++i) {
        const bool hit = v.truths[i] == v.verdicts[i];
        if (v.truths[i]) {
            ++fakes;
            fake_hits += hit ? 1 : 0;
        } else {
            ++reals;
            real_hits += hit ? 1 : 0;
        }
    }
    if (fakes == 0 || reals == 0) {
        throw Error(ErrorCode::OneSidedGroundTruth, "accuracy suite needs both fake and real ground truth");
    }
    return {static_cast<double>(fake_hits) / static_cast<double>(fakes),
            static_cast<double>(real_hits) / static_cast<double>(reals),
            static_cast<double>(fake_hits + real_hits) / static_cast<double>(fakes + reals)};
}

double average_precision(std::span<const double> scores, const std::vector<bool>& truths, double step) {
    if (scores.size() != truths.size() || scores.empty()) {
        throw Error(ErrorCode::InvalidArgument, "scores and truths must be nonempty and equal length");
    }
    const double steps_real = 1.0 / step;
    const auto steps = static_cast<long>(std::lround(steps_real));
    if (!(step > 0.0) || steps < 1 || std::abs(static_cast<double>(steps) * step - 1.0) > 1e-9) {
        throw Error(ErrorCode::InvalidArgument, "AP step must divide [0, 1] evenly");
    }
    const auto positives = static_cast<std::size_t>(std::count(truths.begin(), truths.end(), true));
    if (positives == 0) throw Error(ErrorCode::NoPositives, "average precision needs at least one fake");

    std::vector<std::pair<double, double>> points;  // (recall, precision)
    points.reserve(static_cast<std::size_t>(steps) + 1);
    for (long k = 0; k <= steps; ++k) {
        const double threshold = static_cast<double>(k) * step;
        std::size_t tp = 0, fp = 0;
        for (std::size_t i = 0; i < scores.size(); ++i) {
            if (scores[i] / 2.0 >= threshold) (truths[i] ? tp : fp) += 1;
        }
        const double precision = tp + fp == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
        points.emplace_back(static_cast<double>(tp) / static_cast<double>(positives), precision);
    }
    std::sort(points.begin(), points.end(), [](const auto& a, const auto& b) {
        return a.first != b.first ? a.first < b.first : a.second > b.second;
    });
    double ap = 0.0;
    double previous_recall = 0.0;
    for (const auto& [recall, precision] : points) {
        ap += (recall - previous_recall) * precision;
        previous_recall = recall;
    }
    return ap;
}

}  // namespace omnidfa
