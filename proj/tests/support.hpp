#pragma once

// Reference implementations used as oracles by the unit and acceptance tests.
// They are written for clarity, not speed, and share no code with src/.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "omnidfa/core.hpp"
#include "omnidfa/encoder.hpp"
#include "omnidfa/error.hpp"
#include "omnidfa/rng.hpp"
#include "omnidfa/tensor.hpp"

namespace oracle {

using omnidfa::ClassLabel;
using omnidfa::Matrix;
using omnidfa::RandomStream;

inline std::vector<double> random_unit(std::size_t d, RandomStream& rng) {
    std::vector<double> v(d);
    double n = 0.0;
    for (double& x : v) {
        x = rng.normal();
        n += x * x;
    }
    n = std::sqrt(n);
    for (double& x : v) x /= n;
    return v;
}

inline Matrix random_unit_rows(std::size_t n, std::size_t d, RandomStream& rng) {
    Matrix m(n, d);
    for (std::size_t r = 0; r < n; ++r) {
        const auto v = random_unit(d, rng);
        std::copy(v.begin(), v.end(), m.row(r).begin());
    }
    return m;
}

/// Labels drawn from {real, gen:0 .. gen:classes-2}, with at least one
/// repeated class so some anchor has a positive.
inline std::vector<ClassLabel> random_labels(std::size_t n, std::size_t classes, RandomStream& rng) {
    std::vector<ClassLabel> labels;
    for (std::size_t i = 0; i < n; ++i) {
        const auto k = static_cast<int>(rng.index(classes));
        labels.push_back(k == 0 ? ClassLabel::real() : ClassLabel::generator(k - 1));
    }
    labels[1] = labels[0];
    return labels;
}

inline double row_dot(const Matrix& z, std::size_t i, std::size_t j) {
    double s = 0.0;
    for (std::size_t k = 0; k < z.cols; ++k) s += z(i, k) * z(j, k);
    return s;
}

/// Textbook triple loop, no max shift.
inline double naive_supcon(const Matrix& z, const std::vector<ClassLabel>& labels, double tau,
                           bool positives_only = false) {
    const std::size_t n = z.rows;
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<std::size_t> pos;
        for (std::size_t p = 0; p < n; ++p) {
            if (p != i && labels[p] == labels[i]) pos.push_back(p);
        }
        if (pos.empty()) continue;
        double denom = 0.0;
        for (std::size_t a = 0; a < n; ++a) {
            if (a == i) continue;
            if (positives_only && !(labels[a] == labels[i])) continue;
            denom += std::exp(row_dot(z, i, a) / tau);
        }
        double inner = 0.0;
        for (const std::size_t p : pos) inner += std::log(std::exp(row_dot(z, i, p) / tau) / denom);
        total += -inner / static_cast<double>(pos.size());
    }
    return total;
}

inline double naive_center(const Matrix& z, const std::vector<ClassLabel>& labels, const std::vector<double>& c) {
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < z.rows; ++i) {
        if (!labels[i].is_real()) continue;
        double d = 0.0;
        for (std::size_t k = 0; k < z.cols; ++k) d += z(i, k) * c[k];
        sum += 1.0 - d;
        ++count;
    }
    return sum / static_cast<double>(count);
}

/// Average precision over the grid {0, step, ..., 1} of score/2 thresholds,
/// computed as a sum over distinct recall levels of the best precision
/// reached at that level. Counting uses a sorted score list.
inline double brute_force_ap(const std::vector<double>& scores, const std::vector<bool>& truths, double step) {
    std::vector<double> fake_scores, real_scores;
    for (std::size_t i = 0; i < scores.size(); ++i) (truths[i] ? fake_scores : real_scores).push_back(scores[i] / 2.0);
    std::sort(fake_scores.begin(), fake_scores.end());
    std::sort(real_scores.begin(), real_scores.end());
    auto at_least = [](const std::vector<double>& v, double t) {
        return static_cast<std::size_t>(v.end() - std::lower_bound(v.begin(), v.end(), t));
    };
    const auto steps = static_cast<int>(std::lround(1.0 / step));
    std::map<double, double> best;  // recall -> max precision
    for (int k = 0; k <= steps; ++k) {
        const double t = k * step;
        const std::size_t tp = at_least(fake_scores, t);
        const std::size_t fp = at_least(real_scores, t);
        const double precision = tp + fp == 0 ? 1.0 : double(tp) / double(tp + fp);
        const double recall = double(tp) / double(fake_scores.size());
        auto [it, inserted] = best.emplace(recall, precision);
        if (!inserted) it->second = std::max(it->second, precision);
    }
    double ap = 0.0, prev = 0.0;
    for (const auto& [recall, precision] : best) {
        ap += (recall - prev) * precision;
        prev = recall;
    }
    return ap;
}

/// Central difference of f with respect to x[i].
inline double central_difference(const std::function<double()>& f, double& x, double h) {
    const double saved = x;
    x = saved + h;
    const double up = f();
    x = saved - h;
    const double down = f();
    x = saved;
    return (up - down) / (2.0 * h);
}

/// |a - b| / max(|a|, |b|, floor). The floor keeps near-zero entries from
/// producing meaningless ratios.
inline double relative_error(double a, double b, double floor = 1e-6) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

/// Runs f and returns the code of the omnidfa::Error it throws, if any.
template <typename F>
std::optional<omnidfa::ErrorCode> error_of(F&& f) {
    try {
        f();
    } catch (const omnidfa::Error& e) {
        return e.code();
    }
    return std::nullopt;
}

inline std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("omnidfa-test-" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace oracle
