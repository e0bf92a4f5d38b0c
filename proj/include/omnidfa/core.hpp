#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>

#include "omnidfa/tensor.hpp"

namespace omnidfa {

/// Small 2D signal standing in for an image. Row-major values.
class SignalGrid {
public:
    SignalGrid() = default;
    SignalGrid(std::size_t height, std::size_t width, std::vector<double> values);
    SignalGrid(std::size_t height, std::size_t width, double fill = 0.0);

    std::size_t height() const noexcept { return height_; }
    std::size_t width() const noexcept { return width_; }
    std::size_t size() const noexcept { return values_.size(); }

    double operator()(std::size_t r, std::size_t c) const { return values_[r * width_ + c]; }
    double& operator()(std::size_t r, std::size_t c) { return values_[r * width_ + c]; }

    std::span<const double> values() const noexcept { return values_; }
    std::span<double> values() noexcept { return values_; }

    bool operator==(const SignalGrid&) const = default;

private:
    std::size_t height_ = 0;
    std::size_t width_ = 0;
    std::vector<double> values_;
};

enum class LabelKind { Real, Generator };

class ClassLabel {
public:
    static ClassLabel real() { return ClassLabel(LabelKind::Real, -1); }
    static ClassLabel generator(int id);

    /// Parses "real" or "gen:<k>".
    static ClassLabel parse(std::string_view text);

    LabelKind kind() const noexcept { return kind_; }
    bool is_real() const noexcept { return kind_ == LabelKind::Real; }
    bool is_fake() const noexcept { return kind_ == LabelKind::Generator; }
    int generator_id() const;

    /// -1 for real, generator id otherwise. Used wherever labels are compared.
    int key() const noexcept { return id_; }

    std::string to_string() const;
    bool operator==(const ClassLabel&) const = default;

private:
    ClassLabel(LabelKind kind, int id) : kind_(kind), id_(id) {}
    LabelKind kind_ = LabelKind::Real;
    int id_ = -1;
};

enum class Split { Train, Test };

std::string_view to_string(Split split);
Split parse_split(std::string_view text);

struct LabeledSample {
    std::string id;
    SignalGrid grid;
    ClassLabel label = ClassLabel::real();
    Split split = Split::Train;

    bool operator==(const LabeledSample&) const = default;
};

/// L2-normalized embedding. Construction enforces | ||v|| - 1 | <= 1e-6.
class UnitEmbedding {
public:
    static constexpr double kNormTolerance = 1e-6;

    explicit UnitEmbedding(Vector values);

    /// Scales `raw` to unit length. Throws ZeroFeatureNorm below 1e-12.
    static UnitEmbedding normalize(std::span<const double> raw);

    std::span<const double> values() const noexcept { return values_; }
    std::size_t dim() const noexcept { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }

private:
    Vector values_;
};

}  // namespace omnidfa
