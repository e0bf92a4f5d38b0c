#include "omnidfa/core.hpp"

#include <cassert>
#include <charconv>
#include <cmath>

#include "omnidfa/error.hpp"

namespace omnidfa {

SignalGrid::SignalGrid(std::size_t height, std::size_t width, std::vector<double> values)
    : height_(height), width_(width), values_(std::move(values)) {
    if (height == 0 || width == 0) {
        throw Error(ErrorCode::InvalidArgument, "grid dimensions must be positive");
    }
    if (values_.size() != height * width) {
        throw Error(ErrorCode::InvalidArgument, "grid has " + std::to_string(values_.size()) +
                                                    " values, expected " + std::to_string(height * width));
    }
    if (!all_finite(values_)) throw Error(ErrorCode::InvalidArgument, "grid values must be finite");
}

SignalGrid::SignalGrid(std::size_t height, std::size_t width, double fill)
    : SignalGrid(height, width, std::vector<double>(height * width, fill)) {}

ClassLabel ClassLabel::generator(int id) {
    if (id < 0) throw Error(ErrorCode::InvalidArgument, "generator id must be nonnegative");
    return ClassLabel(LabelKind::Generator, id);
}

ClassLabel ClassLabel::parse(std::string_view text) {
    if (text == "real") return real();
    constexpr std::string_view prefix = "gen:";
    if (text.substr(0, prefix.size()) == prefix) {
        const auto digits = text.substr(prefix.size());
        int id = -1;
        const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), id);
        if (ec == std::errc() && ptr == digits.data() + digits.size() && !digits.empty() && id >= 0) {
            return generator(id);
        }
    }
    throw Error(ErrorCode::InvalidArgument, "bad label '" + std::string(text) + "'");
}

int ClassLabel::generator_id() const {
    if (kind_ != LabelKind::Generator) throw Error(ErrorCode::InvalidArgument, "real label has no generator id");
    return id_;
}

std::string ClassLabel::to_string() const {
    return is_real() ? std::string("real") : "gen:" + std::to_string(id_);
}

std::string_view to_string(Split split) { return split == Split::Train ? "train" : "test"; }

Split parse_split(std::string_view text) {
    if (text == "train") return Split::Train;
    if (text == "test") return Split::Test;
    throw Error(ErrorCode::InvalidArgument, "bad split '" + std::string(text) + "'");
}

UnitEmbedding::UnitEmbedding(Vector values) : values_(std::move(values)) {
    if (!all_finite(values_)) throw Error(ErrorCode::NotUnitNorm, "embedding has non-finite components");
    const double n = norm2(values_);
    assert(std::abs(n - 1.0) <= kNormTolerance);
    if (std::abs(n - 1.0) > kNormTolerance) {
        throw Error(ErrorCode::NotUnitNorm, "embedding norm " + std::to_string(n));
    }
}

UnitEmbedding UnitEmbedding::normalize(std::span<const double> raw) {
    const double n = norm2(raw);
    if (!(n >= 1e-12)) throw Error(ErrorCode::ZeroFeatureNorm, "cannot normalize a zero vector");
    Vector out(raw.begin(), raw.end());
    for (double& v : out) v /= n;
    return UnitEmbedding(std::move(out));
}

}  // namespace omnidfa
