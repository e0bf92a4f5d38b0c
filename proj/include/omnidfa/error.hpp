#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace omnidfa {

enum class ErrorCode {
    InvalidArgument,
    InvalidConfig,
    IoFailure,
    MalformedRecord,
    DuplicateId,
    UnknownGenerator,
    NotUnitNorm,
    PatternCollision,
    GridTooSmall,
    ZeroFeatureNorm,
    StaleCache,
    DegenerateBatch,
    NoRealSamples,
    EmptyDeviations,
    BoundaryUninitialized,
    InsufficientSamples,
    NonFiniteGradient,
    InsufficientClassSamples,
    DegenerateMean,
    OneSidedGroundTruth,
    NoPositives,
    MalformedCheckpoint,
};

std::string_view to_string(ErrorCode code);

/// Domain error carrying a machine-checkable code. Every failure the library
/// reports goes through this type.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace omnidfa
