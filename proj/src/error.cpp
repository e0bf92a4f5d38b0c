#include "omnidfa/error.hpp"

namespace omnidfa {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
        case ErrorCode::IoFailure: return "IoFailure";
        case ErrorCode::MalformedRecord: return "MalformedRecord";
        case ErrorCode::DuplicateId: return "DuplicateId";
        case ErrorCode::UnknownGenerator: return "UnknownGenerator";
        case ErrorCode::NotUnitNorm: return "NotUnitNorm";
        case ErrorCode::PatternCollision: return "PatternCollision";
        case ErrorCode::GridTooSmall: return "GridTooSmall";
        case ErrorCode::ZeroFeatureNorm: return "ZeroFeatureNorm";
        case ErrorCode::StaleCache: return "StaleCache";
        case ErrorCode::DegenerateBatch: return "DegenerateBatch";
        case ErrorCode::NoRealSamples: return "NoRealSamples";
        case ErrorCode::EmptyDeviations: return "EmptyDeviations";
        case ErrorCode::BoundaryUninitialized: return "BoundaryUninitialized";
        case ErrorCode::InsufficientSamples: return "InsufficientSamples";
        case ErrorCode::NonFiniteGradient: return "NonFiniteGradient";
        case ErrorCode::InsufficientClassSamples: return "InsufficientClassSamples";
        case ErrorCode::DegenerateMean: return "DegenerateMean";
        case ErrorCode::OneSidedGroundTruth: return "OneSidedGroundTruth";
        case ErrorCode::NoPositives: return "NoPositives";
        case ErrorCode::MalformedCheckpoint: return "MalformedCheckpoint";
    }
    return "Unknown";
}

}  // namespace omnidfa
