#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dalstm {

enum class ErrorCode {
    // ingest
    EmptySeries,
    NonMonotoneTimestamps,
    NegativeReading,
    UnparseableRow,
    GapTooLarge,
    NoCompleteDay,
    TooFewDays,
    InvalidEvent,
    InvalidResolution,
    // density / divergence
    EmptyInput,
    NonPositiveBandwidth,
    InvalidGrid,
    UnnormalizedDensity,
    GridMismatch,
    // drift
    InsufficientHistory,
    EmptyHistory,
    OutOfRangeDivergence,
    InvalidTau,
    // forecaster
    NonFiniteInput,
    EmptyTrainingSet,
    DivergedLoss,
    InsufficientContext,
    ShapeMismatch,
    BadCheckpoint,
    // hpo
    ExhaustedSpace,
    InvalidSpace,
    // eval
    ZeroActual,
    LengthMismatch,
    WrongCount,
    NegativeDuration,
    ZeroBaseline,
    ZeroCost,
    // pipeline
    InvalidConfig,
    MismatchedRuns,
    IoError,
};

inline std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::EmptySeries: return "EmptySeries";
    case ErrorCode::NonMonotoneTimestamps: return "NonMonotoneTimestamps";
    case ErrorCode::NegativeReading: return "NegativeReading";
    case ErrorCode::UnparseableRow: return "UnparseableRow";
    case ErrorCode::GapTooLarge: return "GapTooLarge";
    case ErrorCode::NoCompleteDay: return "NoCompleteDay";
    case ErrorCode::TooFewDays: return "TooFewDays";
    case ErrorCode::InvalidEvent: return "InvalidEvent";
    case ErrorCode::InvalidResolution: return "InvalidResolution";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::NonPositiveBandwidth: return "NonPositiveBandwidth";
    case ErrorCode::InvalidGrid: return "InvalidGrid";
    case ErrorCode::UnnormalizedDensity: return "UnnormalizedDensity";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::InsufficientHistory: return "InsufficientHistory";
    case ErrorCode::EmptyHistory: return "EmptyHistory";
    case ErrorCode::OutOfRangeDivergence: return "OutOfRangeDivergence";
    case ErrorCode::InvalidTau: return "InvalidTau";
    case ErrorCode::NonFiniteInput: return "NonFiniteInput";
    case ErrorCode::EmptyTrainingSet: return "EmptyTrainingSet";
    case ErrorCode::DivergedLoss: return "DivergedLoss";
    case ErrorCode::InsufficientContext: return "InsufficientContext";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::BadCheckpoint: return "BadCheckpoint";
    case ErrorCode::ExhaustedSpace: return "ExhaustedSpace";
    case ErrorCode::InvalidSpace: return "InvalidSpace";
    case ErrorCode::ZeroActual: return "ZeroActual";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::WrongCount: return "WrongCount";
    case ErrorCode::NegativeDuration: return "NegativeDuration";
    case ErrorCode::ZeroBaseline: return "ZeroBaseline";
    case ErrorCode::ZeroCost: return "ZeroCost";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::MismatchedRuns: return "MismatchedRuns";
    case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

/// Every failure raised by the library carries a machine-readable code.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& detail)
        : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace dalstm
