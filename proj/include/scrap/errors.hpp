#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace scrap {

enum class ErrorKind {
    NoWellFound,
    InsufficientLevels,
    ConvergenceFailure,
    Degenerate,
    DegenerateGap,
    StepFailure,
    FrameMismatch,
    OffResonantPump,
    CalibrationFailure,
    NoCoupling,
    MissingMatrixElement,
    WindowTooShort,
    ParseError,
    ValidationError,
    UnknownUnit,
    InvalidArgument,
};

inline std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::NoWellFound: return "NoWellFound";
        case ErrorKind::InsufficientLevels: return "InsufficientLevels";
        case ErrorKind::ConvergenceFailure: return "ConvergenceFailure";
        case ErrorKind::Degenerate: return "Degenerate";
        case ErrorKind::DegenerateGap: return "DegenerateGap";
        case ErrorKind::StepFailure: return "StepFailure";
        case ErrorKind::FrameMismatch: return "FrameMismatch";
        case ErrorKind::OffResonantPump: return "OffResonantPump";
        case ErrorKind::CalibrationFailure: return "CalibrationFailure";
        case ErrorKind::NoCoupling: return "NoCoupling";
        case ErrorKind::MissingMatrixElement: return "MissingMatrixElement";
        case ErrorKind::WindowTooShort: return "WindowTooShort";
        case ErrorKind::ParseError: return "ParseError";
        case ErrorKind::ValidationError: return "ValidationError";
        case ErrorKind::UnknownUnit: return "UnknownUnit";
        case ErrorKind::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

/// Configuration errors map to CLI exit code 2, everything else to 3.
inline bool is_config_error(ErrorKind kind) {
    return kind == ErrorKind::ParseError || kind == ErrorKind::ValidationError ||
           kind == ErrorKind::UnknownUnit;
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

    Error(ErrorKind kind, const std::string& message, int line, int column) : Error(kind, message) {
        line_ = line;
        column_ = column;
    }

    ErrorKind kind() const noexcept { return kind_; }
    /// Source position for parse errors, 0 when unknown.
    int line() const noexcept { return line_; }
    int column() const noexcept { return column_; }

private:
    ErrorKind kind_;
    int line_ = 0;
    int column_ = 0;
};

}  // namespace scrap
