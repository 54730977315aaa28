#pragma once

#include <stdexcept>
#include <string>

namespace seclab {

enum class ErrorKind {
    Parse,
    InvalidParameter,
    DegenerateInstance,
    UndefinedError,
    PrecisionExhausted,
    InvalidFamily,
    UnreachableState,
    MissingState,
    EnumerationGuard,
    NonpositiveBudget,
    UnknownPreset,
    Io,
};

const char* to_string(ErrorKind kind);

/// Domain error raised by every module; the CLI maps these to exit code 1.
class LabError : public std::runtime_error {
public:
    LabError(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace seclab
