#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace factorlab {

enum class ErrorKind {
    BadInput,
    UniverseMismatch,
    InsufficientData,
    DegenerateSeries,
    SingularCovariance,
    DegenerateTangency,
    NonPositiveAversion,
    MissingInput,
    EmptyChart,
    IoError,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library carries one of the ErrorKind tags so
/// callers (the CLI in particular) can map it to a stable exit code.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message);

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& message);

}  // namespace factorlab
