#include "factorlab/error.hpp"

namespace factorlab {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::BadInput: return "BadInput";
        case ErrorKind::UniverseMismatch: return "UniverseMismatch";
        case ErrorKind::InsufficientData: return "InsufficientData";
        case ErrorKind::DegenerateSeries: return "DegenerateSeries";
        case ErrorKind::SingularCovariance: return "SingularCovariance";
        case ErrorKind::DegenerateTangency: return "DegenerateTangency";
        case ErrorKind::NonPositiveAversion: return "NonPositiveAversion";
        case ErrorKind::MissingInput: return "MissingInput";
        case ErrorKind::EmptyChart: return "EmptyChart";
        case ErrorKind::IoError: return "IoError";
    }
    return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

void fail(ErrorKind kind, const std::string& message) { throw Error(kind, message); }

}  // namespace factorlab
