#pragma once

#include <stdexcept>
#include <string>

namespace mfhier {

// Validation-type failures map to exit code 1, numerical ones to exit code 2.
enum class ErrorClass { Validation, Numerical };

class Error : public std::runtime_error {
public:
    Error(std::string kind, ErrorClass cls, const std::string& what)
        : std::runtime_error(what), kind_(std::move(kind)), cls_(cls) {}

    const std::string& kind() const noexcept { return kind_; }
    ErrorClass error_class() const noexcept { return cls_; }

private:
    std::string kind_;
    ErrorClass cls_;
};

#define MFHIER_DEFINE_ERROR(Name, tag, cls)                                   \
    class Name : public Error {                                               \
    public:                                                                   \
        explicit Name(const std::string& what) : Error(tag, cls, what) {}     \
    };

MFHIER_DEFINE_ERROR(ValidationError, "validation", ErrorClass::Validation)
MFHIER_DEFINE_ERROR(ConfigError, "config", ErrorClass::Validation)
MFHIER_DEFINE_ERROR(DomainError, "domain", ErrorClass::Validation)
MFHIER_DEFINE_ERROR(AlignmentError, "alignment", ErrorClass::Validation)
MFHIER_DEFINE_ERROR(InsufficientDataError, "insufficient_data", ErrorClass::Validation)
MFHIER_DEFINE_ERROR(DimensionError, "dimension", ErrorClass::Validation)
MFHIER_DEFINE_ERROR(DegenerateError, "degenerate", ErrorClass::Numerical)
MFHIER_DEFINE_ERROR(DivergenceError, "divergence", ErrorClass::Numerical)
MFHIER_DEFINE_ERROR(NotPositiveDefiniteError, "not_positive_definite", ErrorClass::Numerical)
MFHIER_DEFINE_ERROR(ConvergenceError, "convergence", ErrorClass::Numerical)

#undef MFHIER_DEFINE_ERROR

}  // namespace mfhier
