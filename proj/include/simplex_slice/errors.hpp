#pragma once

#include <stdexcept>
#include <string>

namespace sslice {

// Error categories map onto CLI exit codes (usage=2, data=3, numerical=4).
enum class ErrorCategory { usage, data, numerical };

class Error : public std::runtime_error {
public:
    Error(ErrorCategory category, const std::string& what)
        : std::runtime_error(what), category_(category) {}

    ErrorCategory category() const noexcept { return category_; }

private:
    ErrorCategory category_;
};

struct UsageError : Error {
    explicit UsageError(const std::string& what) : Error(ErrorCategory::usage, what) {}
};

struct DataError : Error {
    explicit DataError(const std::string& what) : Error(ErrorCategory::data, what) {}
};

struct DimensionMismatch : Error {
    explicit DimensionMismatch(const std::string& what) : Error(ErrorCategory::data, what) {}
};

struct SingularSimplex : Error {
    explicit SingularSimplex(const std::string& what) : Error(ErrorCategory::data, what) {}
};

/// A hyperplane passes (numerically) through a vertex of the arrangement, so
/// the polytope is not simple. `constraint` names the offending hyperplane.
struct DegenerateInput : Error {
    DegenerateInput(const std::string& what, std::string constraint)
        : Error(ErrorCategory::numerical, what), constraint(std::move(constraint)) {}
    std::string constraint;
};

struct NumericalFailure : Error {
    explicit NumericalFailure(const std::string& what) : Error(ErrorCategory::numerical, what) {}
};

struct Infeasible : Error {
    explicit Infeasible(const std::string& what) : Error(ErrorCategory::numerical, what) {}
};

struct ContractViolation : Error {
    explicit ContractViolation(const std::string& what) : Error(ErrorCategory::usage, what) {}
};

}  // namespace sslice
