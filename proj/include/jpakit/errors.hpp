#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace jpakit {

// Error taxonomy. Categories map to process exit codes:
//   usage -> 2, parse/validation -> 3, numerical -> 4.
class Error : public std::runtime_error {
public:
    enum class Category { usage, parse, validation, numerical };

    Error(Category cat, const std::string& msg)
        : std::runtime_error(msg), category(cat) {}

    Category category;

    int exit_code() const {
        switch (category) {
        case Category::usage:      return 2;
        case Category::parse:      return 3;
        case Category::validation: return 3;
        case Category::numerical:  return 4;
        }
        return 1;
    }

    const char* category_name() const {
        switch (category) {
        case Category::usage:      return "usage";
        case Category::parse:      return "parse";
        case Category::validation: return "validation";
        case Category::numerical:  return "numerical";
        }
        return "unknown";
    }
};

class UsageError : public Error {
public:
    explicit UsageError(const std::string& msg) : Error(Category::usage, msg) {}
};

// Malformed bytes: bad numbers, broken headers, unknown tokens.
class ParseError : public Error {
public:
    explicit ParseError(const std::string& msg) : Error(Category::parse, msg) {}
};

// Structurally valid input that violates a documented schema (missing column, wrong unit suffix).
class SchemaError : public Error {
public:
    explicit SchemaError(const std::string& msg) : Error(Category::parse, msg) {}
};

// Well-formed data that violates a precondition (non-monotone axis, nonpositive rate, empty trace).
class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& msg) : Error(Category::validation, msg) {}
};

// Input rejected before fitting: no feature above the noise floor.
class FitRejectedError : public Error {
public:
    explicit FitRejectedError(const std::string& msg) : Error(Category::numerical, msg) {}
};

// Solver failed to converge; carries the best parameter vector seen so far.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& msg, std::vector<double> best)
        : Error(Category::numerical, msg), best_params(std::move(best)) {}
    std::vector<double> best_params;
};

// Several features compete for one answer; carries all candidates.
class AmbiguityError : public Error {
public:
    AmbiguityError(const std::string& msg, std::vector<double> cands)
        : Error(Category::numerical, msg), candidates(std::move(cands)) {}
    std::vector<double> candidates;
};

// Peak-to-floor contrast too small to measure anything.
class LowContrastError : public Error {
public:
    explicit LowContrastError(const std::string& msg) : Error(Category::numerical, msg) {}
};

// Degenerate regression: the data cannot constrain the requested parameter.
class UnidentifiableError : public Error {
public:
    explicit UnidentifiableError(const std::string& msg) : Error(Category::numerical, msg) {}
};

// Requested operating point sits on an unstable branch.
class StabilityError : public Error {
public:
    explicit StabilityError(const std::string& msg) : Error(Category::numerical, msg) {}
};

} // namespace jpakit
