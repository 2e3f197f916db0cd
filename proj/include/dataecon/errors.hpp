#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace dataecon {

// Base class for every error raised by the library.  The CLI maps
// UsageError/ValidationError to exit code 2 and everything else to 1.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ValidationError : public Error {
public:
    struct Violation {
        std::string field;
        std::string bound;
    };

    explicit ValidationError(std::vector<Violation> violations);

    const std::vector<Violation>& violations() const noexcept { return violations_; }

private:
    std::vector<Violation> violations_;
};

class UsageError : public Error {
public:
    using Error::Error;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

// Closed forms requested inside the singular band |α + β + αη − 1| < band.
class RegimeError : public Error {
public:
    using Error::Error;
};

// Nonpositive profit coefficient or Eq.-style bracket: no steady state exists.
class DegenerateError : public Error {
public:
    using Error::Error;
};

class ClassificationError : public Error {
public:
    using Error::Error;
};

class SearchError : public Error {
public:
    using Error::Error;
};

class DesignError : public Error {
public:
    using Error::Error;
};

class RankDeficiencyError : public DesignError {
public:
    RankDeficiencyError(std::vector<std::string> columns);

    const std::vector<std::string>& columns() const noexcept { return columns_; }

private:
    std::vector<std::string> columns_;
};

}  // namespace dataecon
