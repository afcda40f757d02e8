#pragma once

#include <stdexcept>
#include <string>

namespace isoprob {

/// Input outside the region where a model or function is defined
/// (non-finite drive samples, poles, empty overlaps).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Integrator gave up before reaching the end of the span.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double reached)
        : std::runtime_error(what), reached_(reached) {}
    double reached() const noexcept { return reached_; }

private:
    double reached_;
};

/// Local-expansion start of the detuning-first construction is degenerate.
class SingularityError : public DomainError {
public:
    using DomainError::DomainError;
};

/// Caller violated a precondition (bad sizes, bad bounds, area not pi...).
class ContractError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Unknown catalog row or name.
class LookupError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

/// Malformed input file. The message carries the offending line number.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t line)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

}  // namespace isoprob
