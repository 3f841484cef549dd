#pragma once

#include <stdexcept>
#include <string>

namespace rlfuzz {

// Base for all library errors that are recoverable by the caller.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Offset/width requests that fall outside an input.
class RangeError : public Error {
public:
    explicit RangeError(const std::string& msg) : Error(msg) {}
};

// Vector/matrix dimension mismatches.
class ShapeError : public Error {
public:
    explicit ShapeError(const std::string& msg) : Error(msg) {}
};

// Unparseable or truncated on-disk artifacts (weights, reports, dictionaries).
class FormatError : public Error {
public:
    explicit FormatError(const std::string& msg) : Error(msg) {}
};

// Operations invoked on objects in the wrong state (e.g. sampling an empty memory).
class StateError : public Error {
public:
    explicit StateError(const std::string& msg) : Error(msg) {}
};

// The target process or its probe channel is unusable. Distinct from any
// execution outcome: a crash of the target is a result, this is a failure
// of the harness environment itself.
class EnvironmentError : public Error {
public:
    explicit EnvironmentError(const std::string& msg) : Error(msg) {}
};

// A mutation would leave the input empty.
class DegenerateInputError : public Error {
public:
    explicit DegenerateInputError(const std::string& msg) : Error(msg) {}
};

// NaN/Inf surfaced in network weights or loss.
class NumericFault : public Error {
public:
    explicit NumericFault(const std::string& msg) : Error(msg) {}
};

// Correlation requested over a zero-variance series.
class UndefinedCorrelationError : public Error {
public:
    explicit UndefinedCorrelationError(const std::string& msg) : Error(msg) {}
};

// Caller broke a documented precondition.
class ContractViolation : public std::logic_error {
public:
    explicit ContractViolation(const std::string& msg) : std::logic_error(msg) {}
};

}  // namespace rlfuzz
