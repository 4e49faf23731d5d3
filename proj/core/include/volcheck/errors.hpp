#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace volcheck {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed expression text. `offset` is a byte offset into the source.
class ParseError : public Error {
public:
    ParseError(std::size_t offset, std::string message, std::string expected)
        : Error("parse error at offset " + std::to_string(offset) + ": " + message +
                (expected.empty() ? std::string{} : " (expected " + expected + ")")),
          offset_(offset), message_(std::move(message)), expected_(std::move(expected)) {}

    std::size_t offset() const noexcept { return offset_; }
    const std::string& message() const noexcept { return message_; }
    const std::string& expected() const noexcept { return expected_; }

private:
    std::size_t offset_;
    std::string message_;
    std::string expected_;
};

/// Evaluation produced a non-finite value.
class DomainError : public Error {
public:
    DomainError(std::string subexpression, const std::string& what)
        : Error(what + " in " + subexpression), subexpression_(std::move(subexpression)) {}

    const std::string& subexpression() const noexcept { return subexpression_; }

private:
    std::string subexpression_;
};

/// Non-finite integrand sample.
class QuadratureError : public Error {
public:
    using Error::Error;
};

/// Metric is degenerate or evaluated outside of where it is defined.
class GeometryError : public Error {
public:
    using Error::Error;
};

/// A caller-side precondition failed (bad interval, wrong signature, ...).
class PreconditionError : public Error {
public:
    using Error::Error;
};

}  // namespace volcheck
