#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dkgqa {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed N-Triples input (fail-fast mode) or another line-oriented format.
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// An id or IRI that does not resolve in the store it was used with.
class LookupError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

/// Per-document pipeline failures. The orchestrator catches these, records the
/// stage that dropped the document, and moves on.
class DocumentError : public Error {
public:
    using Error::Error;
};

class EmptySeedError : public DocumentError {
public:
    using DocumentError::DocumentError;
};

class SubgraphTooSmallError : public DocumentError {
public:
    using DocumentError::DocumentError;
};

class SubgraphTooLargeError : public DocumentError {
public:
    using DocumentError::DocumentError;
};

class GenerationParseError : public DocumentError {
public:
    using DocumentError::DocumentError;
};

/// A judge produced no usable verdict. Candidates are rejected, never accepted.
class JudgeUnavailableError : public Error {
public:
    using Error::Error;
};

/// Provider errors that retrying cannot fix (auth, content policy, bad request).
class ProviderError : public Error {
public:
    ProviderError(const std::string& what, bool transient, int status = 0)
        : Error(what), transient_(transient), status_(status) {}

    bool transient() const noexcept { return transient_; }
    int status() const noexcept { return status_; }

private:
    bool transient_;
    int status_;
};

/// Retry budget exhausted on transient failures.
class TransientFailureError : public Error {
public:
    TransientFailureError(const std::string& what, int attempts)
        : Error(what), attempts_(attempts) {}

    int attempts() const noexcept { return attempts_; }

private:
    int attempts_;
};

class InvalidRequestError : public Error {
public:
    using Error::Error;
};

class DegenerateTableError : public Error {
public:
    using Error::Error;
};

class AlignmentError : public Error {
public:
    using Error::Error;
};

}  // namespace dkgqa
