#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace echoweight {

/// Malformed input record. Carries the 1-based line number when known.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& path, std::size_t line, const std::string& what)
        : std::runtime_error(path + ":" + std::to_string(line) + ": " + what)
        , path_(path)
        , line_(line)
    {}

    const std::string& path() const noexcept { return path_; }
    std::size_t line() const noexcept { return line_; }

private:
    std::string path_;
    std::size_t line_;
};

/// Input that parses but violates a cross-record rule (dangling ids, bad config values).
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A caller broke an operation's precondition (shape mismatch, length mismatch).
class ContractError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Training could not proceed (empty set, non-finite loss).
class TrainingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace echoweight
