#pragma once

#include <stdexcept>
#include <string>

namespace csforge {

// Base class for all library errors.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Empty or whitespace-only input where a sentence is required.
class EmptySentenceError : public Error {
public:
  explicit EmptySentenceError(const std::string& msg = "empty sentence")
      : Error(msg) {}
};

// Corpus too small for the requested operation (e.g. a 3-way split).
class TooSmallError : public Error {
public:
  explicit TooSmallError(const std::string& msg) : Error(msg) {}
};

// A statistic has no defined value on this input (division by zero).
class UndefinedError : public Error {
public:
  explicit UndefinedError(const std::string& msg) : Error(msg) {}
};

// Malformed bracketed parse; carries the character offset of the problem.
class ParseError : public Error {
public:
  ParseError(const std::string& msg, std::size_t offset)
      : Error(msg + " (at offset " + std::to_string(offset) + ")"),
        offset_(offset) {}
  std::size_t offset() const { return offset_; }

private:
  std::size_t offset_;
};

// Sentence has no clause or phrase node eligible for switching.
class NoSwitchPointError : public Error {
public:
  explicit NoSwitchPointError(const std::string& msg = "no switch point")
      : Error(msg) {}
};

// Candidate/reference streams disagree in length.
class SizeMismatchError : public Error {
public:
  explicit SizeMismatchError(const std::string& msg) : Error(msg) {}
};

// Invalid configuration value or reference.
class ConfigError : public Error {
public:
  explicit ConfigError(const std::string& msg) : Error(msg) {}
};

// File could not be read, written or parsed.
class IoError : public Error {
public:
  explicit IoError(const std::string& msg) : Error(msg) {}
};

}  // namespace csforge
