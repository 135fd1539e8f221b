#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace emoji {

/// Base of every error raised for bad input, bad files or bad configuration.
/// Anything else escaping the library is an internal failure.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EmptyCorpusError : public Error {
 public:
  EmptyCorpusError() : Error("empty corpus") {}
  explicit EmptyCorpusError(const std::string& what) : Error("empty corpus: " + what) {}
};

/// Malformed record in a line-oriented file. Line numbers are 1-based.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& message)
      : Error("line " + std::to_string(line) + ": " + message), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class UnknownLabelError : public Error {
 public:
  explicit UnknownLabelError(const std::string& label)
      : Error("label not in vocabulary: " + label), label_(label) {}
  const std::string& label() const noexcept { return label_; }

 private:
  std::string label_;
};

class InvalidConfigError : public Error {
 public:
  using Error::Error;
};

class InvalidPrecisionError : public Error {
 public:
  using Error::Error;
};

class TrainingDivergedError : public Error {
 public:
  using Error::Error;
};

// Model container failures.
class BadMagicError : public Error {
 public:
  BadMagicError() : Error("model container: bad magic") {}
};

class UnsupportedVersionError : public Error {
 public:
  explicit UnsupportedVersionError(int version)
      : Error("model container: unsupported version " + std::to_string(version)), version_(version) {}
  int version() const noexcept { return version_; }

 private:
  int version_;
};

class TruncatedContainerError : public Error {
 public:
  explicit TruncatedContainerError(const std::string& what) : Error("model container truncated: " + what) {}
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace emoji
