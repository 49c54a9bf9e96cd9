#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace bridgesim {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed document (JSON syntax, wrong types, unknown enum spelling).
class ParseError : public Error {
 public:
  using Error::Error;
};

// A well-formed document that violates a named invariant.
class ValidationError : public Error {
 public:
  ValidationError(std::string invariant, const std::string& detail)
      : Error(invariant + ": " + detail), invariant_(std::move(invariant)) {}
  const std::string& invariant() const noexcept { return invariant_; }

 private:
  std::string invariant_;
};

class LogError : public Error {
 public:
  using Error::Error;
};

class TruncatedLogError : public LogError {
 public:
  explicit TruncatedLogError(std::uint64_t byte_offset)
      : LogError("session log truncated at byte offset " + std::to_string(byte_offset)),
        byte_offset_(byte_offset) {}
  std::uint64_t byte_offset() const noexcept { return byte_offset_; }

 private:
  std::uint64_t byte_offset_;
};

class VersionMismatchError : public LogError {
 public:
  using LogError::LogError;
};

class ProtocolError : public Error {
 public:
  using Error::Error;
};

}  // namespace bridgesim
