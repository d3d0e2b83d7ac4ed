// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace aimtrace {

/// Base of every error thrown by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed serialized input. offset is the byte position where parsing stopped.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::uint64_t offset)
      : Error(what + " (at byte " + std::to_string(offset) + ")"), offset_(offset) {}
  std::uint64_t offset() const noexcept { return offset_; }

 private:
  std::uint64_t offset_;
};

/// Line-oriented syntax error (BLT, .reg).
class SyntaxError : public Error {
 public:
  SyntaxError(const std::string& what, std::size_t line)
      : Error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Input recognized but not supported (pcapng, nanosecond pcap, missing .reg header ...).
class UnsupportedFormat : public Error {
 public:
  explicit UnsupportedFormat(std::string format)
      : Error("unsupported format: " + format), format_(std::move(format)) {}
  const std::string& format() const noexcept { return format_; }

 private:
  std::string format_;
};

/// Evidence could not be read. offset is how far the reader got.
class IoError : public Error {
 public:
  IoError(const std::string& what, std::uint64_t offset = 0)
      : Error(what), offset_(offset) {}
  std::uint64_t offset() const noexcept { return offset_; }

 private:
  std::uint64_t offset_;
};

class DuplicateSource : public Error {
 public:
  using Error::Error;
};

}  // namespace aimtrace
