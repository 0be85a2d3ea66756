#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace scbm {

enum class ErrorKind {
  ParseError,
  InvariantError,
  DuplicateId,
  UnknownSegment,
  UnknownSubject,
  UnknownScenario,
  UnlabeledSubject,
  NonFinite,
  MissingClip,
  DimMismatch,
  FormatError,
  ChecksumMismatch,
  TooFewRows,
  InvalidArgument,
  EmptyClass,
  SingleClass,
  LengthMismatch,
  TooFewClips,
  NotEnoughSubjects,
  EmptyTest,
  ProtocolMismatch,
  SpecInvalid,
  ConfigError,
  IoError,
};

std::string_view error_kind_name(ErrorKind kind) noexcept;

// Library failure tagged with an ErrorKind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }
  std::string_view kind_name() const noexcept { return error_kind_name(kind_); }

 private:
  ErrorKind kind_;
};

// Positioned CSV failure. `line` is 1-based and counts the header.
class ParseError : public Error {
 public:
  ParseError(std::string file, std::size_t line, const std::string& reason);

  const std::string& file() const noexcept { return file_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string file_;
  std::size_t line_;
};

// Binary container failure at a byte offset.
class FormatError : public Error {
 public:
  FormatError(std::uint64_t offset, const std::string& reason);

  std::uint64_t offset() const noexcept { return offset_; }

 private:
  std::uint64_t offset_;
};

}  // namespace scbm
