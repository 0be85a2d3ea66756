#include "scbm/error.hpp"

namespace scbm {

std::string_view error_kind_name(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::InvariantError: return "InvariantError";
    case ErrorKind::DuplicateId: return "DuplicateId";
    case ErrorKind::UnknownSegment: return "UnknownSegment";
    case ErrorKind::UnknownSubject: return "UnknownSubject";
    case ErrorKind::UnknownScenario: return "UnknownScenario";
    case ErrorKind::UnlabeledSubject: return "UnlabeledSubject";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::MissingClip: return "MissingClip";
    case ErrorKind::DimMismatch: return "DimMismatch";
    case ErrorKind::FormatError: return "FormatError";
    case ErrorKind::ChecksumMismatch: return "ChecksumMismatch";
    case ErrorKind::TooFewRows: return "TooFewRows";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::EmptyClass: return "EmptyClass";
    case ErrorKind::SingleClass: return "SingleClass";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::TooFewClips: return "TooFewClips";
    case ErrorKind::NotEnoughSubjects: return "NotEnoughSubjects";
    case ErrorKind::EmptyTest: return "EmptyTest";
    case ErrorKind::ProtocolMismatch: return "ProtocolMismatch";
    case ErrorKind::SpecInvalid: return "SpecInvalid";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(message), kind_(kind) {}

ParseError::ParseError(std::string file, std::size_t line, const std::string& reason)
    : Error(ErrorKind::ParseError, file + ":" + std::to_string(line) + ": " + reason),
      file_(std::move(file)),
      line_(line) {}

FormatError::FormatError(std::uint64_t offset, const std::string& reason)
    : Error(ErrorKind::FormatError, "offset " + std::to_string(offset) + ": " + reason),
      offset_(offset) {}

}  // namespace scbm
