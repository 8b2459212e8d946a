#include "kindforge/error.hpp"

#include <fmt/format.h>

namespace kindforge {

std::string to_string(Span span) {
  if (!span.known()) return "?:?";
  return fmt::format("{}:{}", span.line, span.col);
}

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::DuplicateName: return "DuplicateName";
    case ErrorCode::UnknownTypeName: return "UnknownTypeName";
    case ErrorCode::CyclicAbbreviation: return "CyclicAbbreviation";
    case ErrorCode::UnsupportedDeclaration: return "UnsupportedDeclaration";
    case ErrorCode::UnboundTypeVariable: return "UnboundTypeVariable";
    case ErrorCode::UnboundVariable: return "UnboundVariable";
    case ErrorCode::NotAFunction: return "NotAFunction";
    case ErrorCode::NotAForall: return "NotAForall";
    case ErrorCode::NotARecord: return "NotARecord";
    case ErrorCode::NotAVariant: return "NotAVariant";
    case ErrorCode::NotAChoice: return "NotAChoice";
    case ErrorCode::MissingLabel: return "MissingLabel";
    case ErrorCode::TypeMismatch: return "TypeMismatch";
    case ErrorCode::NotAValue: return "NotAValue";
    case ErrorCode::NotASessionType: return "NotASessionType";
    case ErrorCode::DuplicateLabel: return "DuplicateLabel";
    case ErrorCode::Unsatisfiable: return "Unsatisfiable";
    case ErrorCode::UnresolvedVariable: return "UnresolvedVariable";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::IterationBoundExceeded: return "IterationBoundExceeded";
    case ErrorCode::InvalidConstraint: return "InvalidConstraint";
  }
  return "Unknown";
}

Phase phase_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::ParseError:
    case ErrorCode::DuplicateName:
    case ErrorCode::UnknownTypeName:
    case ErrorCode::CyclicAbbreviation:
    case ErrorCode::UnsupportedDeclaration:
    case ErrorCode::DuplicateLabel:
      return Phase::Parse;
    case ErrorCode::IterationBoundExceeded:
    case ErrorCode::InvalidConstraint:
    case ErrorCode::UnresolvedVariable:
      return Phase::Internal;
    default:
      return Phase::Inference;
  }
}

Error::Error(ErrorCode code, Span span, const std::string& message)
    : std::runtime_error(fmt::format("{}: {}: {}", to_string(span), to_string(code), message)),
      code_(code),
      span_(span),
      message_(message) {}

ParseError::ParseError(Span span, std::string expected, std::string found)
    : Error(ErrorCode::ParseError, span, fmt::format("expected {}, found {}", expected, found)),
      expected_(std::move(expected)),
      found_(std::move(found)) {}

}  // namespace kindforge
