#ifndef KINDFORGE_ERROR_HPP
#define KINDFORGE_ERROR_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace kindforge {

// 1-based source position. line == 0 means "no position".
struct Span {
  std::uint32_t line = 0;
  std::uint32_t col = 0;

  bool known() const { return line != 0; }
  friend bool operator==(const Span&, const Span&) = default;
};

std::string to_string(Span span);

enum class ErrorCode {
  // front end
  ParseError,
  DuplicateName,
  UnknownTypeName,
  CyclicAbbreviation,
  UnsupportedDeclaration,
  // constraint generation
  UnboundTypeVariable,
  UnboundVariable,
  NotAFunction,
  NotAForall,
  NotARecord,
  NotAVariant,
  NotAChoice,
  MissingLabel,
  TypeMismatch,
  NotAValue,
  NotASessionType,
  DuplicateLabel,
  // solving
  Unsatisfiable,
  UnresolvedVariable,
  TooLarge,
  // invariant breaches
  IterationBoundExceeded,
  InvalidConstraint,
};

std::string_view to_string(ErrorCode code);

enum class Phase { Parse, Inference, Internal };

Phase phase_of(ErrorCode code);

// Every diagnostic carries a code and, when known, the span it refers to.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, Span span, const std::string& message);

  ErrorCode code() const { return code_; }
  Span span() const { return span_; }
  const std::string& message() const { return message_; }

 private:
  ErrorCode code_;
  Span span_;
  std::string message_;
};

class ParseError : public Error {
 public:
  ParseError(Span span, std::string expected, std::string found);

  const std::string& expected() const { return expected_; }
  const std::string& found() const { return found_; }

 private:
  std::string expected_;
  std::string found_;
};

}  // namespace kindforge

#endif  // KINDFORGE_ERROR_HPP
