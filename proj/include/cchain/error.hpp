#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace cchain {

enum class ErrorKind {
  range,
  empty_input,
  undefined_combination,
  no_evidence,
  syntax,
  reference,
  invariant,
  unknown_anomaly,
  unknown_question,
  degenerate_sheet,
  invalid_cutoff,
  incomplete_mapping,
  already_answered,
  not_pending,
  type_mismatch,
  nothing_to_undo,
  missing_answer,
  session_incomplete,
  script_underrun,
  insufficient_data,
  corrupt_log,
  io,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::range: return "range";
    case ErrorKind::empty_input: return "empty_input";
    case ErrorKind::undefined_combination: return "undefined_combination";
    case ErrorKind::no_evidence: return "no_evidence";
    case ErrorKind::syntax: return "syntax";
    case ErrorKind::reference: return "reference";
    case ErrorKind::invariant: return "invariant";
    case ErrorKind::unknown_anomaly: return "unknown_anomaly";
    case ErrorKind::unknown_question: return "unknown_question";
    case ErrorKind::degenerate_sheet: return "degenerate_sheet";
    case ErrorKind::invalid_cutoff: return "invalid_cutoff";
    case ErrorKind::incomplete_mapping: return "incomplete_mapping";
    case ErrorKind::already_answered: return "already_answered";
    case ErrorKind::not_pending: return "not_pending";
    case ErrorKind::type_mismatch: return "type_mismatch";
    case ErrorKind::nothing_to_undo: return "nothing_to_undo";
    case ErrorKind::missing_answer: return "missing_answer";
    case ErrorKind::session_incomplete: return "session_incomplete";
    case ErrorKind::script_underrun: return "script_underrun";
    case ErrorKind::insufficient_data: return "insufficient_data";
    case ErrorKind::corrupt_log: return "corrupt_log";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

// Every failure raised by the library is a cchain::Error. `subject` names the
// offending entity (an identifier, an invariant name, a file) when there is one.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message, std::string subject = {})
      : std::runtime_error(message), kind_(kind), subject_(std::move(subject)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& subject() const noexcept { return subject_; }

 private:
  ErrorKind kind_;
  std::string subject_;
};

class SyntaxError : public Error {
 public:
  SyntaxError(const std::string& message, std::size_t line, std::size_t column)
      : Error(ErrorKind::syntax,
              "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + message),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

}  // namespace cchain
