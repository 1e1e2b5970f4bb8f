#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace modelcc {

// Byte offsets into the input text, end exclusive.
struct Span {
  size_t start = 0;
  size_t end = 0;

  size_t length() const { return end - start; }
  bool operator==(const Span&) const = default;
};

inline constexpr size_t kNoOffset = std::numeric_limits<size_t>::max();

enum class ErrorKind {
  Usage,
  Model,       // invalid model, conflicting constraints, bad hooks
  Lexical,     // no tokenization path
  Syntax,      // no complete parse
  OverConstrained,
  Ambiguity,   // more than one interpretation where one was required
  UnresolvedReference,
  DuplicateId,
  Eval,        // missing hook, cyclic strict fold, value conversion
  Io,
};

struct Error {
  ErrorKind kind = ErrorKind::Model;
  std::string message;
  size_t offset = kNoOffset;             // byte offset into the parsed input, if any
  std::vector<std::string> expected;     // expected token classes at `offset`
  size_t interpretation_count = 0;       // for Ambiguity
  std::vector<std::string> details;      // e.g. renderings of the first two trees

  std::string to_string() const;
};

// Lightweight success-or-error carrier used across the pipeline.
template <class T>
class Result {
 public:
  Result(T value) : v_(std::move(value)) {}
  Result(Error error) : v_(std::move(error)) {}

  bool ok() const { return std::holds_alternative<T>(v_); }
  explicit operator bool() const { return ok(); }

  T& value() { return std::get<T>(v_); }
  const T& value() const { return std::get<T>(v_); }
  T&& take() { return std::move(std::get<T>(v_)); }

  Error& error() { return std::get<Error>(v_); }
  const Error& error() const { return std::get<Error>(v_); }

 private:
  std::variant<T, Error> v_;
};

// Position inside a source document, 1-based, used for .mcc diagnostics.
struct SourcePos {
  int line = 1;
  int column = 1;
  bool operator==(const SourcePos&) const = default;
};

struct SourceRange {
  SourcePos begin;
  SourcePos end;
};

enum class Severity { Error, Warning };

struct Diagnostic {
  Severity severity = Severity::Error;
  SourcePos pos;
  std::string message;
};

// Formats as `file:line:col: severity: message`.
std::string format_diagnostic(const std::string& file, const Diagnostic& d);

// Shortest decimal representation that round-trips the value.
std::string format_double(double value);

}  // namespace modelcc
