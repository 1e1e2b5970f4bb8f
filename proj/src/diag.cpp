#include "modelcc/diag.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

namespace modelcc {

std::string Error::to_string() const {
  std::ostringstream out;
  switch (kind) {
    case ErrorKind::Usage: out << "usage error"; break;
    case ErrorKind::Model: out << "model error"; break;
    case ErrorKind::Lexical: out << "lexical error"; break;
    case ErrorKind::Syntax: out << "syntax error"; break;
    case ErrorKind::OverConstrained: out << "over-constrained"; break;
    case ErrorKind::Ambiguity: out << "ambiguous input"; break;
    case ErrorKind::UnresolvedReference: out << "unresolved reference"; break;
    case ErrorKind::DuplicateId: out << "duplicate id"; break;
    case ErrorKind::Eval: out << "evaluation error"; break;
    case ErrorKind::Io: out << "io error"; break;
  }
  if (offset != kNoOffset) out << " at offset " << offset;
  out << ": " << message;
  return out.str();
}

std::string format_diagnostic(const std::string& file, const Diagnostic& d) {
  std::ostringstream out;
  out << file << ':' << d.pos.line << ':' << d.pos.column << ": "
      << (d.severity == Severity::Error ? "error" : "warning") << ": " << d.message;
  return out.str();
}

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value < 0 ? "-inf" : "inf";
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, r.ptr);
}

}  // namespace modelcc
