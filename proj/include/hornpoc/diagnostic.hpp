#pragma once

#include <string>
#include <vector>

namespace hornpoc {

/// Location of a construct in a model file. Line and column are 1-based;
/// a default span (line 0) means "not from a file".
struct SourceSpan {
  std::string file;
  int line = 0;
  int column = 0;
  int length = 0;

  bool valid() const { return line > 0; }
  friend bool operator==(const SourceSpan&, const SourceSpan&) = default;
};

enum class Severity { Error, Warning };

struct Diagnostic {
  Severity severity = Severity::Error;
  std::string code;
  std::string message;
  SourceSpan span;

  bool is_error() const { return severity == Severity::Error; }
};

inline bool has_errors(const std::vector<Diagnostic>& diags) {
  for (const auto& d : diags) {
    if (d.is_error()) return true;
  }
  return false;
}

/// `file:line:col: error[code]: message`, optionally with ANSI color.
std::string format_diagnostic(const Diagnostic& d, bool color = false);

}  // namespace hornpoc
