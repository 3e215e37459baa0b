#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "hornpoc/model.hpp"
#include "hornpoc/parser.hpp"
#include "hornpoc/term.hpp"

namespace hornpoc::testing {

inline TypeName any() { return TypeName::universal(); }
inline Term V(const std::string& id) { return Term::variable(id, any()); }
inline Term N(const std::string& id, std::vector<Term> params = {}) { return Term::name(id, std::move(params), any()); }
inline Term F(const std::string& id, std::vector<Term> args = {}) { return Term::function(id, std::move(args), any()); }
inline Fact P(const std::string& pred, std::vector<Term> args) { return Fact::make(pred, std::move(args)); }

inline Substitution S(const std::vector<std::pair<Term, Term>>& bs) {
  Substitution s;
  for (const auto& [v, t] : bs) {
    if (!s.bind(v, t)) throw std::logic_error("bad test substitution");
  }
  return s;
}

inline std::string read_text(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::filesystem::path model_file(const std::string& file) {
  return std::filesystem::path(HORNPOC_MODELS_DIR) / file;
}

inline Model load_model(const std::filesystem::path& p) {
  ParseResult r = parse_model(read_text(p), p.string());
  if (!r.ok()) {
    std::string msg;
    for (const auto& d : r.diagnostics) msg += format_diagnostic(d) + "\n";
    throw std::runtime_error(msg);
  }
  return std::move(*r.model);
}

inline Model running_example() { return load_model(model_file("running_example.exthorntype")); }

inline Model parse_ok(const std::string& text) {
  ParseResult r = parse_model(text, "inline.exthorntype", "inline");
  if (!r.ok()) {
    std::string msg;
    for (const auto& d : r.diagnostics) msg += format_diagnostic(d) + "\n";
    throw std::runtime_error(msg);
  }
  return std::move(*r.model);
}

}  // namespace hornpoc::testing
