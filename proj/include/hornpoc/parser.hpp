#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hornpoc/diagnostic.hpp"
#include "hornpoc/model.hpp"

namespace hornpoc {

struct ParseResult {
  std::optional<Model> model;  // present iff there are no errors
  std::vector<Diagnostic> diagnostics;

  bool ok() const { return model.has_value(); }
};

/// Parses and validates an `.exthorntype` model. `file` is used in spans;
/// `model_name` defaults to the file's stem.
ParseResult parse_model(std::string_view source, const std::string& file = "",
                        std::string model_name = "");

/// Parses a fact written in model syntax against the symbols of `m`.
/// Bare identifiers that are not constants become variables typed by position.
std::optional<Fact> parse_fact(std::string_view text, const Model& m, std::vector<Diagnostic>& diags);

/// Deterministic pretty-print; parse_model(print_model(m)) == m.
std::string print_model(const Model& m);

/// Holes rendered with `delimiter`, literals escaped; no surrounding brackets.
std::string annotation_body(const ClauseAnnotation& a, char delimiter);
std::string annotation_body(const FunctionSymbolAnnotation& a, char delimiter);

}  // namespace hornpoc
