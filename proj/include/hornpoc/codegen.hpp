#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hornpoc/derive.hpp"
#include "hornpoc/model.hpp"

namespace hornpoc {

const char* version();

/// Fresh identifiers x1, x2, ... for closed terms, stable per term.
class LiteralAllocator {
 public:
  const std::string& literal(const Term& closed);
  const std::map<Term, std::string>& memo() const { return memo_; }

 private:
  std::map<Term, std::string> memo_;
  std::size_t counter_ = 0;
};

struct CodegenError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PocLine {
  std::string text;
  std::size_t node_id = 0;
};

struct PocProgram {
  std::string model_name;
  std::string query;  // closed root fact
  std::string header;
  std::vector<PocLine> body;
  std::string footer;
};

/// Annotated symbols expand their template; names and unannotated
/// applications become literals. Literals of unannotated subterms are
/// allocated before the literal of the term that contains them.
std::string translate_term(const Model& m, LiteralAllocator& alloc, const Term& t);

/// nullopt for clauses without annotation. Throws CodegenError when a hole
/// instantiates to an open term.
std::optional<std::string> translate_node(const Clause& c, const Substitution& sub, const Model& m,
                                          LiteralAllocator& alloc);

/// Post-order walk with one allocator; empty translations are skipped.
PocProgram translate_tree(const Model& m, const DerivationTree& t);

std::string render(const PocProgram& p);

/// `<index>_<query with non-alphanumeric runs collapsed to '_'><ext>`.
std::string poc_file_name(std::size_t index, const Fact& query, std::string_view ext = ".py");

}  // namespace hornpoc
