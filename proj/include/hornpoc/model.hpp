#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "hornpoc/diagnostic.hpp"
#include "hornpoc/term.hpp"

namespace hornpoc {

enum class FactKind { Predicate, Disequality };

/// A predicate over terms, or a disequality `lhs <> rhs`.
struct Fact {
  FactKind kind = FactKind::Predicate;
  std::string predicate;  // empty for disequalities
  std::vector<Term> args;  // {lhs, rhs} for disequalities

  static Fact make(std::string pred, std::vector<Term> args) {
    return Fact{FactKind::Predicate, std::move(pred), std::move(args)};
  }
  static Fact disequality(Term lhs, Term rhs) {
    return Fact{FactKind::Disequality, {}, {std::move(lhs), std::move(rhs)}};
  }

  bool is_predicate() const { return kind == FactKind::Predicate; }
  bool is_disequality() const { return kind == FactKind::Disequality; }
  const Term& lhs() const { return args[0]; }
  const Term& rhs() const { return args[1]; }

  bool is_closed() const;
  std::uint32_t depth() const;
  std::size_t hash() const;

  friend bool operator==(const Fact&, const Fact&) = default;
};

struct FactHash {
  std::size_t operator()(const Fact& f) const noexcept { return f.hash(); }
};

std::string to_string(const Fact& f);
Fact apply(const Substitution& sub, const Fact& f);
bool match_into(const Fact& pattern, const Fact& target, Substitution& sub);
void collect_variables(const Fact& f, std::vector<Term>& out);
Fact rename(const Fact& f, std::uint32_t index);

struct PredicateSymbol {
  std::string id;
  std::vector<TypeName> param_types;
  SourceSpan span;

  std::size_t arity() const { return param_types.size(); }
  friend bool operator==(const PredicateSymbol& a, const PredicateSymbol& b) {
    return a.id == b.id && a.param_types == b.param_types;
  }
};

struct NameSignature {
  std::string id;
  std::vector<TypeName> param_types;
  TypeName type;
  SourceSpan span;

  friend bool operator==(const NameSignature& a, const NameSignature& b) {
    return a.id == b.id && a.param_types == b.param_types && a.type == b.type;
  }
};

struct TermHole {
  Term term;
  friend bool operator==(const TermHole&, const TermHole&) = default;
};

struct IndexHole {
  int index = 1;  // 1-based argument position
  friend bool operator==(const IndexHole&, const IndexHole&) = default;
};

using ClauseSegment = std::variant<std::string, TermHole>;
using SymbolSegment = std::variant<std::string, IndexHole>;

/// Code template attached to a clause; holes are terms over the clause's
/// variables. The delimiter only records how the template was written.
struct ClauseAnnotation {
  std::vector<ClauseSegment> segments;
  char delimiter = '|';
  SourceSpan span;

  friend bool operator==(const ClauseAnnotation& a, const ClauseAnnotation& b) {
    return a.segments == b.segments;
  }
};

/// Code template attached to a function symbol; holes are argument positions.
struct FunctionSymbolAnnotation {
  std::vector<SymbolSegment> segments;
  char delimiter = '|';
  SourceSpan span;

  friend bool operator==(const FunctionSymbolAnnotation& a, const FunctionSymbolAnnotation& b) {
    return a.segments == b.segments;
  }
};

struct FunctionSymbol {
  std::string id;
  std::vector<TypeName> param_types;
  TypeName result_type;
  std::optional<FunctionSymbolAnnotation> annotation;
  SourceSpan span;

  std::size_t arity() const { return param_types.size(); }
  friend bool operator==(const FunctionSymbol& a, const FunctionSymbol& b) {
    return a.id == b.id && a.param_types == b.param_types && a.result_type == b.result_type &&
           a.annotation == b.annotation;
  }
};

struct Clause {
  std::string label;
  std::vector<Fact> hypotheses;  // multiset; order is the exploration order
  Fact conclusion;
  std::optional<ClauseAnnotation> annotation;
  SourceSpan span;

  /// Variables of the clause in first-occurrence order (hypotheses first).
  std::vector<Term> variables() const;

  friend bool operator==(const Clause& a, const Clause& b) {
    return a.label == b.label && a.hypotheses == b.hypotheses && a.conclusion == b.conclusion &&
           a.annotation == b.annotation;
  }
};

std::string to_string(const Clause& c);

struct Query {
  Fact fact;
  SourceSpan span;

  friend bool operator==(const Query& a, const Query& b) { return a.fact == b.fact; }
};

struct Model {
  std::string name;
  std::vector<TypeName> types;
  std::vector<NameSignature> names;
  std::vector<FunctionSymbol> functions;
  std::vector<PredicateSymbol> predicates;
  std::vector<Clause> clauses;
  std::vector<Query> queries;
  std::optional<std::string> header;
  std::optional<std::string> footer;

  const FunctionSymbol* find_function(std::string_view id, std::size_t arity) const;
  const FunctionSymbol* find_constant(std::string_view id) const { return find_function(id, 0); }
  const PredicateSymbol* find_predicate(std::string_view id) const;
  const NameSignature* find_name(std::string_view id) const;
  const Clause* find_clause(std::string_view label) const;
  bool has_type(const TypeName& t) const;

  friend bool operator==(const Model& a, const Model& b) {
    return a.types == b.types && a.names == b.names && a.functions == b.functions &&
           a.predicates == b.predicates && a.clauses == b.clauses && a.queries == b.queries &&
           a.header == b.header && a.footer == b.footer;
  }
};

/// R1 ⊒σ R2: apply(σ, C1) = C2 and apply(σ, H1) ⊆# H2. Variables of r2 are
/// rigid. Hypotheses are matched by exhaustive backtracking over injections.
std::optional<Substitution> subsumes(const Clause& r1, const Clause& r2);

/// Variant of `subsumes` that checks a given σ instead of searching for one:
/// σ must map the conclusion exactly and the hypotheses into a sub-multiset.
bool witnesses_subsumption(const Clause& r1, const Clause& r2, const Substitution& sigma);

/// Resolution errors and the conclusion-variable lint.
std::vector<Diagnostic> validate(const Model& m);

/// Conclusion variables that occur in no hypothesis, ignoring occurrences
/// inside name parameters (those are allowed by the lint).
std::vector<Term> unbound_conclusion_variables(const Clause& c);

}  // namespace hornpoc
