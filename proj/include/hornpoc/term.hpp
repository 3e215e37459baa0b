#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace hornpoc {

/// Type of a term. Untyped models use `TypeName::universal()` everywhere.
struct TypeName {
  std::string id;

  static TypeName universal() { return TypeName{"any"}; }

  friend bool operator==(const TypeName&, const TypeName&) = default;
  friend auto operator<=>(const TypeName&, const TypeName&) = default;
};

enum class TermKind : std::uint8_t { Variable, Name, Function };

class Term;

namespace detail {
struct TermNode;
}

/// Immutable first-order term: a typed variable, a name with parameters
/// (`n[t1,...,tk]`), or a function application `f(t1,...,tn)`.
///
/// Terms share structure and are cheap to copy. Equality is structural.
/// Variables are identified by (id, index); index 0 is a variable as written
/// in a model, other indices are renamed-apart copies made during search.
class Term {
 public:
  static Term variable(std::string id, TypeName type, std::uint32_t index = 0);
  static Term name(std::string id, std::vector<Term> params, TypeName type);
  static Term function(std::string symbol, std::vector<Term> args, TypeName type);
  static Term constant(std::string symbol, TypeName type) {
    return function(std::move(symbol), {}, std::move(type));
  }

  TermKind kind() const;
  bool is_variable() const { return kind() == TermKind::Variable; }
  bool is_name() const { return kind() == TermKind::Name; }
  bool is_function() const { return kind() == TermKind::Function; }

  /// Variable id, name id, or function symbol id.
  const std::string& id() const;
  /// Variable type, name type, or function result type.
  const TypeName& type() const;
  /// Name parameters or function arguments; empty for variables.
  const std::vector<Term>& args() const;
  std::size_t arity() const { return args().size(); }
  std::uint32_t index() const;

  bool is_closed() const;
  /// Names and constants have depth 1, variables count as depth 1.
  std::uint32_t depth() const;
  std::size_t hash() const;

  friend bool operator==(const Term& a, const Term& b);
  friend bool operator<(const Term& a, const Term& b);

  const detail::TermNode* node() const { return node_.get(); }

 private:
  explicit Term(std::shared_ptr<const detail::TermNode> node) : node_(std::move(node)) {}
  std::shared_ptr<const detail::TermNode> node_;
};

/// Three-way structural comparison giving a total order on terms.
int compare(const Term& a, const Term& b);

std::string to_string(const Term& t);

bool is_closed(const Term& t);

/// Identity of a variable, independent of its type.
struct VarKey {
  std::string id;
  std::uint32_t index = 0;

  static VarKey of(const Term& var) { return VarKey{var.id(), var.index()}; }
  friend bool operator==(const VarKey&, const VarKey&) = default;
  friend auto operator<=>(const VarKey&, const VarKey&) = default;
};

struct VarKeyHash {
  std::size_t operator()(const VarKey& k) const noexcept;
};

struct TermHash {
  std::size_t operator()(const Term& t) const noexcept { return t.hash(); }
};

/// Finite map from variables to terms.
///
/// Application is simultaneous: each bound variable is replaced by its image
/// once. Substitutions built by `normalized` (and every unifier) are
/// idempotent, so applying them twice equals applying them once.
class Substitution {
 public:
  struct Binding {
    Term variable;
    Term value;
  };

  Substitution() = default;

  /// Resolves triangular bindings (later bindings may mention earlier bound
  /// variables and vice versa) into idempotent form. Returns nullopt on a
  /// cyclic binding or a type mismatch.
  static std::optional<Substitution> normalized(const std::vector<std::pair<Term, Term>>& bindings);

  /// Adds v ↦ value. Fails if v is bound to something else or types differ.
  bool bind(const Term& var, const Term& value);

  const Term* lookup(const Term& var) const;
  const Term* lookup(const VarKey& key) const;
  bool contains(const Term& var) const { return lookup(var) != nullptr; }

  bool empty() const { return bindings_.empty(); }
  std::size_t size() const { return bindings_.size(); }
  const std::map<VarKey, Binding>& bindings() const { return bindings_; }

  /// True when every image has the bound variable's type.
  bool well_typed() const;
  bool is_idempotent() const;

  friend bool operator==(const Substitution& a, const Substitution& b);

 private:
  std::map<VarKey, Binding> bindings_;
};

std::string to_string(const Substitution& s);

Term apply(const Substitution& sub, const Term& t);

/// Most general unifier with occurs-check. Type-mismatched pairs fail.
std::optional<Substitution> unify(const Term& t1, const Term& t2);

/// One-sided matching: returns σ with apply(σ, pattern) == target. Variables
/// of `target` are treated as rigid constants.
std::optional<Substitution> match(const Term& pattern, const Term& target);

/// Extends `sub` so that apply(sub, pattern) == target; leaves `sub` in an
/// unspecified state on failure.
bool match_into(const Term& pattern, const Term& target, Substitution& sub);

/// Appends the variables of t (first occurrence order, no duplicates).
void collect_variables(const Term& t, std::vector<Term>& out);
bool occurs(const VarKey& var, const Term& t);

/// Same shape with every variable's index replaced by `index`.
Term rename(const Term& t, std::uint32_t index);

}  // namespace hornpoc
