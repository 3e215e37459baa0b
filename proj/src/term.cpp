#include "hornpoc/term.hpp"

#include <functional>
#include <unordered_set>

namespace hornpoc {

namespace detail {

struct TermNode {
  TermKind kind;
  std::string id;
  TypeName type;
  std::vector<Term> args;
  std::uint32_t index = 0;
  std::size_t hash = 0;
  std::uint32_t depth = 1;
  bool closed = true;
};

}  // namespace detail

namespace {

std::size_t mix(std::size_t seed, std::size_t v) {
  return seed ^ (v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
}

std::shared_ptr<const detail::TermNode> make_node(TermKind kind, std::string id, TypeName type,
                                                  std::vector<Term> args, std::uint32_t index) {
  auto node = std::make_shared<detail::TermNode>();
  node->kind = kind;
  node->id = std::move(id);
  node->type = std::move(type);
  node->args = std::move(args);
  node->index = index;

  std::size_t h = mix(static_cast<std::size_t>(kind), std::hash<std::string>{}(node->id));
  h = mix(h, std::hash<std::string>{}(node->type.id));
  h = mix(h, index);
  std::uint32_t depth = 0;
  bool closed = kind != TermKind::Variable;
  for (const Term& a : node->args) {
    h = mix(h, a.hash());
    depth = std::max(depth, a.depth());
    closed = closed && a.is_closed();
  }
  node->hash = h;
  node->depth = depth + 1;
  node->closed = closed;
  return node;
}

}  // namespace

Term Term::variable(std::string id, TypeName type, std::uint32_t index) {
  return Term(make_node(TermKind::Variable, std::move(id), std::move(type), {}, index));
}

Term Term::name(std::string id, std::vector<Term> params, TypeName type) {
  return Term(make_node(TermKind::Name, std::move(id), std::move(type), std::move(params), 0));
}

Term Term::function(std::string symbol, std::vector<Term> args, TypeName type) {
  return Term(make_node(TermKind::Function, std::move(symbol), std::move(type), std::move(args), 0));
}

TermKind Term::kind() const { return node_->kind; }
const std::string& Term::id() const { return node_->id; }
const TypeName& Term::type() const { return node_->type; }
const std::vector<Term>& Term::args() const { return node_->args; }
std::uint32_t Term::index() const { return node_->index; }
bool Term::is_closed() const { return node_->closed; }
std::uint32_t Term::depth() const { return node_->depth; }
std::size_t Term::hash() const { return node_->hash; }

bool operator==(const Term& a, const Term& b) {
  if (a.node_ == b.node_) return true;
  if (a.hash() != b.hash()) return false;
  return compare(a, b) == 0;
}

bool operator<(const Term& a, const Term& b) { return compare(a, b) < 0; }

int compare(const Term& a, const Term& b) {
  if (a.node() == b.node()) return 0;
  if (a.kind() != b.kind()) return a.kind() < b.kind() ? -1 : 1;
  if (int c = a.id().compare(b.id()); c != 0) return c < 0 ? -1 : 1;
  if (a.index() != b.index()) return a.index() < b.index() ? -1 : 1;
  if (int c = a.type().id.compare(b.type().id); c != 0) return c < 0 ? -1 : 1;
  if (a.arity() != b.arity()) return a.arity() < b.arity() ? -1 : 1;
  for (std::size_t i = 0; i < a.arity(); ++i) {
    if (int c = compare(a.args()[i], b.args()[i]); c != 0) return c;
  }
  return 0;
}

std::string to_string(const Term& t) {
  std::string out;
  switch (t.kind()) {
    case TermKind::Variable:
      out = t.id();
      if (t.index() != 0) out += "'" + std::to_string(t.index());
      return out;
    case TermKind::Name:
      out = t.id() + "[";
      for (std::size_t i = 0; i < t.arity(); ++i) {
        if (i) out += ",";
        out += to_string(t.args()[i]);
      }
      return out + "]";
    case TermKind::Function:
      out = t.id();
      if (t.arity() == 0) return out;
      out += "(";
      for (std::size_t i = 0; i < t.arity(); ++i) {
        if (i) out += ",";
        out += to_string(t.args()[i]);
      }
      return out + ")";
  }
  return out;
}

bool is_closed(const Term& t) { return t.is_closed(); }

std::size_t VarKeyHash::operator()(const VarKey& k) const noexcept {
  return mix(std::hash<std::string>{}(k.id), k.index);
}

// ---------------------------------------------------------------------------
// Substitution

const Term* Substitution::lookup(const VarKey& key) const {
  auto it = bindings_.find(key);
  return it == bindings_.end() ? nullptr : &it->second.value;
}

const Term* Substitution::lookup(const Term& var) const { return lookup(VarKey::of(var)); }

bool Substitution::bind(const Term& var, const Term& value) {
  if (!var.is_variable() || var.type() != value.type()) return false;
  auto [it, inserted] = bindings_.try_emplace(VarKey::of(var), Binding{var, value});
  return inserted || it->second.value == value;
}

bool Substitution::well_typed() const {
  for (const auto& [key, b] : bindings_) {
    if (b.variable.type() != b.value.type()) return false;
  }
  return true;
}

bool Substitution::is_idempotent() const {
  for (const auto& [key, b] : bindings_) {
    for (const auto& [other, ob] : bindings_) {
      if (occurs(other, b.value)) return false;
    }
  }
  return true;
}

bool operator==(const Substitution& a, const Substitution& b) {
  if (a.bindings_.size() != b.bindings_.size()) return false;
  auto ia = a.bindings_.begin();
  auto ib = b.bindings_.begin();
  for (; ia != a.bindings_.end(); ++ia, ++ib) {
    if (ia->first != ib->first || !(ia->second.value == ib->second.value)) return false;
  }
  return true;
}

std::string to_string(const Substitution& s) {
  std::string out = "{";
  bool first = true;
  for (const auto& [key, b] : s.bindings()) {
    if (!first) out += ", ";
    first = false;
    out += to_string(b.variable) + " -> " + to_string(b.value);
  }
  return out + "}";
}

namespace {

Term resolve_triangular(const Term& t, const std::map<VarKey, Term>& tri,
                        std::vector<VarKey>& stack, bool& cyclic) {
  if (cyclic) return t;
  if (t.is_variable()) {
    VarKey key = VarKey::of(t);
    auto it = tri.find(key);
    if (it == tri.end()) return t;
    for (const VarKey& k : stack) {
      if (k == key) {
        cyclic = true;
        return t;
      }
    }
    stack.push_back(key);
    Term r = resolve_triangular(it->second, tri, stack, cyclic);
    stack.pop_back();
    return r;
  }
  if (t.is_closed()) return t;
  std::vector<Term> args;
  args.reserve(t.arity());
  bool changed = false;
  for (const Term& a : t.args()) {
    args.push_back(resolve_triangular(a, tri, stack, cyclic));
    changed = changed || args.back().node() != a.node();
  }
  if (!changed) return t;
  return t.is_name() ? Term::name(t.id(), std::move(args), t.type())
                     : Term::function(t.id(), std::move(args), t.type());
}

}  // namespace

std::optional<Substitution> Substitution::normalized(
    const std::vector<std::pair<Term, Term>>& bindings) {
  std::map<VarKey, Term> tri;
  std::map<VarKey, Term> vars;
  for (const auto& [var, value] : bindings) {
    if (!var.is_variable() || var.type() != value.type()) return std::nullopt;
    auto [it, inserted] = tri.try_emplace(VarKey::of(var), value);
    if (!inserted && !(it->second == value)) return std::nullopt;
    vars.try_emplace(VarKey::of(var), var);
  }
  Substitution out;
  for (const auto& [key, value] : tri) {
    std::vector<VarKey> stack{key};
    bool cyclic = false;
    Term resolved = resolve_triangular(value, tri, stack, cyclic);
    if (cyclic) return std::nullopt;
    if (resolved.is_variable() && VarKey::of(resolved) == key) continue;
    out.bindings_.emplace(key, Binding{vars.at(key), resolved});
  }
  return out;
}

Term apply(const Substitution& sub, const Term& t) {
  if (t.is_closed() || sub.empty()) return t;
  if (t.is_variable()) {
    const Term* v = sub.lookup(t);
    return v ? *v : t;
  }
  std::vector<Term> args;
  args.reserve(t.arity());
  bool changed = false;
  for (const Term& a : t.args()) {
    args.push_back(apply(sub, a));
    changed = changed || args.back().node() != a.node();
  }
  if (!changed) return t;
  return t.is_name() ? Term::name(t.id(), std::move(args), t.type())
                     : Term::function(t.id(), std::move(args), t.type());
}

bool occurs(const VarKey& var, const Term& t) {
  if (t.is_closed()) return false;
  if (t.is_variable()) return VarKey::of(t) == var;
  for (const Term& a : t.args()) {
    if (occurs(var, a)) return true;
  }
  return false;
}

void collect_variables(const Term& t, std::vector<Term>& out) {
  if (t.is_closed()) return;
  if (t.is_variable()) {
    for (const Term& v : out) {
      if (VarKey::of(v) == VarKey::of(t)) return;
    }
    out.push_back(t);
    return;
  }
  for (const Term& a : t.args()) collect_variables(a, out);
}

Term rename(const Term& t, std::uint32_t index) {
  if (t.is_closed()) return t;
  if (t.is_variable()) return Term::variable(t.id(), t.type(), index);
  std::vector<Term> args;
  args.reserve(t.arity());
  for (const Term& a : t.args()) args.push_back(rename(a, index));
  return t.is_name() ? Term::name(t.id(), std::move(args), t.type())
                     : Term::function(t.id(), std::move(args), t.type());
}

namespace {

// Triangular unification state: bindings may refer to other bound variables.
struct Unifier {
  std::map<VarKey, Term> tri;

  Term walk(Term t) const {
    while (t.is_variable()) {
      auto it = tri.find(VarKey::of(t));
      if (it == tri.end()) break;
      t = it->second;
    }
    return t;
  }

  bool occurs_walked(const VarKey& var, const Term& t) const {
    Term w = walk(t);
    if (w.is_closed()) return false;
    if (w.is_variable()) return VarKey::of(w) == var;
    for (const Term& a : w.args()) {
      if (occurs_walked(var, a)) return true;
    }
    return false;
  }

  bool unify(const Term& a0, const Term& b0) {
    Term a = walk(a0);
    Term b = walk(b0);
    if (a.type() != b.type()) return false;
    if (a.is_variable() && b.is_variable() && VarKey::of(a) == VarKey::of(b)) return true;
    if (a.is_variable()) return bind(a, b);
    if (b.is_variable()) return bind(b, a);
    if (a.kind() != b.kind() || a.id() != b.id() || a.arity() != b.arity()) return false;
    if (a.is_closed() && b.is_closed()) return a == b;
    for (std::size_t i = 0; i < a.arity(); ++i) {
      if (!unify(a.args()[i], b.args()[i])) return false;
    }
    return true;
  }

  bool bind(const Term& var, const Term& value) {
    if (occurs_walked(VarKey::of(var), value)) return false;
    tri.emplace(VarKey::of(var), value);
    return true;
  }
};

}  // namespace

std::optional<Substitution> unify(const Term& t1, const Term& t2) {
  Unifier u;
  if (!u.unify(t1, t2)) return std::nullopt;
  std::vector<Term> vars;
  collect_variables(t1, vars);
  collect_variables(t2, vars);
  std::vector<std::pair<Term, Term>> bindings;
  for (const Term& v : vars) {
    auto it = u.tri.find(VarKey::of(v));
    if (it != u.tri.end()) bindings.emplace_back(v, it->second);
  }
  return Substitution::normalized(bindings);
}

bool match_into(const Term& pattern, const Term& target, Substitution& sub) {
  if (pattern.type() != target.type()) return false;
  if (pattern.is_variable()) {
    if (const Term* bound = sub.lookup(pattern)) return *bound == target;
    return sub.bind(pattern, target);
  }
  if (pattern.kind() != target.kind() || pattern.id() != target.id() ||
      pattern.arity() != target.arity()) {
    return false;
  }
  if (pattern.is_closed()) return pattern == target;
  for (std::size_t i = 0; i < pattern.arity(); ++i) {
    if (!match_into(pattern.args()[i], target.args()[i], sub)) return false;
  }
  return true;
}

std::optional<Substitution> match(const Term& pattern, const Term& target) {
  Substitution sub;
  if (!match_into(pattern, target, sub)) return std::nullopt;
  return sub;
}

}  // namespace hornpoc
