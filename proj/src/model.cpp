#include "hornpoc/model.hpp"

#include <algorithm>
#include <functional>
#include <set>

namespace hornpoc {

std::string format_diagnostic(const Diagnostic& d, bool color) {
  std::string out;
  if (d.span.valid()) {
    out += d.span.file.empty() ? "<input>" : d.span.file;
    out += ":" + std::to_string(d.span.line) + ":" + std::to_string(d.span.column) + ": ";
  }
  const char* sev = d.is_error() ? "error" : "warning";
  if (color) {
    out += d.is_error() ? "\x1b[1;31m" : "\x1b[1;33m";
    out += sev;
    out += "\x1b[0m";
  } else {
    out += sev;
  }
  if (!d.code.empty()) out += "[" + d.code + "]";
  return out + ": " + d.message;
}

// ---------------------------------------------------------------------------
// Facts

bool Fact::is_closed() const {
  return std::all_of(args.begin(), args.end(), [](const Term& t) { return t.is_closed(); });
}

std::uint32_t Fact::depth() const {
  std::uint32_t d = 0;
  for (const Term& t : args) d = std::max(d, t.depth());
  return d;
}

std::size_t Fact::hash() const {
  std::size_t h = std::hash<std::string>{}(predicate) ^ static_cast<std::size_t>(kind);
  for (const Term& t : args) h = h * 1000003u ^ t.hash();
  return h;
}

std::string to_string(const Fact& f) {
  if (f.is_disequality()) return to_string(f.lhs()) + " <> " + to_string(f.rhs());
  std::string out = f.predicate + "(";
  for (std::size_t i = 0; i < f.args.size(); ++i) {
    if (i) out += ",";
    out += to_string(f.args[i]);
  }
  return out + ")";
}

Fact apply(const Substitution& sub, const Fact& f) {
  Fact out{f.kind, f.predicate, {}};
  out.args.reserve(f.args.size());
  for (const Term& t : f.args) out.args.push_back(apply(sub, t));
  return out;
}

bool match_into(const Fact& pattern, const Fact& target, Substitution& sub) {
  if (pattern.kind != target.kind || pattern.predicate != target.predicate ||
      pattern.args.size() != target.args.size()) {
    return false;
  }
  for (std::size_t i = 0; i < pattern.args.size(); ++i) {
    if (!match_into(pattern.args[i], target.args[i], sub)) return false;
  }
  return true;
}

void collect_variables(const Fact& f, std::vector<Term>& out) {
  for (const Term& t : f.args) collect_variables(t, out);
}

Fact rename(const Fact& f, std::uint32_t index) {
  Fact out{f.kind, f.predicate, {}};
  out.args.reserve(f.args.size());
  for (const Term& t : f.args) out.args.push_back(rename(t, index));
  return out;
}

// ---------------------------------------------------------------------------
// Clauses

std::vector<Term> Clause::variables() const {
  std::vector<Term> vars;
  for (const Fact& h : hypotheses) collect_variables(h, vars);
  collect_variables(conclusion, vars);
  if (annotation) {
    for (const auto& seg : annotation->segments) {
      if (const auto* hole = std::get_if<TermHole>(&seg)) collect_variables(hole->term, vars);
    }
  }
  return vars;
}

std::string to_string(const Clause& c) {
  std::string out;
  for (std::size_t i = 0; i < c.hypotheses.size(); ++i) {
    if (i) out += " && ";
    out += to_string(c.hypotheses[i]);
  }
  if (!out.empty()) out += " ";
  return out + "=> " + to_string(c.conclusion);
}

// ---------------------------------------------------------------------------
// Model lookups

const FunctionSymbol* Model::find_function(std::string_view id, std::size_t arity) const {
  for (const auto& f : functions) {
    if (f.id == id && f.arity() == arity) return &f;
  }
  return nullptr;
}

const PredicateSymbol* Model::find_predicate(std::string_view id) const {
  for (const auto& p : predicates) {
    if (p.id == id) return &p;
  }
  return nullptr;
}

const NameSignature* Model::find_name(std::string_view id) const {
  for (const auto& n : names) {
    if (n.id == id) return &n;
  }
  return nullptr;
}

const Clause* Model::find_clause(std::string_view label) const {
  for (const auto& c : clauses) {
    if (c.label == label) return &c;
  }
  return nullptr;
}

bool Model::has_type(const TypeName& t) const {
  if (t == TypeName::universal()) return true;
  return std::find(types.begin(), types.end(), t) != types.end();
}

// ---------------------------------------------------------------------------
// Subsumption

namespace {

bool inject_hypotheses(const std::vector<Fact>& h1, std::size_t i, const std::vector<Fact>& h2,
                       std::vector<bool>& used, Substitution& sub) {
  if (i == h1.size()) return true;
  for (std::size_t j = 0; j < h2.size(); ++j) {
    if (used[j]) continue;
    Substitution attempt = sub;
    if (!match_into(h1[i], h2[j], attempt)) continue;
    used[j] = true;
    if (inject_hypotheses(h1, i + 1, h2, used, attempt)) {
      sub = std::move(attempt);
      return true;
    }
    used[j] = false;
  }
  return false;
}

}  // namespace

std::optional<Substitution> subsumes(const Clause& r1, const Clause& r2) {
  if (r1.hypotheses.size() > r2.hypotheses.size()) return std::nullopt;
  Substitution sub;
  if (!match_into(r1.conclusion, r2.conclusion, sub)) return std::nullopt;
  std::vector<bool> used(r2.hypotheses.size(), false);
  if (!inject_hypotheses(r1.hypotheses, 0, r2.hypotheses, used, sub)) return std::nullopt;
  return sub;
}

bool witnesses_subsumption(const Clause& r1, const Clause& r2, const Substitution& sigma) {
  if (!(apply(sigma, r1.conclusion) == r2.conclusion)) return false;
  std::vector<bool> used(r2.hypotheses.size(), false);
  for (const Fact& h : r1.hypotheses) {
    Fact inst = apply(sigma, h);
    bool found = false;
    for (std::size_t j = 0; j < r2.hypotheses.size() && !found; ++j) {
      if (!used[j] && r2.hypotheses[j] == inst) {
        used[j] = true;
        found = true;
      }
    }
    if (!found) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Validation

namespace {

// Variables occurring outside of name parameters.
void collect_exposed_variables(const Term& t, std::vector<Term>& out) {
  if (t.is_closed() || t.is_name()) return;
  if (t.is_variable()) {
    collect_variables(t, out);
    return;
  }
  for (const Term& a : t.args()) collect_exposed_variables(a, out);
}

class Validator {
 public:
  explicit Validator(const Model& m) : m_(m) {}

  std::vector<Diagnostic> run() {
    check_declarations();
    std::set<std::string> labels;
    for (const Clause& c : m_.clauses) {
      if (!labels.insert(c.label).second) {
        error("duplicate-label", "duplicate clause label \"" + c.label + "\"", c.span);
      }
      check_clause(c);
    }
    for (const Query& q : m_.queries) {
      if (!q.fact.is_predicate()) {
        error("query-kind", "query must be a predicate fact", q.span);
        continue;
      }
      var_types_.clear();
      check_fact(q.fact, q.span);
    }
    return std::move(diags_);
  }

 private:
  void error(std::string code, std::string msg, const SourceSpan& span) {
    diags_.push_back({Severity::Error, std::move(code), std::move(msg), span});
  }
  void warning(std::string code, std::string msg, const SourceSpan& span) {
    diags_.push_back({Severity::Warning, std::move(code), std::move(msg), span});
  }

  void check_type(const TypeName& t, const SourceSpan& span) {
    if (!m_.has_type(t)) error("unknown-type", "unknown type '" + t.id + "'", span);
  }

  void check_declarations() {
    std::set<std::string> seen;
    for (const TypeName& t : m_.types) {
      if (t.id.empty()) error("type-name", "empty type name", {});
      if (!seen.insert(t.id).second) error("duplicate-type", "duplicate type '" + t.id + "'", {});
    }
    seen.clear();
    for (const NameSignature& n : m_.names) {
      if (!seen.insert(n.id).second) error("duplicate-name", "duplicate name '" + n.id + "'", n.span);
      for (const TypeName& t : n.param_types) check_type(t, n.span);
      check_type(n.type, n.span);
    }
    std::set<std::pair<std::string, std::size_t>> funs;
    for (const FunctionSymbol& f : m_.functions) {
      if (!funs.insert({f.id, f.arity()}).second) {
        error("duplicate-function",
              "duplicate function symbol '" + f.id + "/" + std::to_string(f.arity()) + "'", f.span);
      }
      for (const TypeName& t : f.param_types) check_type(t, f.span);
      check_type(f.result_type, f.span);
      if (f.annotation) {
        for (const auto& seg : f.annotation->segments) {
          if (const auto* hole = std::get_if<IndexHole>(&seg)) {
            if (hole->index < 1 || static_cast<std::size_t>(hole->index) > f.arity()) {
              error("hole-index",
                    "hole index " + std::to_string(hole->index) + " out of range 1.." +
                        std::to_string(f.arity()) + " for '" + f.id + "'",
                    f.annotation->span.valid() ? f.annotation->span : f.span);
            }
          }
        }
      }
    }
    seen.clear();
    for (const PredicateSymbol& p : m_.predicates) {
      if (!seen.insert(p.id).second) error("duplicate-predicate", "duplicate predicate '" + p.id + "'", p.span);
      for (const TypeName& t : p.param_types) check_type(t, p.span);
    }
  }

  // Returns false if the term is malformed (diagnostic already emitted).
  bool check_term(const Term& t, const SourceSpan& span) {
    switch (t.kind()) {
      case TermKind::Variable: {
        check_type(t.type(), span);
        auto [it, inserted] = var_types_.try_emplace(VarKey::of(t), t.type());
        if (!inserted && it->second != t.type()) {
          error("variable-type",
                "variable '" + t.id() + "' used at types '" + it->second.id + "' and '" + t.type().id + "'",
                span);
          return false;
        }
        return true;
      }
      case TermKind::Name: {
        const NameSignature* sig = m_.find_name(t.id());
        if (!sig) {
          error("unknown-name", "undeclared name '" + t.id() + "'", span);
          return false;
        }
        if (sig->param_types.size() != t.arity()) {
          error("arity", "name '" + t.id() + "' expects " + std::to_string(sig->param_types.size()) +
                             " parameters, got " + std::to_string(t.arity()),
                span);
          return false;
        }
        if (sig->type != t.type()) {
          error("type-mismatch", "name '" + t.id() + "' has type '" + sig->type.id + "'", span);
          return false;
        }
        bool ok = true;
        for (std::size_t i = 0; i < t.arity(); ++i) {
          ok = check_term(t.args()[i], span) && ok;
          if (t.args()[i].type() != sig->param_types[i]) {
            error("type-mismatch", "parameter " + std::to_string(i + 1) + " of name '" + t.id() +
                                       "' must have type '" + sig->param_types[i].id + "'",
                  span);
            ok = false;
          }
        }
        return ok;
      }
      case TermKind::Function: {
        const FunctionSymbol* f = m_.find_function(t.id(), t.arity());
        if (!f) {
          error("unknown-function",
                "undeclared function symbol '" + t.id() + "/" + std::to_string(t.arity()) + "'", span);
          return false;
        }
        if (f->result_type != t.type()) {
          error("type-mismatch", "function '" + t.id() + "' returns '" + f->result_type.id + "'", span);
          return false;
        }
        bool ok = true;
        for (std::size_t i = 0; i < t.arity(); ++i) {
          ok = check_term(t.args()[i], span) && ok;
          if (t.args()[i].type() != f->param_types[i]) {
            error("type-mismatch", "argument " + std::to_string(i + 1) + " of '" + t.id() +
                                       "' must have type '" + f->param_types[i].id + "'",
                  span);
            ok = false;
          }
        }
        return ok;
      }
    }
    return true;
  }

  void check_fact(const Fact& f, const SourceSpan& span) {
    if (f.is_disequality()) {
      if (f.args.size() != 2) {
        error("disequality", "malformed disequality", span);
        return;
      }
      check_term(f.lhs(), span);
      check_term(f.rhs(), span);
      if (f.lhs().type() != f.rhs().type()) {
        error("type-mismatch", "disequality between types '" + f.lhs().type().id + "' and '" +
                                   f.rhs().type().id + "'",
              span);
      }
      return;
    }
    const PredicateSymbol* p = m_.find_predicate(f.predicate);
    if (!p) {
      error("unknown-predicate", "undeclared predicate '" + f.predicate + "'", span);
      return;
    }
    if (p->arity() != f.args.size()) {
      error("arity", "predicate '" + f.predicate + "' expects " + std::to_string(p->arity()) +
                         " arguments, got " + std::to_string(f.args.size()),
            span);
      return;
    }
    for (std::size_t i = 0; i < f.args.size(); ++i) {
      if (!check_term(f.args[i], span)) continue;
      if (f.args[i].type() != p->param_types[i]) {
        error("type-mismatch", "argument " + std::to_string(i + 1) + " of '" + f.predicate +
                                   "' must have type '" + p->param_types[i].id + "'",
              span);
      }
    }
  }

  void check_clause(const Clause& c) {
    var_types_.clear();
    for (const Fact& h : c.hypotheses) check_fact(h, c.span);
    if (c.conclusion.is_disequality()) {
      error("conclusion-kind", "conclusion of \"" + c.label + "\" must be a predicate fact", c.span);
    } else {
      check_fact(c.conclusion, c.span);
    }

    std::vector<Term> clause_vars;
    for (const Fact& h : c.hypotheses) collect_variables(h, clause_vars);
    collect_variables(c.conclusion, clause_vars);

    if (c.annotation) {
      const SourceSpan& span = c.annotation->span.valid() ? c.annotation->span : c.span;
      for (const auto& seg : c.annotation->segments) {
        const auto* hole = std::get_if<TermHole>(&seg);
        if (!hole) continue;
        check_term(hole->term, span);
        std::vector<Term> hole_vars;
        collect_variables(hole->term, hole_vars);
        for (const Term& v : hole_vars) {
          bool known = std::any_of(clause_vars.begin(), clause_vars.end(),
                                   [&](const Term& cv) { return VarKey::of(cv) == VarKey::of(v); });
          if (!known) {
            error("hole-variable", "annotation of \"" + c.label + "\" refers to variable '" + v.id() +
                                       "' which does not occur in the clause",
                  span);
          }
        }
      }
    }

    for (const Term& v : unbound_conclusion_variables(c)) {
      warning("conclusion-variable", "variable '" + v.id() + "' in the conclusion of \"" + c.label +
                                         "\" does not occur in any hypothesis",
              c.span);
    }
  }

  const Model& m_;
  std::vector<Diagnostic> diags_;
  std::map<VarKey, TypeName> var_types_;
};

}  // namespace

std::vector<Term> unbound_conclusion_variables(const Clause& c) {
  std::vector<Term> exposed;
  for (const Term& t : c.conclusion.args) collect_exposed_variables(t, exposed);
  std::vector<Term> hyp_vars;
  for (const Fact& h : c.hypotheses) {
    if (h.is_predicate()) collect_variables(h, hyp_vars);
  }
  std::vector<Term> out;
  for (const Term& v : exposed) {
    bool bound = std::any_of(hyp_vars.begin(), hyp_vars.end(),
                             [&](const Term& h) { return VarKey::of(h) == VarKey::of(v); });
    if (!bound) out.push_back(v);
  }
  return out;
}

std::vector<Diagnostic> validate(const Model& m) { return Validator(m).run(); }

}  // namespace hornpoc
