#include "support/generators.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <sstream>
#include <vector>

#include "hornpoc/parser.hpp"

namespace hornpoc::testing {

namespace {

struct Sym {
  std::string id;
  std::vector<int> params;
  int result = 0;
  bool is_name = false;
};

struct Gen {
  std::mt19937_64 rng;
  int types = 1;
  std::vector<Sym> ctors;  // names and functions
  std::vector<Sym> preds;
  // variables of the clause being built, by type
  std::map<int, std::vector<std::string>> vars;
  int var_count = 0;
  double compound = 0.4;  // chance of an application where one fits

  explicit Gen(std::uint64_t seed) : rng(seed) {}

  int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); }
  bool coin(double p) { return std::bernoulli_distribution(p)(rng); }
  std::string ty(int t) const { return "t" + std::to_string(t); }

  std::vector<const Sym*> ctors_of(int type, bool leaf) const {
    std::vector<const Sym*> out;
    for (const auto& s : ctors) {
      if (s.result == type && (s.params.empty() == leaf)) out.push_back(&s);
    }
    return out;
  }

  std::string apply_sym(const Sym& s, const std::vector<std::string>& args) const {
    std::string r = s.id + (s.is_name ? "[" : "");
    if (!s.is_name && args.empty()) return r;
    if (!s.is_name) r += "(";
    for (std::size_t i = 0; i < args.size(); ++i) r += (i ? "," : "") + args[i];
    return r + (s.is_name ? "]" : ")");
  }

  // fresh: may introduce new variables; use_vars: may use existing ones.
  std::string term(int type, int depth, bool use_vars, bool fresh) {
    auto& vs = vars[type];
    if (use_vars && !vs.empty() && coin(0.6)) return vs[pick(static_cast<int>(vs.size()))];
    if (fresh && (depth == 1 || coin(0.7)) && var_count < 4) {
      std::string v = std::string(1, "xyzw"[var_count++]);
      vs.push_back(v);
      return v;
    }
    auto inner = ctors_of(type, false);
    if (depth > 1 && !inner.empty() && coin(compound)) {
      const Sym& s = *inner[pick(static_cast<int>(inner.size()))];
      std::vector<std::string> args;
      for (int p : s.params) args.push_back(term(p, depth - 1, use_vars, fresh));
      return apply_sym(s, args);
    }
    auto leaves = ctors_of(type, true);
    return apply_sym(*leaves[pick(static_cast<int>(leaves.size()))], {});
  }

  std::string atom(const Sym& p, int depth, bool use_vars, bool fresh) {
    std::vector<std::string> args;
    for (int t : p.params) args.push_back(term(t, depth, use_vars, fresh));
    return p.id + "(" + [&] {
      std::string s;
      for (std::size_t i = 0; i < args.size(); ++i) s += (i ? "," : "") + args[i];
      return s;
    }() + ")";
  }

  std::string build() {
    std::ostringstream out;
    types = 1 + pick(2);
    for (int t = 0; t < types; ++t) out << "type " << ty(t) << ".\n";
    int npred = 1 + pick(2);
    int budget = 6 - npred;
    // every type needs a leaf
    for (int t = 0; t < types; ++t, --budget) {
      if (coin(0.5)) ctors.push_back({"n" + std::to_string(t), {}, t, true});
      else ctors.push_back({"c" + std::to_string(t), {}, t, false});
    }
    int extra = pick(budget + 1);
    for (int i = 0; i < extra; ++i) {
      int kind = pick(4);
      int res = pick(types);
      std::string idx = std::to_string(ctors.size());
      if (kind == 0) ctors.push_back({"c" + idx, {}, res, false});
      else if (kind == 1) ctors.push_back({"n" + idx, {pick(types)}, res, true});
      else if (kind == 2) ctors.push_back({"f" + idx, {pick(types)}, res, false});
      else ctors.push_back({"g" + idx, {pick(types), pick(types)}, res, false});
    }
    for (int i = 0; i < npred; ++i) {
      Sym p{"p" + std::to_string(i), {}, 0, false};
      int ar = 1 + pick(2);
      for (int a = 0; a < ar; ++a) p.params.push_back(pick(types));
      preds.push_back(p);
    }
    auto sig = [&](const std::vector<int>& ps) {
      std::string s;
      for (std::size_t i = 0; i < ps.size(); ++i) s += (i ? "," : "") + ty(ps[i]);
      return s;
    };
    for (const auto& s : ctors) {
      if (s.is_name) out << "name " << s.id << "[" << sig(s.params) << "]: " << ty(s.result) << ".\n";
      else if (s.params.empty()) out << "fun " << s.id << ": " << ty(s.result) << ".\n";
      else out << "fun " << s.id << "(" << sig(s.params) << "): " << ty(s.result) << ".\n";
    }
    for (const auto& p : preds) out << "pred " << p.id << "(" << sig(p.params) << ").\n";

    int nclauses = 2 + pick(7);
    int nfacts = 1 + pick(2);
    for (int c = 0; c < nclauses; ++c) {
      vars.clear();
      var_count = 0;
      out << "clause \"r" << c << "\" ";
      if (c < nfacts) {
        out << "=> " << atom(preds[pick(npred)], 2, false, false) << ".\n";
        continue;
      }
      int nh = 1 + pick(3);
      std::vector<std::string> hyps;
      // flat hypotheses fire often and let conclusions grow terms
      int hdepth = coin(0.4) ? 1 : 2;
      for (int h = 0; h < nh; ++h) hyps.push_back(atom(preds[pick(npred)], hdepth, true, true));
      if (coin(0.25)) {
        std::vector<int> with_vars;
        for (int t = 0; t < types; ++t) {
          if (!vars[t].empty()) with_vars.push_back(t);
        }
        if (!with_vars.empty()) {
          int t = with_vars[pick(static_cast<int>(with_vars.size()))];
          auto& vs = vars[t];
          std::string lhs = vs[pick(static_cast<int>(vs.size()))];
          std::string rhs = term(t, 2, true, false);
          if (lhs != rhs) hyps.push_back(lhs + " <> " + rhs);
        }
      }
      for (std::size_t i = 0; i < hyps.size(); ++i) out << (i ? " && " : "") << hyps[i];
      compound = 0.7;
      out << " => " << atom(preds[pick(npred)], 3, true, false) << ".\n";
      compound = 0.4;
    }
    vars.clear();
    int nq = 1 + pick(3);
    for (int q = 0; q < nq; ++q) out << "query " << atom(preds[pick(npred)], 3, false, false) << ".\n";
    return out.str();
  }
};

}  // namespace

std::string random_model_text(std::uint64_t seed) { return Gen(seed).build(); }

namespace {
Term any_fun(const char* id, std::vector<Term> args = {}) {
  return Term::function(id, std::move(args), TypeName::universal());
}

void subterms(const Term& t, std::vector<Term>& out) {
  out.push_back(t);
  for (const Term& a : t.args()) subterms(a, out);
}

std::vector<Term> distinct_vars(const std::vector<Term>& ts) {
  std::vector<Term> all, out;
  for (const Term& t : ts) collect_variables(t, all);
  for (const Term& v : all) {
    if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
  }
  return out;
}
}  // namespace

std::vector<Term> small_terms(int depth, bool with_vars) {
  std::vector<Term> level;
  for (const char* c : {"a", "b"}) level.push_back(any_fun(c));
  if (with_vars) {
    for (const char* v : {"x", "y", "z"}) level.push_back(Term::variable(v, TypeName::universal()));
  }
  std::vector<Term> all = level;
  for (int d = 2; d <= depth; ++d) {
    std::vector<Term> next = level;
    for (const Term& t : all) next.push_back(any_fun("f", {t}));
    for (const Term& t : all) {
      for (const Term& u : all) next.push_back(any_fun("g", {t, u}));
    }
    all = next;
  }
  return all;
}

Term random_small_term(std::mt19937& rng, int depth) {
  std::uniform_int_distribution<int> pick(0, 6);
  int k = depth <= 1 ? pick(rng) % 5 : pick(rng);
  switch (k) {
    case 0: return any_fun("a");
    case 1: return Term::name("n", {}, TypeName::universal());
    case 2: return Term::variable("x", TypeName::universal());
    case 3: return Term::variable("y", TypeName::universal());
    case 4: return Term::variable("z", TypeName::universal());
    case 5: return any_fun("f", {random_small_term(rng, depth - 1)});
    default: return any_fun("g", {random_small_term(rng, depth - 1), random_small_term(rng, depth - 1)});
  }
}

void each_assignment(const std::vector<Term>& vars, const std::vector<Term>& pool,
                     const std::function<void(const Substitution&)>& fn) {
  std::vector<std::size_t> idx(vars.size(), 0);
  for (;;) {
    Substitution s;
    for (std::size_t i = 0; i < vars.size(); ++i) s.bind(vars[i], pool[idx[i]]);
    fn(s);
    std::size_t i = 0;
    while (i < idx.size() && ++idx[i] == pool.size()) idx[i++] = 0;
    if (i == idx.size()) return;
  }
}

std::string check_unifier_generality(const Term& t1, const Term& t2, const std::vector<Term>& pool) {
  auto sigma = unify(t1, t2);
  std::string what = to_string(t1) + " =? " + to_string(t2);
  if (sigma && apply(*sigma, t1) != apply(*sigma, t2)) return "unsound unifier for " + what;
  bool any_tau = false;
  std::string fail;
  each_assignment(distinct_vars({t1, t2}), pool, [&](const Substitution& tau) {
    Term a = apply(tau, t1), b = apply(tau, t2);
    if (a != b || !fail.empty()) return;
    any_tau = true;
    if (!sigma) return;
    // one rho for both sides
    Term lhs = any_fun("pair", {apply(*sigma, t1), apply(*sigma, t2)});
    if (!match(lhs, any_fun("pair", {a, b}))) fail = "unifier " + to_string(tau) + " does not factor for " + what;
  });
  if (!fail.empty()) return fail;
  if (any_tau && !sigma) return "unify failed although " + what + " has a unifier";
  return {};
}

std::string check_match_brute_force(const Term& p, const Term& c) {
  std::vector<Term> cands;
  subterms(c, cands);
  std::vector<Term> vs = distinct_vars({p});
  bool brute = false;
  if (vs.empty()) {
    brute = p == c;
  } else {
    each_assignment(vs, cands, [&](const Substitution& s) { brute = brute || apply(s, p) == c; });
  }
  auto m = match(p, c);
  std::string what = to_string(p) + " against " + to_string(c);
  if (m.has_value() != brute) return "match disagrees with brute force on " + what;
  if (m && apply(*m, p) != c) return "match result does not reproduce the target for " + what;
  return {};
}

std::optional<Model> random_model(std::uint64_t seed) {
  std::string text = random_model_text(seed);
  ParseResult r = parse_model(text, "random.exthorntype", "random" + std::to_string(seed));
  if (!r.ok() || !r.diagnostics.empty()) return std::nullopt;
  return std::move(*r.model);
}

}  // namespace hornpoc::testing
