#include "hornpoc/derive.hpp"

#include <algorithm>
#include <climits>
#include <map>
#include <set>
#include <unordered_map>

namespace hornpoc {

// ---------------------------------------------------------------------------
// Tree helpers

namespace {

int node_depth(const DerivationNode& n) {
  int d = 0;
  for (const auto& c : n.children) d = std::max(d, node_depth(*c));
  return d + 1;
}

std::size_t node_count(const DerivationNode& n) {
  std::size_t s = 1;
  for (const auto& c : n.children) s += node_count(*c);
  return s;
}

void collect_post_order(const DerivationNode* n, std::vector<const DerivationNode*>& out) {
  for (const auto& c : n->children) collect_post_order(c.get(), out);
  out.push_back(n);
}

}  // namespace

int DerivationTree::depth() const { return subroot ? node_depth(*subroot) : 0; }
std::size_t DerivationTree::size() const { return subroot ? node_count(*subroot) : 0; }

std::vector<const DerivationNode*> post_order(const DerivationTree& t) {
  std::vector<const DerivationNode*> out;
  if (t.subroot) collect_post_order(t.subroot.get(), out);
  return out;
}

// ---------------------------------------------------------------------------
// Search

namespace {

struct BudgetExhausted {
  std::string what;
};

// Proof of one answer. Terms live in the variable space of the search that
// produced it; `finalize` grounds them top-down against closed labels.
struct Proof {
  std::size_t clause = 0;
  std::vector<Term> values;  // clause.variables() order
  std::vector<Fact> premises;
  Fact conclusion;
  std::vector<std::shared_ptr<const Proof>> children;
};
using ProofPtr = std::shared_ptr<const Proof>;

struct Answer {
  Fact fact;
  ProofPtr proof;
};

class Bindings {
 public:
  std::size_t mark() const { return trail_.size(); }

  void undo(std::size_t mark) {
    while (trail_.size() > mark) {
      map_.erase(trail_.back());
      trail_.pop_back();
    }
  }

  Term walk(Term t) const {
    while (t.is_variable()) {
      auto it = map_.find(VarKey::of(t));
      if (it == map_.end()) break;
      t = it->second;
    }
    return t;
  }

  Term resolve(const Term& t) const {
    if (t.is_closed()) return t;
    Term w = walk(t);
    if (w.is_variable() || w.is_closed()) return w;
    std::vector<Term> args;
    args.reserve(w.arity());
    bool changed = false;
    for (const Term& a : w.args()) {
      args.push_back(resolve(a));
      changed = changed || !(args.back().node() == a.node());
    }
    if (!changed) return w;
    return w.is_name() ? Term::name(w.id(), std::move(args), w.type())
                       : Term::function(w.id(), std::move(args), w.type());
  }

  Fact resolve(const Fact& f) const {
    if (f.is_closed()) return f;
    Fact out{f.kind, f.predicate, {}};
    out.args.reserve(f.args.size());
    for (const Term& t : f.args) out.args.push_back(resolve(t));
    return out;
  }

  bool unify(const Term& a, const Term& b) {
    std::size_t m = mark();
    std::vector<std::pair<Term, Term>> stack{{a, b}};
    while (!stack.empty()) {
      auto [x0, y0] = stack.back();
      stack.pop_back();
      Term x = walk(x0);
      Term y = walk(y0);
      if (x.node() == y.node()) continue;
      if (x.type() != y.type()) return fail(m);
      if (x.is_variable() && y.is_variable() && VarKey::of(x) == VarKey::of(y)) continue;
      if (x.is_variable()) {
        if (!bind(x, y)) return fail(m);
        continue;
      }
      if (y.is_variable()) {
        if (!bind(y, x)) return fail(m);
        continue;
      }
      if (x.kind() != y.kind() || x.id() != y.id() || x.arity() != y.arity()) return fail(m);
      if (x.is_closed() && y.is_closed()) {
        if (x == y) continue;
        return fail(m);
      }
      for (std::size_t i = 0; i < x.arity(); ++i) stack.emplace_back(x.args()[i], y.args()[i]);
    }
    return true;
  }

  bool unify(const Fact& a, const Fact& b) {
    if (a.kind != b.kind || a.predicate != b.predicate || a.args.size() != b.args.size()) return false;
    std::size_t m = mark();
    for (std::size_t i = 0; i < a.args.size(); ++i) {
      if (!unify(a.args[i], b.args[i])) return fail(m);
    }
    return true;
  }

 private:
  bool fail(std::size_t m) {
    undo(m);
    return false;
  }

  bool occurs(const VarKey& v, const Term& t) const {
    if (t.is_closed()) return false;
    Term w = walk(t);
    if (w.is_variable()) return VarKey::of(w) == v;
    for (const Term& a : w.args()) {
      if (occurs(v, a)) return true;
    }
    return false;
  }

  bool bind(const Term& var, const Term& value) {
    VarKey k = VarKey::of(var);
    if (occurs(k, value)) return false;
    map_.emplace(k, value);
    trail_.push_back(std::move(k));
    return true;
  }

  std::unordered_map<VarKey, Term, VarKeyHash> map_;
  std::vector<VarKey> trail_;
};

// Variant key: variables renamed to ?1, ?2, ... in first-occurrence order.
Fact canonical(const Fact& f) {
  if (f.is_closed()) return f;
  std::vector<Term> vars;
  collect_variables(f, vars);
  Substitution s;
  for (std::size_t i = 0; i < vars.size(); ++i) {
    s.bind(vars[i], Term::variable("?", vars[i].type(), static_cast<std::uint32_t>(i + 1)));
  }
  return apply(s, f);
}

struct TableKey {
  Fact goal;
  int depth;
  friend bool operator==(const TableKey&, const TableKey&) = default;
};
struct TableKeyHash {
  std::size_t operator()(const TableKey& k) const noexcept {
    return k.goal.hash() * 31u + static_cast<std::size_t>(k.depth);
  }
};

struct GroundEntry {
  int failed_upto = 0;  // no proof of depth <= failed_upto
  int proved_at = INT_MAX;
  ProofPtr proof;
};

class Search {
 public:
  Search(const Model& m, const SearchBudget& b)
      : m_(m), budget_(b), start_(std::chrono::steady_clock::now()) {
    for (const Clause& c : m.clauses) {
      ClauseInfo info;
      info.vars = c.variables();
      for (std::size_t i = 0; i < c.hypotheses.size(); ++i) {
        (c.hypotheses[i].is_predicate() ? info.preds : info.diseqs).push_back(i);
      }
      clauses_.push_back(std::move(info));
    }
  }

  std::size_t nodes() const { return nodes_; }
  const std::set<std::string>& warnings() const { return warnings_; }

  // Fresh copy of the query goal, searched under the query's own variables.
  std::vector<Answer> solve(const Fact& goal, int depth) { return solve_goal(goal, depth); }

  bool within_term_depth(const Fact& f) const {
    return !budget_.max_term_depth || f.depth() <= *budget_.max_term_depth;
  }

 private:
  struct ClauseInfo {
    std::vector<Term> vars;
    std::vector<std::size_t> preds;   // hypothesis indices
    std::vector<std::size_t> diseqs;  // hypothesis indices
  };

  struct Frame {
    std::size_t clause;
    std::uint32_t index;
    Fact goal;
    Fact conclusion;  // renamed
    std::vector<Fact> premises;  // renamed predicate hypotheses
    std::vector<Fact> diseqs;    // renamed
    std::vector<ProofPtr> children;
    std::vector<bool> done;
    int depth;
    bool first_only;
    std::vector<Answer>* out;
    std::set<std::string>* seen;
  };

  void tick() {
    ++nodes_;
    if (nodes_ > budget_.max_nodes) throw BudgetExhausted{"max-nodes " + std::to_string(budget_.max_nodes)};
    if ((nodes_ & 255u) == 0 && std::chrono::steady_clock::now() - start_ > budget_.timeout) {
      throw BudgetExhausted{"timeout " + std::to_string(budget_.timeout.count()) + " ms"};
    }
  }

  Fact rename_apart(const Fact& f) {
    if (f.is_closed()) return f;
    std::vector<Term> vars;
    collect_variables(f, vars);
    Substitution s;
    for (const Term& v : vars) s.bind(v, Term::variable(v.id(), v.type(), next_index_++));
    return apply(s, f);
  }

  // Answers are kept shallowest-first: a ground goal is proved at the least
  // depth that works, and a table at depth d extends the one at d - 1.
  std::vector<Answer> solve_goal(const Fact& goal, int depth) {
    if (depth <= 0 || !within_term_depth(goal)) return {};
    if (goal.is_closed()) {
      GroundEntry& e = ground_[goal];
      if (e.proved_at <= depth) return {Answer{goal, e.proof}};
      for (int d = e.failed_upto + 1; d <= depth; ++d) {
        std::vector<Answer> found = compute(goal, d, true, {});
        if (!found.empty()) {
          e.proved_at = d;
          e.proof = found.front().proof;
          return found;
        }
        e.failed_upto = d;
      }
      return {};
    }
    TableKey key{canonical(goal), depth};
    auto it = tables_.find(key);
    if (it != tables_.end()) return it->second;
    std::vector<Answer> found = compute(rename_apart(key.goal), depth, false, solve_goal(goal, depth - 1));
    tables_.emplace(std::move(key), found);
    return found;
  }

  std::vector<Answer> compute(const Fact& goal, int depth, bool first_only, std::vector<Answer> out) {
    std::set<std::string> seen;
    for (const Answer& a : out) seen.insert(to_string(canonical(a.fact)));
    for (std::size_t ci = 0; ci < m_.clauses.size(); ++ci) {
      const Clause& c = m_.clauses[ci];
      if (c.conclusion.predicate != goal.predicate) continue;
      std::uint32_t index = next_index_++;
      Fact concl = rename(c.conclusion, index);
      std::size_t mark = b_.mark();
      if (!b_.unify(concl, goal)) continue;
      tick();
      const ClauseInfo& info = clauses_[ci];
      Frame f{ci, index, goal, concl, {}, {}, std::vector<ProofPtr>(info.preds.size()),
              std::vector<bool>(info.preds.size(), false), depth, first_only, &out, &seen};
      for (std::size_t h : info.preds) f.premises.push_back(rename(c.hypotheses[h], index));
      for (std::size_t h : info.diseqs) f.diseqs.push_back(rename(c.hypotheses[h], index));
      premises(f, 0);
      b_.undo(mark);
      if (first_only && !out.empty()) break;
    }
    return out;
  }

  // false: some disequality is already violated.
  bool diseqs_consistent(const Frame& f) const {
    for (const Fact& d : f.diseqs) {
      if (b_.resolve(d.lhs()) == b_.resolve(d.rhs())) return false;
    }
    return true;
  }

  void premises(Frame& f, std::size_t solved) {
    if (f.first_only && !f.out->empty()) return;
    if (!diseqs_consistent(f)) return;
    if (solved == f.premises.size()) {
      complete(f);
      return;
    }
    // Leftmost ground premise, else leftmost.
    std::size_t pick = f.premises.size();
    std::optional<Fact> pick_goal;
    for (std::size_t i = 0; i < f.premises.size(); ++i) {
      if (f.done[i]) continue;
      Fact g = b_.resolve(f.premises[i]);
      if (g.is_closed()) {
        pick = i;
        pick_goal = std::move(g);
        break;
      }
      if (!pick_goal) {
        pick = i;
        pick_goal = std::move(g);
      }
    }
    std::vector<Answer> answers = solve_goal(*pick_goal, f.depth - 1);
    f.done[pick] = true;
    for (const Answer& a : answers) {
      std::size_t mark = b_.mark();
      if (b_.unify(*pick_goal, rename_apart(a.fact))) {
        f.children[pick] = a.proof;
        premises(f, solved + 1);
      }
      b_.undo(mark);
      if (f.first_only && !f.out->empty()) break;
    }
    f.done[pick] = false;
    f.children[pick] = nullptr;
  }

  void complete(Frame& f) {
    const Clause& c = m_.clauses[f.clause];
    Fact answer = b_.resolve(f.goal);
    if (!within_term_depth(answer)) return;
    for (const Fact& d0 : f.diseqs) {
      Term l = b_.resolve(d0.lhs());
      Term r = b_.resolve(d0.rhs());
      if (l.is_closed() && r.is_closed()) continue;  // checked equal/unequal already
      std::size_t mark = b_.mark();
      bool unifiable = b_.unify(l, r);
      b_.undo(mark);
      if (!unifiable) continue;
      std::vector<Term> dvars;
      collect_variables(l, dvars);
      collect_variables(r, dvars);
      bool shared = std::any_of(dvars.begin(), dvars.end(), [&](const Term& v) {
        return std::any_of(answer.args.begin(), answer.args.end(),
                           [&](const Term& t) { return occurs(VarKey::of(v), t); });
      });
      if (shared) {
        warnings_.insert("clause \"" + c.label + "\": disequality " + to_string(Fact::disequality(l, r)) +
                         " is not ground when the clause applies; application rejected");
        return;
      }
    }
    Fact key = canonical(answer);
    if (!f.seen->insert(to_string(key)).second) return;
    auto proof = std::make_shared<Proof>();
    proof->clause = f.clause;
    const ClauseInfo& info = clauses_[f.clause];
    proof->values.reserve(info.vars.size());
    for (const Term& v : info.vars) proof->values.push_back(b_.resolve(rename(v, f.index)));
    for (const Fact& p : f.premises) proof->premises.push_back(b_.resolve(p));
    proof->conclusion = answer;
    proof->children = f.children;
    f.out->push_back(Answer{std::move(answer), std::move(proof)});
  }

  const Model& m_;
  SearchBudget budget_;
  std::chrono::steady_clock::time_point start_;
  std::vector<ClauseInfo> clauses_;
  Bindings b_;
  std::uint32_t next_index_ = 1;
  std::size_t nodes_ = 0;
  std::unordered_map<Fact, GroundEntry, FactHash> ground_;
  std::unordered_map<TableKey, std::vector<Answer>, TableKeyHash> tables_;
  std::set<std::string> warnings_;
};

// Grounds a proof against closed labels, top-down.
class Finalizer {
 public:
  Finalizer(const Model& m, std::vector<Diagnostic>& warnings) : m_(m), warnings_(warnings) {}

  Term fresh_name(const TypeName& type) {
    std::string id;
    do {
      id = "fresh" + std::to_string(++fresh_);
    } while (m_.find_name(id));
    return Term::name(id, {}, type);
  }

  // Names each open variable of `f` with a fresh name.
  Fact ground(const Fact& f, const std::string& what) {
    std::vector<Term> vars;
    collect_variables(f, vars);
    Substitution s;
    for (const Term& v : vars) {
      Term n = fresh_name(v.type());
      warn("variable '" + v.id() + "' of " + what + " left open; instantiated with " + to_string(n));
      s.bind(v, n);
    }
    return apply(s, f);
  }

  std::shared_ptr<DerivationNode> node(const Proof& p, const Fact& label) {
    auto out = std::make_shared<DerivationNode>();
    out->id = next_id_++;
    out->clause_index = p.clause;
    out->clause = m_.clauses[p.clause];
    const Clause& c = out->clause;

    Substitution mu;
    match_into(p.conclusion, label, mu);
    std::vector<Term> open;
    auto grounded = [&](const Term& t) { return apply(mu, t); };
    std::vector<Term> values;
    for (const Term& v : p.values) {
      values.push_back(grounded(v));
      collect_variables(values.back(), open);
    }
    std::vector<Fact> premises;
    for (const Fact& f : p.premises) {
      premises.push_back(apply(mu, f));
      collect_variables(premises.back(), open);
    }
    if (!open.empty()) {
      Substitution rho;
      for (const Term& v : open) {
        Term n = fresh_name(v.type());
        warn("clause \"" + c.label + "\": variable '" + v.id() +
             "' is not determined by the derivation; instantiated with " + to_string(n));
        rho.bind(v, n);
      }
      for (Term& t : values) t = apply(rho, t);
      for (Fact& f : premises) f = apply(rho, f);
    }

    std::vector<Term> vars = c.variables();
    for (std::size_t i = 0; i < vars.size(); ++i) out->sub.bind(vars[i], values[i]);
    out->conclusion_label = label;
    out->premise_labels = premises;
    for (std::size_t i = 0; i < p.children.size(); ++i) out->children.push_back(node(*p.children[i], premises[i]));
    return out;
  }

 private:
  void warn(std::string msg) { warnings_.push_back({Severity::Warning, "fresh-name", std::move(msg), c_span_}); }

  const Model& m_;
  std::vector<Diagnostic>& warnings_;
  std::size_t next_id_ = 0;
  std::size_t fresh_ = 0;
  SourceSpan c_span_;
};

}  // namespace

DeriveResult derive(const Model& m, const Query& q, const SearchBudget& budget) {
  DeriveResult result;
  auto start = std::chrono::steady_clock::now();
  Search search(m, budget);
  auto finish = [&] {
    result.stats.nodes = search.nodes();
    result.stats.elapsed =
        std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start);
    for (const std::string& w : search.warnings()) {
      result.warnings.push_back({Severity::Warning, "disequality", w, q.span});
    }
  };
  try {
    for (int d = 1; d <= budget.max_depth; ++d) {
      std::vector<Answer> answers = search.solve(q.fact, d);
      result.stats.depth_reached = d;
      if (answers.empty()) continue;
      const Answer& a = answers.front();
      Finalizer fin(m, result.warnings);
      Fact root = a.fact.is_closed() ? a.fact : fin.ground(a.fact, "the query");
      DerivationTree tree{root, fin.node(*a.proof, root)};
      result.tree = std::move(tree);
      result.status = DeriveStatus::Found;
      finish();
      return result;
    }
    result.status = DeriveStatus::NotFound;
  } catch (const BudgetExhausted& e) {
    result.status = DeriveStatus::BudgetExhausted;
    result.exhausted = e.what;
  }
  finish();
  return result;
}

// ---------------------------------------------------------------------------
// Checking

namespace {

class TreeChecker {
 public:
  explicit TreeChecker(const Model& m) : m_(m) {}

  std::vector<Diagnostic> run(const DerivationTree& t) {
    if (!t.subroot) {
      error("structure", "tree has no subroot");
      return std::move(diags_);
    }
    if (!t.root_fact.is_closed()) error("closedness", "root edge label " + to_string(t.root_fact) + " is not closed");
    if (!(t.subroot->conclusion_label == t.root_fact)) {
      error("edge-label", "subroot concludes " + to_string(t.subroot->conclusion_label) + " but the root edge is " +
                              to_string(t.root_fact));
    }
    visit(*t.subroot);
    return std::move(diags_);
  }

 private:
  void error(std::string code, std::string msg) {
    diags_.push_back({Severity::Error, std::move(code), std::move(msg), {}});
  }

  void visit(const DerivationNode& n) {
    std::string where = "node " + std::to_string(n.id) + " (\"" + n.clause.label + "\")";
    bool labels_closed = n.conclusion_label.is_closed();
    for (std::size_t i = 0; i < n.premise_labels.size(); ++i) {
      if (!n.premise_labels[i].is_closed()) {
        error("closedness", where + ": edge label " + to_string(n.premise_labels[i]) + " is not closed");
        labels_closed = false;
      }
    }
    if (n.clause_index >= m_.clauses.size() || !(m_.clauses[n.clause_index] == n.clause)) {
      error("clause-membership", where + ": clause is not clause " + std::to_string(n.clause_index) + " of the model");
    }
    if (n.children.size() != n.premise_labels.size()) {
      error("structure", where + ": " + std::to_string(n.children.size()) + " children for " +
                             std::to_string(n.premise_labels.size()) + " premises");
    }
    for (std::size_t i = 0; i < n.children.size() && i < n.premise_labels.size(); ++i) {
      if (!(n.children[i]->conclusion_label == n.premise_labels[i])) {
        error("edge-label", where + ": child " + std::to_string(n.children[i]->id) + " concludes " +
                                to_string(n.children[i]->conclusion_label) + ", edge is " +
                                to_string(n.premise_labels[i]));
      }
    }
    // Parent already reported an open incoming label.
    if (labels_closed) check_local(n, where);
    for (const auto& c : n.children) visit(*c);
  }

  void check_local(const DerivationNode& n, const std::string& where) {
    Clause preds = n.clause;
    preds.hypotheses.clear();
    std::vector<Fact> diseqs;
    for (const Fact& h : n.clause.hypotheses) (h.is_predicate() ? preds.hypotheses : diseqs).push_back(h);
    Clause ground{n.clause.label, n.premise_labels, n.conclusion_label, std::nullopt, {}};
    bool ok = preds.hypotheses.size() == ground.hypotheses.size() && witnesses_subsumption(preds, ground, n.sub) &&
              subsumes(preds, ground).has_value();
    if (!ok) {
      error("local-subsumption", where + ": " + to_string(n.sub) + " does not witness subsumption of " +
                                     to_string(ground));
    }
    for (const Term& v : n.clause.variables()) {
      const Term* value = n.sub.lookup(v);
      if (!value || !value->is_closed()) {
        error("open-substitution", where + ": variable '" + v.id() + "' is not mapped to a closed term");
      }
    }
    for (const Fact& d : diseqs) {
      Fact inst = apply(n.sub, d);
      if (!inst.is_closed()) {
        error("disequality", where + ": disequality " + to_string(inst) + " is not ground");
      } else if (inst.lhs() == inst.rhs()) {
        error("disequality", where + ": disequality " + to_string(inst) + " does not hold");
      }
    }
  }

  const Model& m_;
  std::vector<Diagnostic> diags_;
};

void dump_node(const DerivationNode& n, std::string& out) {
  out += "n" + std::to_string(n.id) + " \"" + n.clause.label + "\" " + to_string(n.sub) + "\n";
  out += "  => " + to_string(n.conclusion_label) + "\n";
  for (std::size_t i = 0; i < n.premise_labels.size(); ++i) {
    out += "  <= " + to_string(n.premise_labels[i]);
    if (i < n.children.size()) out += " n" + std::to_string(n.children[i]->id);
    out += "\n";
  }
  for (const auto& c : n.children) dump_node(*c, out);
}

}  // namespace

std::vector<Diagnostic> check_tree(const Model& m, const DerivationTree& t) { return TreeChecker(m).run(t); }

std::string dump_tree(const DerivationTree& t) {
  std::string out = "root " + to_string(t.root_fact);
  if (t.subroot) out += " n" + std::to_string(t.subroot->id);
  out += "\n";
  if (t.subroot) dump_node(*t.subroot, out);
  return out;
}

}  // namespace hornpoc
