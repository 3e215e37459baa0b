#include <algorithm>
#include <functional>

#include "doctest.h"
#include "hornpoc/derive.hpp"
#include "support/helpers.hpp"
#include "support/oracle.hpp"

using namespace hornpoc;
using namespace hornpoc::testing;

namespace {

using NodePtr = std::shared_ptr<DerivationNode>;

NodePtr clone(const DerivationNode& n) {
  auto c = std::make_shared<DerivationNode>(n);
  for (auto& ch : c->children) ch = clone(*ch);
  return c;
}

NodePtr mutable_child(const NodePtr& n, std::size_t i) {
  return std::const_pointer_cast<DerivationNode>(n->children.at(i));
}

std::vector<std::string> annotated_labels(const Model& m, const DerivationTree& t) {
  std::vector<std::string> out;
  for (const DerivationNode* n : post_order(t)) {
    if (m.clauses[n->clause_index].annotation) out.push_back(n->clause.label);
  }
  return out;
}

Model without(Model m, const std::vector<std::string>& labels) {
  std::erase_if(m.clauses, [&](const Clause& c) {
    return std::find(labels.begin(), labels.end(), c.label) != labels.end();
  });
  return m;
}

Fact fact(const Model& m, const std::string& text) {
  std::vector<Diagnostic> ds;
  auto f = parse_fact(text, m, ds);
  if (!f) throw std::runtime_error("bad fact " + text);
  return *f;
}

Query query(const Model& m, const std::string& text) { return Query{fact(m, text), {}}; }

}  // namespace

TEST_CASE("running example attack") {
  Model m = running_example();
  DeriveResult r = derive(m, m.queries.at(0));
  REQUIRE(r.found());
  const DerivationTree& t = *r.tree;
  CHECK(check_tree(m, t).empty());
  CHECK(to_string(t.root_fact) == "iknows(key1[])");
  CHECK(annotated_labels(m, t) == std::vector<std::string>{"put wrapkey", "export wrapped", "decrypt wrap"});
  const DerivationNode& sub = *t.subroot;
  CHECK(sub.clause.label == "decrypt wrap");
  TypeName key{"key"};
  CHECK(*sub.sub.lookup(Term::variable("k1", key)) == Term::name("key2", {}, key));
  CHECK(*sub.sub.lookup(Term::variable("k2", key)) == Term::name("key1", {}, key));
  CHECK(sub.id == 0);
  CHECK(r.warnings.empty());
}

TEST_CASE("the attack agrees with ground forward chaining") {
  Model m = running_example();
  DeriveResult r = derive(m, m.queries.at(0));
  REQUIRE(r.found());
  OracleResult o = oracle_fixpoint(m, 3);
  CHECK(o.facts.contains(r.tree->root_fact));
  // every edge of the tree is in the ground fixpoint
  for (const DerivationNode* n : post_order(*r.tree)) {
    CHECK(o.facts.contains(n->conclusion_label));
    for (const Fact& p : n->premise_labels) CHECK(o.facts.contains(p));
  }
}

TEST_CASE("initial-state query gives a single node") {
  Model m = running_example();
  DeriveResult r = derive(m, query(m, "exportable(handle1[])"));
  REQUIRE(r.found());
  CHECK(r.tree->size() == 1);
  CHECK(r.tree->depth() == 1);
  CHECK(r.tree->subroot->premise_labels.empty());
  CHECK(r.tree->subroot->children.empty());
  CHECK(check_tree(m, *r.tree).empty());
}

TEST_CASE("no attack without decrypt and put") {
  Model m = without(running_example(), {"decrypt wrap", "put wrapkey"});
  DeriveResult r = derive(m, m.queries.at(0));
  CHECK(r.status == DeriveStatus::NotFound);
  CHECK_FALSE(r.tree);
  CHECK_FALSE(oracle_fixpoint(m, 4).facts.contains(m.queries.at(0).fact));
}

TEST_CASE("oracle examples") {
  Model m = running_example();
  CHECK(oracle_derivable(m, m.queries.at(0).fact, 3));
  Fact key3 = Fact::make("iknows", {Term::name("key3", {}, TypeName{"key"})});
  CHECK_FALSE(oracle_derivable(m, key3, 3));
  OracleResult prev = oracle_fixpoint(m, 1);
  for (std::uint32_t d = 2; d <= 4; ++d) {
    OracleResult next = oracle_fixpoint(m, d);
    for (const Fact& f : prev.facts) CHECK(next.facts.contains(f));
    prev = next;
  }
}

TEST_CASE("oracle overflow is explicit") {
  Model m = parse_ok(R"(type t.
name a[]: t.
fun g(t,t): t.
pred p(t).
clause "seed" => p(a[]).
clause "grow" p(x) && p(y) => p(g(x,y)).
)");
  CHECK_THROWS_AS(oracle_fixpoint(m, 6, 1000), OracleOverflow);
  // a; g(a,a); g over {a, g(a,a)} minus the one already counted
  CHECK(oracle_fixpoint(m, 3).facts.size() == 1 + 1 + 3);
}

TEST_CASE("check_tree accepts derive output and rejects mutations") {
  Model m = running_example();
  DeriveResult r = derive(m, m.queries.at(0));
  REQUIRE(r.found());
  CHECK(check_tree(m, *r.tree).empty());
  TypeName key{"key"};

  SUBCASE("wrong key in a substitution") {
    NodePtr root = clone(*r.tree->subroot);
    root->sub = Substitution{};
    root->sub.bind(Term::variable("k1", key), Term::name("key1", {}, key));
    root->sub.bind(Term::variable("k2", key), Term::name("key1", {}, key));
    auto ds = check_tree(m, DerivationTree{r.tree->root_fact, root});
    REQUIRE(ds.size() == 1);
    CHECK(ds[0].code == "local-subsumption");
  }
  SUBCASE("edge label with a variable") {
    NodePtr root = clone(*r.tree->subroot);
    Fact open = Fact::make("iknows", {Term::variable("k9", key)});
    root->premise_labels[1] = open;
    mutable_child(root, 1)->conclusion_label = open;
    auto ds = check_tree(m, DerivationTree{r.tree->root_fact, root});
    REQUIRE(ds.size() == 1);
    CHECK(ds[0].code == "closedness");
  }
  SUBCASE("clause not in the model") {
    NodePtr root = clone(*r.tree->subroot);
    root->clause.label = "forged";
    auto ds = check_tree(m, DerivationTree{r.tree->root_fact, root});
    REQUIRE(ds.size() == 1);
    CHECK(ds[0].code == "clause-membership");
  }
  SUBCASE("child does not conclude its edge") {
    NodePtr root = clone(*r.tree->subroot);
    NodePtr child = mutable_child(root, 1);
    *child = *clone(*r.tree->subroot);
    auto ds = check_tree(m, DerivationTree{r.tree->root_fact, root});
    REQUIRE(ds.size() == 1);
    CHECK(ds[0].code == "edge-label");
  }
  SUBCASE("root edge differs from subroot conclusion") {
    Fact other = Fact::make("iknows", {Term::name("key2", {}, key)});
    auto ds = check_tree(m, DerivationTree{other, r.tree->subroot});
    REQUIRE(ds.size() == 1);
    CHECK(ds[0].code == "edge-label");
  }
  SUBCASE("missing child") {
    NodePtr root = clone(*r.tree->subroot);
    root->children.pop_back();
    auto ds = check_tree(m, DerivationTree{r.tree->root_fact, root});
    REQUIRE(ds.size() == 1);
    CHECK(ds[0].code == "structure");
  }
}

TEST_CASE("disequalities") {
  Model m = parse_ok(R"(type t.
name a[]: t.
name b[]: t.
pred p(t).
pred q(t).
clause "pa" => p(a[]).
clause "pb" => p(b[]).
clause "diff" p(x) && x <> a[] => q(x).
query q(b[]).
query q(a[]).
)");
  DeriveResult yes = derive(m, m.queries[0]);
  REQUIRE(yes.found());
  CHECK(check_tree(m, *yes.tree).empty());
  CHECK(derive(m, m.queries[1]).status == DeriveStatus::NotFound);
  // a forged node violating the disequality is caught
  NodePtr root = clone(*yes.tree->subroot);
  TypeName t{"t"};
  Term a = Term::name("a", {}, t);
  root->sub = Substitution{};
  root->sub.bind(Term::variable("x", t), a);
  root->conclusion_label = Fact::make("q", {a});
  root->premise_labels[0] = Fact::make("p", {a});
  *mutable_child(root, 0) = *derive(m, query(m, "p(a[])")).tree->subroot;
  auto ds = check_tree(m, DerivationTree{root->conclusion_label, root});
  REQUIRE(ds.size() == 1);
  CHECK(ds[0].code == "disequality");
}

TEST_CASE("non-ground goals find answers") {
  Model m = running_example();
  DeriveResult r = derive(m, query(m, "storedkey(h,k,wrapkey)"));
  REQUIRE(r.found());
  CHECK(r.tree->root_fact.is_closed());
  CHECK(check_tree(m, *r.tree).empty());
}

TEST_CASE("unbound variables become fresh names") {
  Model m = parse_ok(R"(type t.
name a[]: t.
pred p(t).
pred q(t).
clause "seed" => p(a[]).
clause "loose" p(x) => q(y).
query q(z).
)");
  DeriveResult r = derive(m, m.queries[0]);
  REQUIRE(r.found());
  CHECK(r.tree->root_fact.is_closed());
  CHECK(to_string(r.tree->root_fact) == "q(fresh1[])");
  CHECK(std::any_of(r.warnings.begin(), r.warnings.end(), [](const Diagnostic& d) { return d.code == "fresh-name"; }));
  CHECK(check_tree(m, *r.tree).empty());
}

TEST_CASE("budgets") {
  Model m = running_example();
  SearchBudget shallow;
  shallow.max_depth = 3;
  DeriveResult r = derive(m, m.queries[0], shallow);
  CHECK(r.status == DeriveStatus::NotFound);
  CHECK(r.stats.depth_reached == 3);

  SearchBudget few;
  few.max_nodes = 5;
  DeriveResult b = derive(m, m.queries[0], few);
  CHECK(b.status == DeriveStatus::BudgetExhausted);
  CHECK(b.exhausted.find("max-nodes") != std::string::npos);
  CHECK_FALSE(b.found());
}

TEST_CASE("term depth bound prunes derivations") {
  Model m = running_example();
  SearchBudget b;
  b.max_term_depth = 1;  // export wrapped concludes a depth-2 term
  CHECK(derive(m, m.queries[0], b).status == DeriveStatus::NotFound);
  b.max_term_depth = 2;
  CHECK(derive(m, m.queries[0], b).found());
}

TEST_CASE("derivations are reproducible") {
  Model m = running_example();
  std::string first = dump_tree(*derive(m, m.queries[0]).tree);
  for (int i = 0; i < 5; ++i) CHECK(dump_tree(*derive(m, m.queries[0]).tree) == first);
}

TEST_CASE("dump format and node ids") {
  Model m = running_example();
  DeriveResult r = derive(m, m.queries[0]);
  REQUIRE(r.found());
  std::string d = dump_tree(*r.tree);
  CHECK(d.rfind("root iknows(key1[]) n0\nn0 \"decrypt wrap\" {k1 -> key2[], k2 -> key1[]}\n  => iknows(key1[])\n", 0) ==
        0);
  // pre-order ids
  std::vector<std::size_t> ids;
  std::function<void(const DerivationNode&)> walk = [&](const DerivationNode& n) {
    ids.push_back(n.id);
    for (const auto& c : n.children) walk(*c);
  };
  walk(*r.tree->subroot);
  for (std::size_t i = 0; i < ids.size(); ++i) CHECK(ids[i] == i);
  CHECK(r.tree->size() == ids.size());
  // post-order: children before parents
  auto po = post_order(*r.tree);
  CHECK(po.back() == r.tree->subroot.get());
  CHECK(po.size() == ids.size());
}
