#include <algorithm>
#include <regex>
#include <set>

#include "doctest.h"
#include "hornpoc/codegen.hpp"
#include "hornpoc/derive.hpp"
#include "support/helpers.hpp"

using namespace hornpoc;
using namespace hornpoc::testing;

namespace {

const char* kImportModel = R"(type key. type attr. type b.
name key1[]: key.
fun true: b (**| True **).
fun false: b (**| False **).
fun attributes(b,b,b,b): attr (**| processAttributes(|1|,|2|,|3|,|4|) **).
fun k(key,attr): key.
pred iknows(key).
pred isattr(attr).
clause "import" iknows(k1) && isattr(attrs) => iknows(k(k1,attrs))
  (**| |k(k1,attrs)| = API.import(|k1|,|attrs|) **).
clause "know" => iknows(key1[]).
clause "attrs" => isattr(attributes(true,false,false,true)).
query iknows(k(key1[],attributes(true,false,false,true))).
)";

Term boolean(bool v) { return Term::function(v ? "true" : "false", {}, TypeName{"b"}); }

Term attributes(bool a, bool b, bool c, bool d) {
  return Term::function("attributes", {boolean(a), boolean(b), boolean(c), boolean(d)}, TypeName{"attr"});
}

}  // namespace

TEST_CASE("annotated function symbols expand their template") {
  Model m = parse_ok(kImportModel);
  LiteralAllocator alloc;
  CHECK(translate_term(m, alloc, attributes(true, true, false, true)) ==
        "processAttributes(True,True,False,True)");
  CHECK(alloc.memo().empty());
}

TEST_CASE("names get stable fresh literals") {
  Model m = parse_ok(kImportModel);
  LiteralAllocator alloc;
  Term key1 = Term::name("key1", {}, TypeName{"key"});
  std::string first = translate_term(m, alloc, key1);
  CHECK(first == "x1");
  CHECK(translate_term(m, alloc, key1) == first);
  CHECK(translate_term(m, alloc, Term::name("key2", {}, TypeName{"key"})) == "x2");
}

TEST_CASE("unannotated applications get one literal for the whole term") {
  Model m = parse_ok(kImportModel);
  LiteralAllocator alloc;
  Term key1 = Term::name("key1", {}, TypeName{"key"});
  Term whole = Term::function("k", {key1, attributes(true, false, false, true)}, TypeName{"key"});
  std::string lit = translate_term(m, alloc, whole);
  CHECK(std::regex_match(lit, std::regex("x[0-9]+")));
  CHECK(lit.find("processAttributes") == std::string::npos);
  CHECK(alloc.memo().at(whole) == lit);
}

TEST_CASE("import node translation") {
  Model m = parse_ok(kImportModel);
  const Clause& c = *m.find_clause("import");
  TypeName key{"key"}, attr{"attr"};
  Substitution s;
  s.bind(Term::variable("k1", key), Term::name("key1", {}, key));
  s.bind(Term::variable("attrs", attr), attributes(true, true, false, true));
  LiteralAllocator alloc;
  CHECK(translate_term(m, alloc, Term::name("key1", {}, key)) == "x1");
  auto line = translate_node(c, s, m, alloc);
  REQUIRE(line);
  CHECK(*line == "x2 = API.import(x1,processAttributes(True,True,False,True))");
}

TEST_CASE("import node via derive") {
  Model m = parse_ok(kImportModel);
  DeriveResult r = derive(m, m.queries.at(0));
  REQUIRE(r.found());
  PocProgram p = translate_tree(m, *r.tree);
  REQUIRE(p.body.size() == 1);
  CHECK(p.body[0].text == "x2 = API.import(x1,processAttributes(True,False,False,True))");
}

TEST_CASE("unannotated clauses translate to nothing") {
  Model m = parse_ok(kImportModel);
  LiteralAllocator alloc;
  CHECK_FALSE(translate_node(*m.find_clause("know"), Substitution{}, m, alloc));
}

TEST_CASE("encrypt example follows the definition") {
  Model m = parse_ok(R"(type t.
fun key1: t (**| key1 **).
fun msg: t (**| msg **).
fun enc(t,t): t (**| c **).
pred iknows(t).
clause "encrypt" iknows(k) && iknows(m) => iknows(enc(k,m)) (**| |enc(k,m)| = |k|.encrypt(|m|) **).
)");
  TypeName t{"t"};
  Substitution s;
  s.bind(Term::variable("k", t), Term::constant("key1", t));
  s.bind(Term::variable("m", t), Term::constant("msg", t));
  LiteralAllocator alloc;
  auto line = translate_node(*m.find_clause("encrypt"), s, m, alloc);
  REQUIRE(line);
  CHECK(*line == "c = key1.encrypt(msg)");
}

TEST_CASE("open terms in holes are rejected") {
  Model m = parse_ok(kImportModel);
  LiteralAllocator alloc;
  Substitution partial;
  partial.bind(Term::variable("k1", TypeName{"key"}), Term::name("key1", {}, TypeName{"key"}));
  CHECK_THROWS_AS(translate_node(*m.find_clause("import"), partial, m, alloc), CodegenError);
}

TEST_CASE("running example PoC body") {
  Model m = running_example();
  DeriveResult r = derive(m, m.queries.at(0));
  REQUIRE(r.found());
  PocProgram p = translate_tree(m, *r.tree);
  REQUIRE(p.body.size() == 3);
  CHECK(p.body[0].text == "x2 = token.put_wrap_key(x1)");
  CHECK(p.body[1].text == "x4 = token.export_wrapped(x2, x5)");
  CHECK(p.body[2].text == "x3 = mocktoken.decrypt_offline(x1, x4); mocktoken.report(x3)");
  CHECK(p.body[2].node_id == r.tree->subroot->id);

  // descendants come first
  std::map<std::size_t, std::size_t> line_of;
  for (std::size_t i = 0; i < p.body.size(); ++i) line_of[p.body[i].node_id] = i;
  std::function<void(const DerivationNode&)> check = [&](const DerivationNode& n) {
    for (const auto& c : n.children) {
      std::function<void(const DerivationNode&)> desc = [&](const DerivationNode& d) {
        if (line_of.contains(d.id) && line_of.contains(n.id)) CHECK(line_of[d.id] < line_of[n.id]);
        for (const auto& g : d.children) desc(*g);
      };
      desc(*c);
      check(*c);
    }
  };
  check(*r.tree->subroot);

  // no delimiter survives and the allocator stayed injective
  for (const PocLine& l : p.body) CHECK(l.text.find('|') == std::string::npos);
  CHECK(translate_tree(m, *r.tree).body.size() == 3);
}

TEST_CASE("literal allocator is injective") {
  Model m = running_example();
  DeriveResult r = derive(m, m.queries.at(0));
  REQUIRE(r.found());
  LiteralAllocator alloc;
  for (const DerivationNode* n : post_order(*r.tree)) translate_node(n->clause, n->sub, m, alloc);
  std::set<std::string> seen;
  for (const auto& [term, lit] : alloc.memo()) {
    CHECK(seen.insert(lit).second);
    CHECK(std::regex_match(lit, std::regex("[a-z][a-z0-9]*")));
  }
  CHECK(seen.size() == 5);
}

TEST_CASE("single unannotated node has an empty body") {
  Model m = running_example();
  std::vector<Diagnostic> ds;
  DeriveResult r = derive(m, Query{*parse_fact("exportable(handle1[])", m, ds), {}});
  REQUIRE(r.found());
  PocProgram p = translate_tree(m, *r.tree);
  CHECK(p.body.empty());
  std::string text = render(p);
  CHECK(text == "# generated-by: hornpoc " + std::string(version()) +
                    " model=running_example query=exportable(handle1[])\n" + *m.header + "\n\n" + *m.footer + "\n");
}

TEST_CASE("translation is deterministic") {
  Model m = running_example();
  DeriveResult r = derive(m, m.queries.at(0));
  REQUIRE(r.found());
  CHECK(render(translate_tree(m, *r.tree)) == render(translate_tree(m, *r.tree)));
}

TEST_CASE("render layout") {
  PocProgram p{"mod", "iknows(a[])", "import x", {{"a = 1", 0}, {"b = 2", 1}}, "done"};
  CHECK(render(p) == "# generated-by: hornpoc " + std::string(version()) +
                         " model=mod query=iknows(a[])\nimport x\n\na = 1\nb = 2\n\ndone\n");
  PocProgram q = p;
  q.body[1].text = "b = 3";
  CHECK(render(p) != render(q));
  PocProgram bare{"mod", "f", "", {}, ""};
  CHECK(render(bare) == "# generated-by: hornpoc " + std::string(version()) + " model=mod query=f\n");
}

TEST_CASE("file names") {
  Model m = running_example();
  CHECK(poc_file_name(0, m.queries.at(0).fact) == "0_iknows_key1.py");
  std::vector<Diagnostic> ds;
  auto f = parse_fact("storedkey(handle1[],key1[],wrapkey)", m, ds);
  CHECK(poc_file_name(3, *f, ".tree") == "3_storedkey_handle1_key1_wrapkey.tree");
}
