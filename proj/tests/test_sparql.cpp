#include <gtest/gtest.h>

#include "extvp/error.hpp"
#include "extvp/sparql.hpp"
#include "support.hpp"

using namespace extvp;
using K = Algebra::Kind;

namespace {

PatternTerm v(const std::string& name) { return Variable{name}; }
PatternTerm iri(const std::string& s) { return Term::iri(s); }

const Algebra& body(const Algebra& a) {
  const Algebra* n = &a;
  while (n->kind == K::Project || n->kind == K::Slice || n->kind == K::Distinct || n->kind == K::OrderBy)
    n = &n->child();
  return *n;
}

}  // namespace

TEST(Parser, Q1IsOneBgp) {
  const auto q = parse_query(testing_support::kQ1);
  ASSERT_EQ(q.kind, K::Project);
  EXPECT_EQ(q.vars, (std::vector<std::string>{"x", "w", "y", "z"}));
  const auto& b = q.child();
  ASSERT_EQ(b.kind, K::Bgp);
  ASSERT_EQ(b.bgp.patterns.size(), 4u);
  EXPECT_EQ(b.bgp.patterns[2], (TriplePattern{v("y"), iri("follows"), v("z")}));
}

TEST(Parser, PrefixesAndShorthand) {
  const auto q = parse_query(
      "PREFIX ex: <http://ex.org/> SELECT ?s WHERE { ?s a ex:T ; ex:p ?o , ex:c . }");
  const auto& b = body(q);
  ASSERT_EQ(b.kind, K::Bgp);
  ASSERT_EQ(b.bgp.patterns.size(), 3u);
  EXPECT_EQ(b.bgp.patterns[0].p, iri("http://www.w3.org/1999/02/22-rdf-syntax-ns#type"));
  EXPECT_EQ(b.bgp.patterns[0].o, iri("http://ex.org/T"));
  EXPECT_EQ(b.bgp.patterns[2], (TriplePattern{v("s"), iri("http://ex.org/p"), iri("http://ex.org/c")}));
}

TEST(Parser, LiteralsAndNumbers) {
  const auto q = parse_query("SELECT * WHERE { ?s <p> \"x\"@en . ?s <q> 42 . ?s <r> \"7\"^^<http://t> }");
  const auto& ps = body(q).bgp.patterns;
  ASSERT_EQ(ps.size(), 3u);
  EXPECT_EQ(std::get<Term>(ps[0].o).lexical, "\"x\"@en");
  EXPECT_EQ(std::get<Term>(ps[1].o).lexical, "\"42\"^^<http://www.w3.org/2001/XMLSchema#integer>");
  EXPECT_EQ(std::get<Term>(ps[2].o).lexical, "\"7\"^^<http://t>");
}

TEST(Parser, Modifiers) {
  const auto q = parse_query("SELECT DISTINCT ?a WHERE { ?a <p> ?b } ORDER BY DESC(?b) ?a LIMIT 5 OFFSET 2");
  ASSERT_EQ(q.kind, K::Slice);
  EXPECT_EQ(q.offset, 2u);
  EXPECT_EQ(q.limit, 5u);
  ASSERT_EQ(q.child().kind, K::Distinct);
  ASSERT_EQ(q.child().child().kind, K::Project);
  const auto& order = q.child().child().child();
  ASSERT_EQ(order.kind, K::OrderBy);
  EXPECT_EQ(order.order, (std::vector<OrderKey>{{"b", true}, {"a", false}}));
}

TEST(Parser, OptionalWithFilterBecomesLeftJoinFilter) {
  const auto q = parse_query("SELECT * WHERE { ?a <p> ?b OPTIONAL { ?b <q> ?c FILTER(?c != <x>) } }");
  const auto& lj = body(q);
  ASSERT_EQ(lj.kind, K::LeftJoin);
  ASSERT_TRUE(lj.filter.has_value());
  EXPECT_EQ(lj.children[1].kind, K::Bgp);
  EXPECT_EQ(q.vars, (std::vector<std::string>{"a", "b", "c"}));
}

TEST(Parser, UnionAndFilter) {
  const auto q = parse_query(
      "SELECT * WHERE { { ?a <p> ?b } UNION { ?a <q> ?c } FILTER(BOUND(?a) && (?a = <x> || !(?a = <y>))) }");
  const auto& f = body(q);
  ASSERT_EQ(f.kind, K::Filter);
  EXPECT_EQ(f.child().kind, K::Union);
  EXPECT_EQ(f.filter->conjuncts().size(), 2u);
  EXPECT_EQ(f.filter->vars(), (std::set<std::string>{"a"}));
}

TEST(Parser, TriplesAcrossFilterMerge) {
  const auto q = parse_query("SELECT * WHERE { ?a <p> ?b . FILTER(?b != ?a) ?b <q> ?c }");
  const auto& f = body(q);
  ASSERT_EQ(f.kind, K::Filter);
  ASSERT_EQ(f.child().kind, K::Bgp);
  EXPECT_EQ(f.child().bgp.patterns.size(), 2u);
}

TEST(Parser, BlankNodesAreVariables) {
  const auto q = parse_query("SELECT * WHERE { _:b <p> ?o }");
  EXPECT_EQ(q.vars, (std::vector<std::string>{"o"}));
  EXPECT_TRUE(is_var(body(q).bgp.patterns[0].s));
}

TEST(Parser, SyntaxErrors) {
  EXPECT_THROW(parse_query("SELECT * WHERE { ?a <p> }"), QuerySyntaxError);
  EXPECT_THROW(parse_query("SELECT * WHERE { }"), QuerySyntaxError);
  EXPECT_THROW(parse_query("SELECT * WHERE { ?a <p> ?b "), QuerySyntaxError);
  EXPECT_THROW(parse_query("SELECT * WHERE { ?a ex:p ?b }"), QuerySyntaxError);  // undeclared prefix
  EXPECT_THROW(parse_query("SELEKT * WHERE { ?a <p> ?b }"), QuerySyntaxError);
}

TEST(Parser, UnsupportedConstructs) {
  const char* queries[] = {
      "SELECT (COUNT(?a) AS ?n) WHERE { ?a <p> ?b }",
      "SELECT * WHERE { ?a <p>/<q> ?b }",
      "SELECT * WHERE { ?a <p> ?b MINUS { ?a <q> ?c } }",
      "SELECT * WHERE { ?a <p> ?b FILTER(regex(?b, \"x\")) }",
      "SELECT * WHERE { { SELECT ?a WHERE { ?a <p> ?b } } }",
      "CONSTRUCT { ?a <p> ?b } WHERE { ?a <p> ?b }",
      "SELECT * WHERE { ?a <p> ?b } GROUP BY ?a",
      "SELECT * WHERE { ?a <p>* ?b }",
  };
  for (const char* q : queries) {
    SCOPED_TRACE(q);
    try {
      parse_query(q);
      ADD_FAILURE() << "accepted";
    } catch (const UnsupportedQueryError& e) {
      EXPECT_EQ(std::string(e.what()).rfind("SPARQL 1.1 unsupported: ", 0), 0u);
    } catch (const QuerySyntaxError& e) {
      ADD_FAILURE() << "syntax error instead of unsupported: " << e.what();
    }
  }
}

TEST(Printer, RoundTrips) {
  const char* queries[] = {
      testing_support::kQ1,
      "SELECT DISTINCT ?a WHERE { ?a <p> ?b } ORDER BY DESC(?b) LIMIT 3 OFFSET 1",
      "SELECT * WHERE { ?a <p> ?b OPTIONAL { ?b <q> ?c FILTER(?c != <x>) } }",
      "SELECT * WHERE { { ?a <p> ?b } UNION { ?a <q> ?c } FILTER(BOUND(?b) || ?a = \"v\"@en) }",
      "SELECT * WHERE { ?a <p> 42 . ?a <q> \"s\\\"q\" }",
  };
  for (const char* q : queries) {
    SCOPED_TRACE(q);
    const auto a = parse_query(q);
    const auto text = print_query(a);
    EXPECT_EQ(parse_query(text), a) << text;
  }
}

TEST(Scope, CertainVars) {
  const auto q = parse_query("SELECT * WHERE { ?a <p> ?b OPTIONAL { ?b <q> ?c } }");
  EXPECT_EQ(certain_vars(body(q)), (std::set<std::string>{"a", "b"}));
  const auto u = parse_query("SELECT * WHERE { { ?a <p> ?b } UNION { ?a <q> ?c } }");
  EXPECT_EQ(certain_vars(body(u)), (std::set<std::string>{"a"}));
}

TEST(PushFilters, SplitsIntoJoinSides) {
  const auto q = parse_query(
      "SELECT * WHERE { { ?a <p> ?b } { ?c <q> ?d } FILTER(?a != <x> && ?d != <y> && ?a != ?d) }");
  const auto pushed = push_filters(body(q));
  // The cross-side conjunct stays on top.
  ASSERT_EQ(pushed.kind, K::Filter);
  EXPECT_EQ(pushed.filter->vars(), (std::set<std::string>{"a", "d"}));
  const auto& join = pushed.child();
  ASSERT_EQ(join.kind, K::Join);
  EXPECT_EQ(join.children[0].kind, K::Filter);
  EXPECT_EQ(join.children[1].kind, K::Filter);
}

TEST(PushFilters, LeftJoinOnlyLeft) {
  const auto q = parse_query("SELECT * WHERE { { ?a <p> ?b OPTIONAL { ?b <q> ?c } } FILTER(?a != <x> && !BOUND(?c)) }");
  const auto pushed = push_filters(body(q));
  ASSERT_EQ(pushed.kind, K::Filter);
  EXPECT_EQ(pushed.filter->vars(), (std::set<std::string>{"c"}));
  ASSERT_EQ(pushed.child().kind, K::LeftJoin);
  EXPECT_EQ(pushed.child().children[0].kind, K::Filter);
}

TEST(PushFilters, UnionBothBranches) {
  const auto q = parse_query("SELECT * WHERE { { ?a <p> ?b } UNION { ?a <q> ?c } FILTER(?a != <x>) }");
  const auto pushed = push_filters(body(q));
  ASSERT_EQ(pushed.kind, K::Union);
  EXPECT_EQ(pushed.children[0].kind, K::Filter);
  EXPECT_EQ(pushed.children[1].kind, K::Filter);
}
