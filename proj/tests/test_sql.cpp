#include <gtest/gtest.h>

#include <cctype>
#include <set>

#include "extvp/sql.hpp"
#include "support.hpp"

using namespace extvp;
using testing_support::TempDir;

namespace {

std::size_t count(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + needle.size())) ++n;
  return n;
}

// Identifiers that directly follow a FROM keyword: the base tables.
std::multiset<std::string> from_tables(const std::string& sql) {
  std::vector<std::string> tokens;
  for (std::size_t i = 0; i < sql.size();) {
    const char c = sql[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (c == '"') {
      const auto end = sql.find('"', i + 1);
      tokens.push_back(sql.substr(i + 1, end - i - 1));
      i = end + 1;
    } else if (std::isalnum(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < sql.size() && (std::isalnum(static_cast<unsigned char>(sql[j])) || sql[j] == '_')) ++j;
      tokens.push_back(sql.substr(i, j - i));
      i = j;
    } else {
      tokens.emplace_back(1, c);
      ++i;
    }
  }
  std::multiset<std::string> out;
  for (std::size_t i = 0; i + 1 < tokens.size(); ++i)
    if (tokens[i] == "FROM" && tokens[i + 1] != "(") out.insert(tokens[i + 1]);
  return out;
}

struct G1 {
  TempDir dir;
  Store store = testing_support::make_store(parse_ntriples(testing_support::kG1), dir.path());

  PlanNode plan(const std::string& q, Layout layout) const {
    PlanOptions o;
    o.layout = layout;
    return compile(parse_query(q), store.catalog(), store.dict(), o);
  }
  std::string sql(const std::string& q, Layout layout) const {
    return emit_sql(plan(q, layout), store.catalog(), store.dict());
  }
};

}  // namespace

TEST(Sql, Q1VpHasThreeJoinsOverFourSubqueries) {
  G1 t;
  const auto sql = t.sql(testing_support::kQ1, Layout::VP);
  EXPECT_EQ(count(sql, " JOIN "), 3u) << sql;
  EXPECT_EQ(count(sql, " ON "), 3u) << sql;
  EXPECT_EQ(count(sql, "(SELECT "), 4u) << sql;
  EXPECT_EQ(from_tables(sql), (std::multiset<std::string>{"VP_follows", "VP_follows", "VP_likes", "VP_likes"}));
}

TEST(Sql, Q1ExtVpReferencesReductions) {
  G1 t;
  const auto sql = t.sql(testing_support::kQ1, Layout::ExtVP);
  EXPECT_EQ(from_tables(sql), (std::multiset<std::string>{"OS_follows__likes", "SO_likes__follows",
                                                           "SS_follows__likes", "VP_likes"}))
      << sql;
}

TEST(Sql, FromClauseMatchesPlanScans) {
  G1 t;
  const SqlNamer namer(t.store.catalog(), t.store.dict());
  for (const char* q : {testing_support::kQ1, "SELECT ?x WHERE { ?x <likes> ?w OPTIONAL { ?x <follows> ?y } }",
                        "SELECT * WHERE { { ?x <likes> <I2> } UNION { ?x ?p <C> } }"}) {
    for (auto layout : {Layout::TT, Layout::VP, Layout::ExtVP}) {
      const auto plan = t.plan(q, layout);
      std::multiset<std::string> expect;
      for (const auto* scan : scans(plan)) expect.insert(namer.table(scan->table));
      EXPECT_EQ(from_tables(emit_sql(plan, t.store.catalog(), t.store.dict())), expect) << q;
    }
  }
}

TEST(Sql, SingleScanHasNoJoin) {
  G1 t;
  const auto sql = t.sql("SELECT ?w WHERE { <A> <likes> ?w }", Layout::VP);
  EXPECT_EQ(count(sql, "JOIN"), 0u);
  EXPECT_NE(sql.find("WHERE s = "), std::string::npos) << sql;
}

TEST(Sql, EmptyPlan) {
  G1 t;
  const auto sql = t.sql(testing_support::kSt8, Layout::ExtVP);
  EXPECT_EQ(sql.rfind("-- empty result (SF=0)\n", 0), 0u) << sql;
  EXPECT_NE(sql.find("WHERE 1=0"), std::string::npos);
}

TEST(Sql, ModifiersAndGenericOperators) {
  G1 t;
  const auto sql = t.sql(
      "SELECT DISTINCT ?x WHERE { { ?x <likes> ?w } UNION { ?x <follows> ?w OPTIONAL { ?w <likes> ?i } } } "
      "ORDER BY DESC(?x) LIMIT 2 OFFSET 1",
      Layout::VP);
  for (const char* part : {"UNION ALL", "LEFT OUTER JOIN", "SELECT DISTINCT", "ORDER BY", "DESC", "LIMIT 2",
                           "OFFSET 1"})
    EXPECT_NE(sql.find(part), std::string::npos) << part << "\n" << sql;
}

TEST(Sql, ByteStable) {
  G1 a;
  G1 b;
  for (auto layout : {Layout::TT, Layout::VP, Layout::ExtVP})
    EXPECT_EQ(a.sql(testing_support::kQ1, layout), b.sql(testing_support::kQ1, layout));
}

TEST(SqlNamer, EncodingCollisionsAndQuoting) {
  EXPECT_EQ(local_name("http://schema.org/author"), "author");
  EXPECT_EQ(local_name("http://purl.org/stuff/rev#reviewer"), "reviewer");
  EXPECT_EQ(percent_encode("a_b-c"), "a%5Fb%2Dc");
  TempDir dir;
  const auto s = testing_support::make_store(
      parse_ntriples("<http://a.org/name> <http://x.org/p> <o> .\n<http://b.org/name> <http://x.org/p> <o> .\n"
                     "<s> <http://a.org/name> <o> .\n<s> <http://b.org/name> <o> .\n<s> <http://x.org/my-p> <o> .\n"),
      dir.path());
  const SqlNamer namer(s.catalog(), s.dict());
  const auto a = namer.predicate(testing_support::id(s, "http://a.org/name"));
  const auto b = namer.predicate(testing_support::id(s, "http://b.org/name"));
  EXPECT_NE(a, b);
  EXPECT_EQ(a.rfind("name_h", 0), 0u);
  EXPECT_EQ(namer.predicate(testing_support::id(s, "http://x.org/p")), "p");
  EXPECT_EQ(namer.table(TableKey::tt()), "TT");
  EXPECT_EQ(namer.table(TableKey::vp(testing_support::id(s, "http://x.org/my-p"))), "\"VP_my%2Dp\"");
}
