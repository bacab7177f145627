#include <gtest/gtest.h>

#include <map>
#include <set>
#include <sstream>

#include "extvp/error.hpp"
#include "extvp/generator.hpp"
#include "support.hpp"

using namespace extvp;
using testing_support::TempDir;

namespace {

// Nested-loop semi-join straight over the triples, independent of the builder.
std::set<std::pair<TermId, TermId>> naive_reduction(const Graph& g, TableKind kind, TermId p1, TermId p2) {
  std::set<std::pair<TermId, TermId>> out;
  for (const auto& a : g.triples) {
    if (a.p != p1) continue;
    for (const auto& b : g.triples) {
      if (b.p != p2) continue;
      const bool hit = (kind == TableKind::SS && a.s == b.s) || (kind == TableKind::OS && a.o == b.s) ||
                       (kind == TableKind::SO && a.s == b.o);
      if (hit) {
        out.emplace(a.s, a.o);
        break;
      }
    }
  }
  return out;
}

std::uint64_t vp_size(const Graph& g, TermId p) {
  return static_cast<std::uint64_t>(
      std::count_if(g.triples.begin(), g.triples.end(), [&](const Triple& t) { return t.p == p; }));
}

}  // namespace

TEST(Builder, G1CatalogMatchesHandTable) {
  TempDir dir;
  const auto g = parse_ntriples(testing_support::kG1);
  auto s = testing_support::make_store(g, dir.path());
  const TermId f = 1, l = 5;
  struct Expect {
    TableKind kind;
    TermId p1, p2;
    Rational sf;
    bool materialized;
  };
  const Expect expected[] = {
      {TableKind::SS, f, l, {1, 2}, true},  {TableKind::SS, l, f, {1, 1}, false},
      {TableKind::OS, f, f, {1, 2}, true},  {TableKind::OS, f, l, {1, 4}, true},
      {TableKind::OS, l, f, {0, 1}, false}, {TableKind::OS, l, l, {0, 1}, false},
      {TableKind::SO, f, f, {3, 4}, true},  {TableKind::SO, f, l, {0, 1}, false},
      {TableKind::SO, l, f, {1, 3}, true},  {TableKind::SO, l, l, {0, 1}, false},
  };
  for (const auto& e : expected) {
    const auto st = s.catalog().lookup(TableKey::ext(e.kind, e.p1, e.p2));
    SCOPED_TRACE(describe(st.key, s.dict()));
    EXPECT_EQ(st.sf, e.sf);
    EXPECT_EQ(st.materialized, e.materialized);
  }
  // SS with p1 = p2 is never computed.
  EXPECT_EQ(s.catalog().find(TableKey::ext(TableKind::SS, f, f)), nullptr);
}

TEST(Builder, G1ReportCounts) {
  TempDir dir;
  auto s = Store::create(dir.path());
  build_vp(parse_ntriples(testing_support::kG1), s);
  const auto r = build_extvp(s, {});
  EXPECT_EQ(r.materialized, 5u);
  EXPECT_EQ(r.empty, 4u);
  EXPECT_EQ(r.equal_to_vp, 1u);
  EXPECT_EQ(r.pairs_examined, 10u);
  EXPECT_EQ(r.total_tuples, 2u + 2u + 1u + 3u + 1u);
}

TEST(Builder, QuarterThresholdMaterializesNothing) {
  TempDir dir;
  auto s = Store::create(dir.path());
  build_vp(parse_ntriples(testing_support::kG1), s);
  BuildConfig cfg;
  cfg.threshold = Rational::parse("0.25");
  const auto r = build_extvp(s, cfg);
  EXPECT_EQ(r.materialized, 0u);
  // Strict rule: sf = 1/4 is not below 1/4.
  EXPECT_FALSE(s.catalog().lookup(TableKey::ext(TableKind::OS, 1, 5)).materialized);
  EXPECT_TRUE(s.verify().empty());
}

TEST(Builder, RebuildReplacesTables) {
  TempDir dir;
  auto s = testing_support::make_store(parse_ntriples(testing_support::kG1), dir.path());
  BuildConfig cfg;
  cfg.threshold = Rational(1, 3);
  build_extvp(s, cfg);
  EXPECT_TRUE(s.verify().empty());
  EXPECT_TRUE(s.catalog().lookup(TableKey::ext(TableKind::OS, 1, 5)).materialized);
  EXPECT_FALSE(s.catalog().lookup(TableKey::ext(TableKind::SS, 1, 5)).materialized);
}

TEST(Builder, ThresholdValidation) {
  BuildConfig cfg;
  cfg.threshold = Rational(0, 1);
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg.threshold = Rational(3, 2);
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg.threshold = Rational(1, 1);
  EXPECT_NO_THROW(cfg.validate());
}

TEST(Builder, SemiJoinReduce) {
  const auto follows = TwoColumnTable::from_unsorted({{0, 2}, {2, 3}, {2, 4}, {3, 4}});
  const auto likes = TwoColumnTable::from_unsorted({{0, 6}, {0, 7}, {3, 7}});
  const auto os = semi_join_reduce(follows, likes, CorrelationKind::OS);
  ASSERT_EQ(os.size(), 1u);
  EXPECT_EQ(os.rows()[0], (Row{2, 3}));  // (B,C)
  EXPECT_EQ(semi_join_reduce(follows, likes, CorrelationKind::SS).size(), 1u + 0u + 1u);
  EXPECT_EQ(semi_join_reduce(likes, follows, CorrelationKind::SO).size(), 1u);
}

TEST(Builder, DiscoverCorrelations) {
  TempDir dir;
  const auto s = testing_support::make_store(parse_ntriples(testing_support::kG1), dir.path(), {1, 1}, false);
  EXPECT_EQ(discover_correlations(s, CorrelationKind::OS, 5), (std::vector<TermId>{1}));
  EXPECT_EQ(discover_correlations(s, CorrelationKind::OS, 1), (std::vector<TermId>{1}));
  EXPECT_EQ(discover_correlations(s, CorrelationKind::SS, 5), (std::vector<TermId>{1, 5}));
  EXPECT_THROW(discover_correlations(s, CorrelationKind::OS, 0), LookupError);
}

TEST(Builder, UpperBoundFormula) {
  EXPECT_EQ(estimate_extvp_upper_bound(2, 7), Rational(35, 2));
  EXPECT_EQ(estimate_extvp_upper_bound(86, 1'091'500'000), Rational(257 * 1'091'500'000ULL, 2));
  EXPECT_THROW(estimate_extvp_upper_bound(0, 1), ConfigError);
}

TEST(Builder, ReductionsMatchNestedLoopOnGeneratedGraph) {
  GenConfig cfg;
  cfg.users = 60;
  cfg.seed = 7;
  std::ostringstream nt;
  generate_graph(cfg, nt);
  const auto g = parse_ntriples(nt.str());
  TempDir dir;
  const auto s = testing_support::make_store(g, dir.path());
  for (TermId p1 : g.predicates) {
    for (TermId p2 : g.predicates) {
      for (auto kind : {TableKind::SS, TableKind::OS, TableKind::SO}) {
        if (kind == TableKind::SS && p1 == p2) continue;
        const auto key = TableKey::ext(kind, p1, p2);
        const auto expect = naive_reduction(g, kind, p1, p2);
        const auto st = s.catalog().lookup(key);
        SCOPED_TRACE(describe(key, s.dict()));
        EXPECT_EQ(st.sf, Rational(expect.size(), vp_size(g, p1)));
        if (!st.materialized) continue;
        std::set<std::pair<TermId, TermId>> got;
        for (const auto& r : s.read_table(key)->rows()) got.emplace(r.s, r.o);
        EXPECT_EQ(got, expect);
      }
    }
  }
}
