#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "extvp/rational.hpp"
#include "extvp/rdf.hpp"
#include "extvp/storage.hpp"

namespace extvp {

// Join correlation between two triple patterns. Object-object correlations
// are never precomputed, so they have no enumerator.
enum class CorrelationKind : std::uint8_t { SS, OS, SO };

inline constexpr CorrelationKind kAllCorrelations[] = {CorrelationKind::SS, CorrelationKind::OS,
                                                       CorrelationKind::SO};

TableKind table_kind(CorrelationKind kind);

struct BuildConfig {
  // Tables are materialized iff 0 < sf < threshold.
  Rational threshold{1, 1};
  bool compute_ss = true;
  bool compute_os = true;
  bool compute_so = true;

  void validate() const;
  bool enabled(CorrelationKind kind) const;
};

struct BuildReport {
  std::uint64_t pairs_examined = 0;  // pairs with a catalog entry after the build
  std::uint64_t pairs_computed = 0;  // pairs that actually ran a semi-join
  std::uint64_t materialized = 0;
  std::uint64_t empty = 0;
  std::uint64_t equal_to_vp = 0;
  std::uint64_t above_threshold = 0;
  std::uint64_t total_tuples = 0;  // tuples in materialized ExtVP tables
  double wall_seconds = 0;
};

// Writes TT and one VP table per predicate into a freshly created store and
// seeds the catalog. Persists the store.
void build_vp(const Graph& g, Store& store);

// SS: rows of `left` whose s occurs as an s of `right`; OS: whose o occurs as
// an s of `right`; SO: whose s occurs as an o of `right`.
TwoColumnTable semi_join_reduce(const TwoColumnTable& left, const TwoColumnTable& right, CorrelationKind kind);

// Predicates q whose VP table has a non-empty `kind` semi-join against VP(p),
// i.e. for OS: {q | (s,q,o) in G, o is a subject of VP(p)}. Ascending.
std::vector<TermId> discover_correlations(std::span<const Triple> triples, const TwoColumnTable& vp_of_p,
                                          CorrelationKind kind);
std::vector<TermId> discover_correlations(const Store& store, CorrelationKind kind, TermId p);

// Computes and records every SS/OS/SO reduction. Replaces previous ExtVP
// content of the store and persists the catalog.
BuildReport build_extvp(Store& store, const BuildConfig& cfg);

// (3k - 1) * n / 2.
Rational estimate_extvp_upper_bound(std::uint64_t k, std::uint64_t n);

}  // namespace extvp
