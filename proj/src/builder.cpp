#include "extvp/builder.hpp"

#include <algorithm>
#include <chrono>
#include <map>

#include "extvp/error.hpp"

namespace extvp {

namespace {

// Membership bitmap over dense term ids.
class IdSet {
 public:
  explicit IdSet(std::size_t universe) : bits_(universe, false) {}
  void insert(TermId id) {
    if (id >= bits_.size()) bits_.resize(id + 1, false);
    bits_[id] = true;
  }
  bool contains(TermId id) const { return id < bits_.size() && bits_[id]; }

 private:
  std::vector<bool> bits_;
};

TermId max_id(const TwoColumnTable& t) {
  TermId m = 0;
  for (const auto& r : t.rows()) m = std::max({m, r.s, r.o});
  return m;
}

IdSet column_set(const TwoColumnTable& t, bool subjects, std::size_t universe) {
  IdSet set(universe);
  for (const auto& r : t.rows()) set.insert(subjects ? r.s : r.o);
  return set;
}

// Which column of the right-hand table the correlation probes.
bool probes_right_subjects(CorrelationKind kind) { return kind != CorrelationKind::SO; }
// Which column of the left-hand table is tested.
bool tests_left_subject(CorrelationKind kind) { return kind != CorrelationKind::OS; }

TwoColumnTable reduce_by(const TwoColumnTable& left, const IdSet& keys, CorrelationKind kind) {
  std::vector<Row> out;
  const bool by_subject = tests_left_subject(kind);
  for (const auto& r : left.rows()) {
    if (keys.contains(by_subject ? r.s : r.o)) out.push_back(r);
  }
  return TwoColumnTable::from_sorted(std::move(out));
}

}  // namespace

TableKind table_kind(CorrelationKind kind) {
  switch (kind) {
    case CorrelationKind::SS: return TableKind::SS;
    case CorrelationKind::OS: return TableKind::OS;
    case CorrelationKind::SO: return TableKind::SO;
  }
  return TableKind::SS;
}

void BuildConfig::validate() const {
  if (threshold.is_zero() || threshold > Rational{1, 1})
    throw ConfigError("threshold must be in (0,1], got " + threshold.to_string());
}

bool BuildConfig::enabled(CorrelationKind kind) const {
  switch (kind) {
    case CorrelationKind::SS: return compute_ss;
    case CorrelationKind::OS: return compute_os;
    case CorrelationKind::SO: return compute_so;
  }
  return false;
}

void build_vp(const Graph& g, Store& store) {
  std::map<TermId, std::vector<Row>> partitions;
  for (const auto& t : g.triples) partitions[t.p].push_back({t.s, t.o});
  std::vector<Triple> tt(g.triples);
  std::sort(tt.begin(), tt.end());
  store.dict() = g.dict;
  store.catalog() = Catalog{};
  store.catalog().set_predicates(g.predicates);
  store.write_triples(tt);
  for (auto& [p, rows] : partitions) store.write_table(TableKey::vp(p), TwoColumnTable::from_unsorted(std::move(rows)));
  store.save();
}

TwoColumnTable semi_join_reduce(const TwoColumnTable& left, const TwoColumnTable& right, CorrelationKind kind) {
  const auto universe = static_cast<std::size_t>(std::max(max_id(left), max_id(right))) + 1;
  return reduce_by(left, column_set(right, probes_right_subjects(kind), universe), kind);
}

std::vector<TermId> discover_correlations(std::span<const Triple> triples, const TwoColumnTable& vp_of_p,
                                          CorrelationKind kind) {
  const auto keys = column_set(vp_of_p, probes_right_subjects(kind), static_cast<std::size_t>(max_id(vp_of_p)) + 1);
  const bool by_subject = tests_left_subject(kind);
  std::vector<TermId> out;
  for (const auto& t : triples) {
    if (keys.contains(by_subject ? t.s : t.o)) out.push_back(t.p);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<TermId> discover_correlations(const Store& store, CorrelationKind kind, TermId p) {
  if (!store.catalog().has_predicate(p)) throw LookupError("unknown predicate id " + std::to_string(p));
  return discover_correlations(*store.read_triples(), *store.read_table(TableKey::vp(p)), kind);
}

BuildReport build_extvp(Store& store, const BuildConfig& cfg) {
  cfg.validate();
  const auto started = std::chrono::steady_clock::now();
  auto& cat = store.catalog();
  for (const auto& [key, s] : cat.entries()) {
    if (key.is_extvp() && s.materialized) store.remove_table_file(key);
  }
  cat.erase_extvp();
  cat.threshold = cfg.threshold;

  const auto& preds = cat.predicates();
  const auto universe = store.dict().size();
  const auto triples = store.read_triples();

  std::map<TermId, std::shared_ptr<const TwoColumnTable>> vp;
  for (TermId p : preds) vp[p] = store.read_table(TableKey::vp(p));

  // Per target predicate: key sets and the correlated predicates of each kind.
  struct Target {
    IdSet subjects{0};
    IdSet objects{0};
    std::map<CorrelationKind, IdSet> correlated;
  };
  std::map<TermId, Target> targets;
  for (TermId p : preds) {
    Target t;
    t.subjects = column_set(*vp[p], true, universe);
    t.objects = column_set(*vp[p], false, universe);
    for (auto kind : kAllCorrelations) {
      if (!cfg.enabled(kind)) continue;
      IdSet corr(universe);
      for (TermId q : discover_correlations(*triples, *vp[p], kind)) corr.insert(q);
      t.correlated.emplace(kind, std::move(corr));
    }
    targets.emplace(p, std::move(t));
  }

  BuildReport report;
  for (TermId p1 : preds) {
    for (TermId p2 : preds) {
      for (auto kind : kAllCorrelations) {
        if (!cfg.enabled(kind)) continue;
        if (kind == CorrelationKind::SS && p1 == p2) continue;
        const TableKey key = TableKey::ext(table_kind(kind), p1, p2);
        const auto& target = targets.at(p2);
        const auto base_count = vp[p1]->size();
        ++report.pairs_examined;
        if (!target.correlated.at(kind).contains(p1)) {
          cat.record(TableStats{key, 0, Rational{0, 1}, false});
          ++report.empty;
          continue;
        }
        ++report.pairs_computed;
        const auto& keys = probes_right_subjects(kind) ? target.subjects : target.objects;
        auto reduced = reduce_by(*vp[p1], keys, kind);
        const Rational sf{reduced.size(), base_count};
        if (reduced.empty()) {
          cat.record(TableStats{key, 0, sf, false});
          ++report.empty;
        } else if (sf.is_one()) {
          cat.record(TableStats{key, reduced.size(), sf, false});
          ++report.equal_to_vp;
        } else if (sf < cfg.threshold) {
          store.write_table(key, reduced);
          ++report.materialized;
          report.total_tuples += reduced.size();
        } else {
          cat.record(TableStats{key, reduced.size(), sf, false});
          ++report.above_threshold;
        }
      }
    }
  }
  cat.extvp_built = true;
  cat.build_timestamp.clear();
  store.save_catalog();
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return report;
}

Rational estimate_extvp_upper_bound(std::uint64_t k, std::uint64_t n) {
  if (k == 0) throw ConfigError("k must be >= 1");
  return Rational{(3 * k - 1) * n, 2};
}

}  // namespace extvp
