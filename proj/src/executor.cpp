#include "extvp/executor.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>
#include <ostream>
#include <set>
#include <unordered_map>

#include "extvp/error.hpp"

namespace extvp {

namespace {

constexpr std::string_view kIntegerSuffix = "\"^^<http://www.w3.org/2001/XMLSchema#integer>";

std::optional<std::int64_t> integer_value(const Term& t) {
  if (t.kind != TermKind::Literal || !t.lexical.ends_with(kIntegerSuffix)) return std::nullopt;
  const std::string v = t.value();
  std::string_view digits = v;
  if (digits.starts_with('+')) digits.remove_prefix(1);
  std::int64_t out = 0;
  const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), out);
  if (ec != std::errc{} || ptr != digits.data() + digits.size()) return std::nullopt;
  return out;
}

std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
  h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  return h;
}

// Column bookkeeping shared by inner and outer joins.
struct JoinLayout {
  std::vector<int> lshared, rshared;
  std::vector<int> rextra;
  std::vector<std::string> schema;

  JoinLayout(const MappingBag& l, const MappingBag& r) : schema(l.schema()) {
    for (std::size_t j = 0; j < r.width(); ++j) {
      const int li = l.column(r.schema()[j]);
      if (li >= 0) {
        lshared.push_back(li);
        rshared.push_back(static_cast<int>(j));
      } else {
        rextra.push_back(static_cast<int>(j));
        schema.push_back(r.schema()[j]);
      }
    }
  }

  static bool full(std::span<const TermId> row, const std::vector<int>& cols) {
    return std::all_of(cols.begin(), cols.end(), [&](int c) { return row[c] != kInvalidId; });
  }
  static std::uint64_t key(std::span<const TermId> row, const std::vector<int>& cols) {
    std::uint64_t h = 0;
    for (int c : cols) h = mix(h, row[c]);
    return h;
  }
  bool compatible(std::span<const TermId> lr, std::span<const TermId> rr) const {
    for (std::size_t i = 0; i < lshared.size(); ++i) {
      const TermId a = lr[lshared[i]];
      const TermId b = rr[rshared[i]];
      if (a != kInvalidId && b != kInvalidId && a != b) return false;
    }
    return true;
  }
  void merge(std::span<const TermId> lr, std::span<const TermId> rr, std::vector<TermId>& out) const {
    out.assign(lr.begin(), lr.end());
    for (std::size_t i = 0; i < lshared.size(); ++i) {
      if (out[lshared[i]] == kInvalidId) out[lshared[i]] = rr[rshared[i]];
    }
    for (int c : rextra) out.push_back(rr[c]);
  }
  void pad(std::span<const TermId> lr, std::vector<TermId>& out) const {
    out.assign(lr.begin(), lr.end());
    out.resize(schema.size(), kInvalidId);
  }
};

using Buckets = std::unordered_map<std::uint64_t, std::vector<std::size_t>>;

// Rows with every shared column bound go into hash buckets, the rest into `partial`.
Buckets index_rows(const MappingBag& bag, const std::vector<int>& cols, std::vector<std::size_t>& full,
                   std::vector<std::size_t>& partial) {
  Buckets buckets;
  for (std::size_t i = 0; i < bag.size(); ++i) {
    const auto row = bag.row(i);
    if (JoinLayout::full(row, cols)) {
      buckets[JoinLayout::key(row, cols)].push_back(i);
      full.push_back(i);
    } else {
      partial.push_back(i);
    }
  }
  return buckets;
}

std::optional<Term> operand(const PatternTerm& t, const MappingBag& bag, std::span<const TermId> row,
                            const Dictionary& dict) {
  if (!is_var(t)) return std::get<Term>(t);
  const int c = bag.column(var_name(t));
  if (c < 0 || row[c] == kInvalidId) return std::nullopt;
  return dict.decode(row[c]);
}

Truth eval_row(const FilterExpr& e, const MappingBag& bag, std::span<const TermId> row, const Dictionary& dict) {
  using K = FilterExpr::Kind;
  switch (e.kind) {
    case K::Const: return e.value ? Truth::True : Truth::False;
    case K::Bound: {
      const int c = bag.column(var_name(e.operands[0]));
      return c >= 0 && row[c] != kInvalidId ? Truth::True : Truth::False;
    }
    case K::Not: {
      const auto v = eval_row(e.children[0], bag, row, dict);
      if (v == Truth::Error) return v;
      return v == Truth::True ? Truth::False : Truth::True;
    }
    case K::And: {
      const auto a = eval_row(e.children[0], bag, row, dict);
      const auto b = eval_row(e.children[1], bag, row, dict);
      if (a == Truth::False || b == Truth::False) return Truth::False;
      if (a == Truth::Error || b == Truth::Error) return Truth::Error;
      return Truth::True;
    }
    case K::Or: {
      const auto a = eval_row(e.children[0], bag, row, dict);
      const auto b = eval_row(e.children[1], bag, row, dict);
      if (a == Truth::True || b == Truth::True) return Truth::True;
      if (a == Truth::Error || b == Truth::Error) return Truth::Error;
      return Truth::False;
    }
    case K::Compare: {
      const auto a = operand(e.operands[0], bag, row, dict);
      const auto b = operand(e.operands[1], bag, row, dict);
      if (!a || !b) return Truth::Error;
      const int c = compare_terms(*a, *b);
      bool r = false;
      switch (e.op) {
        case CompareOp::Eq: r = c == 0; break;
        case CompareOp::Ne: r = c != 0; break;
        case CompareOp::Lt: r = c < 0; break;
        case CompareOp::Le: r = c <= 0; break;
        case CompareOp::Gt: r = c > 0; break;
        case CompareOp::Ge: r = c >= 0; break;
      }
      return r ? Truth::True : Truth::False;
    }
  }
  return Truth::Error;
}

std::vector<int> columns_of(const MappingBag& bag, const std::vector<std::string>& vars) {
  std::vector<int> out;
  for (const auto& v : vars) out.push_back(bag.column(v));
  return out;
}

MappingBag remap(const MappingBag& in, const std::vector<std::string>& schema) {
  MappingBag out(schema);
  const auto cols = columns_of(in, schema);
  out.reserve(in.size());
  std::vector<TermId> buf(schema.size());
  for (std::size_t i = 0; i < in.size(); ++i) {
    const auto row = in.row(i);
    for (std::size_t c = 0; c < cols.size(); ++c) buf[c] = cols[c] < 0 ? kInvalidId : row[cols[c]];
    out.add_row(buf);
  }
  return out;
}

template <typename Rows>
void scan_rows(const Rows& rows, const ScanNode& node, const MappingBag& shape, MappingBag& out, ExecStats* stats,
               auto&& get) {
  std::vector<int> proj_cols;
  for (const auto& p : node.projections) proj_cols.push_back(shape.column(p.var));
  std::vector<TermId> buf(shape.width());
  std::uint64_t examined = 0;
  for (const auto& r : rows) {
    ++examined;
    bool ok = true;
    for (const auto& c : node.conditions) {
      if (get(r, c.column) != c.value) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    std::fill(buf.begin(), buf.end(), kInvalidId);
    for (std::size_t i = 0; i < node.projections.size() && ok; ++i) {
      const TermId v = get(r, node.projections[i].column);
      TermId& slot = buf[proj_cols[i]];
      if (slot != kInvalidId && slot != v) ok = false;
      slot = v;
    }
    if (ok) out.add_row(buf);
  }
  if (stats) stats->input_tuples += examined;
}

std::optional<TermId> subject_condition(const ScanNode& node) {
  for (const auto& c : node.conditions) {
    if (c.column == Column::S) return c.value;
  }
  return std::nullopt;
}

}  // namespace

MappingBag MappingBag::unit() {
  MappingBag b;
  b.unit_rows_ = 1;
  return b;
}

int MappingBag::column(std::string_view var) const {
  for (std::size_t i = 0; i < schema_.size(); ++i) {
    if (schema_[i] == var) return static_cast<int>(i);
  }
  return -1;
}

void MappingBag::add_row(std::span<const TermId> values) {
  if (width() == 0) {
    ++unit_rows_;
    return;
  }
  cells_.insert(cells_.end(), values.begin(), values.end());
}

void MappingBag::pop_row() {
  if (width() == 0) {
    --unit_rows_;
  } else {
    cells_.resize(cells_.size() - width());
  }
}

int compare_terms(const Term& a, const Term& b) {
  const auto ia = integer_value(a);
  const auto ib = integer_value(b);
  if (ia && ib) return *ia < *ib ? -1 : *ia > *ib ? 1 : 0;
  if (const int c = a.value().compare(b.value()); c != 0) return c < 0 ? -1 : 1;
  if (const int c = a.lexical.compare(b.lexical); c != 0) return c < 0 ? -1 : 1;
  return static_cast<int>(a.kind) - static_cast<int>(b.kind);
}

MappingBag eval_scan(const ScanNode& node, const Store& store, ExecStats* stats) {
  MappingBag out(node.vars());
  if (stats) ++stats->scans;
  for (const auto& c : node.conditions) {
    if (c.value == kInvalidId) return out;
  }
  const auto subject = subject_condition(node);
  if (node.table.kind == TableKind::TT) {
    const auto triples = store.read_triples();
    std::span<const Triple> rows(*triples);
    if (subject) {
      const auto [lo, hi] = std::equal_range(rows.begin(), rows.end(), Triple{*subject, 0, 0},
                                             [](const Triple& a, const Triple& b) { return a.s < b.s; });
      rows = std::span<const Triple>(lo, hi);
    }
    scan_rows(rows, node, out, out, stats, [](const Triple& t, Column c) {
      return c == Column::S ? t.s : c == Column::P ? t.p : t.o;
    });
    return out;
  }
  const auto table = store.read_table(node.table);
  auto rows = table->rows();
  if (subject) {
    const auto [lo, hi] = std::equal_range(rows.begin(), rows.end(), Row{*subject, 0},
                                           [](const Row& a, const Row& b) { return a.s < b.s; });
    rows = std::span<const Row>(lo, hi);
  }
  scan_rows(rows, node, out, out, stats, [](const Row& r, Column c) { return c == Column::S ? r.s : r.o; });
  return out;
}

MappingBag join_compatible(const MappingBag& l, const MappingBag& r) {
  const JoinLayout jl(l, r);
  MappingBag out(jl.schema);
  std::vector<TermId> buf;
  const auto emit = [&](std::size_t li, std::size_t ri) {
    jl.merge(l.row(li), r.row(ri), buf);
    out.add_row(buf);
  };
  if (jl.lshared.empty()) {
    out.reserve(l.size() * r.size());
    for (std::size_t i = 0; i < l.size(); ++i) {
      for (std::size_t j = 0; j < r.size(); ++j) emit(i, j);
    }
    return out;
  }

  std::vector<std::size_t> lfull, lpartial, rfull, rpartial;
  if (r.size() <= l.size()) {
    const auto buckets = index_rows(r, jl.rshared, rfull, rpartial);
    for (std::size_t i = 0; i < l.size(); ++i) {
      const auto row = l.row(i);
      if (!JoinLayout::full(row, jl.lshared)) {
        lpartial.push_back(i);
        continue;
      }
      lfull.push_back(i);
      const auto it = buckets.find(JoinLayout::key(row, jl.lshared));
      if (it == buckets.end()) continue;
      for (auto j : it->second) {
        if (jl.compatible(row, r.row(j))) emit(i, j);
      }
    }
  } else {
    const auto buckets = index_rows(l, jl.lshared, lfull, lpartial);
    for (std::size_t j = 0; j < r.size(); ++j) {
      const auto row = r.row(j);
      if (!JoinLayout::full(row, jl.rshared)) {
        rpartial.push_back(j);
        continue;
      }
      rfull.push_back(j);
      const auto it = buckets.find(JoinLayout::key(row, jl.rshared));
      if (it == buckets.end()) continue;
      for (auto i : it->second) {
        if (jl.compatible(l.row(i), row)) emit(i, j);
      }
    }
  }
  // Rows with unbound shared variables are compatible with more than one key.
  for (auto i : lpartial) {
    for (std::size_t j = 0; j < r.size(); ++j) {
      if (jl.compatible(l.row(i), r.row(j))) emit(i, j);
    }
  }
  for (auto j : rpartial) {
    for (auto i : lfull) {
      if (jl.compatible(l.row(i), r.row(j))) emit(i, j);
    }
  }
  return out;
}

MappingBag left_join(const MappingBag& l, const MappingBag& r, const FilterExpr* filter, const Dictionary& dict) {
  const JoinLayout jl(l, r);
  MappingBag out(jl.schema);
  std::vector<std::size_t> rfull, rpartial;
  const auto buckets = index_rows(r, jl.rshared, rfull, rpartial);
  std::vector<TermId> buf;
  std::vector<std::size_t> all(r.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  static const std::vector<std::size_t> kNone;

  for (std::size_t i = 0; i < l.size(); ++i) {
    const auto row = l.row(i);
    bool matched = false;
    const auto try_rows = [&](const std::vector<std::size_t>& rows) {
      for (auto j : rows) {
        if (!jl.compatible(row, r.row(j))) continue;
        jl.merge(row, r.row(j), buf);
        out.add_row(buf);
        if (filter && eval_filter(*filter, out, out.size() - 1, dict) != Truth::True) {
          out.pop_row();
          continue;
        }
        matched = true;
      }
    };
    if (jl.lshared.empty() || !JoinLayout::full(row, jl.lshared)) {
      try_rows(all);
    } else {
      const auto it = buckets.find(JoinLayout::key(row, jl.lshared));
      try_rows(it == buckets.end() ? kNone : it->second);
      try_rows(rpartial);
    }
    if (!matched) {
      jl.pad(row, buf);
      out.add_row(buf);
    }
  }
  return out;
}

Truth eval_filter(const FilterExpr& e, const MappingBag& bag, std::size_t row, const Dictionary& dict) {
  return eval_row(e, bag, bag.row(row), dict);
}

MappingBag filter_bag(const MappingBag& in, const FilterExpr& expr, const Dictionary& dict) {
  MappingBag out(in.schema());
  for (std::size_t i = 0; i < in.size(); ++i) {
    if (eval_filter(expr, in, i, dict) == Truth::True) out.add_row(in.row(i));
  }
  return out;
}

MappingBag distinct(const MappingBag& in) {
  MappingBag out(in.schema());
  std::set<std::vector<TermId>> seen;
  for (std::size_t i = 0; i < in.size(); ++i) {
    const auto row = in.row(i);
    if (seen.emplace(row.begin(), row.end()).second) out.add_row(row);
  }
  return out;
}

MappingBag sort_bag(const MappingBag& in, const std::vector<OrderKey>& keys, const Dictionary& dict) {
  std::vector<std::size_t> idx(in.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::vector<int> cols;
  for (const auto& k : keys) cols.push_back(in.column(k.var));
  const auto cmp_cell = [&](TermId a, TermId b) {
    if (a == b) return 0;
    if (a == kInvalidId) return -1;
    if (b == kInvalidId) return 1;
    if (const int c = compare_terms(dict.decode(a), dict.decode(b)); c != 0) return c;
    return a < b ? -1 : 1;
  };
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) {
    for (std::size_t k = 0; k < keys.size(); ++k) {
      if (cols[k] < 0) continue;
      int c = cmp_cell(in.row(x)[cols[k]], in.row(y)[cols[k]]);
      if (keys[k].descending) c = -c;
      if (c != 0) return c < 0;
    }
    return false;
  });
  MappingBag out(in.schema());
  out.reserve(in.size());
  for (auto i : idx) out.add_row(in.row(i));
  return out;
}

MappingBag slice(const MappingBag& in, std::uint64_t offset, std::optional<std::uint64_t> limit) {
  MappingBag out(in.schema());
  const std::uint64_t n = in.size();
  const std::uint64_t begin = std::min(offset, n);
  const std::uint64_t end = limit ? std::min(n, begin + *limit) : n;
  for (std::uint64_t i = begin; i < end; ++i) out.add_row(in.row(i));
  return out;
}

MappingBag project(const MappingBag& in, const std::vector<std::string>& vars) { return remap(in, vars); }

MappingBag union_bags(const MappingBag& l, const MappingBag& r) {
  auto schema = l.schema();
  for (const auto& v : r.schema()) {
    if (l.column(v) < 0) schema.push_back(v);
  }
  MappingBag out = remap(l, schema);
  const auto right = remap(r, schema);
  for (std::size_t i = 0; i < right.size(); ++i) out.add_row(right.row(i));
  return out;
}

MappingBag evaluate(const PlanNode& plan, const Store& store, ExecStats* stats) {
  using K = PlanNode::Kind;
  const auto& dict = store.dict();
  switch (plan.kind) {
    case K::Scan: return eval_scan(plan.scan, store, stats);
    case K::Join: {
      if (plan.children.empty()) return MappingBag::unit();
      auto l = evaluate(plan.children[0], store, stats);
      if (l.empty()) return MappingBag(plan.schema());
      return join_compatible(l, evaluate(plan.children[1], store, stats));
    }
    case K::LeftJoin: {
      auto l = evaluate(plan.children[0], store, stats);
      if (l.empty()) return MappingBag(plan.schema());
      const auto r = evaluate(plan.children[1], store, stats);
      return left_join(l, r, plan.filter ? &*plan.filter : nullptr, dict);
    }
    case K::Union: return union_bags(evaluate(plan.children[0], store, stats), evaluate(plan.children[1], store, stats));
    case K::Filter: return filter_bag(evaluate(plan.children[0], store, stats), *plan.filter, dict);
    case K::Distinct: return distinct(evaluate(plan.children[0], store, stats));
    case K::Sort: return sort_bag(evaluate(plan.children[0], store, stats), plan.order, dict);
    case K::Slice: return slice(evaluate(plan.children[0], store, stats), plan.offset, plan.limit);
    case K::Project: return project(evaluate(plan.children[0], store, stats), plan.vars);
    case K::Empty: return MappingBag(plan.vars);
  }
  throw Error("unknown plan node");
}

bool bag_equal(const MappingBag& a, const MappingBag& b) {
  if (a.size() != b.size() || a.width() != b.width()) return false;
  for (const auto& v : a.schema()) {
    if (b.column(v) < 0) return false;
  }
  const auto aligned = remap(b, a.schema());
  const auto rows = [](const MappingBag& bag) {
    std::vector<std::vector<TermId>> out;
    for (std::size_t i = 0; i < bag.size(); ++i) out.emplace_back(bag.row(i).begin(), bag.row(i).end());
    std::sort(out.begin(), out.end());
    return out;
  };
  return rows(a) == rows(aligned);
}

void write_tsv(const MappingBag& bag, const Dictionary& dict, std::ostream& out) {
  for (std::size_t c = 0; c < bag.width(); ++c) out << (c ? "\t?" : "?") << bag.schema()[c];
  out << '\n';
  for (std::size_t i = 0; i < bag.size(); ++i) {
    const auto row = bag.row(i);
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out << '\t';
      if (row[c] != kInvalidId) out << dict.decode(row[c]).to_ntriples();
    }
    out << '\n';
  }
}

}  // namespace extvp
