#include "extvp/planner.hpp"

#include <algorithm>
#include <tuple>

#include "extvp/error.hpp"

namespace extvp {

namespace {

using Kind = PlanNode::Kind;

bool same_var(const PatternTerm& a, const PatternTerm& b) {
  return is_var(a) && is_var(b) && var_name(a) == var_name(b);
}

std::optional<TermId> predicate_id(const PatternTerm& p, const Catalog& cat, const Dictionary& dict) {
  const auto id = dict.find(std::get<Term>(p));
  if (!id || !cat.has_predicate(*id)) return std::nullopt;
  return id;
}

Rational sf_of(const TableStats& s) { return s.sf.value_or(Rational{1, 1}); }

bool contains(const std::vector<std::string>& v, const std::string& x) {
  return std::find(v.begin(), v.end(), x) != v.end();
}

std::vector<std::string> shared(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::vector<std::string> out;
  for (const auto& v : a) {
    if (contains(b, v)) out.push_back(v);
  }
  return out;
}

void append_new(std::vector<std::string>& out, const std::vector<std::string>& more) {
  for (const auto& v : more) {
    if (!contains(out, v)) out.push_back(v);
  }
}

PlanNode empty_node(std::string cause, std::vector<std::string> schema) {
  PlanNode n;
  n.kind = Kind::Empty;
  n.empty_cause = std::move(cause);
  n.vars = std::move(schema);
  return n;
}

PlanNode scan_node(ScanNode s) {
  PlanNode n;
  n.kind = Kind::Scan;
  n.scan = std::move(s);
  return n;
}

PlanNode join_node(PlanNode l, PlanNode r) {
  PlanNode n;
  n.kind = Kind::Join;
  n.join_vars = shared(l.schema(), r.schema());
  n.cross = n.join_vars.empty();
  n.children = {std::move(l), std::move(r)};
  return n;
}

PlanNode filter_node(FilterExpr f, PlanNode child) {
  if (child.kind == Kind::Empty) return child;
  PlanNode n;
  n.kind = Kind::Filter;
  n.filter = std::move(f);
  n.children = {std::move(child)};
  return n;
}

bool covered(const FilterExpr& f, const std::vector<std::string>& bound) {
  for (const auto& v : f.vars()) {
    if (!contains(bound, v)) return false;
  }
  return true;
}

std::vector<std::size_t> optimized_order(const std::vector<ScanNode>& scans) {
  std::vector<std::size_t> remaining(scans.size());
  for (std::size_t i = 0; i < scans.size(); ++i) remaining[i] = i;
  std::vector<std::size_t> order;
  std::vector<std::string> bound;
  while (!remaining.empty()) {
    std::vector<std::size_t> pool;
    for (auto i : remaining) {
      if (!shared(scans[i].vars(), bound).empty()) pool.push_back(i);
    }
    if (pool.empty()) pool = remaining;
    const auto rank = [&](std::size_t i) {
      return std::tuple(-scans[i].pattern.bound_count(), scans[i].stats.tuple_count, i);
    };
    const auto best = *std::min_element(pool.begin(), pool.end(),
                                        [&](std::size_t a, std::size_t b) { return rank(a) < rank(b); });
    order.push_back(best);
    append_new(bound, scans[best].vars());
    std::erase(remaining, best);
  }
  return order;
}

PlanNode compile_bgp(const Bgp& bgp, const Catalog& cat, const Dictionary& dict, Layout layout,
                     const std::vector<FilterExpr>& filters, bool naive) {
  if (bgp.patterns.empty()) {
    PlanNode unit;
    unit.kind = Kind::Join;
    for (const auto& f : filters) unit = filter_node(f, std::move(unit));
    return unit;
  }
  std::vector<ScanNode> scans;
  for (std::size_t i = 0; i < bgp.patterns.size(); ++i) {
    auto choice = table_selection(bgp.patterns[i], i, bgp, cat, dict, layout);
    if (choice.empty_cause) return empty_node(*choice.empty_cause, bgp.vars());
    scans.push_back(tp_to_scan(bgp.patterns[i], i, choice, dict));
  }

  std::vector<std::size_t> order;
  if (naive) {
    for (std::size_t i = 0; i < scans.size(); ++i) order.push_back(i);
  } else {
    order = optimized_order(scans);
  }

  std::vector<bool> placed(filters.size(), false);
  std::vector<std::string> bound;
  PlanNode node;
  const auto attach = [&] {
    for (std::size_t f = 0; f < filters.size(); ++f) {
      if (!placed[f] && covered(filters[f], bound)) {
        node = filter_node(filters[f], std::move(node));
        placed[f] = true;
      }
    }
  };
  for (std::size_t step = 0; step < order.size(); ++step) {
    auto scan = scan_node(scans[order[step]]);
    append_new(bound, scans[order[step]].vars());
    node = step == 0 ? std::move(scan) : join_node(std::move(node), std::move(scan));
    attach();
  }
  for (std::size_t f = 0; f < filters.size(); ++f) {
    if (!placed[f]) node = filter_node(filters[f], std::move(node));
  }
  node.join_order = std::move(order);
  return node;
}

struct Compiler {
  const Catalog& cat;
  const Dictionary& dict;
  PlanOptions options;

  PlanNode bgp(const Bgp& b, const std::vector<FilterExpr>& filters) const {
    return options.naive_order ? compile_bgp_naive(b, cat, dict, options.layout, filters)
                               : compile_bgp_opt(b, cat, dict, options.layout, filters);
  }

  PlanNode unary(Kind kind, const Algebra& a, PlanNode child) const {
    if (child.kind == Kind::Empty) {
      if (kind == Kind::Project) child.vars = a.vars;
      return child;
    }
    PlanNode n;
    n.kind = kind;
    n.vars = a.vars;
    n.order = a.order;
    n.offset = a.offset;
    n.limit = a.limit;
    n.children = {std::move(child)};
    return n;
  }

  PlanNode run(const Algebra& a) const {
    using AK = Algebra::Kind;
    switch (a.kind) {
      case AK::Bgp: return bgp(a.bgp, {});
      case AK::Filter:
        if (options.push_filters && a.child().kind == AK::Bgp) return bgp(a.child().bgp, a.filter->conjuncts());
        return filter_node(*a.filter, run(a.child()));
      case AK::Join: {
        auto l = run(a.children[0]);
        auto r = run(a.children[1]);
        if (l.kind == Kind::Empty || r.kind == Kind::Empty) {
          auto schema = l.schema();
          append_new(schema, r.schema());
          return empty_node(l.kind == Kind::Empty ? l.empty_cause : r.empty_cause, schema);
        }
        return join_node(std::move(l), std::move(r));
      }
      case AK::LeftJoin: {
        auto l = run(a.children[0]);
        auto r = run(a.children[1]);
        if (l.kind == Kind::Empty) {
          append_new(l.vars, r.schema());
          return l;
        }
        PlanNode n;
        n.kind = Kind::LeftJoin;
        n.join_vars = shared(l.schema(), r.schema());
        n.filter = a.filter;
        n.children = {std::move(l), std::move(r)};
        return n;
      }
      case AK::Union: {
        auto l = run(a.children[0]);
        auto r = run(a.children[1]);
        if (l.kind == Kind::Empty && r.kind == Kind::Empty) {
          append_new(l.vars, r.vars);
          return l;
        }
        PlanNode n;
        n.kind = Kind::Union;
        n.children = {std::move(l), std::move(r)};
        return n;
      }
      case AK::Distinct: return unary(Kind::Distinct, a, run(a.child()));
      case AK::OrderBy: return unary(Kind::Sort, a, run(a.child()));
      case AK::Slice: return unary(Kind::Slice, a, run(a.child()));
      case AK::Project: return unary(Kind::Project, a, run(a.child()));
    }
    throw Error("unknown algebra node");
  }
};

std::string join_list(const std::vector<std::string>& vars) {
  std::string out;
  for (const auto& v : vars) out += (out.empty() ? "?" : " ?") + v;
  return out;
}

std::string stats_text(const TableStats& s, const Dictionary& dict) {
  std::string out = describe(s.key, dict) + " tuples=" + std::to_string(s.tuple_count);
  if (s.sf) out += " sf=" + s.sf->to_string();
  return out;
}

const PatternTerm& at(const TriplePattern& tp, Column c) {
  switch (c) {
    case Column::S: return tp.s;
    case Column::P: return tp.p;
    case Column::O: return tp.o;
  }
  return tp.s;
}

char column_char(Column c) { return c == Column::S ? 's' : c == Column::P ? 'p' : 'o'; }

void explain_node(const PlanNode& n, const Dictionary& dict, int depth, std::string& out) {
  const std::string pad(static_cast<std::size_t>(depth) * 2, ' ');
  std::string line;
  switch (n.kind) {
    case Kind::Scan: {
      const auto& s = n.scan;
      line = "Scan tp" + std::to_string(s.pattern_index + 1) + " " + stats_text(s.stats, dict);
      for (const auto& p : s.projections) line += std::string(" ") + column_char(p.column) + "->?" + p.var;
      for (const auto& c : s.conditions)
        line += std::string(" ") + column_char(c.column) + "=" + print_term(at(s.pattern, c.column));
      break;
    }
    case Kind::Join:
      if (n.children.empty()) {
        line = "Unit";
      } else {
        line = n.cross ? "CrossJoin" : "Join on " + join_list(n.join_vars);
      }
      break;
    case Kind::LeftJoin:
      line = "LeftJoin on " + (n.join_vars.empty() ? std::string("()") : join_list(n.join_vars));
      if (n.filter) line += " filter (" + print_filter(*n.filter) + ")";
      break;
    case Kind::Union: line = "Union"; break;
    case Kind::Filter: line = "Filter (" + print_filter(*n.filter) + ")"; break;
    case Kind::Distinct: line = "Distinct"; break;
    case Kind::Sort:
      line = "Sort";
      for (const auto& k : n.order) line += k.descending ? " DESC(?" + k.var + ")" : " ?" + k.var;
      break;
    case Kind::Slice:
      line = "Slice offset=" + std::to_string(n.offset) +
             " limit=" + (n.limit ? std::to_string(*n.limit) : std::string("none"));
      break;
    case Kind::Project: line = "Project " + join_list(n.vars); break;
    case Kind::Empty: line = "EmptyResult (sf=0: " + n.empty_cause + ")"; break;
  }
  if (n.join_order.size() > 1) {
    line += "  order=[";
    for (std::size_t i = 0; i < n.join_order.size(); ++i)
      line += (i ? "," : "") + std::string("tp") + std::to_string(n.join_order[i] + 1);
    line += "]";
  }
  out += pad + line + "\n";
  if (n.kind == Kind::Scan && n.scan.candidates.size() > 1) {
    std::string c = pad + "  candidates:";
    for (std::size_t i = 0; i < n.scan.candidates.size(); ++i) {
      const auto& cand = n.scan.candidates[i];
      c += (i ? "; " : " ") + stats_text(cand.stats, dict);
      if (!cand.stats.materialized) c += " (not stored)";
      if (cand.chosen) c += " *";
    }
    out += c + "\n";
  }
  for (const auto& child : n.children) explain_node(child, dict, depth + 1, out);
}

void collect_scans(const PlanNode& n, std::vector<const ScanNode*>& out) {
  if (n.kind == Kind::Scan) out.push_back(&n.scan);
  for (const auto& c : n.children) collect_scans(c, out);
}

}  // namespace

std::string_view to_string(Layout layout) {
  switch (layout) {
    case Layout::TT: return "tt";
    case Layout::VP: return "vp";
    case Layout::ExtVP: return "extvp";
  }
  return "extvp";
}

Layout parse_layout(std::string_view text) {
  if (text == "tt") return Layout::TT;
  if (text == "vp") return Layout::VP;
  if (text == "extvp") return Layout::ExtVP;
  throw ConfigError("unknown layout '" + std::string(text) + "' (expected tt, vp or extvp)");
}

std::vector<std::string> ScanNode::vars() const {
  std::vector<std::string> out;
  for (const auto& p : projections) {
    if (!contains(out, p.var)) out.push_back(p.var);
  }
  return out;
}

std::vector<std::string> PlanNode::schema() const {
  switch (kind) {
    case Kind::Scan: return scan.vars();
    case Kind::Join:
    case Kind::LeftJoin:
    case Kind::Union: {
      std::vector<std::string> out;
      for (const auto& c : children) append_new(out, c.schema());
      return out;
    }
    case Kind::Project:
    case Kind::Empty: return vars;
    default: return children.at(0).schema();
  }
}

TableChoice table_selection(const TriplePattern& tp, std::size_t index, const Bgp& bgp, const Catalog& cat,
                            const Dictionary& dict, Layout layout) {
  TableChoice choice;
  if (layout == Layout::TT || is_var(tp.p)) {
    choice.table = TableKey::tt();
    choice.stats = cat.lookup(choice.table);
    choice.candidates.push_back({choice.stats, true});
    return choice;
  }
  const auto p = predicate_id(tp.p, cat, dict);
  if (!p) {
    choice.table = TableKey::vp(kNoPredicate);
    choice.stats = TableStats{choice.table, 0, Rational{0, 1}, false};
    choice.empty_cause = "VP(" + std::get<Term>(tp.p).lexical + ")";
    return choice;
  }
  choice.table = TableKey::vp(*p);
  choice.stats = cat.lookup(choice.table);
  choice.candidates.push_back({choice.stats, false});
  std::size_t best = 0;

  if (layout == Layout::ExtVP) {
    for (std::size_t j = 0; j < bgp.patterns.size(); ++j) {
      const auto& other = bgp.patterns[j];
      if (j == index || is_var(other.p)) continue;
      const auto p2 = predicate_id(other.p, cat, dict);
      if (!p2) continue;
      const std::pair<TableKind, bool> kinds[] = {
          {TableKind::SS, same_var(tp.s, other.s) && *p != *p2},
          {TableKind::SO, same_var(tp.s, other.o)},
          {TableKind::OS, same_var(tp.o, other.s)},
      };
      for (const auto& [kind, correlated] : kinds) {
        if (!correlated) continue;
        const auto stats = cat.lookup(TableKey::ext(kind, *p, *p2));
        choice.candidates.push_back({stats, false});
        const bool usable = stats.materialized || (stats.sf && stats.sf->is_zero());
        if (usable && sf_of(stats) < sf_of(choice.stats)) {
          choice.table = stats.key;
          choice.stats = stats;
          best = choice.candidates.size() - 1;
        }
      }
    }
  }
  choice.candidates[best].chosen = true;
  if (choice.stats.sf && choice.stats.sf->is_zero()) choice.empty_cause = describe(choice.table, dict);
  return choice;
}

ScanNode tp_to_scan(const TriplePattern& tp, std::size_t index, const TableChoice& choice, const Dictionary& dict) {
  ScanNode s;
  s.table = choice.table;
  s.stats = choice.stats;
  s.pattern_index = index;
  s.pattern = tp;
  s.candidates = choice.candidates;
  const bool tt = choice.table.kind == TableKind::TT;
  const auto add = [&](const PatternTerm& t, Column c) {
    if (is_var(t)) {
      s.projections.push_back({c, var_name(t)});
    } else {
      s.conditions.push_back({c, dict.find(std::get<Term>(t)).value_or(kInvalidId)});
    }
  };
  add(tp.s, Column::S);
  if (tt) add(tp.p, Column::P);
  add(tp.o, Column::O);
  return s;
}

PlanNode compile_bgp_naive(const Bgp& bgp, const Catalog& cat, const Dictionary& dict, Layout layout,
                           const std::vector<FilterExpr>& filters) {
  return compile_bgp(bgp, cat, dict, layout, filters, true);
}

PlanNode compile_bgp_opt(const Bgp& bgp, const Catalog& cat, const Dictionary& dict, Layout layout,
                         const std::vector<FilterExpr>& filters) {
  return compile_bgp(bgp, cat, dict, layout, filters, false);
}

PlanNode compile(const Algebra& query, const Catalog& cat, const Dictionary& dict, const PlanOptions& options) {
  const Compiler c{cat, dict, options};
  return c.run(options.push_filters ? push_filters(query) : query);
}

bool is_empty(const PlanNode& plan) { return plan.kind == Kind::Empty; }

std::vector<const ScanNode*> scans(const PlanNode& plan) {
  std::vector<const ScanNode*> out;
  collect_scans(plan, out);
  return out;
}

std::uint64_t planned_input_tuples(const PlanNode& plan) {
  std::uint64_t total = 0;
  for (const auto* s : scans(plan)) total += s->stats.tuple_count;
  return total;
}

std::string explain(const PlanNode& plan, const Dictionary& dict) {
  if (plan.kind == Kind::Empty) return "EmptyResult (sf=0: " + plan.empty_cause + ")\n";
  std::string out;
  explain_node(plan, dict, 0, out);
  out += "scans=" + std::to_string(scans(plan).size()) + " input_tuples=" + std::to_string(planned_input_tuples(plan)) +
         "\n";
  return out;
}

}  // namespace extvp
