#include <algorithm>

#include "extvp/sparql.hpp"

namespace extvp {

namespace {

void add_unique(std::vector<std::string>& out, const std::string& v) {
  if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
}

void scope_walk(const Algebra& a, std::vector<std::string>& out) {
  if (a.kind == Algebra::Kind::Bgp) {
    for (auto& v : a.bgp.vars()) add_unique(out, v);
    return;
  }
  if (a.kind == Algebra::Kind::Project) {
    for (auto& v : a.vars) add_unique(out, v);
    return;
  }
  for (const auto& c : a.children) scope_walk(c, out);
}

void flatten_conjuncts(const FilterExpr& e, std::vector<FilterExpr>& out) {
  if (e.kind == FilterExpr::Kind::And) {
    for (const auto& c : e.children) flatten_conjuncts(c, out);
  } else {
    out.push_back(e);
  }
}

bool subset(const std::set<std::string>& a, const std::set<std::string>& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

// Places one conjunct as deep as its variables allow.
Algebra place(const FilterExpr& c, Algebra node) {
  using K = Algebra::Kind;
  const auto cv = c.vars();
  switch (node.kind) {
    case K::Join:
      for (auto& side : node.children) {
        if (subset(cv, certain_vars(side))) {
          side = place(c, std::move(side));
          return node;
        }
      }
      break;
    case K::LeftJoin:
      if (subset(cv, certain_vars(node.children[0]))) {
        node.children[0] = place(c, std::move(node.children[0]));
        return node;
      }
      break;
    case K::Union:
      for (auto& side : node.children) side = place(c, std::move(side));
      return node;
    case K::Filter:
      if (subset(cv, certain_vars(node.children[0]))) {
        node.children[0] = place(c, std::move(node.children[0]));
        return node;
      }
      break;
    default: break;
  }
  return Algebra::make_filter(c, std::move(node));
}

const char* op_text(CompareOp op) {
  switch (op) {
    case CompareOp::Eq: return "=";
    case CompareOp::Ne: return "!=";
    case CompareOp::Lt: return "<";
    case CompareOp::Le: return "<=";
    case CompareOp::Gt: return ">";
    case CompareOp::Ge: return ">=";
  }
  return "=";
}

void print_pattern(const Algebra& a, std::string& out, int depth);

std::string indent(int depth) { return std::string(static_cast<std::size_t>(depth) * 2, ' '); }

void print_group(const Algebra& a, std::string& out, int depth) {
  out += "{\n";
  print_pattern(a, out, depth + 1);
  out += indent(depth) + "}";
}

void print_pattern(const Algebra& a, std::string& out, int depth) {
  using K = Algebra::Kind;
  switch (a.kind) {
    case K::Bgp:
      for (const auto& tp : a.bgp.patterns)
        out += indent(depth) + print_term(tp.s) + " " + print_term(tp.p) + " " + print_term(tp.o) + " .\n";
      return;
    case K::Join:
      if (a.children[0].kind == K::Filter) {
        out += indent(depth);
        print_group(a.children[0], out, depth);
        out += "\n";
      } else {
        print_pattern(a.children[0], out, depth);
      }
      if (a.children[1].kind == K::Union) {
        print_pattern(a.children[1], out, depth);
      } else {
        out += indent(depth);
        print_group(a.children[1], out, depth);
        out += "\n";
      }
      return;
    case K::LeftJoin:
      if (a.children[0].kind == K::Filter) {
        out += indent(depth);
        print_group(a.children[0], out, depth);
        out += "\n";
      } else {
        print_pattern(a.children[0], out, depth);
      }
      out += indent(depth) + "OPTIONAL {\n";
      if (a.children[1].kind == K::Filter) {
        out += indent(depth + 1);
        print_group(a.children[1], out, depth + 1);
        out += "\n";
      } else {
        print_pattern(a.children[1], out, depth + 1);
      }
      if (a.filter) out += indent(depth + 1) + "FILTER (" + print_filter(*a.filter) + ")\n";
      out += indent(depth) + "}\n";
      return;
    case K::Union:
      out += indent(depth);
      print_group(a.children[0], out, depth);
      out += " UNION ";
      print_group(a.children[1], out, depth);
      out += "\n";
      return;
    case K::Filter:
      print_pattern(a.children[0], out, depth);
      out += indent(depth) + "FILTER (" + print_filter(*a.filter) + ")\n";
      return;
    default:
      out += indent(depth) + "# unsupported nested modifier\n";
  }
}

}  // namespace

std::vector<std::string> TriplePattern::vars() const {
  std::vector<std::string> out;
  for (const auto* t : {&s, &p, &o}) {
    if (is_var(*t)) add_unique(out, var_name(*t));
  }
  return out;
}

std::vector<std::string> Bgp::vars() const {
  std::vector<std::string> out;
  for (const auto& tp : patterns) {
    for (auto& v : tp.vars()) add_unique(out, v);
  }
  return out;
}

FilterExpr FilterExpr::make_and(FilterExpr a, FilterExpr b) {
  FilterExpr e;
  e.kind = Kind::And;
  e.children = {std::move(a), std::move(b)};
  return e;
}

FilterExpr FilterExpr::make_or(FilterExpr a, FilterExpr b) {
  FilterExpr e;
  e.kind = Kind::Or;
  e.children = {std::move(a), std::move(b)};
  return e;
}

FilterExpr FilterExpr::make_not(FilterExpr a) {
  FilterExpr e;
  e.kind = Kind::Not;
  e.children = {std::move(a)};
  return e;
}

FilterExpr FilterExpr::compare(CompareOp op, PatternTerm lhs, PatternTerm rhs) {
  FilterExpr e;
  e.kind = Kind::Compare;
  e.op = op;
  e.operands = {std::move(lhs), std::move(rhs)};
  return e;
}

FilterExpr FilterExpr::bound(std::string var) {
  FilterExpr e;
  e.kind = Kind::Bound;
  e.operands = {Variable{std::move(var)}};
  return e;
}

FilterExpr FilterExpr::constant(bool v) {
  FilterExpr e;
  e.kind = Kind::Const;
  e.value = v;
  return e;
}

std::set<std::string> FilterExpr::vars() const {
  std::set<std::string> out;
  for (const auto& t : operands) {
    if (is_var(t)) out.insert(var_name(t));
  }
  for (const auto& c : children) out.merge(c.vars());
  return out;
}

std::vector<FilterExpr> FilterExpr::conjuncts() const {
  std::vector<FilterExpr> out;
  flatten_conjuncts(*this, out);
  return out;
}

Algebra Algebra::make_bgp(Bgp bgp) {
  Algebra a;
  a.kind = Kind::Bgp;
  a.bgp = std::move(bgp);
  return a;
}

Algebra Algebra::join(Algebra l, Algebra r) {
  Algebra a;
  a.kind = Kind::Join;
  a.children = {std::move(l), std::move(r)};
  return a;
}

Algebra Algebra::left_join(Algebra l, Algebra r, std::optional<FilterExpr> f) {
  Algebra a;
  a.kind = Kind::LeftJoin;
  a.children = {std::move(l), std::move(r)};
  a.filter = std::move(f);
  return a;
}

Algebra Algebra::make_union(Algebra l, Algebra r) {
  Algebra a;
  a.kind = Kind::Union;
  a.children = {std::move(l), std::move(r)};
  return a;
}

Algebra Algebra::make_filter(FilterExpr f, Algebra child) {
  Algebra a;
  a.kind = Kind::Filter;
  a.filter = std::move(f);
  a.children = {std::move(child)};
  return a;
}

Algebra Algebra::distinct(Algebra child) {
  Algebra a;
  a.kind = Kind::Distinct;
  a.children = {std::move(child)};
  return a;
}

Algebra Algebra::order_by(std::vector<OrderKey> keys, Algebra child) {
  Algebra a;
  a.kind = Kind::OrderBy;
  a.order = std::move(keys);
  a.children = {std::move(child)};
  return a;
}

Algebra Algebra::slice(std::uint64_t offset, std::optional<std::uint64_t> limit, Algebra child) {
  Algebra a;
  a.kind = Kind::Slice;
  a.offset = offset;
  a.limit = limit;
  a.children = {std::move(child)};
  return a;
}

Algebra Algebra::project(std::vector<std::string> vars, Algebra child) {
  Algebra a;
  a.kind = Kind::Project;
  a.vars = std::move(vars);
  a.children = {std::move(child)};
  return a;
}

std::vector<std::string> in_scope_vars(const Algebra& a) {
  std::vector<std::string> out;
  scope_walk(a, out);
  return out;
}

std::set<std::string> certain_vars(const Algebra& a) {
  using K = Algebra::Kind;
  switch (a.kind) {
    case K::Bgp: {
      auto v = a.bgp.vars();
      return {v.begin(), v.end()};
    }
    case K::Join: {
      auto l = certain_vars(a.children[0]);
      l.merge(certain_vars(a.children[1]));
      return l;
    }
    case K::Union: {
      const auto l = certain_vars(a.children[0]);
      const auto r = certain_vars(a.children[1]);
      std::set<std::string> out;
      std::set_intersection(l.begin(), l.end(), r.begin(), r.end(), std::inserter(out, out.end()));
      return out;
    }
    case K::Project: {
      auto inner = certain_vars(a.children[0]);
      std::set<std::string> out;
      for (const auto& v : a.vars) {
        if (inner.contains(v)) out.insert(v);
      }
      return out;
    }
    default: return certain_vars(a.children.at(0));
  }
}

Algebra push_filters(const Algebra& a) {
  Algebra out = a;
  for (auto& c : out.children) c = push_filters(c);
  if (out.kind != Algebra::Kind::Filter) return out;
  Algebra node = std::move(out.children[0]);
  for (const auto& conj : out.filter->conjuncts()) node = place(conj, std::move(node));
  return node;
}

std::string print_term(const PatternTerm& t) {
  if (is_var(t)) {
    const auto& n = var_name(t);
    return n.starts_with("_:") ? n : "?" + n;
  }
  return std::get<Term>(t).to_ntriples();
}

std::string print_filter(const FilterExpr& f) {
  using K = FilterExpr::Kind;
  switch (f.kind) {
    case K::And: return "(" + print_filter(f.children[0]) + " && " + print_filter(f.children[1]) + ")";
    case K::Or: return "(" + print_filter(f.children[0]) + " || " + print_filter(f.children[1]) + ")";
    case K::Not: return "!(" + print_filter(f.children[0]) + ")";
    case K::Compare:
      return print_term(f.operands[0]) + " " + op_text(f.op) + " " + print_term(f.operands[1]);
    case K::Bound: return "BOUND(" + print_term(f.operands[0]) + ")";
    case K::Const: return f.value ? "true" : "false";
  }
  return "true";
}

std::string print_query(const Algebra& a) {
  using K = Algebra::Kind;
  const Algebra* node = &a;
  std::string tail;
  std::optional<std::uint64_t> limit;
  std::uint64_t offset = 0;
  if (node->kind == K::Slice) {
    offset = node->offset;
    limit = node->limit;
    node = &node->child();
  }
  bool distinct = false;
  if (node->kind == K::Distinct) {
    distinct = true;
    node = &node->child();
  }
  std::string out = "SELECT ";
  if (distinct) out += "DISTINCT ";
  if (node->kind == K::Project) {
    for (const auto& v : node->vars) out += "?" + v + " ";
    node = &node->child();
  } else {
    out += "* ";
  }
  if (node->kind == K::OrderBy) {
    tail += "ORDER BY";
    for (const auto& k : node->order) tail += k.descending ? " DESC(?" + k.var + ")" : " ?" + k.var;
    tail += "\n";
    node = &node->child();
  }
  if (limit) tail += "LIMIT " + std::to_string(*limit) + "\n";
  if (offset != 0) tail += "OFFSET " + std::to_string(offset) + "\n";
  out += "WHERE {\n";
  print_pattern(*node, out, 1);
  out += "}\n" + tail;
  return out;
}

}  // namespace extvp
