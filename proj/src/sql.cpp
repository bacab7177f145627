#include "extvp/sql.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>

#include "extvp/error.hpp"

namespace extvp {

namespace {

using Kind = PlanNode::Kind;

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string quote_literal(const Term& t) {
  std::string out = "'";
  for (char c : t.to_ntriples()) {
    out += c;
    if (c == '\'') out += '\'';
  }
  return out + "'";
}

const char* column_name(Column c) { return c == Column::S ? "s" : c == Column::P ? "p" : "o"; }

const char* op_sql(CompareOp op) {
  switch (op) {
    case CompareOp::Eq: return "=";
    case CompareOp::Ne: return "<>";
    case CompareOp::Lt: return "<";
    case CompareOp::Le: return "<=";
    case CompareOp::Gt: return ">";
    case CompareOp::Ge: return ">=";
  }
  return "=";
}

bool contains(const std::vector<std::string>& v, const std::string& x) {
  return std::find(v.begin(), v.end(), x) != v.end();
}

template <typename Qualify>
std::string filter_sql(const FilterExpr& e, const Qualify& q) {
  using K = FilterExpr::Kind;
  const auto term = [&](const PatternTerm& t) {
    return is_var(t) ? q(var_name(t)) : quote_literal(std::get<Term>(t));
  };
  switch (e.kind) {
    case K::And: return "(" + filter_sql(e.children[0], q) + " AND " + filter_sql(e.children[1], q) + ")";
    case K::Or: return "(" + filter_sql(e.children[0], q) + " OR " + filter_sql(e.children[1], q) + ")";
    case K::Not: return "NOT " + filter_sql(e.children[0], q);
    case K::Compare: return term(e.operands[0]) + " " + op_sql(e.op) + " " + term(e.operands[1]);
    case K::Bound: return q(var_name(e.operands[0])) + " IS NOT NULL";
    case K::Const: return e.value ? "1=1" : "1=0";
  }
  return "1=1";
}

struct Modifiers {
  bool distinct = false;
  std::optional<std::vector<std::string>> project;
  std::vector<OrderKey> order;
  std::uint64_t offset = 0;
  std::optional<std::uint64_t> limit;
};

class Emitter {
 public:
  Emitter(const Catalog& cat, const Dictionary& dict) : namer_(cat, dict) {}

  std::string render(const PlanNode& n) {
    Modifiers mods;
    const PlanNode* body = &n;
    for (;;) {
      if (body->kind == Kind::Slice) {
        mods.offset = body->offset;
        mods.limit = body->limit;
      } else if (body->kind == Kind::Distinct) {
        mods.distinct = true;
      } else if (body->kind == Kind::Project) {
        if (!mods.project) mods.project = body->vars;
      } else if (body->kind == Kind::Sort) {
        mods.order = body->order;
      } else {
        break;
      }
      body = &body->children[0];
    }
    const auto out_vars = mods.project ? *mods.project : body->schema();
    std::string sql;
    if (body->kind == Kind::Empty) {
      sql = "-- empty result (SF=0)\nSELECT " + null_list(out_vars) + " WHERE 1=0";
      return sql;
    }
    if (is_chain(*body)) {
      sql = chain(*body, out_vars, mods.distinct);
    } else {
      const auto inner = generic(*body);
      if (!mods.project && !mods.distinct && mods.order.empty() && !mods.limit && mods.offset == 0) return inner;
      const std::string alias = next_alias("q");
      sql = std::string("SELECT ") + (mods.distinct ? "DISTINCT " : "") +
            select_list(out_vars, [&](const std::string& v) -> std::optional<std::string> {
              if (!contains(body->schema(), v)) return std::nullopt;
              return alias + "." + v;
            }) +
            "\nFROM (" + inner + ") " + alias;
    }
    if (!mods.order.empty()) {
      sql += "\nORDER BY ";
      for (std::size_t i = 0; i < mods.order.size(); ++i)
        sql += (i ? ", " : "") + mods.order[i].var + (mods.order[i].descending ? " DESC" : " ASC");
    }
    if (mods.limit) sql += "\nLIMIT " + std::to_string(*mods.limit);
    if (mods.offset) sql += "\nOFFSET " + std::to_string(mods.offset);
    return sql;
  }

 private:
  struct Item {
    std::string alias;
    std::string from;
    std::vector<std::string> vars;
    bool cross = false;
  };

  static bool is_chain(const PlanNode& n) {
    switch (n.kind) {
      case Kind::Scan: return true;
      case Kind::Filter: return is_chain(n.children[0]);
      case Kind::Join: return !n.children.empty() && is_chain(n.children[0]);
      default: return false;
    }
  }

  std::string next_alias(const char* prefix) { return prefix + std::to_string(++alias_counter_); }

  static std::string null_list(const std::vector<std::string>& vars) {
    if (vars.empty()) return "1 AS unit";
    std::string out;
    for (std::size_t i = 0; i < vars.size(); ++i) out += (i ? ", " : "") + std::string("NULL AS ") + vars[i];
    return out;
  }

  template <typename Source>
  static std::string select_list(const std::vector<std::string>& vars, const Source& source) {
    if (vars.empty()) return "1 AS unit";
    std::string out;
    for (std::size_t i = 0; i < vars.size(); ++i) {
      const auto src = source(vars[i]);
      out += (i ? ", " : "") + (src ? *src : std::string("NULL")) + " AS " + vars[i];
    }
    return out;
  }

  std::string scan_sql(const ScanNode& s) const {
    std::vector<std::string> where;
    std::vector<std::pair<std::string, std::string>> cols;  // var, column
    for (const auto& p : s.projections) {
      const auto it = std::find_if(cols.begin(), cols.end(), [&](const auto& c) { return c.first == p.var; });
      if (it != cols.end()) {
        where.push_back(it->second + " = " + column_name(p.column));
      } else {
        cols.emplace_back(p.var, column_name(p.column));
      }
    }
    const PatternTerm* positions[] = {&s.pattern.s, &s.pattern.p, &s.pattern.o};
    for (const auto& c : s.conditions) {
      where.push_back(std::string(column_name(c.column)) + " = " +
                      quote_literal(std::get<Term>(*positions[static_cast<int>(c.column)])));
    }
    std::string out = "SELECT ";
    if (cols.empty()) out += "1 AS unit";
    for (std::size_t i = 0; i < cols.size(); ++i) out += (i ? ", " : "") + cols[i].second + " AS " + cols[i].first;
    out += " FROM " + namer_.table(s.table);
    for (std::size_t i = 0; i < where.size(); ++i) out += (i ? " AND " : " WHERE ") + where[i];
    return out;
  }

  void flatten(const PlanNode& n, std::vector<Item>& items, std::vector<const FilterExpr*>& filters) {
    switch (n.kind) {
      case Kind::Scan:
        items.push_back({"tp" + std::to_string(n.scan.pattern_index + 1), "(" + scan_sql(n.scan) + ")", n.scan.vars()});
        return;
      case Kind::Filter:
        flatten(n.children[0], items, filters);
        filters.push_back(&*n.filter);
        return;
      case Kind::Join: {
        flatten(n.children[0], items, filters);
        const auto& r = n.children[1];
        if (r.kind == Kind::Scan) {
          flatten(r, items, filters);
        } else {
          items.push_back({next_alias("q"), "(" + render(r) + ")", r.schema()});
        }
        items.back().cross = n.cross;
        return;
      }
      default: throw Error("not a join chain");
    }
  }

  std::string chain(const PlanNode& n, const std::vector<std::string>& out_vars, bool distinct) {
    std::vector<Item> items;
    std::vector<const FilterExpr*> filters;
    flatten(n, items, filters);
    const auto provider = [&](const std::string& v) -> std::optional<std::string> {
      for (const auto& it : items) {
        if (contains(it.vars, v)) return it.alias + "." + v;
      }
      return std::nullopt;
    };
    std::string sql = std::string("SELECT ") + (distinct ? "DISTINCT " : "") + select_list(out_vars, provider);
    sql += "\nFROM " + items[0].from + " " + items[0].alias;
    for (std::size_t i = 1; i < items.size(); ++i) {
      const auto& it = items[i];
      std::vector<std::string> eqs;
      for (const auto& v : it.vars) {
        for (std::size_t j = 0; j < i; ++j) {
          if (contains(items[j].vars, v)) {
            eqs.push_back(items[j].alias + "." + v + " = " + it.alias + "." + v);
            break;
          }
        }
      }
      if (eqs.empty()) {
        sql += "\n  CROSS JOIN " + it.from + " " + it.alias;
        continue;
      }
      sql += "\n  JOIN " + it.from + " " + it.alias + " ON (";
      for (std::size_t e = 0; e < eqs.size(); ++e) sql += (e ? " AND " : "") + eqs[e];
      sql += ")";
    }
    const auto qualify = [&](const std::string& v) { return provider(v).value_or("NULL"); };
    for (std::size_t f = 0; f < filters.size(); ++f) sql += (f ? "\n  AND " : "\nWHERE ") + filter_sql(*filters[f], qualify);
    return sql;
  }

  std::string generic(const PlanNode& n) {
    switch (n.kind) {
      case Kind::Empty: return "-- empty result (SF=0)\nSELECT " + null_list(n.vars) + " WHERE 1=0";
      case Kind::Join:
        if (n.children.empty()) return "SELECT 1 AS unit";
        break;
      case Kind::LeftJoin: {
        const auto& l = n.children[0];
        const auto& r = n.children[1];
        const auto la = next_alias("l");
        const auto ra = next_alias("r");
        const auto ls = l.schema();
        const auto qualify = [&](const std::string& v) { return (contains(ls, v) ? la : ra) + "." + v; };
        std::string sql = "SELECT " + select_list(n.schema(), [&](const std::string& v) -> std::optional<std::string> {
                            return qualify(v);
                          });
        sql += "\nFROM (" + render(l) + ") " + la + "\n  LEFT OUTER JOIN (" + render(r) + ") " + ra + " ON (";
        std::vector<std::string> conds;
        for (const auto& v : n.join_vars) conds.push_back(la + "." + v + " = " + ra + "." + v);
        if (n.filter) conds.push_back(filter_sql(*n.filter, qualify));
        if (conds.empty()) conds.push_back("1=1");
        for (std::size_t i = 0; i < conds.size(); ++i) sql += (i ? " AND " : "") + conds[i];
        return sql + ")";
      }
      case Kind::Union: {
        const auto schema = n.schema();
        std::string sql;
        for (std::size_t i = 0; i < 2; ++i) {
          const auto& c = n.children[i];
          const auto alias = next_alias("u");
          const auto cs = c.schema();
          if (i) sql += "\nUNION ALL\n";
          sql += "SELECT " + select_list(schema, [&](const std::string& v) -> std::optional<std::string> {
                   if (!contains(cs, v)) return std::nullopt;
                   return alias + "." + v;
                 });
          sql += " FROM (" + render(c) + ") " + alias;
        }
        return sql;
      }
      case Kind::Filter: {
        const auto alias = next_alias("f");
        const auto qualify = [&](const std::string& v) { return alias + "." + v; };
        return "SELECT * FROM (" + render(n.children[0]) + ") " + alias + " WHERE " + filter_sql(*n.filter, qualify);
      }
      default: break;
    }
    // A join whose left side is not a plain chain.
    const auto la = next_alias("j");
    const auto ra = next_alias("j");
    const auto ls = n.children[0].schema();
    std::string sql = "SELECT " + select_list(n.schema(), [&](const std::string& v) -> std::optional<std::string> {
                        return (contains(ls, v) ? la : ra) + "." + v;
                      });
    sql += "\nFROM (" + render(n.children[0]) + ") " + la;
    if (n.join_vars.empty()) return sql + "\n  CROSS JOIN (" + render(n.children[1]) + ") " + ra;
    sql += "\n  JOIN (" + render(n.children[1]) + ") " + ra + " ON (";
    for (std::size_t i = 0; i < n.join_vars.size(); ++i)
      sql += (i ? " AND " : "") + la + "." + n.join_vars[i] + " = " + ra + "." + n.join_vars[i];
    return sql + ")";
  }

  SqlNamer namer_;
  int alias_counter_ = 0;
};

}  // namespace

std::string local_name(std::string_view iri) {
  const auto cut = iri.find_last_of("/#");
  if (cut == std::string_view::npos || cut + 1 == iri.size()) return std::string(iri);
  return std::string(iri.substr(cut + 1));
}

std::string percent_encode(std::string_view s) {
  std::string out;
  for (unsigned char c : s) {
    if (std::isalnum(c)) {
      out += static_cast<char>(c);
    } else {
      char buf[4];
      std::snprintf(buf, sizeof buf, "%%%02X", c);
      out += buf;
    }
  }
  return out;
}

SqlNamer::SqlNamer(const Catalog& cat, const Dictionary& dict) : dict_(dict) {
  std::map<std::string, int> uses;
  for (TermId p : cat.predicates()) ++uses[local_name(dict.decode(p).lexical)];
  for (TermId p : cat.predicates()) {
    const auto& iri = dict.decode(p).lexical;
    const auto local = local_name(iri);
    std::string name = percent_encode(local);
    if (uses[local] > 1) {
      char buf[24];
      std::snprintf(buf, sizeof buf, "_h%016llx", static_cast<unsigned long long>(fnv1a(iri)));
      name += buf;
    }
    names_.emplace(p, std::move(name));
  }
}

std::string SqlNamer::predicate(TermId p) const {
  if (const auto it = names_.find(p); it != names_.end()) return it->second;
  if (p < dict_.size()) return percent_encode(local_name(dict_.decode(p).lexical));
  return "p" + std::to_string(p);
}

std::string SqlNamer::table(const TableKey& key) const {
  std::string name(to_string(key.kind));
  if (key.kind == TableKind::TT) return name;
  name += "_" + predicate(key.p1);
  if (key.is_extvp()) name += "__" + predicate(key.p2);
  if (name.find('%') != std::string::npos) return "\"" + name + "\"";
  return name;
}

std::string emit_sql(const PlanNode& plan, const Catalog& cat, const Dictionary& dict) {
  Emitter e(cat, dict);
  return e.render(plan) + ";\n";
}

}  // namespace extvp
