#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "extvp/rdf.hpp"

namespace extvp {

struct Variable {
  std::string name;  // without the leading '?'
  friend bool operator==(const Variable&, const Variable&) = default;
};

using PatternTerm = std::variant<Variable, Term>;

inline bool is_var(const PatternTerm& t) { return std::holds_alternative<Variable>(t); }
inline const std::string& var_name(const PatternTerm& t) { return std::get<Variable>(t).name; }

struct TriplePattern {
  PatternTerm s;
  PatternTerm p;
  PatternTerm o;

  int bound_count() const { return !is_var(s) + !is_var(p) + !is_var(o); }
  // Variables in s, p, o order without repetition.
  std::vector<std::string> vars() const;

  friend bool operator==(const TriplePattern&, const TriplePattern&) = default;
};

struct Bgp {
  std::vector<TriplePattern> patterns;
  std::vector<std::string> vars() const;
  friend bool operator==(const Bgp&, const Bgp&) = default;
};

enum class CompareOp : std::uint8_t { Eq, Ne, Lt, Le, Gt, Ge };

struct FilterExpr {
  enum class Kind : std::uint8_t { And, Or, Not, Compare, Bound, Const };

  Kind kind = Kind::Const;
  CompareOp op = CompareOp::Eq;
  std::vector<FilterExpr> children;  // And/Or: 2, Not: 1
  std::vector<PatternTerm> operands;  // Compare: 2, Bound: 1 variable
  bool value = true;                  // Const

  static FilterExpr make_and(FilterExpr a, FilterExpr b);
  static FilterExpr make_or(FilterExpr a, FilterExpr b);
  static FilterExpr make_not(FilterExpr a);
  static FilterExpr compare(CompareOp op, PatternTerm lhs, PatternTerm rhs);
  static FilterExpr bound(std::string var);
  static FilterExpr constant(bool v);

  std::set<std::string> vars() const;
  // Top-level conjuncts; `a && (b && c)` yields three.
  std::vector<FilterExpr> conjuncts() const;

  friend bool operator==(const FilterExpr&, const FilterExpr&) = default;
};

struct OrderKey {
  std::string var;
  bool descending = false;
  friend bool operator==(const OrderKey&, const OrderKey&) = default;
};

// SPARQL algebra. Solution modifiers sit above Project in the order
// Slice(Distinct(Project(OrderBy(pattern)))).
struct Algebra {
  enum class Kind : std::uint8_t { Bgp, Join, LeftJoin, Union, Filter, Distinct, OrderBy, Slice, Project };

  Kind kind = Kind::Bgp;
  Bgp bgp;
  std::vector<Algebra> children;
  std::optional<FilterExpr> filter;  // Filter condition, or LeftJoin's optional-side filter
  std::vector<std::string> vars;     // Project
  std::vector<OrderKey> order;       // OrderBy
  std::uint64_t offset = 0;          // Slice
  std::optional<std::uint64_t> limit;

  static Algebra make_bgp(Bgp bgp);
  static Algebra join(Algebra l, Algebra r);
  static Algebra left_join(Algebra l, Algebra r, std::optional<FilterExpr> f);
  static Algebra make_union(Algebra l, Algebra r);
  static Algebra make_filter(FilterExpr f, Algebra child);
  static Algebra distinct(Algebra child);
  static Algebra order_by(std::vector<OrderKey> keys, Algebra child);
  static Algebra slice(std::uint64_t offset, std::optional<std::uint64_t> limit, Algebra child);
  static Algebra project(std::vector<std::string> vars, Algebra child);

  const Algebra& child() const { return children.at(0); }

  friend bool operator==(const Algebra&, const Algebra&) = default;
};

// Variables that may be bound, in first-appearance order.
std::vector<std::string> in_scope_vars(const Algebra& a);
// Variables bound in every solution of `a`.
std::set<std::string> certain_vars(const Algebra& a);

// Parses a SELECT query in the supported SPARQL 1.0 subset. Throws
// QuerySyntaxError or UnsupportedQueryError.
Algebra parse_query(std::string_view text);

// Moves each filter conjunct to the lowest node that binds all its variables.
Algebra push_filters(const Algebra& a);

// Renders the algebra back to SPARQL text with full IRIs.
std::string print_query(const Algebra& a);
std::string print_filter(const FilterExpr& f);
std::string print_term(const PatternTerm& t);

}  // namespace extvp
