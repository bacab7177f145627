#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "extvp/sparql.hpp"
#include "extvp/storage.hpp"

namespace extvp {

// Candidate universe for table selection.
enum class Layout : std::uint8_t { TT, VP, ExtVP };

std::string_view to_string(Layout layout);
Layout parse_layout(std::string_view text);

struct PlanOptions {
  Layout layout = Layout::ExtVP;
  bool naive_order = false;
  bool push_filters = true;
};

enum class Column : std::uint8_t { S, P, O };

struct Projection {
  Column column = Column::S;
  std::string var;
  friend bool operator==(const Projection&, const Projection&) = default;
};

// column = value. kInvalidId stands for a term absent from the dictionary,
// which no row can match.
struct Condition {
  Column column = Column::S;
  TermId value = kInvalidId;
  friend bool operator==(const Condition&, const Condition&) = default;
};

struct Candidate {
  TableStats stats;
  bool chosen = false;
};

struct TableChoice {
  TableKey table;
  TableStats stats;
  std::vector<Candidate> candidates;  // enumeration order, base table first
  // Set when the pattern provably has no solutions.
  std::optional<std::string> empty_cause;
};

struct ScanNode {
  TableKey table;
  TableStats stats;
  std::size_t pattern_index = 0;  // position in the source BGP
  TriplePattern pattern;
  std::vector<Projection> projections;
  std::vector<Condition> conditions;
  std::vector<Candidate> candidates;

  // Distinct variables bound by the scan, in projection order.
  std::vector<std::string> vars() const;
};

struct PlanNode {
  enum class Kind : std::uint8_t { Scan, Join, LeftJoin, Union, Filter, Distinct, Sort, Slice, Project, Empty };

  Kind kind = Kind::Empty;
  ScanNode scan;
  std::vector<PlanNode> children;
  std::vector<std::string> join_vars;  // Join / LeftJoin
  bool cross = false;                  // Join with no shared variable
  std::optional<FilterExpr> filter;    // Filter, or LeftJoin's optional-side filter
  std::vector<std::string> vars;       // Project list, or Empty schema
  std::vector<OrderKey> order;         // Sort
  std::uint64_t offset = 0;            // Slice
  std::optional<std::uint64_t> limit;
  std::string empty_cause;             // Empty
  std::vector<std::size_t> join_order;  // root of a compiled BGP: pattern indices

  // Output variables in column order.
  std::vector<std::string> schema() const;
};

TableChoice table_selection(const TriplePattern& tp, std::size_t index, const Bgp& bgp, const Catalog& cat,
                            const Dictionary& dict, Layout layout = Layout::ExtVP);

ScanNode tp_to_scan(const TriplePattern& tp, std::size_t index, const TableChoice& choice, const Dictionary& dict);

// Filters are attached right after the join step that binds all their
// variables; leftovers go on top.
PlanNode compile_bgp_naive(const Bgp& bgp, const Catalog& cat, const Dictionary& dict, Layout layout = Layout::ExtVP,
                           const std::vector<FilterExpr>& filters = {});
PlanNode compile_bgp_opt(const Bgp& bgp, const Catalog& cat, const Dictionary& dict, Layout layout = Layout::ExtVP,
                         const std::vector<FilterExpr>& filters = {});

PlanNode compile(const Algebra& query, const Catalog& cat, const Dictionary& dict, const PlanOptions& options = {});

bool is_empty(const PlanNode& plan);

// Scans in evaluation order.
std::vector<const ScanNode*> scans(const PlanNode& plan);
// Sum of tuple counts of the scanned tables.
std::uint64_t planned_input_tuples(const PlanNode& plan);

std::string explain(const PlanNode& plan, const Dictionary& dict);

}  // namespace extvp
