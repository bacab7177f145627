#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "extvp/planner.hpp"
#include "extvp/rdf.hpp"
#include "extvp/sparql.hpp"
#include "extvp/storage.hpp"

namespace extvp {

// Bag of solution mappings stored row-major; kInvalidId marks an unbound cell.
class MappingBag {
 public:
  MappingBag() = default;
  explicit MappingBag(std::vector<std::string> schema) : schema_(std::move(schema)) {}
  // The bag holding only the empty mapping.
  static MappingBag unit();

  const std::vector<std::string>& schema() const noexcept { return schema_; }
  std::size_t width() const noexcept { return schema_.size(); }
  std::size_t size() const noexcept { return width() == 0 ? unit_rows_ : cells_.size() / width(); }
  bool empty() const noexcept { return size() == 0; }

  // Column index of `var`, or -1.
  int column(std::string_view var) const;

  std::span<const TermId> row(std::size_t i) const { return {cells_.data() + i * width(), width()}; }
  void add_row(std::span<const TermId> values);
  void pop_row();
  void reserve(std::size_t rows) { cells_.reserve(rows * width()); }

 private:
  std::vector<std::string> schema_;
  std::vector<TermId> cells_;
  std::size_t unit_rows_ = 0;  // row count when the schema is empty
};

struct ExecStats {
  std::uint64_t scans = 0;
  std::uint64_t input_tuples = 0;  // table rows read by scans
};

MappingBag eval_scan(const ScanNode& node, const Store& store, ExecStats* stats = nullptr);

MappingBag join_compatible(const MappingBag& l, const MappingBag& r);
MappingBag left_join(const MappingBag& l, const MappingBag& r, const FilterExpr* filter, const Dictionary& dict);
MappingBag filter_bag(const MappingBag& in, const FilterExpr& expr, const Dictionary& dict);
MappingBag distinct(const MappingBag& in);
MappingBag sort_bag(const MappingBag& in, const std::vector<OrderKey>& keys, const Dictionary& dict);
MappingBag slice(const MappingBag& in, std::uint64_t offset, std::optional<std::uint64_t> limit);
MappingBag project(const MappingBag& in, const std::vector<std::string>& vars);
MappingBag union_bags(const MappingBag& l, const MappingBag& r);

MappingBag evaluate(const PlanNode& plan, const Store& store, ExecStats* stats = nullptr);

// Three-valued filter result.
enum class Truth : std::uint8_t { False, True, Error };
Truth eval_filter(const FilterExpr& e, const MappingBag& bag, std::size_t row, const Dictionary& dict);

// <0, 0, >0 under the comparison rule used by FILTER and ORDER BY: integer
// literals numerically, everything else by value bytes then lexical form.
int compare_terms(const Term& a, const Term& b);

// Nested-loop evaluation straight from the definitions. Exponential in the
// number of patterns; test oracle only.
MappingBag brute_force_bgp(const Bgp& bgp, const Graph& g);

// Mappings as sorted rows aligned by variable name.
bool bag_equal(const MappingBag& a, const MappingBag& b);

// Header line of ?vars, then one line per row of N-Triples terms; unbound is empty.
void write_tsv(const MappingBag& bag, const Dictionary& dict, std::ostream& out);

}  // namespace extvp
