#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "extvp/rational.hpp"
#include "extvp/rdf.hpp"

namespace extvp {

// Numeric values are the on-disk kind byte.
enum class TableKind : std::uint8_t { TT = 0, VP = 1, SS = 2, OS = 3, SO = 4 };

std::string_view to_string(TableKind kind);

inline constexpr TermId kNoPredicate = kInvalidId;

struct TableKey {
  TableKind kind = TableKind::TT;
  TermId p1 = kNoPredicate;
  TermId p2 = kNoPredicate;

  static TableKey tt() { return {}; }
  static TableKey vp(TermId p) { return {TableKind::VP, p, kNoPredicate}; }
  static TableKey ext(TableKind kind, TermId p1, TermId p2) { return {kind, p1, p2}; }

  bool is_extvp() const noexcept {
    return kind == TableKind::SS || kind == TableKind::OS || kind == TableKind::SO;
  }
  // VP(p1) for any VP/ExtVP key.
  TableKey base() const { return vp(p1); }

  friend auto operator<=>(const TableKey&, const TableKey&) = default;
};

// "OS(follows,likes)" style rendering with predicate IRIs.
std::string describe(const TableKey& key, const Dictionary& dict);

struct Row {
  TermId s = 0;
  TermId o = 0;
  friend auto operator<=>(const Row&, const Row&) = default;
};

// Sorted, duplicate-free (s,o) pairs.
class TwoColumnTable {
 public:
  TwoColumnTable() = default;
  static TwoColumnTable from_unsorted(std::vector<Row> rows);
  // Caller guarantees `rows` is strictly ascending.
  static TwoColumnTable from_sorted(std::vector<Row> rows);

  std::span<const Row> rows() const noexcept { return rows_; }
  std::size_t size() const noexcept { return rows_.size(); }
  bool empty() const noexcept { return rows_.empty(); }

  friend bool operator==(const TwoColumnTable&, const TwoColumnTable&) = default;

 private:
  std::vector<Row> rows_;
};

struct TableStats {
  TableKey key;
  std::uint64_t tuple_count = 0;
  std::optional<Rational> sf;  // unset for TT
  bool materialized = false;

  friend bool operator==(const TableStats&, const TableStats&) = default;
};

class Catalog {
 public:
  Catalog() = default;

  // Recorded entry, or a synthetic one for a never-computed ExtVP pair
  // (sf=1, not materialized). Throws LookupError for predicates outside the graph.
  TableStats lookup(const TableKey& key) const;
  const TableStats* find(const TableKey& key) const;
  void record(const TableStats& stats);
  void erase_extvp();

  const std::map<TableKey, TableStats>& entries() const noexcept { return stats_; }
  bool has_predicate(TermId p) const;
  const std::vector<TermId>& predicates() const noexcept { return predicates_; }
  void set_predicates(std::vector<TermId> predicates);

  std::uint64_t n = 0;
  Rational threshold{1, 1};
  bool extvp_built = false;
  std::string build_timestamp;

  std::uint64_t k() const noexcept { return predicates_.size(); }

 private:
  std::map<TableKey, TableStats> stats_;
  std::vector<TermId> predicates_;  // ascending
};

struct VerifyIssue {
  std::string message;
};

// Directory-backed database: dictionary, triples table, VP/ExtVP table files,
// stats manifest and build metadata. Table reads are cached and thread-safe;
// writers must hold the store lock (see StoreLock).
class Store {
 public:
  // Creates a fresh store at `root`, removing any previous store content.
  static Store create(const std::filesystem::path& root);
  // Opens an existing store; throws StoreError if none exists.
  static Store open(const std::filesystem::path& root);

  Store(Store&&) noexcept;
  Store& operator=(Store&&) noexcept;
  ~Store();

  const std::filesystem::path& root() const noexcept { return root_; }
  Dictionary& dict() noexcept { return dict_; }
  const Dictionary& dict() const noexcept { return dict_; }
  Catalog& catalog() noexcept { return catalog_; }
  const Catalog& catalog() const noexcept { return catalog_; }

  void write_triples(std::span<const Triple> sorted_triples);
  std::shared_ptr<const std::vector<Triple>> read_triples() const;

  // Writes a VP or ExtVP table and records its stats. Empty tables are only
  // recorded. Throws StoreError if the key is already materialized.
  void write_table(const TableKey& key, const TwoColumnTable& table);
  std::shared_ptr<const TwoColumnTable> read_table(const TableKey& key) const;
  void remove_table_file(const TableKey& key);

  // Persists dictionary, manifest and metadata.
  void save() const;
  void save_catalog() const;
  void drop_cache() const;

  std::vector<VerifyIssue> verify() const;

  std::filesystem::path table_path(const TableKey& key) const;

 private:
  explicit Store(std::filesystem::path root);
  void load();

  std::filesystem::path root_;
  Dictionary dict_;
  Catalog catalog_;
  mutable std::mutex cache_mutex_;
  mutable std::map<TableKey, std::shared_ptr<const TwoColumnTable>> cache_;
  mutable std::shared_ptr<const std::vector<Triple>> triples_cache_;
};

// Exclusive writer lock held through a LOCK file in the store directory.
class StoreLock {
 public:
  explicit StoreLock(const std::filesystem::path& root);
  StoreLock(const StoreLock&) = delete;
  StoreLock& operator=(const StoreLock&) = delete;
  ~StoreLock();

 private:
  std::filesystem::path path_;
};

// Backslash escaping for tab, newline, carriage return and backslash.
std::string escape_field(std::string_view s);
std::string unescape_field(std::string_view s);

}  // namespace extvp
