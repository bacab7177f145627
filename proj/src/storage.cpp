#include "extvp/storage.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include <fcntl.h>
#include <unistd.h>

#include "extvp/error.hpp"

namespace fs = std::filesystem;

namespace extvp {

namespace {

constexpr std::array<char, 4> kMagic{'E', 'V', 'P', '1'};
constexpr std::size_t kHeaderSize = 4 + 1 + 8 + 8 + 8;
constexpr const char* kDictionaryFile = "dictionary.tsv";
constexpr const char* kManifestFile = "manifest.tsv";
constexpr const char* kMetaFile = "meta.tsv";
constexpr const char* kTablesDir = "tables";

void put_u64(std::string& buf, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) buf += static_cast<char>((v >> (8 * i)) & 0xFF);
}

std::uint64_t get_u64(const char* p) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(p[i]);
  return v;
}

std::string header(const TableKey& key, std::uint64_t count) {
  std::string buf(kMagic.begin(), kMagic.end());
  buf += static_cast<char>(key.kind);
  put_u64(buf, key.p1);
  put_u64(buf, key.p2);
  put_u64(buf, count);
  return buf;
}

void write_file(const fs::path& path, const std::string& bytes) {
  const auto tmp = fs::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw StoreError("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw StoreError("I/O failure writing " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StoreError("missing table file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

// Validates the header against `key` and returns the row count.
std::uint64_t check_header(const std::string& bytes, const TableKey& key, std::size_t row_width,
                           const fs::path& path) {
  if (bytes.size() < kHeaderSize || std::memcmp(bytes.data(), kMagic.data(), 4) != 0)
    throw StoreError("format mismatch (bad magic) in " + path.string());
  const auto kind = static_cast<std::uint8_t>(bytes[4]);
  if (kind != static_cast<std::uint8_t>(key.kind) || get_u64(bytes.data() + 5) != key.p1 ||
      get_u64(bytes.data() + 13) != key.p2)
    throw StoreError("format mismatch (key) in " + path.string());
  const auto count = get_u64(bytes.data() + 21);
  if (bytes.size() != kHeaderSize + count * row_width)
    throw StoreError("format mismatch (size) in " + path.string());
  return count;
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    out.push_back(line.substr(start, tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return out;
}

std::string_view kind_name(TermKind k) {
  switch (k) {
    case TermKind::Iri: return "iri";
    case TermKind::Literal: return "literal";
    case TermKind::Blank: return "blank";
  }
  return "iri";
}

TermKind parse_kind(const std::string& s) {
  if (s == "iri") return TermKind::Iri;
  if (s == "literal") return TermKind::Literal;
  if (s == "blank") return TermKind::Blank;
  throw StoreError("bad term kind '" + s + "' in dictionary");
}

TableKind parse_table_kind(const std::string& s) {
  for (auto k : {TableKind::TT, TableKind::VP, TableKind::SS, TableKind::OS, TableKind::SO}) {
    if (to_string(k) == s) return k;
  }
  throw StoreError("bad table kind '" + s + "' in manifest");
}

std::uint64_t parse_u64(const std::string& s) {
  try {
    std::size_t used = 0;
    const auto v = std::stoull(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw StoreError("bad number '" + s + "' in store metadata");
  }
}

std::string now_iso8601() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

std::string_view to_string(TableKind kind) {
  switch (kind) {
    case TableKind::TT: return "TT";
    case TableKind::VP: return "VP";
    case TableKind::SS: return "SS";
    case TableKind::OS: return "OS";
    case TableKind::SO: return "SO";
  }
  return "?";
}

std::string describe(const TableKey& key, const Dictionary& dict) {
  auto name = [&](TermId p) {
    if (p < dict.size()) return dict.decode(p).lexical;
    return std::string("?");
  };
  std::string out(to_string(key.kind));
  if (key.kind == TableKind::TT) return out;
  out += "(" + name(key.p1);
  if (key.is_extvp()) out += "," + name(key.p2);
  return out + ")";
}

std::string escape_field(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\\': out += "\\\\"; break;
      default: out += c;
    }
  }
  return out;
}

std::string unescape_field(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '\\' || i + 1 == s.size()) {
      out += s[i];
      continue;
    }
    switch (s[++i]) {
      case 't': out += '\t'; break;
      case 'n': out += '\n'; break;
      case 'r': out += '\r'; break;
      default: out += s[i];
    }
  }
  return out;
}

TwoColumnTable TwoColumnTable::from_unsorted(std::vector<Row> rows) {
  std::sort(rows.begin(), rows.end());
  rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
  return from_sorted(std::move(rows));
}

TwoColumnTable TwoColumnTable::from_sorted(std::vector<Row> rows) {
  TwoColumnTable t;
  t.rows_ = std::move(rows);
  return t;
}

// ---------------------------------------------------------------------------
// Catalog

bool Catalog::has_predicate(TermId p) const {
  return std::binary_search(predicates_.begin(), predicates_.end(), p);
}

void Catalog::set_predicates(std::vector<TermId> predicates) {
  std::sort(predicates.begin(), predicates.end());
  predicates.erase(std::unique(predicates.begin(), predicates.end()), predicates.end());
  predicates_ = std::move(predicates);
}

const TableStats* Catalog::find(const TableKey& key) const {
  auto it = stats_.find(key);
  return it == stats_.end() ? nullptr : &it->second;
}

TableStats Catalog::lookup(const TableKey& key) const {
  if (key.kind != TableKind::TT) {
    if (!has_predicate(key.p1)) throw LookupError("unknown predicate id " + std::to_string(key.p1));
    if (key.is_extvp() && !has_predicate(key.p2))
      throw LookupError("unknown predicate id " + std::to_string(key.p2));
  }
  if (const auto* s = find(key)) return *s;
  if (key.kind == TableKind::TT) return TableStats{key, n, std::nullopt, n > 0};
  if (key.kind == TableKind::VP) throw LookupError("VP table missing from catalog");
  const auto* base = find(key.base());
  return TableStats{key, base ? base->tuple_count : 0, Rational{1, 1}, false};
}

void Catalog::record(const TableStats& stats) { stats_[stats.key] = stats; }

void Catalog::erase_extvp() {
  std::erase_if(stats_, [](const auto& kv) { return kv.first.is_extvp(); });
  extvp_built = false;
}

// ---------------------------------------------------------------------------
// Store

Store::Store(fs::path root) : root_(std::move(root)) {}
Store::Store(Store&& other) noexcept
    : root_(std::move(other.root_)),
      dict_(std::move(other.dict_)),
      catalog_(std::move(other.catalog_)),
      cache_(std::move(other.cache_)),
      triples_cache_(std::move(other.triples_cache_)) {}
Store& Store::operator=(Store&& other) noexcept {
  root_ = std::move(other.root_);
  dict_ = std::move(other.dict_);
  catalog_ = std::move(other.catalog_);
  cache_ = std::move(other.cache_);
  triples_cache_ = std::move(other.triples_cache_);
  return *this;
}
Store::~Store() = default;

Store Store::create(const fs::path& root) {
  std::error_code ec;
  fs::create_directories(root, ec);
  if (ec) throw StoreError("cannot create store directory " + root.string() + ": " + ec.message());
  for (const char* f : {kDictionaryFile, kManifestFile, kMetaFile}) fs::remove(root / f);
  fs::remove_all(root / kTablesDir);
  fs::create_directories(root / kTablesDir);
  return Store(root);
}

Store Store::open(const fs::path& root) {
  for (const char* f : {kDictionaryFile, kManifestFile, kMetaFile}) {
    if (!fs::exists(root / f)) throw StoreError("no store at " + root.string() + " (missing " + f + ")");
  }
  Store s(root);
  s.load();
  return s;
}

fs::path Store::table_path(const TableKey& key) const {
  std::string name(to_string(key.kind));
  if (key.kind != TableKind::TT) name += "_" + std::to_string(key.p1);
  if (key.is_extvp()) name += "_" + std::to_string(key.p2);
  return root_ / kTablesDir / (name + ".evp");
}

void Store::write_triples(std::span<const Triple> sorted_triples) {
  const auto key = TableKey::tt();
  std::string buf = header(key, sorted_triples.size());
  buf.reserve(kHeaderSize + sorted_triples.size() * 24);
  for (const auto& t : sorted_triples) {
    put_u64(buf, t.s);
    put_u64(buf, t.p);
    put_u64(buf, t.o);
  }
  write_file(table_path(key), buf);
  catalog_.n = sorted_triples.size();
  catalog_.record(TableStats{key, sorted_triples.size(), std::nullopt, true});
  std::lock_guard lock(cache_mutex_);
  triples_cache_.reset();
}

std::shared_ptr<const std::vector<Triple>> Store::read_triples() const {
  {
    std::lock_guard lock(cache_mutex_);
    if (triples_cache_) return triples_cache_;
  }
  const auto key = TableKey::tt();
  const auto path = table_path(key);
  const auto bytes = read_file(path);
  const auto count = check_header(bytes, key, 24, path);
  auto rows = std::make_shared<std::vector<Triple>>();
  rows->reserve(count);
  const char* p = bytes.data() + kHeaderSize;
  for (std::uint64_t i = 0; i < count; ++i, p += 24) rows->push_back({get_u64(p), get_u64(p + 8), get_u64(p + 16)});
  std::lock_guard lock(cache_mutex_);
  triples_cache_ = rows;
  return rows;
}

void Store::write_table(const TableKey& key, const TwoColumnTable& table) {
  if (key.kind == TableKind::TT) throw StoreError("use write_triples for the triples table");
  if (const auto* existing = catalog_.find(key); existing && existing->materialized)
    throw StoreError("duplicate key " + describe(key, dict_));
  TableStats stats{key, table.size(), Rational{1, 1}, !table.empty()};
  if (key.is_extvp()) {
    const auto* base = catalog_.find(key.base());
    if (!base || base->tuple_count == 0) throw StoreError("base VP table missing for " + describe(key, dict_));
    stats.sf = Rational{table.size(), base->tuple_count};
  } else if (table.empty()) {
    stats.sf = Rational{0, 1};
  }
  if (!table.empty()) {
    std::string buf = header(key, table.size());
    buf.reserve(kHeaderSize + table.size() * 16);
    for (const auto& r : table.rows()) {
      put_u64(buf, r.s);
      put_u64(buf, r.o);
    }
    write_file(table_path(key), buf);
  }
  catalog_.record(stats);
  std::lock_guard lock(cache_mutex_);
  cache_.erase(key);
}

std::shared_ptr<const TwoColumnTable> Store::read_table(const TableKey& key) const {
  {
    std::lock_guard lock(cache_mutex_);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  }
  const auto* stats = catalog_.find(key);
  if (!stats) throw StoreError("missing table " + describe(key, dict_));
  if (!stats->materialized) throw StoreError("table " + describe(key, dict_) + " not materialized");
  const auto path = table_path(key);
  const auto bytes = read_file(path);
  const auto count = check_header(bytes, key, 16, path);
  std::vector<Row> rows;
  rows.reserve(count);
  const char* p = bytes.data() + kHeaderSize;
  for (std::uint64_t i = 0; i < count; ++i, p += 16) rows.push_back({get_u64(p), get_u64(p + 8)});
  auto table = std::make_shared<const TwoColumnTable>(TwoColumnTable::from_sorted(std::move(rows)));
  std::lock_guard lock(cache_mutex_);
  cache_[key] = table;
  return table;
}

void Store::remove_table_file(const TableKey& key) {
  fs::remove(table_path(key));
  std::lock_guard lock(cache_mutex_);
  cache_.erase(key);
}

void Store::drop_cache() const {
  std::lock_guard lock(cache_mutex_);
  cache_.clear();
  triples_cache_.reset();
}

void Store::save() const {
  std::string dict;
  for (TermId id = 0; id < dict_.size(); ++id) {
    const auto& t = dict_.decode(id);
    dict += std::to_string(id) + "\t" + std::string(kind_name(t.kind)) + "\t" + escape_field(t.lexical) + "\n";
  }
  write_file(root_ / kDictionaryFile, dict);
  save_catalog();
}

void Store::save_catalog() const {
  auto iri = [&](TermId p) {
    return p == kNoPredicate ? std::string("-") : escape_field(dict_.decode(p).lexical);
  };
  std::string manifest;
  for (const auto& [key, s] : catalog_.entries()) {
    manifest += std::string(to_string(key.kind)) + "\t" + iri(key.p1) + "\t" + iri(key.p2) + "\t" +
                std::to_string(s.tuple_count) + "\t" + (s.sf ? std::to_string(s.sf->num()) : "-") + "\t" +
                (s.sf ? std::to_string(s.sf->den()) : "-") + "\t" + (s.materialized ? "1" : "0") + "\n";
  }
  write_file(root_ / kManifestFile, manifest);

  std::string meta = "format\t1\n";
  meta += "n\t" + std::to_string(catalog_.n) + "\n";
  meta += "k\t" + std::to_string(catalog_.k()) + "\n";
  meta += "threshold_num\t" + std::to_string(catalog_.threshold.num()) + "\n";
  meta += "threshold_den\t" + std::to_string(catalog_.threshold.den()) + "\n";
  meta += std::string("extvp_built\t") + (catalog_.extvp_built ? "1" : "0") + "\n";
  meta += "build_timestamp\t" + (catalog_.build_timestamp.empty() ? now_iso8601() : catalog_.build_timestamp) + "\n";
  write_file(root_ / kMetaFile, meta);
}

void Store::load() {
  {
    std::ifstream in(root_ / kDictionaryFile);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto f = split_tabs(line);
      if (f.size() != 3) throw StoreError("malformed dictionary line");
      const auto id = parse_u64(f[0]);
      if (dict_.encode(Term{parse_kind(f[1]), unescape_field(f[2])}) != id)
        throw StoreError("dictionary ids are not dense at id " + f[0]);
    }
  }
  std::map<std::string, std::string> meta;
  {
    std::ifstream in(root_ / kMetaFile);
    std::string line;
    while (std::getline(in, line)) {
      const auto f = split_tabs(line);
      if (f.size() == 2) meta[f[0]] = f[1];
    }
  }
  auto meta_u64 = [&](const char* key) {
    auto it = meta.find(key);
    if (it == meta.end()) throw StoreError(std::string("meta.tsv lacks ") + key);
    return parse_u64(it->second);
  };
  catalog_.n = meta_u64("n");
  catalog_.threshold = Rational{meta_u64("threshold_num"), meta_u64("threshold_den")};
  catalog_.extvp_built = meta_u64("extvp_built") != 0;
  catalog_.build_timestamp = meta["build_timestamp"];

  auto predicate = [&](const std::string& field) {
    if (field == "-") return kNoPredicate;
    auto id = dict_.find(Term::iri(unescape_field(field)));
    if (!id) throw StoreError("manifest references unknown predicate " + field);
    return *id;
  };
  std::vector<TermId> preds;
  std::ifstream in(root_ / kManifestFile);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_tabs(line);
    if (f.size() != 7) throw StoreError("malformed manifest line");
    TableStats s;
    s.key = TableKey{parse_table_kind(f[0]), predicate(f[1]), predicate(f[2])};
    s.tuple_count = parse_u64(f[3]);
    if (f[4] != "-") s.sf = Rational{parse_u64(f[4]), parse_u64(f[5])};
    s.materialized = f[6] == "1";
    if (s.key.kind == TableKind::VP) preds.push_back(s.key.p1);
    catalog_.record(s);
  }
  catalog_.set_predicates(std::move(preds));
  if (meta_u64("k") != catalog_.k()) throw StoreError("meta.tsv k disagrees with manifest");
}

std::vector<VerifyIssue> Store::verify() const {
  std::vector<VerifyIssue> issues;
  auto issue = [&](std::string msg) { issues.push_back({std::move(msg)}); };
  std::set<fs::path> expected;
  std::uint64_t vp_total = 0;
  for (const auto& [key, s] : catalog_.entries()) {
    const auto name = describe(key, dict_);
    const auto path = table_path(key);
    if (key.kind == TableKind::VP) vp_total += s.tuple_count;
    if (key.is_extvp()) {
      const auto* base = catalog_.find(key.base());
      if (!base) {
        issue(name + ": base VP entry missing");
      } else {
        if (s.tuple_count > base->tuple_count) issue(name + ": larger than its VP base");
        if (!s.sf || base->tuple_count == 0 || *s.sf != Rational{s.tuple_count, base->tuple_count})
          issue(name + ": sf disagrees with tuple counts");
      }
    }
    if (s.sf && s.sf->is_zero() != (s.tuple_count == 0)) issue(name + ": sf=0 iff empty violated");
    if (!s.materialized) {
      if (fs::exists(path)) issue(name + ": file present for non-materialized table");
      continue;
    }
    expected.insert(path);
    if (!fs::exists(path)) {
      issue(name + ": table file missing");
      continue;
    }
    try {
      const auto bytes = read_file(path);
      const auto count = check_header(bytes, key, key.kind == TableKind::TT ? 24 : 16, path);
      if (count != s.tuple_count) issue(name + ": row count " + std::to_string(count) + " != manifest " +
                                        std::to_string(s.tuple_count));
    } catch (const StoreError& e) {
      issue(name + ": " + e.what());
    }
  }
  if (vp_total != catalog_.n) issue("VP tuple total " + std::to_string(vp_total) + " != n " + std::to_string(catalog_.n));
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(root_ / kTablesDir, ec)) {
    if (!expected.contains(entry.path())) issue("unexpected file " + entry.path().filename().string());
  }
  if (ec) issue("tables directory unreadable: " + ec.message());
  return issues;
}

// ---------------------------------------------------------------------------

StoreLock::StoreLock(const fs::path& root) : path_(root / "LOCK") {
  fs::create_directories(root);
  const int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
  if (fd < 0) throw StoreError("store " + root.string() + " is locked by another writer (" + path_.string() + ")");
  const auto pid = std::to_string(::getpid()) + "\n";
  [[maybe_unused]] auto n = ::write(fd, pid.data(), pid.size());
  ::close(fd);
}

StoreLock::~StoreLock() {
  std::error_code ec;
  fs::remove(path_, ec);
}

}  // namespace extvp
