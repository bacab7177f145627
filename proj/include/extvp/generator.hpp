#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <random>
#include <string>

namespace extvp {

inline constexpr std::string_view kWsdbm = "http://db.uwaterloo.ca/~galuc/wsdbm/";
inline constexpr std::string_view kSorg = "http://schema.org/";
inline constexpr std::string_view kFoaf = "http://xmlns.com/foaf/";
inline constexpr std::string_view kRev = "http://purl.org/stuff/rev#";

// Triples per user for each predicate. Defaults sum to 10, so friendOf is
// about 0.41 of the graph, follows 0.30 and likes 0.01.
struct GenConfig {
  std::uint64_t users = 100;
  std::uint64_t seed = 1;
  double products_per_user = 0.5;
  std::map<std::string, double> rates = default_rates();

  static std::map<std::string, double> default_rates();
  // Reads {"rates": {"friendOf": 4.1, ...}, "products_per_user": 0.5}.
  // Unknown predicate names are rejected.
  void apply_json(const std::filesystem::path& file);
};

struct GenReport {
  std::uint64_t triples = 0;
  std::map<std::string, std::uint64_t> per_predicate;
};

// Deterministic for a given config: same seed, same bytes.
GenReport generate_graph(const GenConfig& cfg, std::ostream& out);

// Uniform draw in [0, bound) using Lemire's multiply-shift with rejection,
// so the stream does not depend on the standard library's distributions.
std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound);

}  // namespace extvp
