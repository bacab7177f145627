#include "extvp/generator.hpp"

#include <cmath>
#include <fstream>
#include <ostream>
#include <unordered_set>

#include "json.hpp"

#include "extvp/error.hpp"

namespace extvp {

namespace {

enum class Domain : std::uint8_t { User, Product };
enum class Range : std::uint8_t { User, Product, Literal };

struct PredicateSpec {
  const char* name;
  std::string_view ns;
  Domain domain;
  Range range;
  // Attribute predicates give a random subset of subjects one value each
  // (rate = coverage); edge predicates draw rate*users random pairs.
  bool attribute;
};

constexpr PredicateSpec kPredicates[] = {
    {"friendOf", kWsdbm, Domain::User, Range::User, false},
    {"follows", kWsdbm, Domain::User, Range::User, false},
    {"likes", kWsdbm, Domain::User, Range::Product, false},
    {"email", kSorg, Domain::User, Range::Literal, true},
    {"age", kFoaf, Domain::User, Range::Literal, true},
    {"jobTitle", kSorg, Domain::User, Range::Literal, true},
    {"faxNumber", kSorg, Domain::User, Range::Literal, true},
    {"reviewer", kRev, Domain::Product, Range::User, false},
    {"author", kSorg, Domain::Product, Range::User, false},
    {"trailer", kSorg, Domain::Product, Range::Literal, false},
};

constexpr std::uint64_t kCoverageScale = 1'000'000;

std::string node(std::string_view kind, std::uint64_t i) {
  return "<" + std::string(kWsdbm) + std::string(kind) + std::to_string(i) + ">";
}

std::string literal_for(std::string_view pred, std::uint64_t subject, std::uint64_t draw) {
  if (pred == "email") return "\"user" + std::to_string(subject) + "@example.org\"";
  if (pred == "age")
    return "\"" + std::to_string(18 + draw % 63) + "\"^^<http://www.w3.org/2001/XMLSchema#integer>";
  if (pred == "jobTitle") return "\"Job" + std::to_string(draw % 200) + "\"";
  if (pred == "faxNumber") return "\"+1-555-" + std::to_string(1000000 + subject) + "\"";
  return "\"trailer " + std::to_string(subject) + "-" + std::to_string(draw % 1000) + "\"";
}

}  // namespace

std::map<std::string, double> GenConfig::default_rates() {
  return {{"friendOf", 4.1}, {"follows", 3.0},  {"likes", 0.1},     {"email", 0.9},   {"age", 0.5},
          {"jobTitle", 0.05}, {"faxNumber", 0.01}, {"reviewer", 0.1}, {"author", 1.19}, {"trailer", 0.05}};
}

void GenConfig::apply_json(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open generator config " + file.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("bad generator config: " + std::string(e.what()));
  }
  if (j.contains("products_per_user")) products_per_user = j.at("products_per_user").get<double>();
  if (j.contains("rates")) {
    for (const auto& [name, value] : j.at("rates").items()) {
      if (!rates.contains(name)) throw ConfigError("unknown predicate in generator config: " + name);
      const double v = value.get<double>();
      if (v < 0) throw ConfigError("negative rate for " + name);
      rates[name] = v;
    }
  }
  if (products_per_user <= 0) throw ConfigError("products_per_user must be positive");
}

std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound) {
  if (bound == 0) throw ConfigError("uniform_below: empty range");
  unsigned __int128 m = static_cast<unsigned __int128>(rng()) * bound;
  auto low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    const std::uint64_t threshold = -bound % bound;
    while (low < threshold) {
      m = static_cast<unsigned __int128>(rng()) * bound;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

GenReport generate_graph(const GenConfig& cfg, std::ostream& out) {
  if (cfg.users == 0) throw ConfigError("scale must be >= 1");
  std::mt19937_64 rng(cfg.seed);
  const std::uint64_t users = cfg.users;
  const auto products =
      std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::llround(cfg.products_per_user * users)));
  GenReport report;
  std::vector<bool> has_email(users, false);

  for (const auto& spec : kPredicates) {
    const double rate = cfg.rates.at(spec.name);
    const std::string pred = "<" + std::string(spec.ns) + spec.name + ">";
    const std::uint64_t domain_size = spec.domain == Domain::User ? users : products;
    const char* domain_kind = spec.domain == Domain::User ? "User" : "Product";
    std::uint64_t count = 0;
    const auto emit = [&](std::uint64_t s, const std::string& object) {
      out << node(domain_kind, s) << ' ' << pred << ' ' << object << " .\n";
      ++count;
    };

    if (spec.attribute) {
      const bool fax = std::string_view(spec.name) == "faxNumber";
      // Fax numbers only go to users with an email address.
      const double email_rate = cfg.rates.at("email");
      const double p = fax ? (email_rate > 0 ? std::min(1.0, rate / email_rate) : 0.0) : std::min(1.0, rate);
      const auto cut = static_cast<std::uint64_t>(std::llround(p * kCoverageScale));
      for (std::uint64_t s = 0; s < domain_size; ++s) {
        const bool pick = uniform_below(rng, kCoverageScale) < cut;
        if (!pick || (fax && !has_email[s])) continue;
        if (std::string_view(spec.name) == "email") has_email[s] = true;
        emit(s, literal_for(spec.name, s, rng()));
      }
    } else {
      const auto draws = static_cast<std::uint64_t>(std::llround(rate * static_cast<double>(users)));
      const std::uint64_t range_size =
          spec.range == Range::User ? users : spec.range == Range::Product ? products : 0;
      std::unordered_set<std::uint64_t> seen;
      for (std::uint64_t i = 0; i < draws; ++i) {
        const auto s = uniform_below(rng, domain_size);
        if (spec.range == Range::Literal) {
          emit(s, literal_for(spec.name, s, i));
          continue;
        }
        const auto o = uniform_below(rng, range_size);
        if (!seen.insert(s * range_size + o).second) continue;
        emit(s, node(spec.range == Range::User ? "User" : "Product", o));
      }
    }
    report.per_predicate[spec.name] = count;
    report.triples += count;
  }
  return report;
}

}  // namespace extvp
