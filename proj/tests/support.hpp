#pragma once

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <random>
#include <sstream>
#include <string>

#include "extvp/builder.hpp"
#include "extvp/executor.hpp"
#include "extvp/planner.hpp"
#include "extvp/sparql.hpp"
#include "extvp/storage.hpp"

namespace testing_support {

// The follows/likes graph with four users and two items.
inline constexpr const char* kG1 =
    "<A> <follows> <B> .\n"
    "<B> <follows> <C> .\n"
    "<B> <follows> <D> .\n"
    "<C> <follows> <D> .\n"
    "<A> <likes> <I1> .\n"
    "<A> <likes> <I2> .\n"
    "<C> <likes> <I2> .\n";

inline constexpr const char* kQ1 =
    "SELECT * WHERE { ?x <likes> ?w . ?x <follows> ?y . ?y <follows> ?z . ?z <likes> ?w . }";

inline constexpr const char* kSt8 = "SELECT * WHERE { ?a <likes> ?b . ?b <follows> ?c . }";

class TempDir {
 public:
  TempDir() {
    std::string tmpl = (std::filesystem::temp_directory_path() / "extvp-test-XXXXXX").string();
    if (!::mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
    path_ = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& s) const { return path_ / s; }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Loads `g` into a store under `dir` and builds ExtVP at `threshold`.
inline extvp::Store make_store(const extvp::Graph& g, const std::filesystem::path& dir,
                               extvp::Rational threshold = {1, 1}, bool extvp_tables = true) {
  auto store = extvp::Store::create(dir);
  extvp::build_vp(g, store);
  if (extvp_tables) {
    extvp::BuildConfig cfg;
    cfg.threshold = threshold;
    extvp::build_extvp(store, cfg);
  }
  return store;
}

inline extvp::MappingBag run(const extvp::Store& store, const std::string& query,
                             const extvp::PlanOptions& opts = {}, extvp::ExecStats* stats = nullptr) {
  const auto plan = extvp::compile(extvp::parse_query(query), store.catalog(), store.dict(), opts);
  return extvp::evaluate(plan, store, stats);
}

inline extvp::TermId id(const extvp::Store& store, const std::string& iri) {
  return store.dict().find(extvp::Term::iri(iri)).value();
}

struct CommandResult {
  int exit_code = -1;
  std::string output;
};

// Runs a shell command, capturing stdout and stderr.
inline CommandResult run_command(const std::string& cmd) {
  CommandResult r;
  std::unique_ptr<FILE, int (*)(FILE*)> pipe(::popen((cmd + " 2>&1").c_str(), "r"), ::pclose);
  if (!pipe) return r;
  std::array<char, 4096> buf{};
  while (const auto n = std::fread(buf.data(), 1, buf.size(), pipe.get())) r.output.append(buf.data(), n);
  const int status = ::pclose(pipe.release());
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

// Random graph over a small vocabulary, for equivalence suites.
struct RandomInstance {
  std::string ntriples;
  std::string query;
};

inline RandomInstance random_instance(std::mt19937_64& rng, int max_triples = 50, int max_preds = 5,
                                      int max_patterns = 5, bool filters = false) {
  auto pick = [&](int n) { return static_cast<int>(rng() % static_cast<std::uint64_t>(n)); };
  const int preds = 1 + pick(max_preds);
  const int nodes = 3 + pick(6);
  const int triples = 1 + pick(max_triples);
  RandomInstance r;
  for (int i = 0; i < triples; ++i) {
    r.ntriples += "<n" + std::to_string(pick(nodes)) + "> <p" + std::to_string(pick(preds)) + "> <n" +
                  std::to_string(pick(nodes)) + "> .\n";
  }
  const int patterns = 1 + pick(max_patterns);
  const int vars = 1 + pick(4);
  auto term = [&](bool predicate) -> std::string {
    const int roll = pick(10);
    if (predicate) {
      if (roll == 0) return "?v" + std::to_string(pick(vars));
      if (roll == 1) return "<missing>";
      return "<p" + std::to_string(pick(preds)) + ">";
    }
    if (roll < 7) return "?v" + std::to_string(pick(vars));
    return "<n" + std::to_string(pick(nodes)) + ">";
  };
  r.query = "SELECT * WHERE { ";
  for (int i = 0; i < patterns; ++i) r.query += term(false) + " " + term(true) + " " + term(false) + " . ";
  if (filters) r.query += "FILTER(?v0 != <n" + std::to_string(pick(nodes)) + ">) ";
  r.query += "}";
  return r;
}

}  // namespace testing_support
