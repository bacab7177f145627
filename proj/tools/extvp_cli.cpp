// extvp_cli: load N-Triples, build ExtVP tables, run and explain SPARQL queries.

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "extvp/builder.hpp"
#include "extvp/error.hpp"
#include "extvp/executor.hpp"
#include "extvp/generator.hpp"
#include "extvp/planner.hpp"
#include "extvp/sparql.hpp"
#include "extvp/sql.hpp"
#include "extvp/storage.hpp"

namespace fs = std::filesystem;
using namespace extvp;

namespace {

enum Exit : int {
  kOk = 0,
  kBenchFailures = 1,
  kParseError = 2,
  kUnsupported = 3,
  kMissingStore = 4,
  kEmptyShortCircuit = 5,
};

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int cmd_load(const fs::path& db, const fs::path& input) {
  std::ifstream in(input, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + input.string());
  const Graph g = parse_ntriples(in);
  fs::create_directories(db);
  StoreLock lock(db);
  auto store = Store::create(db);
  build_vp(g, store);
  std::cout << "n=" << g.n() << " k=" << g.k() << ";";
  for (TermId p : g.predicates)
    std::cout << ' ' << g.dict.decode(p).lexical << ':' << store.catalog().lookup(TableKey::vp(p)).tuple_count;
  std::cout << '\n';
  return kOk;
}

struct BuildArgs {
  std::string threshold = "1";
  bool no_ss = false, no_os = false, no_so = false;
};

int cmd_build(const fs::path& db, const BuildArgs& a) {
  BuildConfig cfg;
  cfg.threshold = Rational::parse(a.threshold);
  cfg.compute_ss = !a.no_ss;
  cfg.compute_os = !a.no_os;
  cfg.compute_so = !a.no_so;
  cfg.validate();
  auto store = Store::open(db);
  StoreLock lock(db);
  const auto r = build_extvp(store, cfg);
  std::cout << "threshold=" << cfg.threshold.to_string() << " pairs=" << r.pairs_examined
            << " computed=" << r.pairs_computed << " materialized=" << r.materialized << " empty=" << r.empty
            << " sf1=" << r.equal_to_vp << " above_threshold=" << r.above_threshold
            << " total_tuples=" << r.total_tuples << " seconds=" << std::fixed << std::setprecision(3)
            << r.wall_seconds << '\n';
  return kOk;
}

struct QueryArgs {
  std::string file;
  std::string text;
  std::string layout = "extvp";
  bool naive = false;
  bool explain = false;
  bool emit_sql = false;
  bool no_push = false;
  bool count_only = false;
  std::string out;
};

struct RunResult {
  PlanNode plan;
  MappingBag bag;
  ExecStats stats;
  double seconds = 0;
};

RunResult run_query(const Store& store, const std::string& text, const PlanOptions& opts, bool execute = true) {
  RunResult r;
  const auto started = std::chrono::steady_clock::now();
  const auto algebra = parse_query(text);
  r.plan = compile(algebra, store.catalog(), store.dict(), opts);
  if (execute) r.bag = evaluate(r.plan, store, &r.stats);
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return r;
}

int cmd_query(const fs::path& db, const QueryArgs& a) {
  const auto store = Store::open(db);
  const std::string text = a.text.empty() ? read_text(a.file) : a.text;
  PlanOptions opts;
  opts.layout = parse_layout(a.layout);
  opts.naive_order = a.naive;
  opts.push_filters = !a.no_push;
  const bool execute = !a.explain && !a.emit_sql;
  auto r = run_query(store, text, opts, execute);
  const int code = is_empty(r.plan) ? kEmptyShortCircuit : kOk;
  if (a.explain) {
    std::cout << explain(r.plan, store.dict());
    return code;
  }
  if (a.emit_sql) {
    std::cout << emit_sql(r.plan, store.catalog(), store.dict());
    return code;
  }
  if (a.count_only) {
    std::cout << r.bag.size() << '\n';
    return code;
  }
  if (a.out.empty()) {
    write_tsv(r.bag, store.dict(), std::cout);
  } else {
    std::ofstream out(a.out, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + a.out);
    write_tsv(r.bag, store.dict(), out);
  }
  return code;
}

int cmd_stats(const fs::path& db, bool verify) {
  const auto store = Store::open(db);
  const auto& cat = store.catalog();
  std::cout << "n=" << cat.n << " k=" << cat.k() << " threshold=" << cat.threshold.to_string()
            << " extvp_built=" << (cat.extvp_built ? "yes" : "no") << '\n';
  std::cout << "table\ttuples\tsf\tmaterialized\n";
  for (const auto& [key, s] : cat.entries()) {
    std::cout << describe(key, store.dict()) << '\t' << s.tuple_count << '\t' << (s.sf ? s.sf->to_string() : "-")
              << '\t' << (s.materialized ? "yes" : "no") << '\n';
  }
  if (!verify) return kOk;
  const auto issues = store.verify();
  for (const auto& i : issues) std::cout << "verify: " << i.message << '\n';
  std::cout << "verify: " << (issues.empty() ? "ok" : std::to_string(issues.size()) + " issue(s)") << '\n';
  return issues.empty() ? kOk : kMissingStore;
}

struct BenchArgs {
  std::string suite;
  int repeat = 3;
  bool tsv = false;
  std::string layouts = "vp,extvp";
};

int cmd_bench(const fs::path& db, const BenchArgs& a) {
  const auto store = Store::open(db);
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(a.suite)) {
    if (e.path().extension() == ".rq") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<Layout> layouts;
  std::stringstream ls(a.layouts);
  for (std::string item; std::getline(ls, item, ',');) layouts.push_back(parse_layout(item));

  if (a.tsv) {
    std::cout << "query\tlayout\trows\tmean_ms\tinput_tuples\tstatus\n";
  } else {
    std::cout << "# desk-scale, directional: times are not comparable to cluster-scale numbers\n";
    std::cout << std::left << std::setw(24) << "query" << std::setw(8) << "layout" << std::setw(10) << "rows"
              << std::setw(12) << "mean_ms" << std::setw(14) << "input_tuples" << "status\n";
  }
  int failures = 0;
  for (const auto& f : files) {
    for (auto layout : layouts) {
      std::string status = "ok";
      std::uint64_t rows = 0, tuples = 0;
      double total = 0;
      try {
        const auto text = read_text(f);
        PlanOptions opts;
        opts.layout = layout;
        for (int i = 0; i < std::max(1, a.repeat); ++i) {
          const auto r = run_query(store, text, opts);
          total += r.seconds;
          rows = r.bag.size();
          tuples = r.stats.input_tuples;
          if (is_empty(r.plan)) status = "ok(empty-sf0)";
        }
      } catch (const std::exception& e) {
        status = std::string("FAIL: ") + e.what();
        ++failures;
      }
      const double mean_ms = total * 1000.0 / std::max(1, a.repeat);
      std::ostringstream ms;
      ms << std::fixed << std::setprecision(3) << mean_ms;
      if (a.tsv) {
        std::cout << f.filename().string() << '\t' << to_string(layout) << '\t' << rows << '\t' << ms.str() << '\t'
                  << tuples << '\t' << status << '\n';
      } else {
        std::cout << std::left << std::setw(24) << f.filename().string() << std::setw(8) << to_string(layout)
                  << std::setw(10) << rows << std::setw(12) << ms.str() << std::setw(14) << tuples << status << '\n';
      }
    }
  }
  return failures ? kBenchFailures : kOk;
}

struct GenArgs {
  std::string out;
  std::uint64_t scale = 100;
  std::uint64_t seed = 1;
  std::string config;
};

int cmd_gen(const GenArgs& a) {
  GenConfig cfg;
  cfg.users = a.scale;
  cfg.seed = a.seed;
  if (!a.config.empty()) cfg.apply_json(a.config);
  GenReport r;
  if (a.out.empty() || a.out == "-") {
    r = generate_graph(cfg, std::cout);
  } else {
    std::ofstream out(a.out, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + a.out);
    r = generate_graph(cfg, out);
  }
  std::cerr << "triples=" << r.triples << " users=" << cfg.users << ";";
  for (const auto& [name, count] : r.per_predicate) std::cerr << ' ' << name << ':' << count;
  std::cerr << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SPARQL BGP engine over vertical partitioning and ExtVP tables"};
  app.require_subcommand(1);
  std::string db = "extvp.db";
  app.add_option("--db", db, "store directory")->capture_default_str();

  std::string load_input;
  auto* load = app.add_subcommand("load", "load an N-Triples file into a fresh store");
  load->add_option("input", load_input, "N-Triples file")->required();

  BuildArgs build_args;
  auto* build = app.add_subcommand("build-extvp", "compute ExtVP semi-join reductions");
  build->add_option("--threshold", build_args.threshold, "materialize tables with 0 < sf < threshold")
      ->capture_default_str();
  build->add_flag("--no-ss", build_args.no_ss, "skip subject-subject reductions");
  build->add_flag("--no-os", build_args.no_os, "skip object-subject reductions");
  build->add_flag("--no-so", build_args.no_so, "skip subject-object reductions");

  QueryArgs query_args;
  auto* query = app.add_subcommand("query", "run a SPARQL SELECT query");
  query->add_option("file", query_args.file, "query file (.rq)");
  query->add_option("-e,--query", query_args.text, "query text");
  query->add_option("--layout", query_args.layout, "tt, vp or extvp")->capture_default_str();
  query->add_flag("--naive-order", query_args.naive, "join patterns in source order");
  query->add_flag("--explain", query_args.explain, "print the plan instead of running it");
  query->add_flag("--emit-sql", query_args.emit_sql, "print SQL for the plan instead of running it");
  query->add_flag("--no-push-filters", query_args.no_push, "keep filters where the query puts them");
  query->add_flag("--count-only", query_args.count_only, "print only the number of results");
  query->add_option("--out", query_args.out, "write TSV results to a file");

  bool verify = false;
  auto* stats = app.add_subcommand("stats", "print catalog statistics");
  stats->add_flag("--verify", verify, "check manifest against table files");

  BenchArgs bench_args;
  auto* bench = app.add_subcommand("bench", "run every .rq file in a directory");
  bench->add_option("suite", bench_args.suite, "directory with .rq files")->required();
  bench->add_option("--repeat", bench_args.repeat, "runs per query")->capture_default_str();
  bench->add_option("--layouts", bench_args.layouts, "comma-separated layouts")->capture_default_str();
  bench->add_flag("--tsv", bench_args.tsv, "machine-readable output");

  GenArgs gen_args;
  auto* gen = app.add_subcommand("gen", "generate a synthetic social graph");
  gen->add_option("--out", gen_args.out, "output file, '-' for stdout");
  gen->add_option("--scale", gen_args.scale, "number of users")->capture_default_str()->check(CLI::PositiveNumber);
  gen->add_option("--seed", gen_args.seed, "random seed")->capture_default_str();
  gen->add_option("--config", gen_args.config, "JSON file overriding per-predicate rates");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kParseError;
  }

  try {
    if (*load) return cmd_load(db, load_input);
    if (*build) return cmd_build(db, build_args);
    if (*query) {
      if (query_args.file.empty() && query_args.text.empty()) throw ConfigError("query needs a file or -e text");
      return cmd_query(db, query_args);
    }
    if (*stats) return cmd_stats(db, verify);
    if (*bench) return cmd_bench(db, bench_args);
    if (*gen) return cmd_gen(gen_args);
  } catch (const NTriplesError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kParseError;
  } catch (const QuerySyntaxError& e) {
    std::cerr << "query syntax error: " << e.what() << '\n';
    return kParseError;
  } catch (const UnsupportedQueryError& e) {
    std::cerr << e.what() << '\n';
    return kUnsupported;
  } catch (const StoreError& e) {
    std::cerr << "store error: " << e.what() << '\n';
    return kMissingStore;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kParseError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return kOk;
}
