#include "gevo/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "gevo/backend.hpp"
#include "gevo/codegen.hpp"
#include "gevo/corpus_impl.hpp"
#include "gevo/coverage.hpp"
#include "gevo/grammar.hpp"
#include "gevo/refparse.hpp"

namespace fs = std::filesystem;

namespace gevo {

const CorpusOps* find_corpus(const std::vector<CorpusOps>& entries, std::string_view name) {
  for (const auto& e : entries) {
    if (e.name == name) return &e;
  }
  return nullptr;
}

const CorpusOps* match_corpus(const std::vector<CorpusOps>& entries, const GrammarGraph& g) {
  for (const auto& e : entries) {
    if (e.graph && *e.graph == g) return &e;
  }
  return nullptr;
}

namespace {

constexpr const char* kVersion = "0.1.0";

struct Loaded {
  GrammarAst ast;
  GrammarGraph graph;
  std::string stem;
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return std::move(buf).str();
}

void write_file(const fs::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

Loaded load_grammar(const std::string& path, std::ostream& err) {
  Loaded l;
  const std::string text = read_file(path);
  l.ast = parse_grammar(text);
  for (const std::string& w : validate_reachability(l.ast)) err << "warning: " << w << "\n";
  l.graph = mark_indirection(build_graph(l.ast));
  l.stem = fs::path(path).stem().string();
  return l;
}

std::uint64_t pick_seed(std::optional<std::uint64_t> seed, std::ostream& err) {
  if (seed) return *seed;
  std::random_device rd;
  const std::uint64_t s = (std::uint64_t(rd()) << 32) | rd();
  err << "seed: " << s << "\n";
  return s;
}

ChainConfig chain_config(const GrammarGraph& g, std::uint32_t max_depth,
                         const std::vector<std::string>& flatten_rules) {
  ChainConfig cfg;
  cfg.max_depth = max_depth;
  for (const std::string& rule : flatten_rules) {
    cfg.flatten_nodes.push_back(resolve_rule(g, rule));
  }
  return cfg;
}

std::chrono::nanoseconds parse_budget(const std::string& text) {
  std::size_t pos = 0;
  const double v = std::stod(text, &pos);
  const std::string unit = text.substr(pos);
  if (unit == "ms") return std::chrono::nanoseconds(static_cast<std::int64_t>(v * 1e6));
  if (unit.empty() || unit == "s") {
    return std::chrono::nanoseconds(static_cast<std::int64_t>(v * 1e9));
  }
  if (unit == "m" || unit == "min") {
    return std::chrono::nanoseconds(static_cast<std::int64_t>(v * 60e9));
  }
  throw std::runtime_error("unknown budget unit '" + unit + "' (use ms, s, or m)");
}

std::string gen_err_name(GenErr e) {
  switch (e) {
    case GenErr::DepthExceeded: return "depth exceeded";
    case GenErr::RetryExhausted: return "retry budget exhausted";
    case GenErr::CyclicAlternation: return "cyclic alternation";
  }
  return "generation error";
}

const CorpusOps* require_static(const std::vector<CorpusOps>& entries, const GrammarGraph& g) {
  const CorpusOps* entry = match_corpus(entries, g);
  if (!entry) {
    std::string names;
    for (const auto& e : entries) names += " " + e.name;
    throw std::runtime_error(
        "static backend is only available for grammars compiled into this binary (" +
        (names.empty() ? std::string(" none") : names) +
        " ); use --backend dynamic for this grammar");
  }
  return entry;
}

// --- subcommand implementations ---------------------------------------------

struct CommonGen {
  std::string grammar_path;
  std::optional<std::uint64_t> seed;
  std::uint32_t max_depth = 64;
  std::vector<std::string> flatten;
  std::string backend = "static";
};

int cmd_transpile(const std::string& grammar_path, const std::string& out_dir, std::ostream& out,
                  std::ostream& err) {
  Loaded l = load_grammar(grammar_path, err);
  EmitContext ctx{l.stem, l.ast.source};
  fs::create_directories(out_dir);
  const fs::path header = fs::path(out_dir) / (l.stem + ".gen.hpp");
  const fs::path manifest = fs::path(out_dir) / (l.stem + ".manifest.json");
  write_file(header, emit_header(l.graph, ctx));
  write_file(manifest, emit_manifest(l.graph, ctx));
  out << header.string() << "\n" << manifest.string() << "\n";
  return 0;
}

int cmd_generate(const CommonGen& opt, int count, const std::string& out_dir,
                 const std::vector<CorpusOps>& entries, std::ostream& out, std::ostream& err) {
  Loaded l = load_grammar(opt.grammar_path, err);
  const std::uint64_t seed = pick_seed(opt.seed, err);
  const ChainConfig cfg = chain_config(l.graph, opt.max_depth, opt.flatten);

  const CorpusOps* entry = nullptr;
  std::optional<DynBackend> dyn;
  if (opt.backend == "static") {
    entry = require_static(entries, l.graph);
  } else {
    dyn.emplace(l.graph, cfg);
  }

  if (!out_dir.empty()) fs::create_directories(out_dir);
  for (int i = 0; i < count; ++i) {
    const std::uint64_t input_seed = derive_seed(seed, static_cast<std::uint64_t>(i));
    std::string bytes;
    if (entry) {
      auto r = entry->generate_at(GenRequest{entry->graph->start_node, input_seed, cfg});
      if (!r.ok()) throw std::runtime_error("generation failed: " + gen_err_name(r.error()));
      bytes = std::move(r).value();
    } else {
      RandomSampler sampler(input_seed);
      auto r = dyn->generate(sampler);
      if (!r.ok()) throw std::runtime_error("generation failed: " + gen_err_name(r.error()));
      bytes = dyn_serialize(r.value());
    }
    if (out_dir.empty()) {
      out << escape_bytes(bytes, false) << "\n";
    } else {
      char name[32];
      std::snprintf(name, sizeof name, "input_%05d.txt", i);
      write_file(fs::path(out_dir) / name, bytes);
    }
  }
  return 0;
}

int cmd_solve(const CommonGen& opt, const std::string& constraints_path, const GaParams& params,
              const std::string& algo, const std::string& out_dir, const std::string& stats_path,
              unsigned jobs, const std::vector<CorpusOps>& entries, std::ostream& out,
              std::ostream& err) {
  Loaded l = load_grammar(opt.grammar_path, err);
  const std::uint64_t seed = pick_seed(opt.seed, err);

  SolveRequest rq;
  rq.algo = algo;
  rq.params = params;
  rq.seed = seed;
  rq.constraints = parse_constraint_spec(read_file(constraints_path));
  rq.chain = chain_config(l.graph, opt.max_depth, opt.flatten);
  rq.jobs = jobs;

  std::ofstream stats_file;
  std::ostream* stats = &err;
  if (!stats_path.empty()) {
    stats_file.open(stats_path);
    if (!stats_file) throw std::runtime_error("cannot write " + stats_path);
    stats = &stats_file;
  }
  rq.on_stats = [stats](const GenerationStats& st) {
    nlohmann::json j;
    j["generation"] = st.generation;
    j["best_fitness"] = st.best_fitness;
    j["front_sizes"] = st.front_sizes;
    j["satisfied"] = st.satisfied;
    (*stats) << j.dump() << "\n";
  };

  SolveOutcome outcome;
  if (opt.backend == "static") {
    const CorpusOps* entry = require_static(entries, l.graph);
    outcome = entry->solve(rq);
  } else {
    DynBackend backend(l.graph, rq.chain);
    outcome = solve_impl(backend, l.graph, rq);
  }

  std::size_t satisfied = 0;
  if (!out_dir.empty()) fs::create_directories(out_dir);
  for (std::size_t i = 0; i < outcome.population.size(); ++i) {
    const auto& m = outcome.population[i];
    if (!m.satisfied) continue;
    ++satisfied;
    if (!out_dir.empty()) {
      char name[32];
      std::snprintf(name, sizeof name, "input_%05zu.txt", i);
      write_file(fs::path(out_dir) / name, m.bytes);
    } else {
      out << escape_bytes(m.bytes, false) << "\n";
    }
  }
  err << "generations=" << outcome.generations << " satisfied=" << satisfied << "/"
      << outcome.population.size() << (outcome.all_satisfied ? " (all satisfied)" : "") << "\n";
  return 0;
}

int cmd_coverage(const std::string& grammar_path, std::uint32_t k, const std::string& input_dir,
                 bool as_json, std::ostream& out, std::ostream& err) {
  Loaded l = load_grammar(grammar_path, err);
  RefParser parser(l.graph);
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(input_dir)) {
    if (entry.is_regular_file()) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::unordered_set<std::string> observed;
  for (const fs::path& f : files) {
    const std::string text = read_file(f);
    auto tree = parser.parse(text);
    if (!tree.ok()) {
      throw std::runtime_error(f.string() + ": not derivable from the grammar (byte " +
                               std::to_string(tree.error().position) + ")");
    }
    collect_kpath_chains(dyn_view(tree.value()), k, observed);
  }
  const KPathReport report = kpath_report(observed, l.graph, k);
  if (as_json) {
    nlohmann::json j;
    j["k"] = report.k;
    j["covered"] = report.covered;
    j["total"] = report.total;
    j["percent"] = report.percent;
    out << j.dump() << "\n";
  } else {
    char line[96];
    std::snprintf(line, sizeof line, "k-path(k=%u) coverage: %.2f%% (%zu/%zu)\n", report.k,
                  report.percent, report.covered, report.total);
    out << line;
  }
  return 0;
}

int cmd_bench(const CommonGen& opt, const std::string& ops_csv, const std::string& budget,
              const std::string& json_path, const std::string& constraints_path, bool report,
              const std::vector<CorpusOps>& entries, std::ostream& out, std::ostream& err) {
  Loaded l = load_grammar(opt.grammar_path, err);
  BenchJob job;
  job.request.seed = pick_seed(opt.seed, err);
  job.request.budget = parse_budget(budget);
  job.request.ops.clear();
  std::istringstream split(ops_csv);
  std::string op;
  while (std::getline(split, op, ',')) {
    if (!op.empty()) job.request.ops.push_back(op);
  }
  job.chain = chain_config(l.graph, opt.max_depth, opt.flatten);
  if (!constraints_path.empty()) {
    job.constraints = parse_constraint_spec(read_file(constraints_path));
  } else if (std::find(job.request.ops.begin(), job.request.ops.end(), "check") !=
             job.request.ops.end()) {
    // the check op needs something to evaluate
    ConstraintSpecItem goal;
    goal.type = "node_goal";
    goal.nums["target"] = 100;
    job.constraints.push_back(goal);
  }

  std::vector<BenchSample> samples;
  if (opt.backend == "static") {
    const CorpusOps* entry = require_static(entries, l.graph);
    samples = entry->bench(job);
  } else {
    DynBackend backend(l.graph, job.chain);
    ConstraintRegistry<DynBackend> registry;
    auto constraints = registry.make_list(l.graph, job.constraints);
    samples = run_bench(backend, constraints, job.request);
  }

  if (!json_path.empty()) write_file(json_path, bench_samples_to_jsonl(samples));
  if (report || json_path.empty()) {
    out << bench_report(samples, l.stem + " (" + opt.backend + ")");
  }
  return 0;
}

int cmd_report(const std::vector<std::string>& files, std::ostream& out) {
  for (const auto& f : files) {
    out << bench_report(bench_samples_from_jsonl(read_file(f)), f);
  }
  return 0;
}

int cmd_graph(const std::string& grammar_path, bool dot, const std::string& out_path,
              std::ostream& out, std::ostream& err) {
  Loaded l = load_grammar(grammar_path, err);
  std::string text;
  if (dot) {
    text = to_dot(l.graph);
  } else {
    std::size_t indirect = 0;
    for (const auto& e : l.graph.edges) indirect += e.indirect;
    text = "grammar " + l.stem + ": " + std::to_string(l.graph.nodes.size()) + " nodes, " +
           std::to_string(l.graph.edges.size()) + " edges (" + std::to_string(indirect) +
           " indirect), start <" + l.ast.start + ">\n";
  }
  if (!out_path.empty()) {
    write_file(out_path, text);
  } else {
    out << text;
  }
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
            const std::vector<CorpusOps>& corpus_entries) {
  CLI::App app{"grammar-to-types transpiler and evolutionary test generation engine", "gevo"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  // transpile
  auto* transpile = app.add_subcommand("transpile", "compile a grammar into typed tree code");
  std::string t_grammar, t_out = ".";
  transpile->add_option("grammar", t_grammar, "grammar file (.gbnf)")->required();
  transpile->add_option("-o,--out-dir", t_out, "output directory");

  // generate
  auto* generate = app.add_subcommand("generate", "generate inputs from a grammar");
  CommonGen g_opt;
  int g_count = 1;
  std::string g_out_dir;
  generate->add_option("grammar", g_opt.grammar_path, "grammar file (.gbnf)")->required();
  generate->add_option("-n,--count", g_count, "number of inputs");
  std::optional<std::uint64_t> g_seed;
  generate->add_option("--seed", g_seed, "PRNG seed (default: random, printed)");
  generate->add_option("--max-depth", g_opt.max_depth, "generation depth limit");
  generate->add_option("--flatten", g_opt.flatten, "rules to sample with flattened alternations");
  generate->add_option("--backend", g_opt.backend, "static|dynamic")
      ->check(CLI::IsMember({"static", "dynamic"}));
  generate->add_option("--out-dir", g_out_dir, "write one file per input instead of stdout");

  // solve
  auto* solve = app.add_subcommand("solve", "evolve inputs satisfying constraints");
  CommonGen s_opt;
  std::string s_constraints, s_algo = "nsga2", s_out_dir, s_stats;
  GaParams s_params;
  std::optional<std::uint64_t> s_seed;
  unsigned s_jobs = 1;
  std::uint64_t s_budget_ms = 0;
  solve->add_option("grammar", s_opt.grammar_path, "grammar file (.gbnf)")->required();
  solve->add_option("--constraints", s_constraints, "constraint spec (JSON list)")->required();
  solve->add_option("-p,--population", s_params.population, "population size");
  solve->add_option("-e,--elites", s_params.elites, "elite count (fandango algorithm)");
  solve->add_option("-c,--candidates", s_params.candidates, "candidates per generation");
  solve->add_option("-i,--iterations", s_params.max_iterations, "maximum generations");
  solve->add_option("--algo", s_algo, "fandango|nsga2")
      ->check(CLI::IsMember({"fandango", "nsga2"}));
  solve->add_option("--seed", s_seed, "PRNG seed (default: random, printed)");
  solve->add_option("--backend", s_opt.backend, "static|dynamic")
      ->check(CLI::IsMember({"static", "dynamic"}));
  solve->add_option("--max-depth", s_opt.max_depth, "generation depth limit");
  solve->add_option("--flatten", s_opt.flatten, "rules to sample flattened");
  solve->add_option("--out-dir", s_out_dir, "write satisfying inputs as files");
  solve->add_option("--stats", s_stats, "write per-generation stats (JSON lines) to a file");
  solve->add_option("--jobs", s_jobs, "parallel constraint evaluation threads");
  solve->add_option("--budget-ms", s_budget_ms, "wall-clock budget in milliseconds");

  // coverage
  auto* coverage = app.add_subcommand("coverage", "k-path coverage of inputs under a grammar");
  std::string c_grammar, c_dir;
  std::uint32_t c_k = 5;
  bool c_json = false;
  coverage->add_option("grammar", c_grammar, "grammar file (.gbnf)")->required();
  coverage->add_option("input-dir", c_dir, "directory of input files")->required();
  coverage->add_option("--k", c_k, "maximum path length in nodes");
  coverage->add_flag("--json", c_json, "machine-readable output");

  // bench
  auto* bench = app.add_subcommand("bench", "profile operations and fit per-node cost models");
  CommonGen b_opt;
  std::string b_ops = "generate,check,mutate,crossover";
  std::string b_budget = "30s", b_json, b_constraints;
  bool b_report = false;
  std::optional<std::uint64_t> b_seed;
  bench->add_option("grammar", b_opt.grammar_path, "grammar file (.gbnf)")->required();
  bench->add_option("--ops", b_ops, "comma-separated: generate,check,mutate,crossover");
  bench->add_option("--budget", b_budget, "total sampling budget (e.g. 30s, 500ms)");
  bench->add_option("--backend", b_opt.backend, "static|dynamic")
      ->check(CLI::IsMember({"static", "dynamic"}));
  bench->add_option("--seed", b_seed, "PRNG seed");
  bench->add_option("--json", b_json, "write raw samples as JSON lines");
  bench->add_option("--constraints", b_constraints, "constraint spec for the check op");
  bench->add_option("--max-depth", b_opt.max_depth, "generation depth limit");
  bench->add_flag("--report", b_report, "print fitted cost-model rows");

  // report
  auto* report = app.add_subcommand("report", "fit cost models from bench JSON lines");
  std::vector<std::string> r_files;
  report->add_option("samples", r_files, "bench --json output files")->required();

  // graph
  auto* graph_cmd = app.add_subcommand("graph", "inspect the grammar graph");
  std::string gr_grammar, gr_out;
  bool gr_dot = false;
  graph_cmd->add_option("grammar", gr_grammar, "grammar file (.gbnf)")->required();
  graph_cmd->add_flag("--dot", gr_dot, "emit Graphviz text (indirect edges dashed)");
  graph_cmd->add_option("-o,--out", gr_out, "write to a file instead of stdout");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*transpile) return cmd_transpile(t_grammar, t_out, out, err);
    if (*generate) {
      g_opt.seed = g_seed;
      return cmd_generate(g_opt, g_count, g_out_dir, corpus_entries, out, err);
    }
    if (*solve) {
      s_opt.seed = s_seed;
      s_params.budget_ms = s_budget_ms;
      return cmd_solve(s_opt, s_constraints, s_params, s_algo, s_out_dir, s_stats, s_jobs,
                       corpus_entries, out, err);
    }
    if (*coverage) return cmd_coverage(c_grammar, c_k, c_dir, c_json, out, err);
    if (*bench) {
      b_opt.seed = b_seed;
      return cmd_bench(b_opt, b_ops, b_budget, b_json, b_constraints, b_report, corpus_entries,
                       out, err);
    }
    if (*report) return cmd_report(r_files, out);
    if (*graph_cmd) return cmd_graph(gr_grammar, gr_dot, gr_out, out, err);
  } catch (const GrammarError& e) {
    err << "error: " << e.what() << " (line " << e.line << ", col " << e.column << ")\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

}  // namespace gevo
