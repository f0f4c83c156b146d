#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "bonsai/lattice.hpp"
#include "bonsai/metrics.hpp"
#include "bonsai/reducer.hpp"
#include "bonsai/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace bonsai;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct BoundsFlag {
  int m = 1, n = 1, d = 1;
};

BoundsFlag parse_bounds(const std::string& text) {
  BoundsFlag b;
  if (std::sscanf(text.c_str(), "%d,%d,%d", &b.m, &b.n, &b.d) != 3 || b.m < 1 || b.n < 1 ||
      b.d < 1)
    throw CLI::ValidationError("bounds", "expected m,n,d with each component >= 1");
  return b;
}

uint64_t resolve_seed(bool seed_set, uint64_t seed_flag) {
  if (seed_set) return seed_flag;
  if (const char* env = std::getenv("BONSAI_SEED")) return std::strtoull(env, nullptr, 0);
  return 42;
}

std::string timestamp_now() {
  auto now = std::chrono::system_clock::now();
  std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

void write_file(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
}

void write_manifest(const fs::path& out_dir, const std::string& command, const json& config) {
  json j;
  j["command"] = command;
  j["config"] = config;
  j["version"] = kVersion;
  j["timestamp"] = timestamp_now();
  write_file(out_dir / "manifest.json", j.dump(2) + "\n");
}

std::string load_grammar_source(const std::string& spec) {
  if (spec == "minilang" || spec == "arith") return make_target(spec)->grammar_source();
  std::ifstream in(spec, std::ios::binary);
  if (!in) throw GrammarError("cannot open grammar file '" + spec + "'");
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

// ---------------------------------------------------------------------------
// sample
// ---------------------------------------------------------------------------

int cmd_sample(const std::string& grammar_spec, const BoundsFlag& bounds, int count,
               uint64_t seed, const std::string& out_dir) {
  Grammar g = parse_grammar(load_grammar_source(grammar_spec));
  SizeBounds b{bounds.m, bounds.n, bounds.d};
  fs::create_directories(out_dir);

  for (int k = 0; k < count; ++k) {
    FreshSource src(derive_seed(seed, {static_cast<uint64_t>(k)}));
    SampleResult r = bounded_sample(g, b, src);
    Measure ms = measure(r.tree);
    write_file(fs::path(out_dir) / ("sample_" + std::to_string(k) + ".txt"), r.text);
    write_file(fs::path(out_dir) / ("sample_" + std::to_string(k) + ".choices.json"),
               choices_to_json(r.choices) + "\n");
    std::cout << "sample_" << k << ": idents=" << ms.idents << " items=" << ms.items
              << " depth=" << ms.depth << "\n";
  }

  write_manifest(out_dir, "sample",
                 {{"grammar", grammar_spec},
                  {"bounds", {bounds.m, bounds.n, bounds.d}},
                  {"count", count},
                  {"seed", seed}});
  return kExitOk;
}

// ---------------------------------------------------------------------------
// fuzz
// ---------------------------------------------------------------------------

int cmd_fuzz(const std::string& target_name, const BoundsFlag& bounds, const std::string& mode,
             uint64_t budget, uint64_t seed, const std::string& seeds_dir,
             const std::string& out_dir, int fanout, uint64_t stagnation) {
  std::unique_ptr<Target> target = make_target(target_name);
  const Grammar& g = target->grammar();

  FuzzerConfig cfg;
  cfg.bounds = {bounds.m, bounds.n, bounds.d};
  cfg.mode = mode == "r" ? ValidityMode::Restricted : ValidityMode::Unrestricted;
  cfg.budget = budget;
  cfg.prng_seed = derive_seed(seed, {0xf0220ULL});
  cfg.mutation_fanout = fanout;
  cfg.stop_on_stagnation = stagnation;

  std::vector<SeedInput> seeds;
  if (!seeds_dir.empty()) {
    Corpus loaded = load_corpus(seeds_dir);
    seeds = corpus_as_seeds(loaded);
  } else {
    FreshSource src(bootstrap_prng_seed(seed));
    SampleResult r = bounded_sample(g, cfg.bounds, src);
    seeds = {{r.text, r.choices}};
  }

  Corpus corpus = cbgf_run(*target, g, cfg, seeds);
  save_corpus(corpus, (fs::path(out_dir) / "corpus" / cfg.id()).string());
  write_manifest(out_dir, "fuzz",
                 {{"target", target_name},
                  {"bounds", {bounds.m, bounds.n, bounds.d}},
                  {"mode", mode},
                  {"budget", budget},
                  {"seed", seed},
                  {"seeds_dir", seeds_dir},
                  {"fanout", fanout},
                  {"stop_on_stagnation", stagnation}});

  std::cout << "config " << cfg.id() << ": " << corpus.members.size() << " saved inputs, "
            << corpus.executions << " executions\n";
  if (!corpus.failure.empty()) {
    std::cerr << "run aborted: " << corpus.failure << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// bonsai
// ---------------------------------------------------------------------------

int run_bonsai(const Target& target, const BonsaiOptions& opt, const fs::path& out_dir) {
  BonsaiResult result = bonsai_run(target, target.grammar(), opt);

  for (const auto& [id, corpus] : result.nodes)
    save_corpus(corpus, (out_dir / "corpus" / id.config_id()).string());
  save_corpus(result.final_corpus, (out_dir / "final").string());
  write_file(out_dir / "lattice.json", lattice_manifest_json(result, opt));

  std::cout << "lattice " << (opt.spec.extended ? "extended " : "") << "top ("
            << opt.spec.top_idents << "," << opt.spec.top_items << "," << opt.spec.top_depth
            << "): " << result.nodes.size() << " nodes, final corpus "
            << result.final_corpus.members.size() << " inputs\n";
  if (result.any_failure) {
    std::cerr << "one or more nodes failed; partial corpora written\n";
    return kExitRuntime;
  }
  return kExitOk;
}

int cmd_bonsai(const std::string& target_name, const BoundsFlag& top, bool extended,
               uint64_t node_budget, uint64_t seed, int jobs, const std::string& out_dir,
               int fanout, uint64_t stagnation) {
  std::unique_ptr<Target> target = make_target(target_name);
  BonsaiOptions opt;
  opt.spec = {top.m, top.n, top.d, extended};
  opt.node_budget = node_budget;
  opt.global_seed = seed;
  opt.jobs = jobs;
  opt.mutation_fanout = fanout;
  opt.stop_on_stagnation = stagnation;

  write_manifest(out_dir, "bonsai",
                 {{"target", target_name},
                  {"top", {top.m, top.n, top.d}},
                  {"extended", extended},
                  {"node_budget", node_budget},
                  {"seed", seed},
                  {"jobs", jobs},
                  {"fanout", fanout},
                  {"stop_on_stagnation", stagnation}});
  return run_bonsai(*target, opt, out_dir);
}

// ---------------------------------------------------------------------------
// reduce
// ---------------------------------------------------------------------------

int cmd_reduce(const std::string& corpus_dir, const std::string& target_name,
               const std::string& mode, const std::string& out_dir, bool full_coverage,
               int jobs) {
  std::unique_ptr<Target> target = make_target(target_name);
  Corpus corpus = load_corpus(corpus_dir);

  ReduceOptions options;
  options.mode = mode == "char" ? ReduceMode::Char : ReduceMode::Hier;
  options.full_coverage = full_coverage;
  options.jobs = jobs;

  auto [reduced, report] = reduce_corpus(corpus, *target, options);
  save_corpus(reduced, (fs::path(out_dir) / "corpus").string());
  write_file(fs::path(out_dir) / "report.json", report.to_json());
  write_manifest(out_dir, "reduce",
                 {{"corpus", corpus_dir},
                  {"target", target_name},
                  {"mode", mode},
                  {"full_coverage_predicate", full_coverage},
                  {"jobs", jobs}});

  std::cout << "reduced " << report.members.size() << " inputs: mean size "
            << report.mean_size_before << " -> " << report.mean_size_after << " ("
            << report.total_evals << " predicate evaluations)\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// stats
// ---------------------------------------------------------------------------

int cmd_stats(const std::string& corpus_dir, const std::string& target_name,
              const std::string& out_dir, int jobs) {
  std::unique_ptr<Target> target = make_target(target_name);
  Corpus corpus = load_corpus(corpus_dir);
  CorpusStats s = stats(corpus, *target, jobs);
  if (!out_dir.empty()) {
    write_file(fs::path(out_dir) / "stats.json", stats_to_json(s));
    write_file(fs::path(out_dir) / "members.csv", stats_to_csv(s));
    write_manifest(out_dir, "stats", {{"corpus", corpus_dir}, {"target", target_name}});
  }
  std::cout << stats_to_json(s);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// compare: Bonsai vs fuzz-then-reduce at equal execution budget
// ---------------------------------------------------------------------------

json stats_as_json(const CorpusStats& s) { return json::parse(stats_to_json(s)); }

struct Welford {
  double sum = 0, sumsq = 0;
  size_t n = 0;
  void add(double v) {
    sum += v;
    sumsq += v * v;
    ++n;
  }
  double mean() const { return n ? sum / n : 0; }
  double stdev() const {
    if (n < 2) return 0;
    double m = mean();
    return std::sqrt(std::max(0.0, (sumsq - n * m * m) / (n - 1)));
  }
};

int cmd_compare(const std::string& target_name, const BoundsFlag& top, uint64_t budget_total,
                int reps, uint64_t seed, const std::string& out_dir, int jobs, bool extended,
                int fanout) {
  std::unique_ptr<Target> target = make_target(target_name);
  const Grammar& g = target->grammar();

  LatticeSpec spec{top.m, top.n, top.d, extended};
  const size_t nodes = spec.node_count();

  write_manifest(out_dir, "compare",
                 {{"target", target_name},
                  {"top", {top.m, top.n, top.d}},
                  {"extended", extended},
                  {"budget_total", budget_total},
                  {"reps", reps},
                  {"seed", seed},
                  {"jobs", jobs},
                  {"fanout", fanout}});

  json reps_json = json::array();
  Welford agg_size_a, agg_size_b, agg_valid_a, agg_valid_b, agg_cov_a, agg_cov_b, agg_count_a,
      agg_count_b;
  std::ostringstream tables;
  bool all_ok = true;

  for (int r = 0; r < reps; ++r) {
    const uint64_t rep_seed = derive_seed(seed, {0xc09a4eULL, static_cast<uint64_t>(r)});
    const fs::path rep_dir = fs::path(out_dir) / ("rep" + std::to_string(r));

    // Bonsai leg: budget split equally across lattice nodes.
    BonsaiOptions opt;
    opt.spec = spec;
    opt.node_budget = budget_total / nodes;
    opt.budget_remainder = budget_total % nodes;
    opt.global_seed = rep_seed;
    opt.jobs = jobs;
    opt.mutation_fanout = fanout;
    BonsaiResult bonsai = bonsai_run(*target, g, opt);
    uint64_t bonsai_execs = 0;
    for (const NodeReport& nr : bonsai.reports) bonsai_execs += nr.executions;
    for (const auto& [id, corpus] : bonsai.nodes)
      save_corpus(corpus, (rep_dir / "bonsai" / "corpus" / id.config_id()).string());
    save_corpus(bonsai.final_corpus, (rep_dir / "bonsai" / "final").string());
    write_file(rep_dir / "bonsai" / "lattice.json", lattice_manifest_json(bonsai, opt));

    // Baseline leg: one CBGF at top bounds with the same total budget,
    // then hierarchical reduction.
    FuzzerConfig base_cfg;
    base_cfg.bounds = {top.m, top.n, top.d};
    base_cfg.mode = ValidityMode::Unrestricted;
    base_cfg.budget = budget_total;
    base_cfg.prng_seed = derive_seed(rep_seed, {0xba5e11ULL});
    base_cfg.mutation_fanout = fanout;
    FreshSource src(bootstrap_prng_seed(derive_seed(rep_seed, {0xba5e11ULL})));
    SampleResult boot = bounded_sample(g, base_cfg.bounds, src);
    Corpus base_raw = cbgf_run(*target, g, base_cfg, {{boot.text, boot.choices}});
    save_corpus(base_raw, (rep_dir / "baseline" / "corpus" / base_cfg.id()).string());

    ReduceOptions red;
    red.mode = ReduceMode::Hier;
    red.jobs = jobs;
    auto [base_reduced, report] = reduce_corpus(base_raw, *target, red);
    save_corpus(base_reduced, (rep_dir / "baseline" / "reduced").string());
    write_file(rep_dir / "baseline" / "report.json", report.to_json());

    // Equal-budget accounting, by construction.
    if (bonsai_execs != base_raw.executions) {
      std::cerr << "budget accounting mismatch: bonsai " << bonsai_execs << " vs baseline "
                << base_raw.executions << "\n";
      all_ok = false;
    }

    CorpusStats sa = stats(bonsai.final_corpus, *target, jobs);
    CorpusStats sb = stats(base_reduced, *target, jobs);
    write_file(rep_dir / "bonsai" / "stats.json", stats_to_json(sa));
    write_file(rep_dir / "bonsai" / "members.csv", stats_to_csv(sa));
    write_file(rep_dir / "baseline" / "stats.json", stats_to_json(sb));
    write_file(rep_dir / "baseline" / "members.csv", stats_to_csv(sb));

    StatsDelta delta = compare(sa, sb);
    json rep_entry;
    rep_entry["bonsai"] = stats_as_json(sa);
    rep_entry["baseline"] = stats_as_json(sb);
    rep_entry["delta"] = json::parse(delta_to_json(delta));
    rep_entry["bonsai_executions"] = bonsai_execs;
    rep_entry["baseline_executions"] = base_raw.executions;
    reps_json.push_back(std::move(rep_entry));

    agg_size_a.add(sa.size_mean);
    agg_size_b.add(sb.size_mean);
    agg_valid_a.add(sa.validity_fraction);
    agg_valid_b.add(sb.validity_fraction);
    agg_cov_a.add(static_cast<double>(sa.has_semantic_split ? sa.semantic_covered : sa.covered));
    agg_cov_b.add(static_cast<double>(sb.has_semantic_split ? sb.semantic_covered : sb.covered));
    agg_count_a.add(static_cast<double>(sa.file_count));
    agg_count_b.add(static_cast<double>(sb.file_count));

    tables << "rep " << r << ":\n"
           << comparison_table("bonsai", sa, "baseline", sb) << "\n";
    std::cout << "rep " << r << " done: bonsai mean size " << sa.size_mean
              << ", baseline mean size " << sb.size_mean << "\n";
  }

  auto agg = [](const Welford& w) {
    return json{{"mean", w.mean()}, {"stdev", w.stdev()}};
  };
  json out;
  out["reps"] = std::move(reps_json);
  out["aggregate"] = {{"bonsai",
                       {{"size_mean", agg(agg_size_a)},
                        {"validity_fraction", agg(agg_valid_a)},
                        {"coverage", agg(agg_cov_a)},
                        {"file_count", agg(agg_count_a)}}},
                      {"baseline",
                       {{"size_mean", agg(agg_size_b)},
                        {"validity_fraction", agg(agg_valid_b)},
                        {"coverage", agg(agg_cov_b)},
                        {"file_count", agg(agg_count_b)}}}};
  write_file(fs::path(out_dir) / "comparison.json", out.dump(2) + "\n");

  std::ostringstream summary;
  summary << "bonsai vs fuzz-then-reduce on " << target_name << " (" << reps
          << " repetitions, " << budget_total << " executions per leg)\n\n"
          << tables.str();
  summary << "aggregate (mean +/- stdev over repetitions):\n";
  auto line = [&](const char* label, const Welford& a, const Welford& b) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "  %-26s %10.3f +/- %-8.3f %10.3f +/- %-8.3f\n", label,
                  a.mean(), a.stdev(), b.mean(), b.stdev());
    summary << buf;
  };
  summary << "  metric                         bonsai                 baseline\n";
  line("mean size (non-ws chars)", agg_size_a, agg_size_b);
  line("validity fraction", agg_valid_a, agg_valid_b);
  line("semantic branch coverage", agg_cov_a, agg_cov_b);
  line("file count", agg_count_a, agg_count_b);
  write_file(fs::path(out_dir) / "comparison.txt", summary.str());
  std::cout << summary.str();

  return all_ok ? kExitOk : kExitRuntime;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bonsai-fuzzing: growing concise test corpora bottom-up"};
  app.require_subcommand(1);

  std::string grammar_spec, target_name = "minilang", mode = "u", seeds_dir, corpus_dir,
              out_dir = "out", reduce_mode = "hier", bounds_text = "1,1,1",
              top_text = "3,3,3";
  int count = 10, jobs = 1, reps = 5, fanout = 16;
  uint64_t budget = 10000, node_budget = 1000, budget_total = 270000, seed_flag = 0,
           stagnation = 0;
  bool extended = false, full_coverage = false;
  bool seed_set = false;

  auto add_seed = [&](CLI::App* cmd) {
    cmd->add_option("--seed", seed_flag, "global PRNG seed (default: $BONSAI_SEED or 42)")
        ->each([&](const std::string&) { seed_set = true; });
  };

  CLI::App* sample = app.add_subcommand("sample", "draw size-bounded samples from a grammar");
  sample->add_option("--grammar", grammar_spec, "grammar file, or builtin: minilang|arith")
      ->required();
  sample->add_option("--bounds", bounds_text, "size bounds m,n,d");
  sample->add_option("--count", count, "number of samples");
  add_seed(sample);
  sample->add_option("--out", out_dir, "output directory");

  CLI::App* fuzz = app.add_subcommand("fuzz", "run one coverage-guided bounded grammar fuzzer");
  fuzz->add_option("--target", target_name, "target: minilang|arith")
      ->required()
      ->check(CLI::IsMember({"minilang", "arith"}));
  fuzz->add_option("--bounds", bounds_text, "size bounds m,n,d");
  fuzz->add_option("--mode", mode, "interestingness: r (restricted) | u (unrestricted)")
      ->check(CLI::IsMember({"r", "u"}));
  fuzz->add_option("--budget", budget, "target executions");
  add_seed(fuzz);
  fuzz->add_option("--seeds-dir", seeds_dir, "seed corpus directory (default: one random seed)");
  fuzz->add_option("--out", out_dir, "output directory");
  fuzz->add_option("--fanout", fanout, "mutation children per corpus element per cycle");
  fuzz->add_option("--stop-on-stagnation", stagnation,
                   "stop after this many admission-free executions (0 = off)");

  CLI::App* bonsai_cmd = app.add_subcommand("bonsai", "run the full lattice of fuzzers");
  bonsai_cmd->add_option("--target", target_name, "target: minilang|arith")
      ->required()
      ->check(CLI::IsMember({"minilang", "arith"}));
  bonsai_cmd->add_option("--top", top_text, "top bounds M,N,D");
  bonsai_cmd->add_flag("--extended", extended, "use the extended (validity) lattice");
  bonsai_cmd->add_option("--node-budget", node_budget, "target executions per lattice node");
  add_seed(bonsai_cmd);
  bonsai_cmd->add_option("--jobs", jobs, "concurrent lattice nodes (1 = serial)");
  bonsai_cmd->add_option("--out", out_dir, "output directory");
  bonsai_cmd->add_option("--fanout", fanout, "mutation children per corpus element per cycle");
  bonsai_cmd->add_option("--stop-on-stagnation", stagnation,
                         "per-node early stop after this many admission-free executions");

  CLI::App* reduce = app.add_subcommand("reduce", "minimize every input of a corpus");
  reduce->add_option("--corpus", corpus_dir, "corpus directory (input_<k>.txt + sidecars)")
      ->required();
  reduce->add_option("--target", target_name, "target: minilang|arith")
      ->required()
      ->check(CLI::IsMember({"minilang", "arith"}));
  reduce->add_option("--mode", reduce_mode, "char (ddmin) | hier (grammar-aware)")
      ->check(CLI::IsMember({"char", "hier"}));
  reduce->add_option("--out", out_dir, "output directory");
  reduce->add_flag("--full-coverage-predicate", full_coverage,
                   "require the full original coverage set instead of admission-novel branches");
  reduce->add_option("--jobs", jobs, "concurrent member reductions");

  CLI::App* compare_cmd =
      app.add_subcommand("compare", "bonsai vs fuzz-then-reduce at equal execution budget");
  compare_cmd->add_option("--target", target_name, "target: minilang|arith")
      ->required()
      ->check(CLI::IsMember({"minilang", "arith"}));
  compare_cmd->add_option("--top", top_text, "top bounds M,N,D");
  bool plain_lattice = false;
  compare_cmd->add_flag("--plain", plain_lattice,
                        "run the bonsai leg on the plain lattice (default: extended)");
  compare_cmd->add_option("--budget-total", budget_total, "total executions per leg");
  compare_cmd->add_option("--reps", reps, "repetitions with distinct seeds");
  add_seed(compare_cmd);
  compare_cmd->add_option("--out", out_dir, "output directory");
  compare_cmd->add_option("--jobs", jobs, "concurrent lattice nodes / reductions");
  compare_cmd->add_option("--fanout", fanout, "mutation children per corpus element per cycle");

  CLI::App* stats_cmd = app.add_subcommand("stats", "recompute corpus-quality measures");
  stats_cmd->add_option("--corpus", corpus_dir, "corpus directory")->required();
  stats_cmd->add_option("--target", target_name, "target: minilang|arith")
      ->required()
      ->check(CLI::IsMember({"minilang", "arith"}));
  stats_cmd->add_option("--out", out_dir, "output directory (optional)");
  stats_cmd->add_option("--jobs", jobs, "concurrent re-executions");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  const uint64_t seed = resolve_seed(seed_set, seed_flag);

  try {
    if (app.got_subcommand(sample))
      return cmd_sample(grammar_spec, parse_bounds(bounds_text), count, seed, out_dir);
    if (app.got_subcommand(fuzz))
      return cmd_fuzz(target_name, parse_bounds(bounds_text), mode, budget, seed, seeds_dir,
                      out_dir, fanout, stagnation);
    if (app.got_subcommand(bonsai_cmd))
      return cmd_bonsai(target_name, parse_bounds(top_text), extended, node_budget, seed, jobs,
                        out_dir, fanout, stagnation);
    if (app.got_subcommand(reduce))
      return cmd_reduce(corpus_dir, target_name, reduce_mode, out_dir, full_coverage, jobs);
    if (app.got_subcommand(compare_cmd))
      return cmd_compare(target_name, parse_bounds(top_text), budget_total, reps, seed, out_dir,
                         jobs, !plain_lattice, fanout);
    if (app.got_subcommand(stats_cmd)) return cmd_stats(corpus_dir, target_name, out_dir, jobs);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const GrammarError& e) {
    std::cerr << "grammar error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const TargetError& e) {
    std::cerr << "target error: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitConfig;
}
