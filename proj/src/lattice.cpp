#include "bonsai/lattice.hpp"

#include <algorithm>
#include <map>

#include <json.hpp>

#include "bonsai/rng.hpp"
#include "bonsai/util.hpp"

#ifdef BONSAI_HAVE_OPENMP
#include <omp.h>
#endif

namespace bonsai {

using nlohmann::json;

bool leq(const NodeId& a, const NodeId& b) {
  if (!(a.m <= b.m && a.n <= b.n && a.d <= b.d)) return false;
  if (a.v.has_value() != b.v.has_value()) return false;
  if (!a.v.has_value()) return true;
  // v <= v'  iff  v == v' or v' == u.
  return *a.v == *b.v || *b.v == ValidityMode::Unrestricted;
}

std::vector<NodeId> all_nodes(const LatticeSpec& spec) {
  std::vector<NodeId> out;
  out.reserve(spec.node_count());
  for (int m = 1; m <= spec.top_idents; ++m)
    for (int n = 1; n <= spec.top_items; ++n)
      for (int d = 1; d <= spec.top_depth; ++d) {
        if (spec.extended) {
          out.push_back({m, n, d, ValidityMode::Restricted});
          out.push_back({m, n, d, ValidityMode::Unrestricted});
        } else {
          out.push_back({m, n, d, std::nullopt});
        }
      }
  std::sort(out.begin(), out.end());
  return out;
}

// Covering steps in a product of chains: exactly one coordinate moves by one.
std::vector<NodeId> successors(const NodeId& a, const LatticeSpec& spec) {
  std::vector<NodeId> out;
  if (a.m + 1 <= spec.top_idents) out.push_back({a.m + 1, a.n, a.d, a.v});
  if (a.n + 1 <= spec.top_items) out.push_back({a.m, a.n + 1, a.d, a.v});
  if (a.d + 1 <= spec.top_depth) out.push_back({a.m, a.n, a.d + 1, a.v});
  if (spec.extended && a.v == ValidityMode::Restricted)
    out.push_back({a.m, a.n, a.d, ValidityMode::Unrestricted});
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<NodeId> predecessors(const NodeId& a, const LatticeSpec& spec) {
  (void)spec;
  std::vector<NodeId> out;
  if (a.m > 1) out.push_back({a.m - 1, a.n, a.d, a.v});
  if (a.n > 1) out.push_back({a.m, a.n - 1, a.d, a.v});
  if (a.d > 1) out.push_back({a.m, a.n, a.d - 1, a.v});
  if (a.v == ValidityMode::Unrestricted)
    out.push_back({a.m, a.n, a.d, ValidityMode::Restricted});
  std::sort(out.begin(), out.end());
  return out;
}

NodeId bottom_node(const LatticeSpec& spec) {
  return {1, 1, 1,
          spec.extended ? std::optional<ValidityMode>(ValidityMode::Restricted) : std::nullopt};
}

NodeId top_node(const LatticeSpec& spec) {
  return {spec.top_idents, spec.top_items, spec.top_depth,
          spec.extended ? std::optional<ValidityMode>(ValidityMode::Unrestricted)
                        : std::nullopt};
}

uint64_t node_prng_seed(uint64_t global_seed, const NodeId& id) {
  return derive_seed(global_seed,
                     {static_cast<uint64_t>(id.m), static_cast<uint64_t>(id.n),
                      static_cast<uint64_t>(id.d),
                      id.v ? (*id.v == ValidityMode::Restricted ? 1ULL : 2ULL) : 0ULL});
}

uint64_t bootstrap_prng_seed(uint64_t global_seed) {
  return derive_seed(global_seed, {0xb007ULL});
}

std::vector<SeedInput> prepare_seeds(const std::vector<const Corpus*>& predecessor_corpora) {
  struct Entry {
    size_t size;
    SeedInput seed;
  };
  std::vector<Entry> entries;
  std::map<std::string, bool> seen;
  for (const Corpus* corpus : predecessor_corpora)
    for (const SavedInput& s : corpus->members) {
      if (seen.count(s.text)) continue;  // earliest provenance wins
      seen[s.text] = true;
      entries.push_back({s.size_bytes, {s.text, s.choices}});
    }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    if (a.size != b.size) return a.size < b.size;
    return a.seed.text < b.seed.text;
  });
  std::vector<SeedInput> seeds;
  seeds.reserve(entries.size());
  for (Entry& e : entries) seeds.push_back(std::move(e.seed));
  return seeds;
}

BonsaiResult bonsai_run(const Target& target, const Grammar& g, const BonsaiOptions& opt) {
  BonsaiResult result;
  const std::vector<NodeId> nodes = all_nodes(opt.spec);

  int max_rank = 0;
  for (const NodeId& id : nodes) max_rank = std::max(max_rank, id.rank());

  std::map<std::string, const Corpus*> done;  // config id -> completed corpus
  std::vector<Corpus> storage(nodes.size());
  std::vector<size_t> schedule_order;
  uint64_t scheduled = 0;  // nodes scheduled so far, for budget_remainder

  const NodeId bottom = bottom_node(opt.spec);

  for (int rank = 0; rank <= max_rank; ++rank) {
    std::vector<size_t> level;
    for (size_t i = 0; i < nodes.size(); ++i)
      if (nodes[i].rank() == rank) level.push_back(i);

    // Seed lists are prepared up front; nodes in a rank depend only on
    // lower ranks, so the parallel section below shares nothing mutable.
    std::vector<std::vector<SeedInput>> seed_lists(level.size());
    std::vector<FuzzerConfig> cfgs(level.size());
    for (size_t k = 0; k < level.size(); ++k) {
      const NodeId& id = nodes[level[k]];
      if (id == bottom) {
        FreshSource src(bootstrap_prng_seed(opt.global_seed));
        SizeBounds b{id.m, id.n, id.d};
        try {
          SampleResult r = bounded_sample(g, b, src);
          seed_lists[k] = {{r.text, r.choices}};
        } catch (const SamplingStuckError&) {
          // cbgf_run's internal fresh-sample path reports the failure.
          seed_lists[k] = {};
        }
      } else {
        std::vector<const Corpus*> pred_corpora;
        for (const NodeId& p : predecessors(id, opt.spec))
          pred_corpora.push_back(done.at(p.config_id()));
        seed_lists[k] = prepare_seeds(pred_corpora);
      }
      FuzzerConfig cfg;
      cfg.bounds = {id.m, id.n, id.d};
      cfg.mode = id.run_mode();
      cfg.budget = opt.node_budget + (scheduled + k < opt.budget_remainder ? 1 : 0);
      cfg.prng_seed = node_prng_seed(opt.global_seed, id);
      cfg.mutation_fanout = opt.mutation_fanout;
      cfg.stop_on_stagnation = opt.stop_on_stagnation;
      cfgs[k] = cfg;
    }

    if (opt.jobs > 1) {
#ifdef BONSAI_HAVE_OPENMP
#pragma omp parallel for num_threads(opt.jobs) schedule(dynamic)
      for (size_t k = 0; k < level.size(); ++k)
        storage[level[k]] = cbgf_run(target, g, cfgs[k], seed_lists[k]);
#else
      for (size_t k = 0; k < level.size(); ++k)
        storage[level[k]] = cbgf_run(target, g, cfgs[k], seed_lists[k]);
#endif
    } else {
      // Serial reference path.
      for (size_t k = 0; k < level.size(); ++k)
        storage[level[k]] = cbgf_run(target, g, cfgs[k], seed_lists[k]);
    }

    for (size_t k = 0; k < level.size(); ++k) {
      const size_t idx = level[k];
      const NodeId& id = nodes[idx];
      done[id.config_id()] = &storage[idx];
      schedule_order.push_back(idx);

      NodeReport report;
      report.id = id;
      report.rank = rank;
      report.budget = cfgs[k].budget;
      report.prng_seed = cfgs[k].prng_seed;
      report.seeds_in = seed_lists[k].size();
      report.corpus_out = storage[idx].members.size();
      report.executions = storage[idx].executions;
      report.failure = storage[idx].failure;
      if (!report.failure.empty()) result.any_failure = true;
      result.reports.push_back(std::move(report));
    }
    scheduled += level.size();
  }

  for (size_t idx : schedule_order)
    result.nodes.emplace_back(nodes[idx], storage[idx]);
  result.final_corpus = storage[static_cast<size_t>(
      std::find(nodes.begin(), nodes.end(), top_node(opt.spec)) - nodes.begin())];
  return result;
}

std::string lattice_manifest_json(const BonsaiResult& result, const BonsaiOptions& opt) {
  json j;
  j["top"] = {opt.spec.top_idents, opt.spec.top_items, opt.spec.top_depth};
  j["extended"] = opt.spec.extended;
  j["global_seed"] = opt.global_seed;
  j["node_budget"] = opt.node_budget;
  j["nodes"] = json::array();
  for (const NodeReport& r : result.reports) {
    json n;
    n["id"] = r.id.config_id();
    n["bounds"] = {r.id.m, r.id.n, r.id.d};
    n["mode"] = std::string(1, mode_letter(r.id.run_mode()));
    n["rank"] = r.rank;
    n["budget"] = r.budget;
    n["prng_seed"] = r.prng_seed;
    n["seeds_in"] = r.seeds_in;
    n["corpus_out"] = r.corpus_out;
    n["executions"] = r.executions;
    n["failure"] = r.failure;
    j["nodes"].push_back(std::move(n));
  }
  return j.dump(2) + "\n";
}

}  // namespace bonsai
