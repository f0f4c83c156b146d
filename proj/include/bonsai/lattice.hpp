#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bonsai/fuzzer.hpp"

namespace bonsai {

struct LatticeSpec {
  int top_idents = 1;  // M
  int top_items = 1;   // N
  int top_depth = 1;   // D
  bool extended = false;

  size_t node_count() const {
    return static_cast<size_t>(top_idents) * top_items * top_depth * (extended ? 2 : 1);
  }
};

// A CBGF in the lattice: bounds plus, in the extended lattice, the validity
// mode. Plain-lattice nodes carry no mode (they all run unrestricted).
struct NodeId {
  int m = 1;
  int n = 1;
  int d = 1;
  std::optional<ValidityMode> v;

  ValidityMode run_mode() const { return v.value_or(ValidityMode::Unrestricted); }
  std::string config_id() const {
    return "m" + std::to_string(m) + "n" + std::to_string(n) + "d" + std::to_string(d) +
           mode_letter(run_mode());
  }
  // Worklist levels: all predecessors of a node sit exactly one rank
  // below it.
  int rank() const {
    return (m - 1) + (n - 1) + (d - 1) + (v && *v == ValidityMode::Unrestricted ? 1 : 0);
  }

  bool operator==(const NodeId& o) const { return m == o.m && n == o.n && d == o.d && v == o.v; }
  bool operator<(const NodeId& o) const {  // canonical enumeration order
    if (m != o.m) return m < o.m;
    if (n != o.n) return n < o.n;
    if (d != o.d) return d < o.d;
    return v < o.v;
  }
};

bool leq(const NodeId& a, const NodeId& b);
std::vector<NodeId> successors(const NodeId& a, const LatticeSpec& spec);
std::vector<NodeId> predecessors(const NodeId& a, const LatticeSpec& spec);
std::vector<NodeId> all_nodes(const LatticeSpec& spec);  // canonical order
NodeId bottom_node(const LatticeSpec& spec);
NodeId top_node(const LatticeSpec& spec);

// Deterministic per-node PRNG stream and the bootstrap stream for the single
// random seed injected at the bottom node; both depend only on the global
// seed, never on the schedule.
uint64_t node_prng_seed(uint64_t global_seed, const NodeId& id);
uint64_t bootstrap_prng_seed(uint64_t global_seed);

struct BonsaiOptions {
  LatticeSpec spec;
  uint64_t node_budget = 1000;
  // The first budget_remainder nodes in schedule order get one extra
  // execution, so a total budget splits exactly across nodes.
  uint64_t budget_remainder = 0;
  uint64_t global_seed = 0;
  int jobs = 1;  // <= 1 runs the serial reference path
  int mutation_fanout = 16;
  uint64_t stop_on_stagnation = 0;
};

struct NodeReport {
  NodeId id;
  int rank = 0;
  uint64_t budget = 0;
  uint64_t prng_seed = 0;
  size_t seeds_in = 0;
  size_t corpus_out = 0;
  uint64_t executions = 0;
  std::string failure;
};

struct BonsaiResult {
  Corpus final_corpus;                           // corpus of the top node
  std::vector<std::pair<NodeId, Corpus>> nodes;  // schedule order
  std::vector<NodeReport> reports;               // schedule order
  bool any_failure = false;
};

// Runs the bottom node with one random seed, then every node
// rank by rank, each seeded with the size-sorted, text-deduplicated union of
// its predecessors' corpora. Nodes within a rank run concurrently when
// jobs > 1; results are independent of the schedule.
BonsaiResult bonsai_run(const Target& target, const Grammar& g, const BonsaiOptions& opt);

// Seed list preparation, exposed for tests: union of predecessor corpora,
// deduplicated by text keeping the earliest (canonical predecessor order)
// occurrence, sorted by whitespace-excluded size with lexicographic ties.
std::vector<SeedInput> prepare_seeds(const std::vector<const Corpus*>& predecessor_corpora);

std::string lattice_manifest_json(const BonsaiResult& result, const BonsaiOptions& opt);

}  // namespace bonsai
