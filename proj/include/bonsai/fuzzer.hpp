#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "bonsai/sampler.hpp"
#include "bonsai/target.hpp"

namespace bonsai {

enum class ValidityMode { Restricted, Unrestricted };

inline char mode_letter(ValidityMode m) { return m == ValidityMode::Restricted ? 'r' : 'u'; }

struct FuzzerConfig {
  SizeBounds bounds;
  ValidityMode mode = ValidityMode::Unrestricted;
  uint64_t budget = 1;         // target executions, seeds included
  uint64_t prng_seed = 0;
  int mutation_fanout = 16;    // children per corpus element per cycle
  uint64_t stop_on_stagnation = 0;  // 0 = off; else stop after this many
                                    // admission-free executions

  // Directory/config identity, e.g. m2n1d3u.
  std::string id() const;
};

struct SavedInput {
  std::string text;
  ChoiceSequence choices;      // replays to text under provenance bounds
  ExecutionFeedback feedback;
  size_t size_bytes = 0;       // whitespace-excluded length
  std::string provenance;      // config id that saved it
  // Branches that were novel at admission time, and whether admission came
  // via the valid-coverage clause; drives reduction predicates.
  std::set<int> novel_branches;
  bool via_valid_clause = false;
};

struct Corpus {
  std::vector<SavedInput> members;
  std::set<int> cumulative_coverage;
  std::set<int> cumulative_valid_coverage;
  uint64_t executions = 0;
  std::string failure;  // non-empty when a run aborted; members hold the partial corpus
};

// Seed inputs as handed between lattice nodes: text plus its recorded choices.
struct SeedInput {
  std::string text;
  ChoiceSequence choices;
};

// Interestingness. Unrestricted: new coverage overall, or valid with new
// coverage among valid inputs. Restricted: valid with new valid-coverage only.
bool is_interesting(const ExecutionFeedback& fb, const Corpus& corpus, ValidityMode mode);

// Point-mutates k >= 1 recorded choices (k geometric, mean 2, capped at the
// sequence length) and replays under bounds b. Total: an empty sequence
// degenerates to a fresh bounded sample.
SampleResult mutate(const SavedInput& input, const Grammar& g, const SizeBounds& b, Rng& rng);

struct RunTrace {
  uint64_t executions = 0;
  uint64_t admissions = 0;
};

// The coverage-guided bounded grammar fuzzing loop. Seeds are
// executed first (admitted when interesting, retained as mutation parents for
// the first cycle either way); then corpus members are cycled in order, each
// yielding cfg.mutation_fanout mutants, until the execution budget is spent.
Corpus cbgf_run(const Target& target, const Grammar& g, const FuzzerConfig& cfg,
                const std::vector<SeedInput>& seeds, RunTrace* trace = nullptr);

// Corpus directory layout: <dir>/input_<k>.txt + input_<k>.meta.json and a
// summary.json with the run-level counters.
void save_corpus(const Corpus& corpus, const std::string& dir);
Corpus load_corpus(const std::string& dir);
std::vector<SeedInput> corpus_as_seeds(const Corpus& corpus);

}  // namespace bonsai
