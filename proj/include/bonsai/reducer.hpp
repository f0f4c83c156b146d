#pragma once

#include <functional>
#include <string>
#include <vector>

#include "bonsai/fuzzer.hpp"
#include "bonsai/grammar.hpp"

namespace bonsai {

// Deterministic interestingness test over candidate texts.
using Predicate = std::function<bool(const std::string&)>;

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class PredicateFlakyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Grammar-native parsing back to derivation trees (memoized recursive descent
// with ordered-alternative backtracking; repetitions match greedily).
// ---------------------------------------------------------------------------

TreeNode parse_to_tree(const std::string& text, const Grammar& g);

// Recovers the choice sequence that makes bounded_sample reproduce this tree.
ChoiceSequence choices_from_tree(const TreeNode& t, const Grammar& g);

// Smallest-text terminal-reachable expansion of a nonterminal (min
// whitespace-excluded length, ties broken lexicographically).
TreeNode minimal_expansion(const Grammar& g, const std::string& nonterminal);

// ---------------------------------------------------------------------------
// Reduction
// ---------------------------------------------------------------------------

struct ReductionStats {
  uint64_t predicate_evals = 0;
  std::vector<std::pair<std::string, size_t>> passes;  // pass label -> size after
};

// Character-level delta debugging. Returns a subsequence of `input` that
// satisfies p and is 1-minimal: removing any single remaining character
// breaks p. Throws PredicateFlakyError when p(input) is false.
std::string ddmin(const std::string& input, const Predicate& p, ReductionStats* stats = nullptr);

// Grammar-aware hierarchical reduction: repetition-item delta debugging plus
// minimal-expansion substitution, to a fixpoint. Every intermediate candidate
// is a linearized derivation tree, hence syntactically valid under g.
std::string hier_reduce(const std::string& input, const Grammar& g, const Predicate& p,
                        ReductionStats* stats = nullptr,
                        const std::function<void(const std::string&)>& candidate_hook = {});

enum class ReduceMode { Char, Hier };

struct ReduceOptions {
  ReduceMode mode = ReduceMode::Hier;
  // Default predicate: candidate still covers the member's admission-time
  // novel branches (and is valid when the member was admitted via the valid
  // clause). With full_coverage, candidate must retain the member's entire
  // original coverage set instead.
  bool full_coverage = false;
  int jobs = 1;
};

struct MemberReduction {
  size_t index = 0;
  size_t original_size = 0;
  size_t reduced_size = 0;
  uint64_t predicate_evals = 0;
  std::vector<std::pair<std::string, size_t>> passes;
  std::string failure;  // non-empty when this member was left unreduced
};

struct ReductionReport {
  std::vector<MemberReduction> members;
  uint64_t total_evals = 0;
  double mean_size_before = 0.0;
  double mean_size_after = 0.0;
  std::string to_json() const;
};

// Reduces every corpus member under the per-member admission predicate.
// Members that fail to reduce are kept unchanged and reported.
std::pair<Corpus, ReductionReport> reduce_corpus(const Corpus& corpus, const Target& target,
                                                 const ReduceOptions& options);

}  // namespace bonsai
