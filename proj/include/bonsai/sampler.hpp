#pragma once

#include <stdexcept>
#include <string>

#include "bonsai/choices.hpp"
#include "bonsai/grammar.hpp"

namespace bonsai {

struct SizeBounds {
  int max_idents = 1;  // m: distinct pool values per ident class
  int max_items = 1;   // n: Kleene repetitions
  int max_depth = 1;   // d: same-nonterminal nesting

  bool operator==(const SizeBounds& o) const {
    return max_idents == o.max_idents && max_items == o.max_items && max_depth == o.max_depth;
  }
};

class SamplingStuckError : public std::runtime_error {
 public:
  SamplingStuckError(const std::string& nonterminal, int depth_bound)
      : std::runtime_error("sampling stuck at nonterminal '" + nonterminal +
                           "': depth bound " + std::to_string(depth_bound) +
                           " reached with no terminal-only expansion available"),
        nonterminal(nonterminal) {}
  std::string nonterminal;
};

struct SampleResult {
  std::string text;
  TreeNode tree;
  ChoiceSequence choices;
};

// Probability of expanding to a leaf after c prior expansions of the same
// nonterminal under depth bound d: (c + 1) / (d + 1). Only meaningful when
// both terminal-only and nonterminal-bearing expansions exist.
double leaf_probability(int expansions_so_far, int depth_bound);

// Samples a size-bounded derivation of `symbol` (by default the start symbol),
// recording every decision so the result replays deterministically.
// Guarantees measure(tree) <= bounds and text == linearize(tree); throws
// SamplingStuckError on grammars where the depth bound cannot be honored.
SampleResult bounded_sample(const Grammar& g, const Symbol& symbol, const SizeBounds& b,
                            ChoiceSource& src);
SampleResult bounded_sample(const Grammar& g, const SizeBounds& b, ChoiceSource& src);

// Terminal concretization: fixed terminals yield their text; ident-class
// terminals draw a pool index uniformly from [0, m).
TreeNode concretize_terminal(const Grammar& g, const Symbol& terminal, const SizeBounds& b,
                             ChoiceSource& src, ChoiceSequence& out);

// Repetition sampling: draws a count uniformly from [0, n] and samples the
// body that many times.
TreeNode sample_repetition(const Grammar& g, const std::vector<Symbol>& body, const SizeBounds& b,
                           ChoiceSource& src, ChoiceSequence& out);

}  // namespace bonsai
