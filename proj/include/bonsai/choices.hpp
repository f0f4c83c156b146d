#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bonsai/rng.hpp"

namespace bonsai {

// One recorded pseudo-random decision. The value is what replay consumes;
// tag and context fields make sidecar files readable and let the mutator
// draw replacement values from the right range.
struct Choice {
  enum class Tag { AltChoice, RepCount, IdentIndex, LeafCoin };

  Tag tag;
  int64_t value = 0;
  std::string name;        // AltChoice: nonterminal; IdentIndex: ident class
  bool leaf_list = false;  // AltChoice: index refers to the terminal-only list

  bool operator==(const Choice& o) const {
    return tag == o.tag && value == o.value && name == o.name && leaf_list == o.leaf_list;
  }
};

using ChoiceSequence = std::vector<Choice>;

// Compact sidecar form: JSON array of [tag, args...] tuples.
std::string choices_to_json(const ChoiceSequence& cs);
ChoiceSequence choices_from_json(const std::string& json_text);

// Source of pseudo-randomness for the sampler. Either fresh draws from a
// seeded PRNG, or positional replay of a recorded sequence with fresh
// fall-through once the recording is exhausted. Recorded values out of range
// are re-normalized by modulo into the requested range.
class ChoiceSource {
 public:
  virtual ~ChoiceSource() = default;
  virtual bool coin(double p_true) = 0;
  virtual uint64_t uniform(uint64_t range) = 0;
};

class FreshSource final : public ChoiceSource {
 public:
  explicit FreshSource(uint64_t seed) : rng_(seed) {}
  explicit FreshSource(Rng rng) : rng_(rng) {}
  bool coin(double p_true) override { return rng_.u01() < p_true; }
  uint64_t uniform(uint64_t range) override { return range <= 1 ? 0 : rng_.below(range); }

 private:
  Rng rng_;
};

class ReplaySource final : public ChoiceSource {
 public:
  ReplaySource(const ChoiceSequence& recorded, uint64_t overflow_seed)
      : recorded_(recorded), rng_(overflow_seed) {}

  bool coin(double p_true) override {
    if (pos_ < recorded_.size()) return (take() % 2) != 0;
    return rng_.u01() < p_true;
  }

  uint64_t uniform(uint64_t range) override {
    if (range <= 1) {
      if (pos_ < recorded_.size()) take();
      return 0;
    }
    if (pos_ < recorded_.size()) return take() % range;
    return rng_.below(range);
  }

  size_t consumed() const { return pos_; }

 private:
  uint64_t take() {
    int64_t v = recorded_[pos_++].value;
    return v < 0 ? 0 : static_cast<uint64_t>(v);
  }

  const ChoiceSequence& recorded_;
  Rng rng_;
  size_t pos_ = 0;
};

}  // namespace bonsai
