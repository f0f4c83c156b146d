#pragma once

#include <memory>
#include <set>
#include <string>

#include "bonsai/grammar.hpp"

namespace bonsai {

// Result of one target execution: semantic validity plus the set of covered
// branch identifiers. Targets are deterministic and never crash; every
// failure mode is expressed as valid=false feedback.
struct ExecutionFeedback {
  bool valid = false;
  std::set<int> coverage;
  std::string note;

  bool operator==(const ExecutionFeedback& o) const {
    return valid == o.valid && coverage == o.coverage && note == o.note;
  }
};

class Target {
 public:
  virtual ~Target() = default;

  virtual const std::string& name() const = 0;
  virtual const std::string& grammar_source() const = 0;
  virtual int total_branches() const = 0;
  virtual ExecutionFeedback execute(const std::string& input) const = 0;

  // Typechecker-vs-all coverage split, for targets with a semantic stage.
  virtual bool has_semantic_split() const { return false; }
  virtual bool is_semantic_branch(int) const { return false; }

  // Parsed form of grammar_source(), cached per target instance.
  const Grammar& grammar() const;

 private:
  mutable std::unique_ptr<Grammar> grammar_;
};

class TargetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Built-in targets: "minilang" | "arith". Throws TargetError on unknown names.
std::unique_ptr<Target> make_target(const std::string& name);

std::unique_ptr<Target> make_arith_target();
std::unique_ptr<Target> make_minilang_target();

// Out-of-process target speaking the line protocol: one input file path per
// line on stdin, one JSON feedback object {"valid":..,"coverage":[..]} per
// line on stdout. Process failure maps to valid=false plus a reserved crash
// branch id (== declared_branches); total_branches() == declared_branches + 1.
std::unique_ptr<Target> make_external_target(const std::string& command,
                                             const std::string& grammar_source,
                                             int declared_branches);

}  // namespace bonsai
