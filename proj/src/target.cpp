#include "bonsai/target.hpp"

#include <mutex>

namespace bonsai {

const Grammar& Target::grammar() const {
  static std::mutex mu;
  std::scoped_lock lock(mu);
  if (!grammar_) grammar_ = std::make_unique<Grammar>(parse_grammar(grammar_source()));
  return *grammar_;
}

std::unique_ptr<Target> make_target(const std::string& name) {
  if (name == "arith") return make_arith_target();
  if (name == "minilang") return make_minilang_target();
  throw TargetError("unknown target '" + name + "' (expected minilang or arith)");
}

}  // namespace bonsai
