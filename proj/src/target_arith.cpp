#include <cstdint>
#include <optional>

#include "bonsai/target.hpp"

namespace bonsai {

namespace {

// Decision points; branch id = 2 * decision + (condition ? 1 : 0).
enum ArithDecision : int {
  AD_EMPTY_INPUT = 0,
  AD_TOKEN_DIGIT,
  AD_FACTOR_PAREN,
  AD_PAREN_CLOSED,
  AD_FACTOR_IS_NUMBER,
  AD_TERM_MORE,
  AD_TERM_IS_MUL,
  AD_DIV_BY_ZERO,
  AD_EXPR_MORE,
  AD_EXPR_IS_ADD,
  AD_TRAILING_INPUT,
  AD_COUNT
};

struct ArithEval {
  const std::string& in;
  size_t pos = 0;
  std::set<int>* cov;
  std::string error;

  bool br(int decision, bool taken) {
    cov->insert(2 * decision + (taken ? 1 : 0));
    return taken;
  }

  void skip_ws() {
    while (pos < in.size() && (in[pos] == ' ' || in[pos] == '\t' || in[pos] == '\n' ||
                               in[pos] == '\r'))
      ++pos;
  }

  char peek() {
    skip_ws();
    return pos < in.size() ? in[pos] : '\0';
  }

  std::optional<int64_t> factor() {
    char c = peek();
    if (br(AD_FACTOR_PAREN, c == '(')) {
      ++pos;
      auto v = expr();
      if (!v) return std::nullopt;
      if (!br(AD_PAREN_CLOSED, peek() == ')')) {
        error = "expected ')'";
        return std::nullopt;
      }
      ++pos;
      return v;
    }
    if (!br(AD_FACTOR_IS_NUMBER, c >= '0' && c <= '9')) {
      error = "expected a number or '('";
      return std::nullopt;
    }
    int64_t v = 0;
    while (pos < in.size() && br(AD_TOKEN_DIGIT, in[pos] >= '0' && in[pos] <= '9')) {
      v = v * 10 + (in[pos] - '0');
      ++pos;
    }
    return v;
  }

  std::optional<int64_t> term() {
    auto v = factor();
    if (!v) return std::nullopt;
    while (true) {
      char c = peek();
      if (!br(AD_TERM_MORE, c == '*' || c == '/')) break;
      ++pos;
      auto rhs = factor();
      if (!rhs) return std::nullopt;
      if (br(AD_TERM_IS_MUL, c == '*')) {
        v = *v * *rhs;
      } else {
        if (br(AD_DIV_BY_ZERO, *rhs == 0)) {
          error = "division by zero";
          return std::nullopt;
        }
        v = *v / *rhs;
      }
    }
    return v;
  }

  std::optional<int64_t> expr() {
    auto v = term();
    if (!v) return std::nullopt;
    while (true) {
      char c = peek();
      if (!br(AD_EXPR_MORE, c == '+' || c == '-')) break;
      ++pos;
      auto rhs = term();
      if (!rhs) return std::nullopt;
      v = br(AD_EXPR_IS_ADD, c == '+') ? *v + *rhs : *v - *rhs;
    }
    return v;
  }
};

const std::string kArithGrammar = R"g(# Parenthesized integer arithmetic.
%glue "(" ")"
expr : "0" | "1" | "2" | "(" expr op expr ")" ;
op : "+" | "-" | "*" | "/" ;
)g";

class ArithTarget final : public Target {
 public:
  const std::string& name() const override {
    static const std::string n = "arith";
    return n;
  }
  const std::string& grammar_source() const override { return kArithGrammar; }
  int total_branches() const override { return 2 * AD_COUNT; }

  ExecutionFeedback execute(const std::string& input) const override {
    ExecutionFeedback fb;
    ArithEval ev{input, 0, &fb.coverage, {}};
    if (ev.br(AD_EMPTY_INPUT, ev.peek() == '\0')) {
      fb.valid = false;
      fb.note = "empty input";
      return fb;
    }
    auto v = ev.expr();
    if (!v) {
      fb.valid = false;
      fb.note = ev.error;
      return fb;
    }
    if (ev.br(AD_TRAILING_INPUT, ev.peek() != '\0')) {
      fb.valid = false;
      fb.note = "trailing input";
      return fb;
    }
    fb.valid = true;
    fb.note = "= " + std::to_string(*v);
    return fb;
  }
};

}  // namespace

std::unique_ptr<Target> make_arith_target() { return std::make_unique<ArithTarget>(); }

}  // namespace bonsai
