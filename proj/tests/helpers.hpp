#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "bonsai/grammar.hpp"
#include "bonsai/sampler.hpp"
#include "bonsai/target.hpp"

namespace bonsai::testing {

inline const char* kTwoRuleToy = "start : ( stmt )* ;\nstmt : \"pass\" ;\n";
inline const char* kIdentToy = "%ident ID\nstart : ID \"=\" ID ;\n";
inline const char* kNestedToy =
    "expr : \"x\" | \"y\" | \"(\" expr \"+\" expr \")\" ;\n";

inline Grammar two_rule_toy() { return parse_grammar(kTwoRuleToy); }
inline Grammar ident_toy() { return parse_grammar(kIdentToy); }
inline Grammar nested_toy() { return parse_grammar(kNestedToy); }

// All grammars the property suites run over.
inline std::vector<Grammar> fixture_grammars() {
  std::vector<Grammar> out;
  out.push_back(two_rule_toy());
  out.push_back(ident_toy());
  out.push_back(nested_toy());
  out.push_back(parse_grammar(make_target("arith")->grammar_source()));
  out.push_back(parse_grammar(make_target("minilang")->grammar_source()));
  return out;
}

// ---------------------------------------------------------------------------
// Independent oracle: exhaustive enumeration of the sampler-reachable bounded
// language (ident pool indices below m, repetition counts up to n, and at most
// d nonterminal-bearing expansions per nonterminal per path). Exponential;
// only for tiny grammars and bounds.
// ---------------------------------------------------------------------------

using LeafSeq = std::vector<std::string>;

inline std::set<LeafSeq> oracle_concat(const std::set<LeafSeq>& a, const std::set<LeafSeq>& b) {
  std::set<LeafSeq> out;
  for (const LeafSeq& x : a)
    for (const LeafSeq& y : b) {
      LeafSeq xy = x;
      xy.insert(xy.end(), y.begin(), y.end());
      out.insert(std::move(xy));
    }
  return out;
}

inline std::set<LeafSeq> oracle_symbol(const Grammar& g, const Symbol& s, const SizeBounds& b,
                                       std::map<std::string, int>& chain);

inline std::set<LeafSeq> oracle_sequence(const Grammar& g, const std::vector<Symbol>& seq,
                                         const SizeBounds& b,
                                         std::map<std::string, int>& chain) {
  std::set<LeafSeq> out = {LeafSeq{}};
  for (const Symbol& s : seq) {
    std::set<LeafSeq> part = oracle_symbol(g, s, b, chain);
    out = oracle_concat(out, part);
    if (out.empty()) return out;
  }
  return out;
}

inline std::set<LeafSeq> oracle_symbol(const Grammar& g, const Symbol& s, const SizeBounds& b,
                                       std::map<std::string, int>& chain) {
  switch (s.kind) {
    case Symbol::Kind::Fixed:
      return {LeafSeq{s.text}};
    case Symbol::Kind::Ident: {
      std::set<LeafSeq> out;
      int cls = g.ident_class_ids.at(s.text);
      for (int i = 0; i < b.max_idents; ++i) out.insert(LeafSeq{g.pool_value(cls, i)});
      return out;
    }
    case Symbol::Kind::Repetition: {
      std::set<LeafSeq> out;
      std::set<LeafSeq> acc = {LeafSeq{}};
      out.insert(LeafSeq{});
      for (int count = 1; count <= b.max_items; ++count) {
        acc = oracle_concat(acc, oracle_sequence(g, s.body, b, chain));
        out.insert(acc.begin(), acc.end());
      }
      return out;
    }
    case Symbol::Kind::NonTerminal: {
      std::set<LeafSeq> out;
      int& c = chain[s.text];
      const auto& alts = g.productions.at(s.text);
      for (const Alternative& alt : alts) {
        bool leaf = alternative_is_terminal_only(alt);
        if (!leaf && c >= b.max_depth) continue;
        if (!leaf) ++c;
        std::set<LeafSeq> part = oracle_sequence(g, alt, b, chain);
        if (!leaf) --c;
        out.insert(part.begin(), part.end());
      }
      return out;
    }
  }
  return {};
}

// Every string the sampler can produce from g under bounds b.
inline std::set<std::string> oracle_bounded_language(const Grammar& g, const SizeBounds& b) {
  std::map<std::string, int> chain;
  std::set<LeafSeq> seqs = oracle_symbol(g, Symbol::nonterminal(g.start), b, chain);
  std::set<std::string> out;
  for (const LeafSeq& leaves : seqs) {
    std::string text;
    for (size_t i = 0; i < leaves.size(); ++i) {
      if (i > 0 && !g.glue.count(leaves[i - 1]) && !g.glue.count(leaves[i]))
        text.push_back(' ');
      text += leaves[i];
    }
    out.insert(std::move(text));
  }
  return out;
}

// Independent terminal-only classifier used to cross-check t_expansions.
inline bool oracle_has_nonterminal(const Symbol& s, const Grammar& g) {
  if (s.kind == Symbol::Kind::NonTerminal)
    return g.productions.count(s.text) != 0 || !g.ident_class_ids.count(s.text);
  if (s.kind == Symbol::Kind::Repetition)
    for (const Symbol& b : s.body)
      if (oracle_has_nonterminal(b, g)) return true;
  return false;
}

}  // namespace bonsai::testing
