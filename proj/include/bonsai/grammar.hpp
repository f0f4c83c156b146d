#pragma once

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace bonsai {

// ---------------------------------------------------------------------------
// Grammar model: extended BNF with fixed terminals, ident-class terminals,
// nonterminals, and Kleene-star repetition groups.
// ---------------------------------------------------------------------------

struct Symbol {
  enum class Kind { Fixed, Ident, NonTerminal, Repetition };

  Kind kind = Kind::Fixed;
  // Fixed: literal text. Ident: class name. NonTerminal: rule name.
  std::string text;
  // Repetition body (non-empty).
  std::vector<Symbol> body;
  // Resolved by Grammar::finalize(): nonterminal id or ident-class id.
  int ref = -1;

  static Symbol fixed(std::string t) { return {Kind::Fixed, std::move(t), {}, -1}; }
  static Symbol ident(std::string cls) { return {Kind::Ident, std::move(cls), {}, -1}; }
  static Symbol nonterminal(std::string name) {
    return {Kind::NonTerminal, std::move(name), {}, -1};
  }
  static Symbol repetition(std::vector<Symbol> b) {
    return {Kind::Repetition, {}, std::move(b), -1};
  }

  bool operator==(const Symbol& o) const {
    return kind == o.kind && text == o.text && body == o.body;
  }
};

using Alternative = std::vector<Symbol>;

struct IdentClass {
  std::string name;
  // Pool value i is spelled prefix + i + suffix, e.g. a0 or "s0".
  std::string prefix = "a";
  std::string suffix;
  bool operator==(const IdentClass& o) const {
    return name == o.name && prefix == o.prefix && suffix == o.suffix;
  }
};

class GrammarError : public std::runtime_error {
 public:
  GrammarError(std::string msg, int line = 0, int col = 0)
      : std::runtime_error(std::move(msg)), line(line), col(col) {}
  int line;
  int col;
};

struct Grammar {
  std::string start;
  std::vector<std::string> rule_order;  // definition order; first rule is start
  std::map<std::string, std::vector<Alternative>> productions;
  std::vector<IdentClass> ident_classes;       // declaration order
  std::set<std::string> glue;                  // terminal texts that attach without space

  // --- compiled form, filled in by finalize() ---
  bool finalized = false;
  std::map<std::string, int> nonterminal_ids;
  std::map<std::string, int> ident_class_ids;
  std::vector<const std::vector<Alternative>*> alts_by_id;
  // Per nonterminal id: indices of terminal-only / nonterminal-bearing alternatives.
  std::vector<std::vector<int>> t_alt_indices;
  std::vector<std::vector<int>> nt_alt_indices;

  // Resolves symbol references and computes the T/NT classification caches.
  // Throws GrammarError on undefined names. Idempotent.
  void finalize();

  int require_nonterminal(const std::string& name) const;
  const std::vector<Alternative>& alternatives(int nonterminal_id) const {
    return *alts_by_id[static_cast<size_t>(nonterminal_id)];
  }
  std::string pool_value(int ident_class_id, int index) const;

  bool operator==(const Grammar& o) const {
    return start == o.start && rule_order == o.rule_order && productions == o.productions &&
           ident_classes == o.ident_classes && glue == o.glue;
  }
};

// True iff the alternative contains no nonterminal, where a repetition counts
// as nonterminal-bearing iff its body transitively contains one.
bool alternative_is_terminal_only(const Alternative& alt);

// Parses the grammar file format:
//   %ident NAME [quoted]
//   %glue "tok" "tok" ...
//   name : sym sym | sym ( sym sym )* ;    # comment
// The first rule defined is the start symbol. Rejects undefined names, empty
// alternatives, and grammars where some nonterminal cannot reach a
// terminal-only frontier.
Grammar parse_grammar(const std::string& source);

// Validation used by parse_grammar, exposed for directly-built grammars.
void check_productive(const Grammar& g);

std::string pretty_print(const Grammar& g);

// Algorithm-level queries. The pair partitions the alternative list of `name`.
std::vector<Alternative> t_expansions(const Grammar& g, const std::string& name);
std::vector<Alternative> nt_expansions(const Grammar& g, const std::string& name);

// ---------------------------------------------------------------------------
// Derivation trees.
// ---------------------------------------------------------------------------

struct TreeNode {
  enum class Kind { Fixed, Ident, NonTerminal, Repetition };

  Kind kind = Kind::Fixed;
  std::string text;        // Fixed: literal; Ident: concretized pool value
  std::string name;        // NonTerminal: rule name; Ident: class name
  int pool_index = -1;     // Ident
  int alt_index = -1;      // NonTerminal: index into the full alternative list
  bool leaf_alt = false;   // NonTerminal: alternative was terminal-only
  int rep_count = 0;       // Repetition
  std::vector<TreeNode> children;

  bool operator==(const TreeNode& o) const {
    return kind == o.kind && text == o.text && name == o.name && pool_index == o.pool_index &&
           alt_index == o.alt_index && leaf_alt == o.leaf_alt && rep_count == o.rep_count &&
           children == o.children;
  }
};

struct Measure {
  int idents = 0;
  int items = 0;
  int depth = 0;
  bool operator==(const Measure& o) const {
    return idents == o.idents && items == o.items && depth == o.depth;
  }
  bool within(int m, int n, int d) const { return idents <= m && items <= n && depth <= d; }
};

// (idents, items, depth) of a complete derivation tree:
//  - idents: max over ident classes of the number of distinct pool indices used;
//  - items:  max repetition count over all Repetition nodes;
//  - depth:  max over root-to-leaf paths of the per-nonterminal count of
//            nonterminal-bearing expansions (a terminal-only expansion closes a
//            chain without deepening it).
Measure measure(const TreeNode& t);

// Concatenates leaf texts left-to-right; adjacent leaves are joined with a
// single space unless either side is a %glue terminal text.
std::string linearize(const TreeNode& t, const Grammar& g);

}  // namespace bonsai
