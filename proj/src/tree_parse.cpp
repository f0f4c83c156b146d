#include <algorithm>
#include <map>
#include <optional>

#include "bonsai/reducer.hpp"
#include "bonsai/util.hpp"

namespace bonsai {

// ---------------------------------------------------------------------------
// Tokenizer over a grammar's terminal vocabulary: longest match among fixed
// terminal texts and ident-class pool patterns (prefix + digits + suffix).
// ---------------------------------------------------------------------------

namespace {

struct GToken {
  bool is_ident = false;
  std::string text;
  int ident_class = -1;
  int pool_index = -1;
};

void collect_fixed(const Symbol& s, std::set<std::string>& out) {
  if (s.kind == Symbol::Kind::Fixed) out.insert(s.text);
  for (const Symbol& b : s.body) collect_fixed(b, out);
}

std::vector<std::string> fixed_vocabulary(const Grammar& g) {
  std::set<std::string> texts;
  for (const auto& [name, alts] : g.productions)
    for (const Alternative& alt : alts)
      for (const Symbol& s : alt) collect_fixed(s, texts);
  std::vector<std::string> vocab(texts.begin(), texts.end());
  std::sort(vocab.begin(), vocab.end(),
            [](const std::string& a, const std::string& b) { return a.size() > b.size(); });
  return vocab;
}

// Match an ident-class pool value at position pos; returns consumed length.
size_t match_ident(const std::string& text, size_t pos, const IdentClass& ic, int& index_out) {
  const std::string& pre = ic.prefix;
  if (text.compare(pos, pre.size(), pre) != 0) return 0;
  size_t p = pos + pre.size();
  size_t digits_begin = p;
  while (p < text.size() && text[p] >= '0' && text[p] <= '9') ++p;
  if (p == digits_begin) return 0;
  if (!ic.suffix.empty()) {
    if (text.compare(p, ic.suffix.size(), ic.suffix) != 0) return 0;
    p += ic.suffix.size();
  }
  index_out = std::stoi(text.substr(digits_begin, p - digits_begin - ic.suffix.size()));
  return p - pos;
}

std::vector<GToken> tokenize(const std::string& text, const Grammar& g) {
  const std::vector<std::string> vocab = fixed_vocabulary(g);
  std::vector<GToken> toks;
  size_t pos = 0;
  while (pos < text.size()) {
    if (is_ws(text[pos])) {
      ++pos;
      continue;
    }
    size_t best_len = 0;
    GToken best;
    for (const std::string& t : vocab) {
      if (t.size() <= best_len) break;  // vocab sorted by length desc
      if (text.compare(pos, t.size(), t) == 0) {
        best_len = t.size();
        best = {false, t, -1, -1};
        break;
      }
    }
    for (size_t ci = 0; ci < g.ident_classes.size(); ++ci) {
      int index = -1;
      size_t len = match_ident(text, pos, g.ident_classes[ci], index);
      if (len > best_len) {
        best_len = len;
        best = {true, text.substr(pos, len), static_cast<int>(ci), index};
      }
    }
    if (best_len == 0)
      throw ParseError("cannot tokenize input at offset " + std::to_string(pos) + ": '" +
                       text.substr(pos, 8) + "'");
    toks.push_back(std::move(best));
    pos += best_len;
  }
  return toks;
}

// ---------------------------------------------------------------------------
// Memoized recursive descent with ordered alternatives. The bundled grammars
// are authored so that each (nonterminal, position) has a unique viable
// parse, which makes first-success memoization sound.
// ---------------------------------------------------------------------------

struct TreeParser {
  const Grammar& g;
  const std::vector<GToken>& toks;
  std::map<std::pair<int, size_t>, std::optional<std::pair<TreeNode, size_t>>> memo;

  std::optional<size_t> parse_symbol(const Symbol& s, size_t pos, TreeNode& out) {
    switch (s.kind) {
      case Symbol::Kind::Fixed: {
        if (pos >= toks.size() || toks[pos].is_ident || toks[pos].text != s.text)
          return std::nullopt;
        out.kind = TreeNode::Kind::Fixed;
        out.text = s.text;
        return pos + 1;
      }
      case Symbol::Kind::Ident: {
        if (pos >= toks.size() || !toks[pos].is_ident || toks[pos].ident_class != s.ref)
          return std::nullopt;
        out.kind = TreeNode::Kind::Ident;
        out.name = s.text;
        out.text = toks[pos].text;
        out.pool_index = toks[pos].pool_index;
        return pos + 1;
      }
      case Symbol::Kind::Repetition: {
        out.kind = TreeNode::Kind::Repetition;
        out.rep_count = 0;
        size_t cur = pos;
        while (true) {
          std::vector<TreeNode> round;
          size_t next = cur;
          bool ok = true;
          for (const Symbol& b : s.body) {
            TreeNode child;
            auto end = parse_symbol(b, next, child);
            if (!end) {
              ok = false;
              break;
            }
            round.push_back(std::move(child));
            next = *end;
          }
          if (!ok || next == cur) break;  // no progress guards empty bodies
          for (TreeNode& c : round) out.children.push_back(std::move(c));
          out.rep_count += 1;
          cur = next;
        }
        return cur;
      }
      case Symbol::Kind::NonTerminal: {
        auto r = parse_nonterminal(s.ref, pos);
        if (!r) return std::nullopt;
        out = r->first;
        return r->second;
      }
    }
    return std::nullopt;
  }

  std::optional<std::pair<TreeNode, size_t>> parse_nonterminal(int id, size_t pos) {
    auto key = std::make_pair(id, pos);
    auto hit = memo.find(key);
    if (hit != memo.end()) return hit->second;

    std::optional<std::pair<TreeNode, size_t>> result;
    const auto& alts = g.alternatives(id);
    for (size_t ai = 0; ai < alts.size() && !result; ++ai) {
      TreeNode node;
      node.kind = TreeNode::Kind::NonTerminal;
      node.alt_index = static_cast<int>(ai);
      node.leaf_alt = alternative_is_terminal_only(alts[ai]);
      size_t cur = pos;
      bool ok = true;
      for (const Symbol& sym : alts[ai]) {
        TreeNode child;
        auto end = parse_symbol(sym, cur, child);
        if (!end) {
          ok = false;
          break;
        }
        node.children.push_back(std::move(child));
        cur = *end;
      }
      if (ok) result = std::make_pair(std::move(node), cur);
    }
    memo[key] = result;
    return result;
  }
};

// Assigns nonterminal names by re-walking the grammar structure alongside the
// tree (the parser works in ids; names make trees debuggable and linearizable
// without the grammar).
void name_tree(TreeNode& t, const Symbol& s, const Grammar& g) {
  switch (t.kind) {
    case TreeNode::Kind::Fixed:
    case TreeNode::Kind::Ident:
      return;
    case TreeNode::Kind::Repetition: {
      size_t per = s.body.size();
      for (size_t i = 0; i < t.children.size(); ++i)
        name_tree(t.children[i], s.body[i % per], g);
      return;
    }
    case TreeNode::Kind::NonTerminal: {
      t.name = s.text;
      const Alternative& alt =
          g.alternatives(s.ref)[static_cast<size_t>(t.alt_index)];
      for (size_t i = 0; i < t.children.size(); ++i) name_tree(t.children[i], alt[i], g);
      return;
    }
  }
}

}  // namespace

TreeNode parse_to_tree(const std::string& text, const Grammar& g) {
  std::vector<GToken> toks = tokenize(text, g);
  TreeParser parser{g, toks, {}};
  int start_id = g.require_nonterminal(g.start);
  auto r = parser.parse_nonterminal(start_id, 0);
  if (!r || r->second != toks.size())
    throw ParseError("input does not parse as '" + g.start + "'" +
                     (r ? " (trailing tokens)" : ""));
  TreeNode tree = std::move(r->first);
  Symbol start_sym = Symbol::nonterminal(g.start);
  start_sym.ref = start_id;
  name_tree(tree, start_sym, g);
  return tree;
}

// ---------------------------------------------------------------------------
// Choice recovery: emit the decisions bounded_sample would consume to build
// exactly this tree (coin when both expansion lists are non-empty, alternative
// index within the chosen list when it has more than one entry, repetition
// counts and ident pool indices always).
// ---------------------------------------------------------------------------

static void choices_walk(const TreeNode& t, const Grammar& g, ChoiceSequence& out) {
  switch (t.kind) {
    case TreeNode::Kind::Fixed:
      return;
    case TreeNode::Kind::Ident:
      out.push_back({Choice::Tag::IdentIndex, t.pool_index, t.name, false});
      return;
    case TreeNode::Kind::Repetition:
      out.push_back({Choice::Tag::RepCount, t.rep_count, "", false});
      for (const TreeNode& c : t.children) choices_walk(c, g, out);
      return;
    case TreeNode::Kind::NonTerminal: {
      int id = g.require_nonterminal(t.name);
      const auto& t_idx = g.t_alt_indices[static_cast<size_t>(id)];
      const auto& nt_idx = g.nt_alt_indices[static_cast<size_t>(id)];
      if (!t_idx.empty() && !nt_idx.empty())
        out.push_back({Choice::Tag::LeafCoin, t.leaf_alt ? 1 : 0, "", false});
      const auto& list = t.leaf_alt ? t_idx : nt_idx;
      if (list.size() > 1) {
        auto it = std::find(list.begin(), list.end(), t.alt_index);
        out.push_back({Choice::Tag::AltChoice,
                       static_cast<int64_t>(it - list.begin()), t.name, t.leaf_alt});
      }
      for (const TreeNode& c : t.children) choices_walk(c, g, out);
      return;
    }
  }
}

ChoiceSequence choices_from_tree(const TreeNode& t, const Grammar& g) {
  ChoiceSequence out;
  choices_walk(t, g, out);
  return out;
}

// ---------------------------------------------------------------------------
// Minimal expansions: shortest-derivation fixpoint per nonterminal.
// ---------------------------------------------------------------------------

namespace {

struct Best {
  bool known = false;
  TreeNode tree;
  std::string text;
  size_t size = 0;  // ws-excluded
};

bool better(size_t size_a, const std::string& text_a, const Best& b) {
  if (!b.known) return true;
  if (size_a != b.size) return size_a < b.size;
  return text_a < b.text;
}

}  // namespace

TreeNode minimal_expansion(const Grammar& g, const std::string& nonterminal) {
  const size_t count = g.alts_by_id.size();
  std::vector<Best> best(count);

  // Builds the minimal tree for a symbol given current bests; nullopt when a
  // needed nonterminal has no known expansion yet.
  std::function<std::optional<TreeNode>(const Symbol&)> build =
      [&](const Symbol& s) -> std::optional<TreeNode> {
    switch (s.kind) {
      case Symbol::Kind::Fixed: {
        TreeNode n;
        n.kind = TreeNode::Kind::Fixed;
        n.text = s.text;
        return n;
      }
      case Symbol::Kind::Ident: {
        TreeNode n;
        n.kind = TreeNode::Kind::Ident;
        n.name = s.text;
        n.pool_index = 0;
        n.text = g.pool_value(s.ref, 0);
        return n;
      }
      case Symbol::Kind::Repetition: {
        TreeNode n;
        n.kind = TreeNode::Kind::Repetition;
        n.rep_count = 0;  // empty repetition is always smallest
        return n;
      }
      case Symbol::Kind::NonTerminal: {
        if (!best[static_cast<size_t>(s.ref)].known) return std::nullopt;
        return best[static_cast<size_t>(s.ref)].tree;
      }
    }
    return std::nullopt;
  };

  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& [name, alts] : g.productions) {
      int id = g.nonterminal_ids.at(name);
      for (size_t ai = 0; ai < alts.size(); ++ai) {
        TreeNode node;
        node.kind = TreeNode::Kind::NonTerminal;
        node.name = name;
        node.alt_index = static_cast<int>(ai);
        node.leaf_alt = alternative_is_terminal_only(alts[ai]);
        bool ok = true;
        for (const Symbol& sym : alts[ai]) {
          auto child = build(sym);
          if (!child) {
            ok = false;
            break;
          }
          node.children.push_back(std::move(*child));
        }
        if (!ok) continue;
        std::string text = linearize(node, g);
        size_t size = ws_excluded_size(text);
        if (better(size, text, best[static_cast<size_t>(id)])) {
          best[static_cast<size_t>(id)] = {true, std::move(node), std::move(text), size};
          changed = true;
        }
      }
    }
  }

  int id = g.require_nonterminal(nonterminal);
  if (!best[static_cast<size_t>(id)].known)
    throw GrammarError("nonterminal '" + nonterminal + "' has no terminal-reachable expansion");
  return best[static_cast<size_t>(id)].tree;
}

}  // namespace bonsai
