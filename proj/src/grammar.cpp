#include "bonsai/grammar.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

namespace bonsai {

// ---------------------------------------------------------------------------
// Classification
// ---------------------------------------------------------------------------

static bool contains_nonterminal(const Symbol& s) {
  switch (s.kind) {
    case Symbol::Kind::Fixed:
    case Symbol::Kind::Ident:
      return false;
    case Symbol::Kind::NonTerminal:
      return true;
    case Symbol::Kind::Repetition:
      for (const Symbol& b : s.body)
        if (contains_nonterminal(b)) return true;
      return false;
  }
  return false;
}

bool alternative_is_terminal_only(const Alternative& alt) {
  for (const Symbol& s : alt)
    if (contains_nonterminal(s)) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Grammar::finalize
// ---------------------------------------------------------------------------

static void resolve_symbol(Symbol& s, const Grammar& g) {
  switch (s.kind) {
    case Symbol::Kind::Fixed:
      break;
    case Symbol::Kind::Ident: {
      auto it = g.ident_class_ids.find(s.text);
      if (it == g.ident_class_ids.end())
        throw GrammarError("undeclared ident class '" + s.text + "'");
      s.ref = it->second;
      break;
    }
    case Symbol::Kind::NonTerminal: {
      auto it = g.nonterminal_ids.find(s.text);
      if (it == g.nonterminal_ids.end()) {
        // A bare name declared via %ident is an ident terminal.
        auto ic = g.ident_class_ids.find(s.text);
        if (ic != g.ident_class_ids.end()) {
          s.kind = Symbol::Kind::Ident;
          s.ref = ic->second;
          break;
        }
        throw GrammarError("name '" + s.text +
                           "' is neither a defined nonterminal nor a declared ident class");
      }
      s.ref = it->second;
      break;
    }
    case Symbol::Kind::Repetition:
      for (Symbol& b : s.body) resolve_symbol(b, g);
      break;
  }
}

void Grammar::finalize() {
  nonterminal_ids.clear();
  ident_class_ids.clear();
  alts_by_id.clear();
  t_alt_indices.clear();
  nt_alt_indices.clear();

  for (size_t i = 0; i < ident_classes.size(); ++i)
    ident_class_ids[ident_classes[i].name] = static_cast<int>(i);

  for (const std::string& name : rule_order)
    nonterminal_ids[name] = static_cast<int>(alts_by_id.size()), alts_by_id.push_back(nullptr);
  // Rules added to the map but not listed in rule_order (hand-built grammars).
  for (auto& [name, alts] : productions)
    if (!nonterminal_ids.count(name)) {
      rule_order.push_back(name);
      nonterminal_ids[name] = static_cast<int>(alts_by_id.size());
      alts_by_id.push_back(nullptr);
    }

  for (auto& [name, alts] : productions) {
    if (alts.empty()) throw GrammarError("nonterminal '" + name + "' has no alternatives");
    for (Alternative& alt : alts) {
      if (alt.empty()) throw GrammarError("empty alternative in rule '" + name + "'");
      for (Symbol& s : alt) resolve_symbol(s, *this);
    }
    alts_by_id[static_cast<size_t>(nonterminal_ids.at(name))] = &alts;
  }

  for (const std::string& name : rule_order)
    if (!productions.count(name))
      throw GrammarError("nonterminal '" + name + "' listed but not defined");

  if (start.empty() && !rule_order.empty()) start = rule_order.front();
  if (!productions.count(start)) throw GrammarError("start symbol '" + start + "' is not defined");

  t_alt_indices.resize(alts_by_id.size());
  nt_alt_indices.resize(alts_by_id.size());
  for (size_t id = 0; id < alts_by_id.size(); ++id) {
    const auto& alts = *alts_by_id[id];
    for (size_t k = 0; k < alts.size(); ++k) {
      if (alternative_is_terminal_only(alts[k]))
        t_alt_indices[id].push_back(static_cast<int>(k));
      else
        nt_alt_indices[id].push_back(static_cast<int>(k));
    }
  }
  finalized = true;
}

int Grammar::require_nonterminal(const std::string& name) const {
  auto it = nonterminal_ids.find(name);
  if (it == nonterminal_ids.end()) throw GrammarError("undefined nonterminal '" + name + "'");
  return it->second;
}

std::string Grammar::pool_value(int ident_class_id, int index) const {
  const IdentClass& ic = ident_classes[static_cast<size_t>(ident_class_id)];
  return ic.prefix + std::to_string(index) + ic.suffix;
}

// ---------------------------------------------------------------------------
// Productivity: every nonterminal must reach a terminal-only frontier.
// Repetitions are conservative (the sampler may pick a positive count).
// ---------------------------------------------------------------------------

static bool symbol_productive(const Symbol& s, const std::set<std::string>& productive) {
  switch (s.kind) {
    case Symbol::Kind::Fixed:
    case Symbol::Kind::Ident:
      return true;
    case Symbol::Kind::NonTerminal:
      return productive.count(s.text) != 0;
    case Symbol::Kind::Repetition:
      return std::all_of(s.body.begin(), s.body.end(),
                         [&](const Symbol& b) { return symbol_productive(b, productive); });
  }
  return false;
}

void check_productive(const Grammar& g) {
  std::set<std::string> productive;
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& [name, alts] : g.productions) {
      if (productive.count(name)) continue;
      for (const Alternative& alt : alts) {
        if (std::all_of(alt.begin(), alt.end(),
                        [&](const Symbol& s) { return symbol_productive(s, productive); })) {
          productive.insert(name);
          changed = true;
          break;
        }
      }
    }
  }
  for (const auto& [name, alts] : g.productions)
    if (!productive.count(name))
      throw GrammarError("nonterminal '" + name + "' cannot reach a terminal-only frontier");
}

// ---------------------------------------------------------------------------
// File format parser
// ---------------------------------------------------------------------------

namespace {

struct MetaToken {
  enum class Kind { Name, Literal, Colon, Pipe, Semi, LParen, RParenStar, Directive, End };
  Kind kind;
  std::string text;
  int line;
  int col;
};

class MetaLexer {
 public:
  explicit MetaLexer(const std::string& src) : src_(src) {}

  MetaToken next() {
    skip_ws_and_comments();
    int line = line_, col = col_;
    if (pos_ >= src_.size()) return {MetaToken::Kind::End, "", line, col};
    char c = src_[pos_];
    if (c == ':') return advance(), MetaToken{MetaToken::Kind::Colon, ":", line, col};
    if (c == '|') return advance(), MetaToken{MetaToken::Kind::Pipe, "|", line, col};
    if (c == ';') return advance(), MetaToken{MetaToken::Kind::Semi, ";", line, col};
    if (c == '(') return advance(), MetaToken{MetaToken::Kind::LParen, "(", line, col};
    if (c == ')') {
      advance();
      if (pos_ < src_.size() && src_[pos_] == '*') {
        advance();
        return {MetaToken::Kind::RParenStar, ")*", line, col};
      }
      throw GrammarError("expected '*' after ')'", line, col);
    }
    if (c == '%') {
      advance();
      std::string name = read_name(line, col);
      return {MetaToken::Kind::Directive, name, line, col};
    }
    if (c == '"') return read_literal(line, col);
    if (is_name_char(c)) return {MetaToken::Kind::Name, read_name(line, col), line, col};
    throw GrammarError(std::string("unexpected character '") + c + "'", line, col);
  }

 private:
  static bool is_name_char(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
           c == '_' || c == '-';
  }

  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_ws_and_comments() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
        advance();
      } else if (c == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else {
        break;
      }
    }
  }

  std::string read_name(int line, int col) {
    size_t begin = pos_;
    while (pos_ < src_.size() && is_name_char(src_[pos_])) advance();
    if (pos_ == begin) throw GrammarError("expected a name", line, col);
    return src_.substr(begin, pos_ - begin);
  }

  MetaToken read_literal(int line, int col) {
    advance();  // opening quote
    std::string out;
    while (true) {
      if (pos_ >= src_.size()) throw GrammarError("unterminated string literal", line, col);
      char c = src_[pos_];
      if (c == '"') {
        advance();
        break;
      }
      if (c == '\\') {
        advance();
        if (pos_ >= src_.size()) throw GrammarError("unterminated escape", line, col);
        char e = src_[pos_];
        if (e == '"' || e == '\\')
          out.push_back(e);
        else if (e == 'n')
          out.push_back('\n');
        else if (e == 't')
          out.push_back('\t');
        else
          throw GrammarError(std::string("unknown escape '\\") + e + "'", line_, col_);
        advance();
      } else {
        if (c == '\n') throw GrammarError("newline in string literal", line, col);
        out.push_back(c);
        advance();
      }
    }
    if (out.empty()) throw GrammarError("empty terminal literal", line, col);
    return {MetaToken::Kind::Literal, out, line, col};
  }

  const std::string& src_;
  size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

}  // namespace

Grammar parse_grammar(const std::string& source) {
  Grammar g;
  MetaLexer lex(source);
  MetaToken tok = lex.next();

  auto expect = [&](MetaToken::Kind k, const char* what) {
    if (tok.kind != k)
      throw GrammarError(std::string("expected ") + what + ", got '" + tok.text + "'", tok.line,
                         tok.col);
  };

  while (tok.kind != MetaToken::Kind::End) {
    if (tok.kind == MetaToken::Kind::Directive) {
      if (tok.text == "ident") {
        tok = lex.next();
        expect(MetaToken::Kind::Name, "ident class name");
        IdentClass ic;
        ic.name = tok.text;
        tok = lex.next();
        if (tok.kind == MetaToken::Kind::Name && tok.text == "quoted") {
          ic.prefix = "\"s";
          ic.suffix = "\"";
          tok = lex.next();
        }
        for (const IdentClass& prev : g.ident_classes)
          if (prev.name == ic.name)
            throw GrammarError("duplicate %ident declaration '" + ic.name + "'");
        g.ident_classes.push_back(std::move(ic));
      } else if (tok.text == "glue") {
        tok = lex.next();
        while (tok.kind == MetaToken::Kind::Literal) {
          g.glue.insert(tok.text);
          tok = lex.next();
        }
      } else {
        throw GrammarError("unknown directive '%" + tok.text + "'", tok.line, tok.col);
      }
      continue;
    }

    expect(MetaToken::Kind::Name, "rule name");
    std::string rule = tok.text;
    if (g.productions.count(rule))
      throw GrammarError("redefinition of rule '" + rule + "'", tok.line, tok.col);
    tok = lex.next();
    expect(MetaToken::Kind::Colon, "':'");
    tok = lex.next();

    std::vector<Alternative> alts;
    Alternative current;
    std::vector<std::pair<Alternative, int>> rep_stack;  // body under construction + line

    auto close_alternative = [&](int line, int col) {
      if (!rep_stack.empty())
        throw GrammarError("unterminated '(' repetition group", rep_stack.back().second, 0);
      if (current.empty()) throw GrammarError("empty alternative in rule '" + rule + "'", line, col);
      alts.push_back(std::move(current));
      current.clear();
    };

    auto sink = [&]() -> Alternative& { return rep_stack.empty() ? current : rep_stack.back().first; };

    bool done = false;
    while (!done) {
      switch (tok.kind) {
        case MetaToken::Kind::Literal:
          sink().push_back(Symbol::fixed(tok.text));
          tok = lex.next();
          break;
        case MetaToken::Kind::Name:
          sink().push_back(Symbol::nonterminal(tok.text));
          tok = lex.next();
          break;
        case MetaToken::Kind::LParen:
          rep_stack.emplace_back(Alternative{}, tok.line);
          tok = lex.next();
          break;
        case MetaToken::Kind::RParenStar: {
          if (rep_stack.empty())
            throw GrammarError("')*' without matching '('", tok.line, tok.col);
          Alternative body = std::move(rep_stack.back().first);
          rep_stack.pop_back();
          if (body.empty()) throw GrammarError("empty repetition body", tok.line, tok.col);
          sink().push_back(Symbol::repetition(std::move(body)));
          tok = lex.next();
          break;
        }
        case MetaToken::Kind::Pipe:
          close_alternative(tok.line, tok.col);
          tok = lex.next();
          break;
        case MetaToken::Kind::Semi:
          close_alternative(tok.line, tok.col);
          tok = lex.next();
          done = true;
          break;
        default:
          throw GrammarError("unexpected '" + tok.text + "' in rule '" + rule + "'", tok.line,
                             tok.col);
      }
    }

    g.rule_order.push_back(rule);
    g.productions[rule] = std::move(alts);
  }

  if (g.rule_order.empty()) throw GrammarError("grammar defines no rules");
  g.start = g.rule_order.front();
  g.finalize();
  check_productive(g);
  return g;
}

// ---------------------------------------------------------------------------
// Pretty printer
// ---------------------------------------------------------------------------

static void print_symbol(std::ostringstream& out, const Symbol& s) {
  switch (s.kind) {
    case Symbol::Kind::Fixed: {
      out << '"';
      for (char c : s.text) {
        if (c == '"' || c == '\\') out << '\\';
        if (c == '\n') {
          out << "\\n";
          continue;
        }
        out << c;
      }
      out << '"';
      break;
    }
    case Symbol::Kind::Ident:
    case Symbol::Kind::NonTerminal:
      out << s.text;
      break;
    case Symbol::Kind::Repetition:
      out << "( ";
      for (const Symbol& b : s.body) {
        print_symbol(out, b);
        out << ' ';
      }
      out << ")*";
      break;
  }
}

std::string pretty_print(const Grammar& g) {
  std::ostringstream out;
  for (const IdentClass& ic : g.ident_classes) {
    out << "%ident " << ic.name;
    if (ic.prefix != "a" || !ic.suffix.empty()) out << " quoted";
    out << '\n';
  }
  if (!g.glue.empty()) {
    out << "%glue";
    for (const std::string& t : g.glue) out << " \"" << t << "\"";
    out << '\n';
  }
  for (const std::string& name : g.rule_order) {
    out << name << " :";
    const auto& alts = g.productions.at(name);
    for (size_t i = 0; i < alts.size(); ++i) {
      if (i) out << " |";
      for (const Symbol& s : alts[i]) {
        out << ' ';
        std::ostringstream sym;
        print_symbol(sym, s);
        out << sym.str();
      }
    }
    out << " ;\n";
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Expansion queries
// ---------------------------------------------------------------------------

std::vector<Alternative> t_expansions(const Grammar& g, const std::string& name) {
  int id = g.require_nonterminal(name);
  std::vector<Alternative> out;
  for (int k : g.t_alt_indices[static_cast<size_t>(id)])
    out.push_back(g.alternatives(id)[static_cast<size_t>(k)]);
  return out;
}

std::vector<Alternative> nt_expansions(const Grammar& g, const std::string& name) {
  int id = g.require_nonterminal(name);
  std::vector<Alternative> out;
  for (int k : g.nt_alt_indices[static_cast<size_t>(id)])
    out.push_back(g.alternatives(id)[static_cast<size_t>(k)]);
  return out;
}

// ---------------------------------------------------------------------------
// Measure
// ---------------------------------------------------------------------------

namespace {

struct MeasureState {
  std::map<std::string, std::set<int>> ident_indices;
  int max_items = 0;
  int max_depth = 0;
  std::map<std::string, int> chain;  // nonterminal -> nonleaf expansions on current path
};

void measure_walk(const TreeNode& t, MeasureState& st) {
  switch (t.kind) {
    case TreeNode::Kind::Fixed:
      break;
    case TreeNode::Kind::Ident:
      st.ident_indices[t.name].insert(t.pool_index);
      break;
    case TreeNode::Kind::Repetition:
      st.max_items = std::max(st.max_items, t.rep_count);
      for (const TreeNode& c : t.children) measure_walk(c, st);
      break;
    case TreeNode::Kind::NonTerminal: {
      if (t.leaf_alt) {
        for (const TreeNode& c : t.children) measure_walk(c, st);
      } else {
        int& depth = st.chain[t.name];
        ++depth;
        st.max_depth = std::max(st.max_depth, depth);
        for (const TreeNode& c : t.children) measure_walk(c, st);
        --depth;
      }
      break;
    }
  }
}

}  // namespace

Measure measure(const TreeNode& t) {
  MeasureState st;
  measure_walk(t, st);
  Measure m;
  for (const auto& [cls, indices] : st.ident_indices)
    m.idents = std::max(m.idents, static_cast<int>(indices.size()));
  m.items = st.max_items;
  m.depth = st.max_depth;
  return m;
}

// ---------------------------------------------------------------------------
// Linearization
// ---------------------------------------------------------------------------

static void collect_leaves(const TreeNode& t, std::vector<const std::string*>& out) {
  switch (t.kind) {
    case TreeNode::Kind::Fixed:
    case TreeNode::Kind::Ident:
      out.push_back(&t.text);
      break;
    default:
      for (const TreeNode& c : t.children) collect_leaves(c, out);
      break;
  }
}

std::string linearize(const TreeNode& t, const Grammar& g) {
  std::vector<const std::string*> leaves;
  collect_leaves(t, leaves);
  std::string out;
  for (size_t i = 0; i < leaves.size(); ++i) {
    if (i > 0 && !g.glue.count(*leaves[i - 1]) && !g.glue.count(*leaves[i])) out.push_back(' ');
    out += *leaves[i];
  }
  return out;
}

}  // namespace bonsai
