#include <map>
#include <optional>
#include <vector>

#include "bonsai/target.hpp"

// MiniLang: a statically typed toy language (typed variables, if/while,
// functions, single-inheritance-free classes with attributes). The executable
// here is a hand-written lexer + parser + typechecker with an explicit branch
// point at every decision, both arms instrumented. The parser accepts a small
// superset of the bundled sampling grammar (optional ';', precedence
// expressions, general identifiers/literals).

namespace bonsai {

namespace {

// Decision points; branch id = 2 * decision + (condition ? 1 : 0).
// Lexer and parser decisions come first, typechecker decisions after
// MD_TC_FIRST; is_semantic_branch() keys off that boundary.
enum MiniDecision : int {
  // lexer
  MD_LX_IDENT_START = 0,
  MD_LX_DIGIT_START,
  MD_LX_STRING_START,
  MD_LX_STRING_TERMINATED,
  MD_LX_IS_KEYWORD,
  MD_LX_TWO_CHAR_PUNCT,
  MD_LX_KNOWN_PUNCT,
  // parser
  MD_PS_EMPTY_PROGRAM,
  MD_PS_STMT_PASS,
  MD_PS_STMT_IF,
  MD_PS_STMT_WHILE,
  MD_PS_STMT_DEF,
  MD_PS_STMT_RETURN,
  MD_PS_STMT_CLASS,
  MD_PS_STMT_IS_DECL,
  MD_PS_STMT_IS_ASSIGN,
  MD_PS_ASSIGN_LHS_OK,
  MD_PS_SEMI_PRESENT,
  MD_PS_ELSE_PRESENT,
  MD_PS_BLOCK_MORE,
  MD_PS_PARAM_MORE,
  MD_PS_ARG_MORE,
  MD_PS_TRAILING_COMMA,
  MD_PS_EXPR_PAREN,
  MD_PS_EXPR_NOT,
  MD_PS_POSTFIX_CALL,
  MD_PS_POSTFIX_ATTR,
  MD_PS_CMP_PRESENT,
  MD_PS_CMP_IS_LT,
  MD_PS_ADD_MORE,
  MD_PS_ADD_IS_PLUS,
  MD_PS_MUL_MORE,
  MD_PS_MUL_IS_STAR,
  MD_PS_OR_MORE,
  MD_PS_AND_MORE,
  MD_PS_PRIM_INT,
  MD_PS_PRIM_STRING,
  MD_PS_PRIM_TRUE,
  MD_PS_PRIM_FALSE,
  MD_PS_PRIM_IDENT,
  MD_PS_TYPE_PRIM,
  // typechecker. The *_IS_INT/BOOL/STR/OBJECT groups dispatch on the type
  // that passed a check, so covering their taken arms needs well-typed
  // programs that actually exercise the construct at that type.
  MD_TC_DECL_REDECLARED,
  MD_TC_DECL_TYPE_EXISTS,
  MD_TC_DECL_INIT_MATCH,
  MD_TC_DECL_IS_INT,
  MD_TC_DECL_IS_BOOL,
  MD_TC_DECL_IS_STR,
  MD_TC_DECL_IS_OBJECT,
  MD_TC_ASSIGN_DECLARED,
  MD_TC_ASSIGN_IS_VAR,
  MD_TC_ASSIGN_MATCH,
  MD_TC_ASSIGN_IS_INT,
  MD_TC_ASSIGN_IS_BOOL,
  MD_TC_ASSIGN_IS_STR,
  MD_TC_ASSIGN_IS_OBJECT,
  MD_TC_ATTR_ASSIGN_RECV_DECLARED,
  MD_TC_ATTR_ASSIGN_RECV_OBJECT,
  MD_TC_ATTR_ASSIGN_EXISTS,
  MD_TC_ATTR_ASSIGN_MATCH,
  MD_TC_ATTR_ASSIGN_IS_INT,
  MD_TC_ATTR_ASSIGN_IS_BOOL,
  MD_TC_ATTR_ASSIGN_IS_STR,
  MD_TC_ATTR_ASSIGN_IS_OBJECT,
  MD_TC_IF_COND_BOOL,
  MD_TC_WHILE_COND_BOOL,
  MD_TC_DEF_REDECLARED,
  MD_TC_DEF_RET_TYPE_EXISTS,
  MD_TC_DEF_PARAM_TYPE_EXISTS,
  MD_TC_DEF_DUP_PARAM,
  MD_TC_DEF_NESTED,
  MD_TC_DEF_HAS_PARAMS,
  MD_TC_RETURN_IN_FUNCTION,
  MD_TC_RETURN_MATCH,
  MD_TC_RETURN_IS_INT,
  MD_TC_RETURN_IS_BOOL,
  MD_TC_RETURN_IS_STR,
  MD_TC_RETURN_IS_OBJECT,
  MD_TC_CLASS_REDECLARED,
  MD_TC_CLASS_ATTR_DUP,
  MD_TC_CLASS_ATTR_TYPE_EXISTS,
  MD_TC_CLASS_ATTR_INIT_MATCH,
  MD_TC_CLASS_ATTR_IS_INT,
  MD_TC_CLASS_ATTR_IS_BOOL,
  MD_TC_CLASS_ATTR_IS_STR,
  MD_TC_CLASS_ATTR_IS_OBJECT,
  MD_TC_VAR_DECLARED,
  MD_TC_VAR_IS_VALUE,
  MD_TC_VAR_FROM_OUTER_SCOPE,
  MD_TC_CALL_CALLEE_NAME,
  MD_TC_CALL_KNOWN,
  MD_TC_CALL_CALLABLE,
  MD_TC_CALL_CTOR_NOARGS,
  MD_TC_CALL_ARITY,
  MD_TC_CALL_ARITY_0,
  MD_TC_CALL_ARITY_1,
  MD_TC_CALL_ARITY_MANY,
  MD_TC_CALL_ARG_MATCH,
  MD_TC_ARG_IS_INT,
  MD_TC_ARG_IS_BOOL,
  MD_TC_ARG_IS_STR,
  MD_TC_ARG_IS_OBJECT,
  MD_TC_ATTR_RECV_OBJECT,
  MD_TC_ATTR_EXISTS,
  MD_TC_ATTR_IS_INT,
  MD_TC_ATTR_IS_BOOL,
  MD_TC_ATTR_IS_STR,
  MD_TC_ATTR_IS_OBJECT,
  MD_TC_BIN_OPERAND_UNKNOWN,
  MD_TC_ADD_INT,
  MD_TC_ADD_STR,
  MD_TC_SUB_INT,
  MD_TC_MUL_INT,
  MD_TC_DIV_INT,
  MD_TC_LT_INT,
  MD_TC_EQ_SAME_PRIM,
  MD_TC_EQ_INT,
  MD_TC_EQ_BOOL,
  MD_TC_EQ_STR,
  MD_TC_AND_BOOL,
  MD_TC_OR_BOOL,
  MD_TC_NOT_BOOL,
  // Declared-type dispatch at declaration sites. These fire as soon as the
  // annotation itself resolves, independent of the initializer or body, so a
  // single mutation of an annotation is already a coverage novelty; the
  // *_IS_* groups above then reward completing the well-typed construct.
  MD_TC_DECL_DECLARED_INT,
  MD_TC_DECL_DECLARED_BOOL,
  MD_TC_DECL_DECLARED_STR,
  MD_TC_DECL_DECLARED_OBJECT,
  MD_TC_CLASS_ATTR_DECLARED_INT,
  MD_TC_CLASS_ATTR_DECLARED_BOOL,
  MD_TC_CLASS_ATTR_DECLARED_STR,
  MD_TC_CLASS_ATTR_DECLARED_OBJECT,
  MD_TC_DEF_RET_DECLARED_INT,
  MD_TC_DEF_RET_DECLARED_BOOL,
  MD_TC_DEF_RET_DECLARED_STR,
  MD_TC_DEF_RET_DECLARED_OBJECT,
  MD_TC_PARAM_DECLARED_INT,
  MD_TC_PARAM_DECLARED_BOOL,
  MD_TC_PARAM_DECLARED_STR,
  MD_TC_PARAM_DECLARED_OBJECT,
  MD_COUNT
};

constexpr int MD_TC_FIRST = MD_TC_DECL_REDECLARED;

struct Cov {
  std::set<int>* out;
  bool br(int decision, bool taken) {
    out->insert(2 * decision + (taken ? 1 : 0));
    return taken;
  }
};

// --------------------------------------------------------------------------
// Lexer
// --------------------------------------------------------------------------

struct Tok {
  enum class K { Ident, Int, Str, Kw, Punct, End };
  K k;
  std::string text;
};

struct ParseFail {
  std::string msg;
};

const char* kKeywords[] = {"pass",  "if",    "else", "while", "def", "return", "class", "true",
                           "false", "not",   "and",  "or",    "int", "bool",   "str"};

bool is_keyword(const std::string& s) {
  for (const char* k : kKeywords)
    if (s == k) return true;
  return false;
}

std::vector<Tok> lex(const std::string& in, Cov& cov) {
  std::vector<Tok> toks;
  size_t pos = 0;
  auto isalpha_ = [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
  };
  auto isdigit_ = [](char c) { return c >= '0' && c <= '9'; };
  while (pos < in.size()) {
    char c = in[pos];
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      ++pos;
      continue;
    }
    if (cov.br(MD_LX_IDENT_START, isalpha_(c))) {
      size_t begin = pos;
      while (pos < in.size() && (isalpha_(in[pos]) || isdigit_(in[pos]))) ++pos;
      std::string word = in.substr(begin, pos - begin);
      if (cov.br(MD_LX_IS_KEYWORD, is_keyword(word)))
        toks.push_back({Tok::K::Kw, word});
      else
        toks.push_back({Tok::K::Ident, word});
      continue;
    }
    if (cov.br(MD_LX_DIGIT_START, isdigit_(c))) {
      size_t begin = pos;
      while (pos < in.size() && isdigit_(in[pos])) ++pos;
      toks.push_back({Tok::K::Int, in.substr(begin, pos - begin)});
      continue;
    }
    if (cov.br(MD_LX_STRING_START, c == '"')) {
      size_t begin = ++pos;
      while (pos < in.size() && in[pos] != '"') ++pos;
      if (!cov.br(MD_LX_STRING_TERMINATED, pos < in.size()))
        throw ParseFail{"unterminated string literal"};
      toks.push_back({Tok::K::Str, in.substr(begin, pos - begin)});
      ++pos;
      continue;
    }
    if (cov.br(MD_LX_TWO_CHAR_PUNCT,
               pos + 1 < in.size() && ((c == '=' && in[pos + 1] == '=') ||
                                       (c == '-' && in[pos + 1] == '>')))) {
      toks.push_back({Tok::K::Punct, in.substr(pos, 2)});
      pos += 2;
      continue;
    }
    static const std::string kPunct = ":;=<+-*/(){},.";
    if (!cov.br(MD_LX_KNOWN_PUNCT, kPunct.find(c) != std::string::npos))
      throw ParseFail{std::string("unexpected character '") + c + "'"};
    toks.push_back({Tok::K::Punct, std::string(1, c)});
    ++pos;
  }
  toks.push_back({Tok::K::End, ""});
  return toks;
}

// --------------------------------------------------------------------------
// AST + parser
// --------------------------------------------------------------------------

struct Expr {
  enum class K { Int, Str, True, False, Var, Binary, Not, Call, Attr };
  K k = K::Int;
  std::string text;  // Var name / Binary op / Attr name
  std::vector<Expr> kids;
};

struct TypeRef {
  bool prim = false;
  std::string name;  // "int"|"bool"|"str" or class name
};

struct Stmt {
  enum class K { Pass, Decl, Assign, If, While, Def, Return, Class, ExprStmt };
  struct Param {
    std::string name;
    TypeRef type;
  };
  struct Attr {
    std::string name;
    TypeRef type;
    Expr init;
  };
  K k = K::Pass;
  std::string name;           // Decl/Def/Class name
  TypeRef type;               // Decl type / Def return type
  std::vector<Expr> exprs;    // Decl init / Assign lhs,rhs / cond / Return value
  std::vector<Stmt> body;
  std::vector<Stmt> else_body;
  std::vector<Param> params;
  std::vector<Attr> attrs;
};

struct Parser {
  const std::vector<Tok>& toks;
  size_t pos = 0;
  Cov& cov;

  const Tok& peek(size_t ahead = 0) const {
    size_t i = pos + ahead;
    return i < toks.size() ? toks[i] : toks.back();
  }
  bool at_punct(const char* p, size_t ahead = 0) const {
    return peek(ahead).k == Tok::K::Punct && peek(ahead).text == p;
  }
  bool at_kw(const char* w, size_t ahead = 0) const {
    return peek(ahead).k == Tok::K::Kw && peek(ahead).text == w;
  }
  void expect_punct(const char* p) {
    if (!at_punct(p)) throw ParseFail{std::string("expected '") + p + "'"};
    ++pos;
  }
  std::string expect_ident() {
    if (peek().k != Tok::K::Ident) throw ParseFail{"expected an identifier"};
    return toks[pos++].text;
  }

  std::vector<Stmt> program() {
    std::vector<Stmt> stmts;
    if (cov.br(MD_PS_EMPTY_PROGRAM, peek().k == Tok::K::End))
      throw ParseFail{"empty program"};
    while (peek().k != Tok::K::End) stmts.push_back(stmt());
    return stmts;
  }

  std::vector<Stmt> block() {
    expect_punct("{");
    std::vector<Stmt> stmts;
    while (cov.br(MD_PS_BLOCK_MORE, !at_punct("}") && peek().k != Tok::K::End))
      stmts.push_back(stmt());
    expect_punct("}");
    return stmts;
  }

  void optional_semi() {
    if (cov.br(MD_PS_SEMI_PRESENT, at_punct(";"))) ++pos;
  }

  TypeRef type_ref() {
    TypeRef t;
    if (cov.br(MD_PS_TYPE_PRIM, at_kw("int") || at_kw("bool") || at_kw("str"))) {
      t.prim = true;
      t.name = toks[pos++].text;
      return t;
    }
    t.name = expect_ident();
    return t;
  }

  Stmt stmt() {
    Stmt s;
    if (cov.br(MD_PS_STMT_PASS, at_kw("pass"))) {
      ++pos;
      s.k = Stmt::K::Pass;
      optional_semi();
      return s;
    }
    if (cov.br(MD_PS_STMT_IF, at_kw("if"))) {
      ++pos;
      s.k = Stmt::K::If;
      s.exprs.push_back(expr());
      s.body = block();
      if (cov.br(MD_PS_ELSE_PRESENT, at_kw("else"))) {
        ++pos;
        s.else_body = block();
      }
      return s;
    }
    if (cov.br(MD_PS_STMT_WHILE, at_kw("while"))) {
      ++pos;
      s.k = Stmt::K::While;
      s.exprs.push_back(expr());
      s.body = block();
      return s;
    }
    if (cov.br(MD_PS_STMT_DEF, at_kw("def"))) {
      ++pos;
      s.k = Stmt::K::Def;
      s.name = expect_ident();
      expect_punct("(");
      while (cov.br(MD_PS_PARAM_MORE, !at_punct(")") && peek().k != Tok::K::End)) {
        Stmt::Param p;
        p.name = expect_ident();
        expect_punct(":");
        p.type = type_ref();
        s.params.push_back(std::move(p));
        if (cov.br(MD_PS_TRAILING_COMMA, at_punct(",")))
          ++pos;
        else
          break;
      }
      expect_punct(")");
      expect_punct("->");
      s.type = type_ref();
      s.body = block();
      return s;
    }
    if (cov.br(MD_PS_STMT_RETURN, at_kw("return"))) {
      ++pos;
      s.k = Stmt::K::Return;
      s.exprs.push_back(expr());
      optional_semi();
      return s;
    }
    if (cov.br(MD_PS_STMT_CLASS, at_kw("class"))) {
      ++pos;
      s.k = Stmt::K::Class;
      s.name = expect_ident();
      expect_punct("{");
      while (!at_punct("}") && peek().k != Tok::K::End) {
        Stmt::Attr a;
        a.name = expect_ident();
        expect_punct(":");
        a.type = type_ref();
        expect_punct("=");
        a.init = expr();
        optional_semi();
        s.attrs.push_back(std::move(a));
      }
      expect_punct("}");
      return s;
    }
    if (cov.br(MD_PS_STMT_IS_DECL, peek().k == Tok::K::Ident && at_punct(":", 1))) {
      s.k = Stmt::K::Decl;
      s.name = expect_ident();
      expect_punct(":");
      s.type = type_ref();
      expect_punct("=");
      s.exprs.push_back(expr());
      optional_semi();
      return s;
    }
    Expr e = expr();
    if (cov.br(MD_PS_STMT_IS_ASSIGN, at_punct("="))) {
      ++pos;
      if (!cov.br(MD_PS_ASSIGN_LHS_OK, e.k == Expr::K::Var || e.k == Expr::K::Attr))
        throw ParseFail{"cannot assign to this expression"};
      s.k = Stmt::K::Assign;
      s.exprs.push_back(std::move(e));
      s.exprs.push_back(expr());
      optional_semi();
      return s;
    }
    s.k = Stmt::K::ExprStmt;
    s.exprs.push_back(std::move(e));
    optional_semi();
    return s;
  }

  Expr expr() { return or_expr(); }

  Expr or_expr() {
    Expr e = and_expr();
    while (cov.br(MD_PS_OR_MORE, at_kw("or"))) {
      ++pos;
      Expr bin;
      bin.k = Expr::K::Binary;
      bin.text = "or";
      bin.kids.push_back(std::move(e));
      bin.kids.push_back(and_expr());
      e = std::move(bin);
    }
    return e;
  }

  Expr and_expr() {
    Expr e = not_expr();
    while (cov.br(MD_PS_AND_MORE, at_kw("and"))) {
      ++pos;
      Expr bin;
      bin.k = Expr::K::Binary;
      bin.text = "and";
      bin.kids.push_back(std::move(e));
      bin.kids.push_back(not_expr());
      e = std::move(bin);
    }
    return e;
  }

  Expr not_expr() {
    if (cov.br(MD_PS_EXPR_NOT, at_kw("not"))) {
      ++pos;
      Expr e;
      e.k = Expr::K::Not;
      e.kids.push_back(not_expr());
      return e;
    }
    return cmp_expr();
  }

  Expr cmp_expr() {
    Expr e = add_expr();
    if (cov.br(MD_PS_CMP_PRESENT, at_punct("<") || at_punct("=="))) {
      Expr bin;
      bin.k = Expr::K::Binary;
      bin.text = cov.br(MD_PS_CMP_IS_LT, at_punct("<")) ? "<" : "==";
      ++pos;
      bin.kids.push_back(std::move(e));
      bin.kids.push_back(add_expr());
      return bin;
    }
    return e;
  }

  Expr add_expr() {
    Expr e = mul_expr();
    while (cov.br(MD_PS_ADD_MORE, at_punct("+") || at_punct("-"))) {
      Expr bin;
      bin.k = Expr::K::Binary;
      bin.text = cov.br(MD_PS_ADD_IS_PLUS, at_punct("+")) ? "+" : "-";
      ++pos;
      bin.kids.push_back(std::move(e));
      bin.kids.push_back(mul_expr());
      e = std::move(bin);
    }
    return e;
  }

  Expr mul_expr() {
    Expr e = postfix_expr();
    while (cov.br(MD_PS_MUL_MORE, at_punct("*") || at_punct("/"))) {
      Expr bin;
      bin.k = Expr::K::Binary;
      bin.text = cov.br(MD_PS_MUL_IS_STAR, at_punct("*")) ? "*" : "/";
      ++pos;
      bin.kids.push_back(std::move(e));
      bin.kids.push_back(postfix_expr());
      e = std::move(bin);
    }
    return e;
  }

  Expr postfix_expr() {
    Expr e = primary();
    while (true) {
      if (cov.br(MD_PS_POSTFIX_CALL, at_punct("("))) {
        ++pos;
        Expr call;
        call.k = Expr::K::Call;
        call.kids.push_back(std::move(e));
        while (cov.br(MD_PS_ARG_MORE, !at_punct(")") && peek().k != Tok::K::End)) {
          call.kids.push_back(expr());
          if (cov.br(MD_PS_TRAILING_COMMA, at_punct(",")))
            ++pos;
          else
            break;
        }
        expect_punct(")");
        e = std::move(call);
        continue;
      }
      if (cov.br(MD_PS_POSTFIX_ATTR, at_punct("."))) {
        ++pos;
        Expr attr;
        attr.k = Expr::K::Attr;
        attr.text = expect_ident();
        attr.kids.push_back(std::move(e));
        e = std::move(attr);
        continue;
      }
      return e;
    }
  }

  Expr primary() {
    Expr e;
    if (cov.br(MD_PS_EXPR_PAREN, at_punct("("))) {
      ++pos;
      e = expr();
      expect_punct(")");
      return e;
    }
    if (cov.br(MD_PS_PRIM_INT, peek().k == Tok::K::Int)) {
      e.k = Expr::K::Int;
      e.text = toks[pos++].text;
      return e;
    }
    if (cov.br(MD_PS_PRIM_STRING, peek().k == Tok::K::Str)) {
      e.k = Expr::K::Str;
      e.text = toks[pos++].text;
      return e;
    }
    if (cov.br(MD_PS_PRIM_TRUE, at_kw("true"))) {
      ++pos;
      e.k = Expr::K::True;
      return e;
    }
    if (cov.br(MD_PS_PRIM_FALSE, at_kw("false"))) {
      ++pos;
      e.k = Expr::K::False;
      return e;
    }
    if (cov.br(MD_PS_PRIM_IDENT, peek().k == Tok::K::Ident)) {
      e.k = Expr::K::Var;
      e.text = toks[pos++].text;
      return e;
    }
    throw ParseFail{"expected an expression, got '" + peek().text + "'"};
  }
};

// --------------------------------------------------------------------------
// Typechecker
// --------------------------------------------------------------------------

struct Type {
  enum class K { Int, Bool, Str, Object, Unknown };
  K k = K::Unknown;
  std::string cls;

  static Type intt() { return {K::Int, {}}; }
  static Type boolt() { return {K::Bool, {}}; }
  static Type strt() { return {K::Str, {}}; }
  static Type object(std::string c) { return {K::Object, std::move(c)}; }
  static Type unknown() { return {K::Unknown, {}}; }

  bool is(K kk) const { return k == kk; }
  bool unknown_() const { return k == K::Unknown; }
  bool same(const Type& o) const { return k == o.k && cls == o.cls; }
  std::string show() const {
    switch (k) {
      case K::Int: return "int";
      case K::Bool: return "bool";
      case K::Str: return "str";
      case K::Object: return cls;
      case K::Unknown: return "<unknown>";
    }
    return "?";
  }
};

struct Checker {
  Cov& cov;
  std::vector<std::string> errors;

  // Records the *_IS_INT/BOOL/STR/OBJECT group starting at first_decision.
  // Callers gate this on the construct having typechecked, so the taken arms
  // demand well-typed uses at each concrete type.
  void type_dispatch(int first_decision, const Type& t) {
    cov.br(first_decision + 0, t.is(Type::K::Int));
    cov.br(first_decision + 1, t.is(Type::K::Bool));
    cov.br(first_decision + 2, t.is(Type::K::Str));
    cov.br(first_decision + 3, t.is(Type::K::Object));
  }

  struct FuncSig {
    std::vector<Type> params;
    Type ret;
  };
  struct Entry {
    enum class K { Var, Func, Class };
    K k = K::Var;
    Type t;
    FuncSig sig;
  };
  std::vector<std::map<std::string, Entry>> scopes;
  std::map<std::string, std::map<std::string, Type>> classes;
  std::vector<Type> return_types;

  void error(std::string msg) { errors.push_back(std::move(msg)); }

  Entry* lookup(const std::string& name) {
    for (auto it = scopes.rbegin(); it != scopes.rend(); ++it) {
      auto f = it->find(name);
      if (f != it->end()) return &f->second;
    }
    return nullptr;
  }
  bool in_current_scope(const std::string& name) { return scopes.back().count(name) != 0; }

  Type resolve(const TypeRef& ref, int exists_decision) {
    if (ref.prim) {
      if (ref.name == "int") return Type::intt();
      if (ref.name == "bool") return Type::boolt();
      return Type::strt();
    }
    Entry* e = lookup(ref.name);
    if (!cov.br(exists_decision, e != nullptr && e->k == Entry::K::Class)) {
      error("unknown type '" + ref.name + "'");
      return Type::unknown();
    }
    return Type::object(ref.name);
  }

  bool assignable(const Type& target, const Type& value) {
    if (target.unknown_() || value.unknown_()) return true;
    return target.same(value);
  }

  void check_program(const std::vector<Stmt>& stmts) {
    scopes.emplace_back();
    for (const Stmt& s : stmts) check_stmt(s);
    scopes.pop_back();
  }

  void check_block(const std::vector<Stmt>& stmts) {
    for (const Stmt& s : stmts) check_stmt(s);
  }

  void check_stmt(const Stmt& s) {
    switch (s.k) {
      case Stmt::K::Pass:
        break;
      case Stmt::K::Decl: {
        Type declared = resolve(s.type, MD_TC_DECL_TYPE_EXISTS);
        if (!declared.unknown_()) type_dispatch(MD_TC_DECL_DECLARED_INT, declared);
        Type init = check_expr(s.exprs[0]);
        if (cov.br(MD_TC_DECL_REDECLARED, in_current_scope(s.name)))
          error("redeclaration of '" + s.name + "'");
        else
          scopes.back()[s.name] = Entry{Entry::K::Var, declared, {}};
        if (!cov.br(MD_TC_DECL_INIT_MATCH, assignable(declared, init)))
          error("cannot initialize '" + s.name + "' of type " + declared.show() + " with " +
                init.show());
        else if (!declared.unknown_() && !init.unknown_())
          type_dispatch(MD_TC_DECL_IS_INT, declared);
        break;
      }
      case Stmt::K::Assign: {
        const Expr& lhs = s.exprs[0];
        Type value = check_expr(s.exprs[1]);
        if (lhs.k == Expr::K::Var) {
          Entry* e = lookup(lhs.text);
          if (!cov.br(MD_TC_ASSIGN_DECLARED, e != nullptr)) {
            error("assignment to undeclared '" + lhs.text + "'");
            break;
          }
          if (!cov.br(MD_TC_ASSIGN_IS_VAR, e->k == Entry::K::Var)) {
            error("cannot assign to '" + lhs.text + "'");
            break;
          }
          if (!cov.br(MD_TC_ASSIGN_MATCH, assignable(e->t, value)))
            error("cannot assign " + value.show() + " to '" + lhs.text + "' of type " +
                  e->t.show());
          else if (!e->t.unknown_() && !value.unknown_())
            type_dispatch(MD_TC_ASSIGN_IS_INT, e->t);
        } else {
          // Attribute assignment: receiver.attr = value.
          const Expr& recv = lhs.kids[0];
          Type rt = check_attr_receiver(recv, MD_TC_ATTR_ASSIGN_RECV_DECLARED,
                                        MD_TC_ATTR_ASSIGN_RECV_OBJECT);
          if (rt.unknown_()) break;
          auto& attrs = classes[rt.cls];
          auto it = attrs.find(lhs.text);
          if (!cov.br(MD_TC_ATTR_ASSIGN_EXISTS, it != attrs.end())) {
            error("class '" + rt.cls + "' has no attribute '" + lhs.text + "'");
            break;
          }
          if (!cov.br(MD_TC_ATTR_ASSIGN_MATCH, assignable(it->second, value)))
            error("cannot assign " + value.show() + " to attribute '" + lhs.text + "'");
          else if (!it->second.unknown_() && !value.unknown_())
            type_dispatch(MD_TC_ATTR_ASSIGN_IS_INT, it->second);
        }
        break;
      }
      case Stmt::K::If: {
        Type cond = check_expr(s.exprs[0]);
        if (!cov.br(MD_TC_IF_COND_BOOL, cond.is(Type::K::Bool) || cond.unknown_()))
          error("if condition must be bool, got " + cond.show());
        check_block(s.body);
        check_block(s.else_body);
        break;
      }
      case Stmt::K::While: {
        Type cond = check_expr(s.exprs[0]);
        if (!cov.br(MD_TC_WHILE_COND_BOOL, cond.is(Type::K::Bool) || cond.unknown_()))
          error("while condition must be bool, got " + cond.show());
        check_block(s.body);
        break;
      }
      case Stmt::K::Def: {
        cov.br(MD_TC_DEF_NESTED, !return_types.empty());
        cov.br(MD_TC_DEF_HAS_PARAMS, !s.params.empty());
        Type ret = resolve(s.type, MD_TC_DEF_RET_TYPE_EXISTS);
        if (!ret.unknown_()) type_dispatch(MD_TC_DEF_RET_DECLARED_INT, ret);
        FuncSig sig;
        sig.ret = ret;
        std::map<std::string, Type> seen;
        for (const Stmt::Param& p : s.params) {
          Type pt = resolve(p.type, MD_TC_DEF_PARAM_TYPE_EXISTS);
          if (!pt.unknown_()) type_dispatch(MD_TC_PARAM_DECLARED_INT, pt);
          if (cov.br(MD_TC_DEF_DUP_PARAM, seen.count(p.name) != 0))
            error("duplicate parameter '" + p.name + "'");
          seen[p.name] = pt;
          sig.params.push_back(pt);
        }
        if (cov.br(MD_TC_DEF_REDECLARED, in_current_scope(s.name)))
          error("redeclaration of '" + s.name + "'");
        else
          scopes.back()[s.name] = Entry{Entry::K::Func, Type::unknown(), sig};
        scopes.emplace_back();
        for (const Stmt::Param& p : s.params)
          scopes.back()[p.name] = Entry{Entry::K::Var, seen[p.name], {}};
        return_types.push_back(ret);
        check_block(s.body);
        return_types.pop_back();
        scopes.pop_back();
        break;
      }
      case Stmt::K::Return: {
        Type value = check_expr(s.exprs[0]);
        if (!cov.br(MD_TC_RETURN_IN_FUNCTION, !return_types.empty())) {
          error("return outside a function");
          break;
        }
        if (!cov.br(MD_TC_RETURN_MATCH, assignable(return_types.back(), value)))
          error("return type mismatch: expected " + return_types.back().show() + ", got " +
                value.show());
        else if (!return_types.back().unknown_() && !value.unknown_())
          type_dispatch(MD_TC_RETURN_IS_INT, return_types.back());
        break;
      }
      case Stmt::K::Class: {
        if (cov.br(MD_TC_CLASS_REDECLARED, in_current_scope(s.name))) {
          error("redeclaration of '" + s.name + "'");
          break;
        }
        scopes.back()[s.name] = Entry{Entry::K::Class, Type::unknown(), {}};
        auto& attrs = classes[s.name];
        attrs.clear();
        for (const Stmt::Attr& a : s.attrs) {
          Type at = resolve(a.type, MD_TC_CLASS_ATTR_TYPE_EXISTS);
          if (!at.unknown_()) type_dispatch(MD_TC_CLASS_ATTR_DECLARED_INT, at);
          Type init = check_expr(a.init);
          if (cov.br(MD_TC_CLASS_ATTR_DUP, attrs.count(a.name) != 0)) {
            error("duplicate attribute '" + a.name + "'");
            continue;
          }
          attrs[a.name] = at;
          if (!cov.br(MD_TC_CLASS_ATTR_INIT_MATCH, assignable(at, init)))
            error("cannot initialize attribute '" + a.name + "' of type " + at.show() +
                  " with " + init.show());
          else if (!at.unknown_() && !init.unknown_())
            type_dispatch(MD_TC_CLASS_ATTR_IS_INT, at);
        }
        break;
      }
      case Stmt::K::ExprStmt:
        check_expr(s.exprs[0]);
        break;
    }
  }

  Type check_attr_receiver(const Expr& recv, int declared_decision, int object_decision) {
    Type rt;
    if (recv.k == Expr::K::Var) {
      Entry* e = lookup(recv.text);
      if (!cov.br(declared_decision, e != nullptr && e->k == Entry::K::Var)) {
        error("undeclared variable '" + recv.text + "'");
        return Type::unknown();
      }
      rt = e->t;
    } else {
      rt = check_expr(recv);
    }
    if (rt.unknown_()) return rt;
    if (!cov.br(object_decision, rt.is(Type::K::Object))) {
      error("attribute access on non-object " + rt.show());
      return Type::unknown();
    }
    return rt;
  }

  Type check_expr(const Expr& e) {
    switch (e.k) {
      case Expr::K::Int:
        return Type::intt();
      case Expr::K::Str:
        return Type::strt();
      case Expr::K::True:
      case Expr::K::False:
        return Type::boolt();
      case Expr::K::Var: {
        Entry* entry = nullptr;
        size_t found_scope = 0;
        for (size_t i = scopes.size(); i-- > 0;) {
          auto f = scopes[i].find(e.text);
          if (f != scopes[i].end()) {
            entry = &f->second;
            found_scope = i;
            break;
          }
        }
        if (!cov.br(MD_TC_VAR_DECLARED, entry != nullptr)) {
          error("undeclared variable '" + e.text + "'");
          return Type::unknown();
        }
        if (!cov.br(MD_TC_VAR_IS_VALUE, entry->k == Entry::K::Var)) {
          error("'" + e.text + "' is not a value");
          return Type::unknown();
        }
        cov.br(MD_TC_VAR_FROM_OUTER_SCOPE, found_scope + 1 < scopes.size());
        return entry->t;
      }
      case Expr::K::Not: {
        Type t = check_expr(e.kids[0]);
        if (!cov.br(MD_TC_NOT_BOOL, t.is(Type::K::Bool) || t.unknown_()))
          error("'not' needs a bool, got " + t.show());
        return Type::boolt();
      }
      case Expr::K::Call: {
        const Expr& callee = e.kids[0];
        std::vector<Type> args;
        for (size_t i = 1; i < e.kids.size(); ++i) args.push_back(check_expr(e.kids[i]));
        if (!cov.br(MD_TC_CALL_CALLEE_NAME, callee.k == Expr::K::Var)) {
          error("call of a non-name expression");
          return Type::unknown();
        }
        Entry* entry = lookup(callee.text);
        if (!cov.br(MD_TC_CALL_KNOWN, entry != nullptr)) {
          error("call of undeclared '" + callee.text + "'");
          return Type::unknown();
        }
        if (!cov.br(MD_TC_CALL_CALLABLE, entry->k != Entry::K::Var)) {
          error("'" + callee.text + "' is not callable");
          return Type::unknown();
        }
        if (entry->k == Entry::K::Class) {
          if (!cov.br(MD_TC_CALL_CTOR_NOARGS, args.empty()))
            error("constructor '" + callee.text + "' takes no arguments");
          return Type::object(callee.text);
        }
        const FuncSig& sig = entry->sig;
        if (!cov.br(MD_TC_CALL_ARITY, args.size() == sig.params.size())) {
          error("'" + callee.text + "' expects " + std::to_string(sig.params.size()) +
                " arguments, got " + std::to_string(args.size()));
          return sig.ret;
        }
        cov.br(MD_TC_CALL_ARITY_0, sig.params.empty());
        cov.br(MD_TC_CALL_ARITY_1, sig.params.size() == 1);
        cov.br(MD_TC_CALL_ARITY_MANY, sig.params.size() >= 2);
        for (size_t i = 0; i < args.size(); ++i) {
          if (!cov.br(MD_TC_CALL_ARG_MATCH, assignable(sig.params[i], args[i])))
            error("argument " + std::to_string(i + 1) + " of '" + callee.text +
                  "' expects " + sig.params[i].show() + ", got " + args[i].show());
          else if (!sig.params[i].unknown_() && !args[i].unknown_())
            type_dispatch(MD_TC_ARG_IS_INT, sig.params[i]);
        }
        return sig.ret;
      }
      case Expr::K::Attr: {
        Type rt = check_attr_receiver(e.kids[0], MD_TC_VAR_DECLARED, MD_TC_ATTR_RECV_OBJECT);
        if (rt.unknown_()) return Type::unknown();
        auto& attrs = classes[rt.cls];
        auto it = attrs.find(e.text);
        if (!cov.br(MD_TC_ATTR_EXISTS, it != attrs.end())) {
          error("class '" + rt.cls + "' has no attribute '" + e.text + "'");
          return Type::unknown();
        }
        if (!it->second.unknown_()) type_dispatch(MD_TC_ATTR_IS_INT, it->second);
        return it->second;
      }
      case Expr::K::Binary: {
        Type l = check_expr(e.kids[0]);
        Type r = check_expr(e.kids[1]);
        const std::string& op = e.text;
        bool logic = op == "and" || op == "or";
        if (cov.br(MD_TC_BIN_OPERAND_UNKNOWN, l.unknown_() || r.unknown_()))
          return logic || op == "<" || op == "==" ? Type::boolt()
                 : op == "+" && (l.is(Type::K::Str) || r.is(Type::K::Str)) ? Type::strt()
                                                                           : Type::intt();
        if (logic) {
          if (!cov.br(op == "and" ? MD_TC_AND_BOOL : MD_TC_OR_BOOL,
                      l.is(Type::K::Bool) && r.is(Type::K::Bool)))
            error("'" + op + "' needs bool operands, got " + l.show() + " and " + r.show());
          return Type::boolt();
        }
        if (op == "<") {
          if (!cov.br(MD_TC_LT_INT, l.is(Type::K::Int) && r.is(Type::K::Int)))
            error("'<' needs int operands, got " + l.show() + " and " + r.show());
          return Type::boolt();
        }
        if (op == "==") {
          bool prim = !l.is(Type::K::Object) && !r.is(Type::K::Object);
          if (!cov.br(MD_TC_EQ_SAME_PRIM, prim && l.same(r))) {
            error("'==' needs matching primitive operands, got " + l.show() + " and " +
                  r.show());
          } else {
            cov.br(MD_TC_EQ_INT, l.is(Type::K::Int));
            cov.br(MD_TC_EQ_BOOL, l.is(Type::K::Bool));
            cov.br(MD_TC_EQ_STR, l.is(Type::K::Str));
          }
          return Type::boolt();
        }
        if (op == "+") {
          if (cov.br(MD_TC_ADD_INT, l.is(Type::K::Int) && r.is(Type::K::Int)))
            return Type::intt();
          if (cov.br(MD_TC_ADD_STR, l.is(Type::K::Str) && r.is(Type::K::Str)))
            return Type::strt();
          error("'+' needs int or str operands, got " + l.show() + " and " + r.show());
          return Type::intt();
        }
        int op_decision = op == "-" ? MD_TC_SUB_INT : op == "*" ? MD_TC_MUL_INT : MD_TC_DIV_INT;
        if (!cov.br(op_decision, l.is(Type::K::Int) && r.is(Type::K::Int)))
          error("'" + op + "' needs int operands, got " + l.show() + " and " + r.show());
        return Type::intt();
      }
    }
    return Type::unknown();
  }
};

// --------------------------------------------------------------------------
// Bundled sampling grammar. Alternatives are ordered most-specific-first so
// the reducer's backtracking parser is deterministic; statements carry
// explicit ';' and binary expressions are fully parenthesized.
// --------------------------------------------------------------------------

const std::string kMiniLangGrammar = R"g(# MiniLang: typed variables, control flow, functions, classes with attributes.
%ident ID
%ident STR quoted
%glue "(" ")" "{" "}" ";" "," ":" "." "->"

program : ( stmt )* ;

stmt : "pass" ";"
     | "if" expr "{" ( stmt )* "}" "else" "{" ( stmt )* "}"
     | "while" expr "{" ( stmt )* "}"
     | "def" ID "(" ( param )* ")" "->" type "{" ( stmt )* "}"
     | "return" expr ";"
     | "class" ID "{" ( attr )* "}"
     | ID ":" type "=" expr ";"
     | lhs "=" expr ";"
     | expr ";"
     ;

lhs : ID "(" ")" "." ID | ID "." ID | ID ;
param : ID ":" type "," ;
attr : ID ":" type "=" expr ";" ;
type : "int" | "bool" | "str" | ID ;

expr : "(" expr op expr ")"
     | "not" expr
     | ID "(" ( arg )* ")" "." ID
     | ID "(" ( arg )* ")"
     | ID "." ID
     | "0" | "1" | "2"
     | "true" | "false"
     | STR
     | ID
     ;
arg : expr "," ;
op : "+" | "-" | "*" | "/" | "<" | "==" | "and" | "or" ;
)g";

class MiniLangTarget final : public Target {
 public:
  const std::string& name() const override {
    static const std::string n = "minilang";
    return n;
  }
  const std::string& grammar_source() const override { return kMiniLangGrammar; }
  int total_branches() const override { return 2 * MD_COUNT; }
  bool has_semantic_split() const override { return true; }
  bool is_semantic_branch(int id) const override { return id >= 2 * MD_TC_FIRST; }

  ExecutionFeedback execute(const std::string& input) const override {
    ExecutionFeedback fb;
    Cov cov{&fb.coverage};
    try {
      std::vector<Tok> toks = lex(input, cov);
      Parser parser{toks, 0, cov};
      std::vector<Stmt> stmts = parser.program();
      Checker checker{cov, {}, {}, {}, {}};
      checker.check_program(stmts);
      fb.valid = checker.errors.empty();
      fb.note = fb.valid ? "ok" : checker.errors.front();
    } catch (const ParseFail& f) {
      fb.valid = false;
      fb.note = f.msg;
    }
    return fb;
  }
};

static_assert(2 * MD_COUNT >= 120, "minilang must expose at least 120 branch points");

}  // namespace

std::unique_ptr<Target> make_minilang_target() { return std::make_unique<MiniLangTarget>(); }

}  // namespace bonsai
