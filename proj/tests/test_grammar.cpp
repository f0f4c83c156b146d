#include <doctest.h>

#include <functional>

#include "bonsai/grammar.hpp"
#include "helpers.hpp"

using namespace bonsai;
using namespace bonsai::testing;

TEST_CASE("parse_grammar: minimal single-rule grammar") {
  Grammar g = parse_grammar("start : \"pass\" ;");
  CHECK(g.start == "start");
  CHECK(g.productions.size() == 1);
  REQUIRE(g.productions.at("start").size() == 1);
  REQUIRE(g.productions.at("start")[0].size() == 1);
  CHECK(g.productions.at("start")[0][0].kind == Symbol::Kind::Fixed);
  CHECK(g.productions.at("start")[0][0].text == "pass");
}

TEST_CASE("parse_grammar: ident class declaration") {
  Grammar g = parse_grammar("%ident ID\nstart : ID \"=\" ID ;");
  REQUIRE(g.ident_classes.size() == 1);
  CHECK(g.ident_classes[0].name == "ID");
  CHECK(g.productions.at("start")[0][0].kind == Symbol::Kind::Ident);
  CHECK(g.pool_value(0, 2) == "a2");
}

TEST_CASE("parse_grammar: quoted ident class pools") {
  Grammar g = parse_grammar("%ident STR quoted\nstart : STR ;");
  CHECK(g.pool_value(0, 0) == "\"s0\"");
  CHECK(g.pool_value(0, 11) == "\"s11\"");
}

TEST_CASE("parse_grammar: Kleene repetition alternative") {
  Grammar g = parse_grammar("start : ( stmt )* ;\nstmt : \"pass\" ;");
  REQUIRE(g.productions.at("start")[0].size() == 1);
  const Symbol& rep = g.productions.at("start")[0][0];
  CHECK(rep.kind == Symbol::Kind::Repetition);
  REQUIRE(rep.body.size() == 1);
  CHECK(rep.body[0].kind == Symbol::Kind::NonTerminal);
}

TEST_CASE("parse_grammar: errors carry position and name information") {
  SUBCASE("syntax error") {
    try {
      parse_grammar("start : \"a\" |;\n");
      FAIL("expected GrammarError");
    } catch (const GrammarError& e) {
      CHECK(e.line >= 1);
    }
  }
  SUBCASE("undefined name") {
    CHECK_THROWS_WITH_AS(parse_grammar("start : missing ;"),
                         doctest::Contains("missing"), GrammarError);
  }
  SUBCASE("empty alternative") {
    CHECK_THROWS_WITH_AS(parse_grammar("start : ;"), doctest::Contains("empty alternative"),
                         GrammarError);
  }
  SUBCASE("empty repetition body") {
    CHECK_THROWS_AS(parse_grammar("start : ( )* ;"), GrammarError);
  }
  SUBCASE("redefinition") {
    CHECK_THROWS_AS(parse_grammar("a : \"x\" ;\na : \"y\" ;"), GrammarError);
  }
  SUBCASE("unterminated rule") {
    CHECK_THROWS_AS(parse_grammar("start : \"x\""), GrammarError);
  }
  SUBCASE("no terminal frontier is rejected at load time") {
    CHECK_THROWS_WITH_AS(parse_grammar("a : a \"x\" ;"), doctest::Contains("frontier"),
                         GrammarError);
    CHECK_THROWS_AS(parse_grammar("a : ( b )* ;\nb : a ;"), GrammarError);
  }
}

TEST_CASE("t_expansions / nt_expansions") {
  SUBCASE("one terminal-only alternative") {
    Grammar g;
    g.start = "A";
    g.productions["A"] = {{Symbol::fixed("x")}, {Symbol::nonterminal("A"), Symbol::fixed("x")}};
    g.finalize();
    auto t = t_expansions(g, "A");
    auto nt = nt_expansions(g, "A");
    REQUIRE(t.size() == 1);
    CHECK(t[0][0].text == "x");
    REQUIRE(nt.size() == 1);
    CHECK(nt[0].size() == 2);
  }
  SUBCASE("purely recursive nonterminal has no terminal expansions") {
    Grammar g;
    g.start = "A";
    g.productions["A"] = {{Symbol::nonterminal("A"), Symbol::fixed("x")}};
    g.finalize();
    CHECK(t_expansions(g, "A").empty());
    CHECK(nt_expansions(g, "A").size() == 1);
  }
  SUBCASE("repetition counts as terminal-only iff its body has no nonterminal") {
    Grammar g;
    g.start = "A";
    g.productions["A"] = {{Symbol::repetition({Symbol::fixed("x")})}, {Symbol::nonterminal("A")}};
    g.finalize();
    auto t = t_expansions(g, "A");
    REQUIRE(t.size() == 1);
    CHECK(t[0][0].kind == Symbol::Kind::Repetition);
    CHECK(nt_expansions(g, "A").size() == 1);
  }
}

TEST_CASE("t/nt expansions partition every alternative list (brute-force cross-check)") {
  for (const Grammar& g : fixture_grammars()) {
    for (const auto& [name, alts] : g.productions) {
      auto t = t_expansions(g, name);
      auto nt = nt_expansions(g, name);
      CHECK(t.size() + nt.size() == alts.size());
      // Independent classification by recursive scan.
      size_t oracle_terminal_only = 0;
      for (const Alternative& alt : alts) {
        bool has_nt = false;
        for (const Symbol& s : alt) has_nt = has_nt || oracle_has_nonterminal(s, g);
        if (!has_nt) ++oracle_terminal_only;
      }
      CHECK(t.size() == oracle_terminal_only);
      for (const Alternative& alt : t) CHECK(alternative_is_terminal_only(alt));
      for (const Alternative& alt : nt) CHECK(!alternative_is_terminal_only(alt));
    }
  }
}

TEST_CASE("measure: hand-built trees") {
  SUBCASE("single terminal-only expansion has no nesting") {
    TreeNode leaf;
    leaf.kind = TreeNode::Kind::Fixed;
    leaf.text = "pass";
    TreeNode root;
    root.kind = TreeNode::Kind::NonTerminal;
    root.name = "start";
    root.alt_index = 0;
    root.leaf_alt = true;
    root.children.push_back(leaf);
    CHECK(measure(root) == Measure{0, 0, 0});
  }

  SUBCASE("idents counts distinct pool indices per class") {
    // a0 = a0 under the ident toy: one distinct index.
    TreeNode l, r, eq, root;
    l.kind = r.kind = TreeNode::Kind::Ident;
    l.name = r.name = "ID";
    l.pool_index = r.pool_index = 0;
    l.text = r.text = "a0";
    eq.kind = TreeNode::Kind::Fixed;
    eq.text = "=";
    root.kind = TreeNode::Kind::NonTerminal;
    root.name = "start";
    root.leaf_alt = true;
    root.children = {l, eq, r};
    CHECK(measure(root).idents == 1);
    root.children[2].pool_index = 1;
    CHECK(measure(root).idents == 2);
  }

  SUBCASE("depth counts nonterminal-bearing expansions of the same nonterminal on a path") {
    // expr -> ( expr + expr ) with both inner exprs leaves: one nesting level.
    Grammar g = nested_toy();
    TreeNode tree = [&] {
      TreeNode inner_x;
      inner_x.kind = TreeNode::Kind::NonTerminal;
      inner_x.name = "expr";
      inner_x.alt_index = 0;
      inner_x.leaf_alt = true;
      TreeNode leaf;
      leaf.kind = TreeNode::Kind::Fixed;
      leaf.text = "x";
      inner_x.children.push_back(leaf);

      TreeNode outer;
      outer.kind = TreeNode::Kind::NonTerminal;
      outer.name = "expr";
      outer.alt_index = 2;
      outer.leaf_alt = false;
      TreeNode lp, plus, rp;
      lp.kind = plus.kind = rp.kind = TreeNode::Kind::Fixed;
      lp.text = "(";
      plus.text = "+";
      rp.text = ")";
      outer.children = {lp, inner_x, plus, inner_x, rp};
      return outer;
    }();
    CHECK(measure(tree).depth == 1);

    // Wrap once more: two nested nonterminal-bearing expr expansions.
    TreeNode outer2 = tree;
    outer2.children[1] = tree;
    CHECK(measure(outer2).depth == 2);
    CHECK(linearize(outer2, g) == "( ( x + x ) + x )");
  }

  SUBCASE("items is the max repetition count") {
    TreeNode rep;
    rep.kind = TreeNode::Kind::Repetition;
    rep.rep_count = 3;
    TreeNode root;
    root.kind = TreeNode::Kind::NonTerminal;
    root.name = "start";
    root.leaf_alt = true;
    root.children.push_back(rep);
    CHECK(measure(root).items == 3);
  }
}

TEST_CASE("measure is monotone under repetition-item removal") {
  // Dropping one repetition item never increases any component.
  Grammar g = parse_grammar(make_target("minilang")->grammar_source());
  Rng rng(2024);
  int checked = 0;
  for (int i = 0; i < 200; ++i) {
    FreshSource src(rng.next());
    SampleResult r = bounded_sample(g, {3, 3, 3}, src);
    // Find a repetition node with at least one item; drop its last item.
    std::function<bool(TreeNode&)> drop = [&](TreeNode& t) {
      if (t.kind == TreeNode::Kind::Repetition && t.rep_count > 0) {
        size_t per = t.children.size() / static_cast<size_t>(t.rep_count);
        t.children.resize(t.children.size() - per);
        t.rep_count -= 1;
        return true;
      }
      for (TreeNode& c : t.children)
        if (drop(c)) return true;
      return false;
    };
    TreeNode smaller = r.tree;
    if (!drop(smaller)) continue;
    Measure before = measure(r.tree), after = measure(smaller);
    CHECK(after.idents <= before.idents);
    CHECK(after.items <= before.items);
    CHECK(after.depth <= before.depth);
    ++checked;
  }
  CHECK(checked > 50);
}

TEST_CASE("pretty-print round trip is structurally equal") {
  for (const Grammar& g : fixture_grammars()) {
    Grammar again = parse_grammar(pretty_print(g));
    CHECK(again == g);
    // And printing is a fixpoint.
    CHECK(pretty_print(again) == pretty_print(g));
  }
}

TEST_CASE("linearization joins leaves with spaces except at glue tokens") {
  Grammar g = parse_grammar(make_target("minilang")->grammar_source());
  TreeNode tree = [&] {
    auto fixed = [](const char* t) {
      TreeNode n;
      n.kind = TreeNode::Kind::Fixed;
      n.text = t;
      return n;
    };
    TreeNode id;
    id.kind = TreeNode::Kind::Ident;
    id.name = "ID";
    id.pool_index = 0;
    id.text = "a0";
    TreeNode root;
    root.kind = TreeNode::Kind::NonTerminal;
    root.name = "stmt";
    root.leaf_alt = true;
    root.children = {id, fixed(":"), fixed("int"), fixed("="), fixed("1"), fixed(";")};
    return root;
  }();
  CHECK(linearize(tree, g) == "a0:int = 1;");
}
