#include <doctest.h>

#include <cstdlib>
#include <fstream>

#include "bonsai/sampler.hpp"
#include "bonsai/util.hpp"
#include "helpers.hpp"

using namespace bonsai;
using namespace bonsai::testing;

TEST_CASE("minilang: basic validity oracle") {
  auto t = make_target("minilang");
  SUBCASE("trivially well-typed statement") {
    ExecutionFeedback fb = t->execute("pass");
    CHECK(fb.valid);
    CHECK(!fb.coverage.empty());
  }
  SUBCASE("type mismatch on reassignment") {
    ExecutionFeedback fb = t->execute("a : int = 1 a = \"x\"");
    CHECK(!fb.valid);
  }
  SUBCASE("empty program is invalid") {
    CHECK(!t->execute("").valid);
    CHECK(!t->execute("   \n\t").valid);
    CHECK(!t->execute("").coverage.empty());
  }
  SUBCASE("declarations, control flow, functions, classes typecheck") {
    CHECK(t->execute("a0 : int = 1; a0 = (a0 + 1);").valid);
    CHECK(t->execute("if true { pass; } else { pass; }").valid);
    CHECK(t->execute("while false { pass; }").valid);
    CHECK(t->execute("def a0 ( a1 : int , ) -> int { return a1; }").valid);
    CHECK(t->execute("class a0 { a1 : int = 0; } a2 : a0 = a0(); a2.a1 = 1;").valid);
  }
  SUBCASE("typing errors are rejected") {
    CHECK(!t->execute("if 1 { pass; } else { pass; }").valid);   // non-bool condition
    CHECK(!t->execute("a0 = 1;").valid);                         // undeclared
    CHECK(!t->execute("a0 : int = 1; a0 : int = 2;").valid);     // redeclaration
    CHECK(!t->execute("return 1;").valid);                       // return at top level
    CHECK(!t->execute("(1 + true);").valid);                     // arith on bool
    CHECK(!t->execute("def a0 () -> int { return true; }").valid);
  }
}

TEST_CASE("minilang: if/else coverage strictly contains pass coverage") {
  auto t = make_target("minilang");
  std::set<int> small = t->execute("pass").coverage;
  std::set<int> big = t->execute("if true { pass } else { pass }").coverage;
  CHECK(std::includes(big.begin(), big.end(), small.begin(), small.end()));
  CHECK(big.size() > small.size());
}

TEST_CASE("minilang: instrumentation bounds and semantic split") {
  auto t = make_target("minilang");
  CHECK(t->total_branches() >= 120);
  CHECK(t->has_semantic_split());
  int semantic = 0;
  for (int id = 0; id < t->total_branches(); ++id)
    if (t->is_semantic_branch(id)) ++semantic;
  CHECK(semantic > 0);
  CHECK(semantic < t->total_branches());

  // Lexer/parser branches come before the semantic boundary.
  ExecutionFeedback fb = t->execute("pass");
  for (int id : fb.coverage) {
    CHECK(id >= 0);
    CHECK(id < t->total_branches());
  }
}

TEST_CASE("targets are deterministic") {
  for (const char* name : {"minilang", "arith"}) {
    auto t = make_target(name);
    Grammar g = parse_grammar(t->grammar_source());
    for (int i = 0; i < 5; ++i) {
      FreshSource src(derive_seed(13, {static_cast<uint64_t>(i)}));
      SampleResult r = bounded_sample(g, {3, 3, 3}, src);
      ExecutionFeedback first = t->execute(r.text);
      for (int rep = 0; rep < 100; ++rep) CHECK(t->execute(r.text) == first);
    }
  }
}

TEST_CASE("arith: validity oracle") {
  auto t = make_target("arith");
  CHECK(t->execute("1 + 2").valid);
  CHECK(!t->execute("1 / 0").valid);
  CHECK(t->execute("(1 + 2) * 3").valid);
  CHECK(t->execute("(1+2)*3").note == "= 9");
  CHECK(!t->execute("").valid);
  CHECK(!t->execute("1 +").valid);
  CHECK(!t->execute("1 2").valid);

  SUBCASE("parenthesization branch separates coverage") {
    std::set<int> paren = t->execute("(1 + 2) * 3").coverage;
    std::set<int> plain = t->execute("1").coverage;
    std::set<int> diff;
    std::set_difference(paren.begin(), paren.end(), plain.begin(), plain.end(),
                        std::inserter(diff, diff.begin()));
    CHECK(!diff.empty());
  }
}

TEST_CASE("minilang: validity fraction shrinks as bounds grow (smoke)") {
  auto t = make_target("minilang");
  Grammar g = parse_grammar(t->grammar_source());
  auto fraction = [&](SizeBounds b, uint64_t salt) {
    int valid = 0;
    const int total = 2000;
    for (int i = 0; i < total; ++i) {
      FreshSource src(derive_seed(salt, {static_cast<uint64_t>(i)}));
      valid += t->execute(bounded_sample(g, b, src).text).valid;
    }
    return valid / static_cast<double>(total);
  };
  CHECK(fraction({1, 1, 1}, 140) > fraction({3, 3, 3}, 141));
}

TEST_CASE("external target: line protocol and crash mapping") {
  const char* fake = std::getenv("FAKE_TARGET");
  REQUIRE_MESSAGE(fake != nullptr, "FAKE_TARGET env var must point at the fixture binary");

  auto t = make_external_target(fake, kTwoRuleToy, 8);
  CHECK(t->total_branches() == 9);

  SUBCASE("feedback round-trips") {
    ExecutionFeedback fb = t->execute("pass");
    CHECK(fb.valid);
    CHECK(!fb.coverage.empty());
    for (int id : fb.coverage) CHECK(id < 8);
    CHECK(t->execute("pass") == fb);
  }
  SUBCASE("process failure becomes invalid feedback with the crash branch") {
    ExecutionFeedback fb = t->execute("CRASH");
    CHECK(!fb.valid);
    CHECK(fb.coverage.count(8) == 1);
    // The target restarts for the next execution.
    CHECK(t->execute("pass").valid);
  }
}

TEST_CASE("unknown target name is rejected") {
  CHECK_THROWS_AS(make_target("cobol"), TargetError);
}

TEST_CASE("bundled grammar files match the embedded grammars") {
  for (const char* name : {"arith", "minilang"}) {
    auto t = make_target(name);
    std::ifstream in(std::string(BONSAI_SOURCE_DIR) + "/grammars/" + name + ".g");
    REQUIRE(in.good());
    std::string file((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    CHECK(parse_grammar(file) == parse_grammar(t->grammar_source()));
  }
}
