#include <doctest.h>

#include <algorithm>

#include "bonsai/fuzzer.hpp"
#include "bonsai/util.hpp"
#include "helpers.hpp"

using namespace bonsai;
using namespace bonsai::testing;

namespace {

ExecutionFeedback fb_of(bool valid, std::initializer_list<int> cov) {
  ExecutionFeedback fb;
  fb.valid = valid;
  fb.coverage = cov;
  return fb;
}

Corpus corpus_with(std::initializer_list<int> cov, std::initializer_list<int> valid_cov) {
  Corpus c;
  c.cumulative_coverage = cov;
  c.cumulative_valid_coverage = valid_cov;
  return c;
}

SeedInput sample_seed(const Grammar& g, SizeBounds b, uint64_t seed) {
  FreshSource src(seed);
  SampleResult r = bounded_sample(g, b, src);
  return {r.text, r.choices};
}

}  // namespace

TEST_CASE("is_interesting: unrestricted and restricted criteria") {
  SUBCASE("empty corpus admits any non-empty coverage") {
    CHECK(is_interesting(fb_of(false, {1}), {}, ValidityMode::Unrestricted));
    CHECK(is_interesting(fb_of(true, {1}), {}, ValidityMode::Unrestricted));
  }
  SUBCASE("invalid input with no new coverage is never interesting") {
    Corpus c = corpus_with({1, 2}, {1});
    CHECK(!is_interesting(fb_of(false, {1, 2}), c, ValidityMode::Unrestricted));
    CHECK(!is_interesting(fb_of(false, {1, 2}), c, ValidityMode::Restricted));
  }
  SUBCASE("valid input covered overall but new among valid inputs is interesting") {
    Corpus c = corpus_with({1, 2}, {1});
    CHECK(is_interesting(fb_of(true, {2}), c, ValidityMode::Unrestricted));
    CHECK(is_interesting(fb_of(true, {2}), c, ValidityMode::Restricted));
  }
  SUBCASE("restricted ignores invalid inputs entirely") {
    Corpus c = corpus_with({1}, {1});
    CHECK(is_interesting(fb_of(false, {7}), c, ValidityMode::Unrestricted));
    CHECK(!is_interesting(fb_of(false, {7}), c, ValidityMode::Restricted));
  }
}

TEST_CASE("cbgf_run: budget equal to seed count admits seeds only") {
  auto t = make_target("arith");
  const Grammar& g = t->grammar();
  FuzzerConfig cfg;
  cfg.bounds = {1, 1, 1};
  cfg.budget = 2;
  cfg.prng_seed = 5;
  std::vector<SeedInput> seeds = {{"1", {}}, {"(1 + 2)", {}}};
  RunTrace trace;
  Corpus c = cbgf_run(*t, g, cfg, seeds, &trace);
  CHECK(trace.executions == 2);
  CHECK(c.executions == 2);
  for (const SavedInput& s : c.members)
    CHECK((s.text == "1" || s.text == "(1 + 2)"));
  CHECK(!c.members.empty());
}

TEST_CASE("cbgf_run: cumulative coverage contains every member and seed execution") {
  auto t = make_target("arith");
  const Grammar& g = t->grammar();
  FuzzerConfig cfg;
  cfg.bounds = {1, 1, 1};
  cfg.budget = 1000;
  cfg.prng_seed = 17;
  std::vector<SeedInput> seeds = {sample_seed(g, cfg.bounds, 1)};
  Corpus c = cbgf_run(*t, g, cfg, seeds);
  CHECK(c.executions == 1000);
  std::set<int> seed_cov = t->execute(seeds[0].text).coverage;
  CHECK(std::includes(c.cumulative_coverage.begin(), c.cumulative_coverage.end(),
                      seed_cov.begin(), seed_cov.end()));
  for (const SavedInput& s : c.members)
    CHECK(std::includes(c.cumulative_coverage.begin(), c.cumulative_coverage.end(),
                        s.feedback.coverage.begin(), s.feedback.coverage.end()));
}

TEST_CASE("cbgf_run: restricted mode saves only valid inputs") {
  auto t = make_target("minilang");
  const Grammar& g = t->grammar();
  FuzzerConfig cfg;
  cfg.bounds = {2, 2, 2};
  cfg.mode = ValidityMode::Restricted;
  cfg.budget = 3000;
  cfg.prng_seed = 23;
  Corpus c = cbgf_run(*t, g, cfg, {sample_seed(g, cfg.bounds, 2)});
  CHECK(!c.members.empty());
  for (const SavedInput& s : c.members) {
    CHECK(s.feedback.valid);
    CHECK(s.via_valid_clause);
  }
}

TEST_CASE("cbgf_run: admissions strictly grow a cumulative set, in order") {
  auto t = make_target("minilang");
  const Grammar& g = t->grammar();
  FuzzerConfig cfg;
  cfg.bounds = {2, 2, 2};
  cfg.budget = 4000;
  cfg.prng_seed = 31;
  Corpus c = cbgf_run(*t, g, cfg, {sample_seed(g, cfg.bounds, 3)});
  std::set<int> cov, valid_cov;
  for (const SavedInput& s : c.members) {
    bool new_cov = !std::includes(cov.begin(), cov.end(), s.feedback.coverage.begin(),
                                  s.feedback.coverage.end());
    std::set<int> vc = s.feedback.valid ? s.feedback.coverage : std::set<int>{};
    bool new_valid = !vc.empty() && !std::includes(valid_cov.begin(), valid_cov.end(),
                                                   vc.begin(), vc.end());
    CHECK((new_cov || new_valid));
    CHECK(!s.novel_branches.empty());
    cov.insert(s.feedback.coverage.begin(), s.feedback.coverage.end());
    valid_cov.insert(vc.begin(), vc.end());
  }
  CHECK(cov == c.cumulative_coverage);
  CHECK(valid_cov == c.cumulative_valid_coverage);
}

TEST_CASE("cbgf_run: size discipline and replayability of every member") {
  auto t = make_target("minilang");
  const Grammar& g = t->grammar();
  FuzzerConfig cfg;
  cfg.bounds = {2, 2, 2};
  cfg.budget = 3000;
  cfg.prng_seed = 37;
  Corpus c = cbgf_run(*t, g, cfg, {sample_seed(g, cfg.bounds, 4)});
  for (const SavedInput& s : c.members) {
    ReplaySource src(s.choices, 0);
    SampleResult r = bounded_sample(g, cfg.bounds, src);
    CHECK(r.text == s.text);
    CHECK(measure(r.tree).within(2, 2, 2));
    CHECK(s.size_bytes == ws_excluded_size(s.text));
    CHECK(s.provenance == "m2n2d2u");
  }
}

TEST_CASE("cbgf_run: byte-for-byte reproducible and duplicate-free") {
  auto t = make_target("minilang");
  const Grammar& g = t->grammar();
  FuzzerConfig cfg;
  cfg.bounds = {3, 3, 3};
  cfg.budget = 5000;
  cfg.prng_seed = 41;
  std::vector<SeedInput> seeds = {sample_seed(g, cfg.bounds, 5)};
  Corpus a = cbgf_run(*t, g, cfg, seeds);
  Corpus b = cbgf_run(*t, g, cfg, seeds);
  REQUIRE(a.members.size() == b.members.size());
  std::set<std::string> texts;
  for (size_t i = 0; i < a.members.size(); ++i) {
    CHECK(a.members[i].text == b.members[i].text);
    CHECK(a.members[i].choices == b.members[i].choices);
    CHECK(a.members[i].feedback == b.members[i].feedback);
    texts.insert(a.members[i].text);
  }
  CHECK(texts.size() == a.members.size());
}

TEST_CASE("cbgf_run: stop-on-stagnation ends a run early") {
  auto t = make_target("arith");
  const Grammar& g = t->grammar();
  FuzzerConfig cfg;
  cfg.bounds = {1, 1, 1};
  cfg.budget = 100000;
  cfg.prng_seed = 43;
  cfg.stop_on_stagnation = 500;
  Corpus c = cbgf_run(*t, g, cfg, {sample_seed(g, cfg.bounds, 6)});
  CHECK(c.executions < 100000);
  CHECK(c.failure.empty());
}

TEST_CASE("mutate: changes at least one recorded decision") {
  Grammar g = two_rule_toy();
  Rng rng(51);
  SavedInput parent;
  FreshSource src(7);
  SampleResult r = bounded_sample(g, {1, 2, 1}, src);
  parent.text = r.text;
  parent.choices = r.choices;
  REQUIRE(!parent.choices.empty());
  for (int i = 0; i < 100; ++i) {
    SampleResult m = mutate(parent, g, {1, 2, 1}, rng);
    CHECK(m.choices != parent.choices);
  }
}

TEST_CASE("mutate: empty choice sequences degenerate to fresh samples") {
  Grammar g = parse_grammar("start : \"pass\" ;");
  SavedInput parent;
  parent.text = "pass";
  Rng rng(53);
  SampleResult m = mutate(parent, g, {1, 1, 1}, rng);
  CHECK(m.text == "pass");
}

TEST_CASE("mutate under larger bounds can introduce a second identifier") {
  Grammar g = ident_toy();
  FreshSource src(3);
  SampleResult seed = bounded_sample(g, {1, 1, 1}, src);
  REQUIRE(seed.text == "a0 = a0");
  SavedInput parent;
  parent.text = seed.text;
  parent.choices = seed.choices;
  Rng rng(59);
  bool saw_second = false;
  for (int i = 0; i < 200 && !saw_second; ++i) {
    SampleResult m = mutate(parent, g, {2, 1, 1}, rng);
    saw_second = m.text.find("a1") != std::string::npos;
  }
  CHECK(saw_second);
}

TEST_CASE("mutate: single-position closure reaches the full bounded language") {
  // BFS over all single-position, single-value changes; replaying after each
  // change re-normalizes the sequence exactly as mutate does.
  Grammar g = two_rule_toy();
  SizeBounds b{1, 2, 1};
  FreshSource src(7);
  SampleResult start = bounded_sample(g, b, src);

  std::set<std::string> reached = {start.text};
  std::vector<ChoiceSequence> frontier = {start.choices};
  std::set<std::string> visited_keys = {choices_to_json(start.choices)};
  while (!frontier.empty()) {
    std::vector<ChoiceSequence> next;
    for (const ChoiceSequence& cs : frontier) {
      for (size_t pos = 0; pos < cs.size(); ++pos) {
        const int64_t max_value = cs[pos].tag == Choice::Tag::RepCount ? b.max_items : 1;
        for (int64_t v = 0; v <= max_value; ++v) {
          if (v == cs[pos].value) continue;
          ChoiceSequence tweaked = cs;
          tweaked[pos].value = v;
          ReplaySource replay(tweaked, 0);
          SampleResult r = bounded_sample(g, b, replay);
          reached.insert(r.text);
          std::string key = choices_to_json(r.choices);
          if (visited_keys.insert(key).second) next.push_back(r.choices);
        }
      }
    }
    frontier = std::move(next);
  }
  CHECK(reached == oracle_bounded_language(g, b));
}

TEST_CASE("corpus save/load round trip") {
  auto t = make_target("minilang");
  const Grammar& g = t->grammar();
  FuzzerConfig cfg;
  cfg.bounds = {2, 2, 2};
  cfg.budget = 1500;
  cfg.prng_seed = 61;
  Corpus c = cbgf_run(*t, g, cfg, {sample_seed(g, cfg.bounds, 8)});
  const std::string dir = "/tmp/bonsai-test-corpus-roundtrip";
  save_corpus(c, dir);
  Corpus loaded = load_corpus(dir);
  REQUIRE(loaded.members.size() == c.members.size());
  for (size_t i = 0; i < c.members.size(); ++i) {
    CHECK(loaded.members[i].text == c.members[i].text);
    CHECK(loaded.members[i].choices == c.members[i].choices);
    CHECK(loaded.members[i].feedback == c.members[i].feedback);
    CHECK(loaded.members[i].novel_branches == c.members[i].novel_branches);
    CHECK(loaded.members[i].via_valid_clause == c.members[i].via_valid_clause);
  }
  CHECK(loaded.executions == c.executions);
}

namespace {

// Target over a grammar that can hit the sampling-stuck condition: 'a' has
// only nonterminal-bearing expansions, so driving b -> a past the depth
// bound raises SamplingStuckError mid-run.
class StuckProneTarget final : public Target {
 public:
  const std::string& name() const override {
    static const std::string n = "stuck-prone";
    return n;
  }
  const std::string& grammar_source() const override {
    static const std::string g = "a : b ;\nb : \"x\" | a ;\n";
    return g;
  }
  int total_branches() const override { return 4; }
  ExecutionFeedback execute(const std::string& input) const override {
    ExecutionFeedback fb;
    fb.valid = true;
    fb.coverage.insert(static_cast<int>(input.size()) % 4);
    return fb;
  }
};

}  // namespace

TEST_CASE("cbgf_run: sampler-stuck aborts with a failure marker and partial corpus") {
  StuckProneTarget t;
  const Grammar& g = t.grammar();
  FuzzerConfig cfg;
  cfg.bounds = {1, 1, 1};
  cfg.budget = 100000;
  cfg.prng_seed = 7;
  Corpus c = cbgf_run(t, g, cfg, {{"x", {}}});
  CHECK(!c.failure.empty());
  CHECK(c.failure.find("'a'") != std::string::npos);
  CHECK(!c.members.empty());          // partial corpus still returned
  CHECK(c.executions < cfg.budget);   // aborted early
}
