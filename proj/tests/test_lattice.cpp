#include <doctest.h>

#include <algorithm>
#include <map>

#include "bonsai/lattice.hpp"
#include "bonsai/util.hpp"
#include "helpers.hpp"

using namespace bonsai;
using namespace bonsai::testing;

namespace {

NodeId plain(int m, int n, int d) { return {m, n, d, std::nullopt}; }
NodeId ext(int m, int n, int d, ValidityMode v) { return {m, n, d, v}; }

constexpr ValidityMode R = ValidityMode::Restricted;
constexpr ValidityMode U = ValidityMode::Unrestricted;

}  // namespace

TEST_CASE("leq: componentwise order plus the validity clause") {
  CHECK(leq(plain(1, 1, 1), plain(2, 2, 1)));
  CHECK(!leq(plain(2, 1, 1), plain(1, 2, 2)));  // incomparable
  CHECK(!leq(plain(1, 2, 2), plain(2, 1, 1)));
  CHECK(leq(plain(2, 2, 2), plain(2, 2, 2)));
  CHECK(leq(ext(1, 1, 1, R), ext(1, 1, 1, U)));
  CHECK(!leq(ext(1, 1, 1, U), ext(1, 1, 1, R)));
  CHECK(leq(ext(1, 1, 1, R), ext(2, 1, 1, R)));
  CHECK(!leq(ext(2, 1, 1, U), ext(2, 1, 1, R)));
}

TEST_CASE("successors and predecessors match the quoted sets") {
  LatticeSpec plain222{2, 2, 2, false};
  LatticeSpec plain333{3, 3, 3, false};
  LatticeSpec ext333{3, 3, 3, true};

  SUBCASE("plain bottom successors") {
    auto s = successors(plain(1, 1, 1), plain222);
    std::vector<NodeId> expected = {plain(2, 1, 1), plain(1, 2, 1), plain(1, 1, 2)};
    std::sort(expected.begin(), expected.end());
    CHECK(s == expected);
  }
  SUBCASE("top has no successors, bottom no predecessors") {
    CHECK(successors(plain(3, 3, 3), plain333).empty());
    CHECK(predecessors(plain(1, 1, 1), plain333).empty());
    CHECK(successors(ext(3, 3, 3, U), ext333).empty());
    CHECK(predecessors(ext(1, 1, 1, R), ext333).empty());
  }
  SUBCASE("extended bottom gains the restricted-to-unrestricted edge") {
    auto s = successors(ext(1, 1, 1, R), ext333);
    std::vector<NodeId> expected = {ext(2, 1, 1, R), ext(1, 2, 1, R), ext(1, 1, 2, R),
                                    ext(1, 1, 1, U)};
    std::sort(expected.begin(), expected.end());
    CHECK(s == expected);
  }
  SUBCASE("extended predecessors of (1,2,1,u)") {
    auto p = predecessors(ext(1, 2, 1, U), ext333);
    std::vector<NodeId> expected = {ext(1, 1, 1, U), ext(1, 2, 1, R)};
    std::sort(expected.begin(), expected.end());
    CHECK(p == expected);
  }
  SUBCASE("non-successor: skipping a level") {
    auto s = successors(plain(1, 1, 1), plain333);
    CHECK(std::find(s.begin(), s.end(), plain(2, 2, 1)) == s.end());
  }
}

TEST_CASE("lattice algebra over the full 27- and 54-node lattices") {
  for (bool extended : {false, true}) {
    LatticeSpec spec{3, 3, 3, extended};
    std::vector<NodeId> nodes = all_nodes(spec);
    CHECK(nodes.size() == (extended ? 54u : 27u));

    // Partial-order laws.
    for (const NodeId& a : nodes) {
      CHECK(leq(a, a));
      for (const NodeId& b : nodes) {
        if (leq(a, b) && leq(b, a)) CHECK(a == b);
        for (const NodeId& c : nodes)
          if (leq(a, b) && leq(b, c)) CHECK(leq(a, c));
      }
    }

    // successors/predecessors duality and covering property.
    for (const NodeId& a : nodes) {
      for (const NodeId& b : nodes) {
        auto sa = successors(a, spec);
        auto pb = predecessors(b, spec);
        bool b_succ_a = std::find(sa.begin(), sa.end(), b) != sa.end();
        bool a_pred_b = std::find(pb.begin(), pb.end(), a) != pb.end();
        CHECK(b_succ_a == a_pred_b);
        if (b_succ_a) {
          CHECK(leq(a, b));
          CHECK(!(a == b));
          // Nothing strictly between a cover pair.
          for (const NodeId& c : nodes)
            if (leq(a, c) && leq(c, b) && !(c == a) && !(c == b)) CHECK(false);
        }
      }
    }

    // Ranks partition the lattice into the worklist levels.
    for (const NodeId& a : nodes)
      for (const NodeId& p : predecessors(a, spec)) CHECK(p.rank() + 1 == a.rank());
  }
}

TEST_CASE("prepare_seeds: sorted by size, ties lexicographic, deduplicated") {
  Corpus a, b;
  auto member = [](const std::string& text) {
    SavedInput s;
    s.text = text;
    s.size_bytes = ws_excluded_size(text);
    s.feedback.coverage = {1};
    return s;
  };
  a.members = {member("cc cc"), member("a"), member("bb")};
  b.members = {member("bb"), member("d")};
  std::vector<SeedInput> seeds = prepare_seeds({&a, &b});
  REQUIRE(seeds.size() == 4);
  CHECK(seeds[0].text == "a");
  CHECK(seeds[1].text == "d");
  CHECK(seeds[2].text == "bb");
  CHECK(seeds[3].text == "cc cc");
}

TEST_CASE("bonsai_run: degenerate single-node lattice equals one CBGF run") {
  auto t = make_target("arith");
  const Grammar& g = t->grammar();
  BonsaiOptions opt;
  opt.spec = {1, 1, 1, false};
  opt.node_budget = 500;
  opt.global_seed = 97;
  BonsaiResult result = bonsai_run(*t, g, opt);
  REQUIRE(result.nodes.size() == 1);

  FuzzerConfig cfg;
  cfg.bounds = {1, 1, 1};
  cfg.budget = 500;
  cfg.prng_seed = node_prng_seed(97, {1, 1, 1, std::nullopt});
  FreshSource src(bootstrap_prng_seed(97));
  SampleResult boot = bounded_sample(g, cfg.bounds, src);
  Corpus direct = cbgf_run(*t, g, cfg, {{boot.text, boot.choices}});
  REQUIRE(result.final_corpus.members.size() == direct.members.size());
  for (size_t i = 0; i < direct.members.size(); ++i)
    CHECK(result.final_corpus.members[i].text == direct.members[i].text);
}

TEST_CASE("bonsai_run: schedule is topological with every node exactly once") {
  auto t = make_target("minilang");
  const Grammar& g = t->grammar();
  BonsaiOptions opt;
  opt.spec = {2, 2, 2, true};
  opt.node_budget = 300;
  opt.global_seed = 11;
  BonsaiResult result = bonsai_run(*t, g, opt);
  REQUIRE(result.reports.size() == 16);

  std::map<std::string, size_t> position;
  for (size_t i = 0; i < result.reports.size(); ++i)
    position[result.reports[i].id.config_id()] = i;
  CHECK(position.size() == 16);
  for (const NodeReport& r : result.reports)
    for (const NodeId& p : predecessors(r.id, opt.spec))
      CHECK(position.at(p.config_id()) < position.at(r.id.config_id()));

  SUBCASE("budgets are fully consumed and recorded") {
    for (const NodeReport& r : result.reports) {
      CHECK(r.budget == 300);
      CHECK(r.executions == 300);
      CHECK(r.failure.empty());
    }
  }
}

TEST_CASE("bonsai_run: seed lists are non-decreasing in whitespace-excluded size") {
  auto t = make_target("minilang");
  const Grammar& g = t->grammar();
  BonsaiOptions opt;
  opt.spec = {2, 2, 2, false};
  opt.node_budget = 400;
  opt.global_seed = 13;
  BonsaiResult result = bonsai_run(*t, g, opt);
  std::map<std::string, const Corpus*> by_id;
  for (const auto& [id, corpus] : result.nodes) by_id[id.config_id()] = &corpus;
  for (const auto& [id, corpus] : result.nodes) {
    std::vector<const Corpus*> preds;
    for (const NodeId& p : predecessors(id, opt.spec)) preds.push_back(by_id.at(p.config_id()));
    if (preds.empty()) continue;
    std::vector<SeedInput> seeds = prepare_seeds(preds);
    for (size_t i = 1; i < seeds.size(); ++i)
      CHECK(ws_excluded_size(seeds[i - 1].text) <= ws_excluded_size(seeds[i].text));
  }
}

TEST_CASE("bonsai_run: final cumulative coverage dominates every predecessor corpus") {
  auto t = make_target("minilang");
  const Grammar& g = t->grammar();
  BonsaiOptions opt;
  opt.spec = {2, 2, 2, false};
  opt.node_budget = 2000;  // enough to execute every seed at the top node
  opt.global_seed = 17;
  BonsaiResult result = bonsai_run(*t, g, opt);
  const std::set<int>& final_cov = result.final_corpus.cumulative_coverage;
  const std::vector<NodeId> top_preds = predecessors(top_node(opt.spec), opt.spec);
  int checked = 0;
  for (const auto& [id, corpus] : result.nodes) {
    if (std::find(top_preds.begin(), top_preds.end(), id) == top_preds.end()) continue;
    CHECK(std::includes(final_cov.begin(), final_cov.end(), corpus.cumulative_coverage.begin(),
                        corpus.cumulative_coverage.end()));
    ++checked;
  }
  CHECK(checked == static_cast<int>(top_preds.size()));
}

TEST_CASE("bonsai_run: serial and parallel schedules produce identical results") {
  auto t = make_target("minilang");
  const Grammar& g = t->grammar();
  BonsaiOptions opt;
  opt.spec = {2, 2, 2, true};
  opt.node_budget = 500;
  opt.global_seed = 19;
  opt.jobs = 1;
  BonsaiResult serial = bonsai_run(*t, g, opt);
  opt.jobs = 4;
  BonsaiResult parallel = bonsai_run(*t, g, opt);
  REQUIRE(serial.nodes.size() == parallel.nodes.size());
  for (size_t i = 0; i < serial.nodes.size(); ++i) {
    CHECK(serial.nodes[i].first == parallel.nodes[i].first);
    const Corpus& a = serial.nodes[i].second;
    const Corpus& b = parallel.nodes[i].second;
    REQUIRE(a.members.size() == b.members.size());
    for (size_t k = 0; k < a.members.size(); ++k) {
      CHECK(a.members[k].text == b.members[k].text);
      CHECK(a.members[k].choices == b.members[k].choices);
    }
  }
}

TEST_CASE("budget remainder spreads one extra execution over the first nodes") {
  auto t = make_target("arith");
  const Grammar& g = t->grammar();
  BonsaiOptions opt;
  opt.spec = {2, 1, 1, false};  // two nodes
  opt.node_budget = 100;
  opt.budget_remainder = 1;
  opt.global_seed = 23;
  BonsaiResult result = bonsai_run(*t, g, opt);
  REQUIRE(result.reports.size() == 2);
  CHECK(result.reports[0].executions == 101);
  CHECK(result.reports[1].executions == 100);
}

TEST_CASE("bonsai_run: a failed node still seeds its successors") {
  // Same stuck-prone shape as the fuzzer test; nodes abort quickly, yet the
  // lattice completes and propagates partial corpora.
  class StuckTarget final : public Target {
   public:
    const std::string& name() const override {
      static const std::string n = "stuck";
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
  StuckTarget t;
  BonsaiOptions opt;
  opt.spec = {1, 1, 2, false};
  opt.node_budget = 50000;
  opt.global_seed = 3;
  BonsaiResult result = bonsai_run(t, t.grammar(), opt);
  CHECK(result.any_failure);
  REQUIRE(result.reports.size() == 2);
  CHECK(!result.reports[0].failure.empty());
  // The bottom node's partial corpus reached the top node as seeds.
  CHECK(result.reports[1].seeds_in > 0);
}
