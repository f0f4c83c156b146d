#include "bonsai/reducer.hpp"

#include <algorithm>
#include <map>

#include <json.hpp>

#include "bonsai/util.hpp"

namespace bonsai {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Core ddmin over an index list. `test` receives the kept indices (sorted).
// Returns a 1-minimal kept set: dropping any single remaining index fails.
// ---------------------------------------------------------------------------

namespace {

class IndexDdmin {
 public:
  IndexDdmin(std::function<bool(const std::vector<size_t>&)> test, ReductionStats* stats)
      : test_(std::move(test)), stats_(stats) {}

  std::vector<size_t> run(std::vector<size_t> kept) {
    size_t granularity = 2;
    while (kept.size() >= 2) {
      const std::vector<std::vector<size_t>> chunks = split(kept, granularity);
      bool reduced = false;

      for (const auto& chunk : chunks) {
        if (evaluate(chunk)) {
          kept = chunk;
          granularity = 2;
          reduced = true;
          break;
        }
      }
      if (reduced) continue;

      if (chunks.size() > 2) {
        for (size_t i = 0; i < chunks.size(); ++i) {
          std::vector<size_t> complement;
          for (size_t j = 0; j < chunks.size(); ++j)
            if (j != i) complement.insert(complement.end(), chunks[j].begin(), chunks[j].end());
          if (evaluate(complement)) {
            kept = std::move(complement);
            granularity = std::max<size_t>(granularity - 1, 2);
            reduced = true;
            break;
          }
        }
      }
      if (reduced) continue;

      if (granularity < kept.size()) {
        granularity = std::min(kept.size(), granularity * 2);
        continue;
      }
      break;  // single-element granularity and nothing removable: 1-minimal
    }
    return kept;
  }

 private:
  static std::vector<std::vector<size_t>> split(const std::vector<size_t>& kept, size_t n) {
    std::vector<std::vector<size_t>> chunks;
    size_t begin = 0;
    for (size_t i = 0; i < n && begin < kept.size(); ++i) {
      size_t len = (kept.size() - begin) / (n - i);
      if (len == 0) len = 1;
      chunks.emplace_back(kept.begin() + static_cast<long>(begin),
                          kept.begin() + static_cast<long>(begin + len));
      begin += len;
    }
    return chunks;
  }

  bool evaluate(const std::vector<size_t>& kept) {
    auto hit = cache_.find(kept);
    if (hit != cache_.end()) return hit->second;
    if (stats_) ++stats_->predicate_evals;
    bool r = test_(kept);
    cache_[kept] = r;
    return r;
  }

  std::function<bool(const std::vector<size_t>&)> test_;
  ReductionStats* stats_;
  std::map<std::vector<size_t>, bool> cache_;
};

}  // namespace

std::string ddmin(const std::string& input, const Predicate& p, ReductionStats* stats) {
  ReductionStats local;
  ReductionStats* st = stats ? stats : &local;

  ++st->predicate_evals;
  if (!p(input))
    throw PredicateFlakyError("ddmin: predicate does not hold on the initial input");

  auto substring = [&input](const std::vector<size_t>& kept) {
    std::string s;
    s.reserve(kept.size());
    for (size_t i : kept) s.push_back(input[i]);
    return s;
  };

  std::vector<size_t> all(input.size());
  for (size_t i = 0; i < input.size(); ++i) all[i] = i;

  IndexDdmin core([&](const std::vector<size_t>& kept) { return p(substring(kept)); }, st);
  std::string result = substring(core.run(all));
  if (result.size() == 1) {
    // The core never tests the empty candidate; cover the last deletion.
    ++st->predicate_evals;
    if (p("")) result.clear();
  }
  st->passes.emplace_back("ddmin", ws_excluded_size(result));
  return result;
}

// ---------------------------------------------------------------------------
// Hierarchical reduction
// ---------------------------------------------------------------------------

namespace {

// Tree surgery by path: path[i] is a child index.
TreeNode* node_at(TreeNode& root, const std::vector<size_t>& path) {
  TreeNode* cur = &root;
  for (size_t i : path) cur = &cur->children[i];
  return cur;
}

void collect_paths(const TreeNode& t, std::vector<size_t>& path,
                   std::vector<std::vector<size_t>>& nonterminals,
                   std::vector<std::vector<size_t>>& repetitions) {
  if (t.kind == TreeNode::Kind::NonTerminal) nonterminals.push_back(path);
  if (t.kind == TreeNode::Kind::Repetition) repetitions.push_back(path);
  for (size_t i = 0; i < t.children.size(); ++i) {
    path.push_back(i);
    collect_paths(t.children[i], path, nonterminals, repetitions);
    path.pop_back();
  }
}

}  // namespace

std::string hier_reduce(const std::string& input, const Grammar& g, const Predicate& p,
                        ReductionStats* stats,
                        const std::function<void(const std::string&)>& candidate_hook) {
  ReductionStats local;
  ReductionStats* st = stats ? stats : &local;

  ++st->predicate_evals;
  if (!p(input))
    throw PredicateFlakyError("hier_reduce: predicate does not hold on the initial input");

  TreeNode tree = parse_to_tree(input, g);
  std::string current = linearize(tree, g);

  auto try_candidate = [&](const TreeNode& candidate) -> bool {
    std::string text = linearize(candidate, g);
    if (text == current) return false;
    if (candidate_hook) candidate_hook(text);
    ++st->predicate_evals;
    return p(text);
  };

  std::map<std::string, TreeNode> min_cache;
  auto minimal_for = [&](const std::string& name) -> const TreeNode& {
    auto it = min_cache.find(name);
    if (it == min_cache.end()) it = min_cache.emplace(name, minimal_expansion(g, name)).first;
    return it->second;
  };

  bool changed = true;
  while (changed) {
    changed = false;

    // Pass 1: replace whole subtrees by their nonterminal's minimal expansion,
    // outermost first.
    std::vector<std::vector<size_t>> nts, reps;
    std::vector<size_t> path;
    collect_paths(tree, path, nts, reps);
    for (const auto& nt_path : nts) {
      TreeNode* node = node_at(tree, nt_path);
      const TreeNode& minimal = minimal_for(node->name);
      if (*node == minimal) continue;
      TreeNode candidate = tree;
      *node_at(candidate, nt_path) = minimal;
      if (try_candidate(candidate)) {
        tree = std::move(candidate);
        current = linearize(tree, g);
        changed = true;
        // Paths below/after may have shifted; restart the pass on the new tree.
        break;
      }
    }
    if (changed) {
      st->passes.emplace_back("min-expansion", ws_excluded_size(current));
      continue;
    }

    // Pass 2: delta-debug repetition items.
    for (const auto& rep_path : reps) {
      TreeNode* node = node_at(tree, rep_path);
      if (node->rep_count <= 0) continue;
      const size_t per = node->children.size() / static_cast<size_t>(node->rep_count);
      if (per == 0) continue;

      auto with_items = [&](const std::vector<size_t>& kept_items) {
        TreeNode candidate = tree;
        TreeNode* cnode = node_at(candidate, rep_path);
        std::vector<TreeNode> children;
        for (size_t item : kept_items)
          for (size_t j = 0; j < per; ++j)
            children.push_back(cnode->children[item * per + j]);
        cnode->children = std::move(children);
        cnode->rep_count = static_cast<int>(kept_items.size());
        return candidate;
      };

      std::vector<size_t> items(static_cast<size_t>(node->rep_count));
      for (size_t i = 0; i < items.size(); ++i) items[i] = i;

      IndexDdmin core(
          [&](const std::vector<size_t>& kept) {
            TreeNode candidate = with_items(kept);
            std::string text = linearize(candidate, g);
            if (candidate_hook) candidate_hook(text);
            return p(text);
          },
          st);
      // Also consider dropping every item, which plain ddmin never tests.
      std::vector<size_t> kept = core.run(items);
      if (kept.size() == items.size()) continue;
      if (!kept.empty()) {
        TreeNode empty_candidate = with_items({});
        if (try_candidate(empty_candidate)) kept.clear();
      }
      tree = with_items(kept);
      current = linearize(tree, g);
      changed = true;
      st->passes.emplace_back("rep-ddmin", ws_excluded_size(current));
      break;
    }
  }

  return current;
}

// ---------------------------------------------------------------------------
// Corpus reduction under per-member admission predicates
// ---------------------------------------------------------------------------

std::pair<Corpus, ReductionReport> reduce_corpus(const Corpus& corpus, const Target& target,
                                                 const ReduceOptions& options) {
  Corpus reduced = corpus;
  ReductionReport report;
  report.members.resize(corpus.members.size());

  const Grammar& g = target.grammar();

  auto reduce_one = [&](size_t i) {
    const SavedInput& member = corpus.members[i];
    MemberReduction& mr = report.members[i];
    mr.index = i;
    mr.original_size = member.size_bytes;
    mr.reduced_size = member.size_bytes;

    std::set<int> required = options.full_coverage || member.novel_branches.empty()
                                 ? member.feedback.coverage
                                 : member.novel_branches;
    bool need_valid = member.via_valid_clause;
    Predicate pred = [&target, required = std::move(required), need_valid](
                         const std::string& text) {
      ExecutionFeedback fb = target.execute(text);
      if (need_valid && !fb.valid) return false;
      return std::includes(fb.coverage.begin(), fb.coverage.end(), required.begin(),
                           required.end());
    };

    ReductionStats stats;
    try {
      std::string out = options.mode == ReduceMode::Char
                            ? ddmin(member.text, pred, &stats)
                            : hier_reduce(member.text, g, pred, &stats);
      SavedInput& slot = reduced.members[i];
      slot.text = out;
      slot.size_bytes = ws_excluded_size(out);
      slot.feedback = target.execute(out);
      if (options.mode == ReduceMode::Hier)
        slot.choices = choices_from_tree(parse_to_tree(out, g), g);
      else
        slot.choices.clear();  // char-level results need not re-parse
      mr.reduced_size = slot.size_bytes;
    } catch (const std::exception& e) {
      mr.failure = e.what();
    }
    mr.predicate_evals = stats.predicate_evals;
    mr.passes = stats.passes;
  };

  if (options.jobs > 1) {
#ifdef BONSAI_HAVE_OPENMP
#pragma omp parallel for num_threads(options.jobs) schedule(dynamic)
    for (size_t i = 0; i < corpus.members.size(); ++i) reduce_one(i);
#else
    for (size_t i = 0; i < corpus.members.size(); ++i) reduce_one(i);
#endif
  } else {
    for (size_t i = 0; i < corpus.members.size(); ++i) reduce_one(i);
  }

  reduced.cumulative_coverage.clear();
  reduced.cumulative_valid_coverage.clear();
  for (const SavedInput& s : reduced.members) {
    reduced.cumulative_coverage.insert(s.feedback.coverage.begin(), s.feedback.coverage.end());
    if (s.feedback.valid)
      reduced.cumulative_valid_coverage.insert(s.feedback.coverage.begin(),
                                               s.feedback.coverage.end());
  }

  double before = 0, after = 0;
  for (const MemberReduction& mr : report.members) {
    before += static_cast<double>(mr.original_size);
    after += static_cast<double>(mr.reduced_size);
    report.total_evals += mr.predicate_evals;
  }
  const double count = report.members.empty() ? 1.0 : static_cast<double>(report.members.size());
  report.mean_size_before = before / count;
  report.mean_size_after = after / count;
  return {std::move(reduced), std::move(report)};
}

std::string ReductionReport::to_json() const {
  json j;
  j["total_evals"] = total_evals;
  j["mean_size_before"] = mean_size_before;
  j["mean_size_after"] = mean_size_after;
  j["members"] = json::array();
  for (const MemberReduction& m : members) {
    json e;
    e["index"] = m.index;
    e["original_size"] = m.original_size;
    e["reduced_size"] = m.reduced_size;
    e["predicate_evals"] = m.predicate_evals;
    e["failure"] = m.failure;
    e["passes"] = json::array();
    for (const auto& [label, size] : m.passes)
      e["passes"].push_back(json::array({label, size}));
    j["members"].push_back(std::move(e));
  }
  return j.dump(2) + "\n";
}

}  // namespace bonsai
