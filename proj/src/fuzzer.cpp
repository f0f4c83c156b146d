#include "bonsai/fuzzer.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <unordered_set>

#include <json.hpp>

#include "bonsai/util.hpp"

namespace bonsai {

namespace fs = std::filesystem;
using nlohmann::json;

std::string FuzzerConfig::id() const {
  return "m" + std::to_string(bounds.max_idents) + "n" + std::to_string(bounds.max_items) +
         "d" + std::to_string(bounds.max_depth) + mode_letter(mode);
}

// ---------------------------------------------------------------------------
// Interestingness criteria
// ---------------------------------------------------------------------------

static bool has_new_branch(const std::set<int>& cov, const std::set<int>& cumulative) {
  for (int id : cov)
    if (!cumulative.count(id)) return true;
  return false;
}

bool is_interesting(const ExecutionFeedback& fb, const Corpus& corpus, ValidityMode mode) {
  bool new_valid = fb.valid && has_new_branch(fb.coverage, corpus.cumulative_valid_coverage);
  if (mode == ValidityMode::Restricted) return new_valid;
  return has_new_branch(fb.coverage, corpus.cumulative_coverage) || new_valid;
}

// ---------------------------------------------------------------------------
// Mutation
// ---------------------------------------------------------------------------

namespace {

// Number of legal values for a recorded choice under bounds b.
uint64_t choice_range(const Choice& c, const Grammar& g, const SizeBounds& b) {
  switch (c.tag) {
    case Choice::Tag::LeafCoin:
      return 2;
    case Choice::Tag::RepCount:
      return static_cast<uint64_t>(b.max_items) + 1;
    case Choice::Tag::IdentIndex:
      return static_cast<uint64_t>(b.max_idents);
    case Choice::Tag::AltChoice: {
      auto it = g.nonterminal_ids.find(c.name);
      if (it == g.nonterminal_ids.end()) return 1;
      const auto& list = c.leaf_list ? g.t_alt_indices[static_cast<size_t>(it->second)]
                                     : g.nt_alt_indices[static_cast<size_t>(it->second)];
      return list.size();
    }
  }
  return 1;
}

// Fresh value legal under b, different from the current effective value
// whenever the range allows it.
int64_t redraw(const Choice& c, uint64_t range, Rng& rng) {
  uint64_t current = c.value < 0 ? 0 : static_cast<uint64_t>(c.value) % range;
  if (range <= 1) return 0;
  uint64_t v = rng.below(range - 1);
  if (v >= current) ++v;
  return static_cast<int64_t>(v);
}

}  // namespace

SampleResult mutate(const SavedInput& input, const Grammar& g, const SizeBounds& b, Rng& rng) {
  ChoiceSequence mutated = input.choices;

  if (!mutated.empty()) {
    // k >= 1 positions, geometric with mean 2, capped at the sequence length.
    size_t k = 1;
    while (rng.bit()) ++k;
    k = std::min(k, mutated.size());

    std::vector<size_t> eligible;
    eligible.reserve(mutated.size());
    for (size_t i = 0; i < mutated.size(); ++i)
      if (choice_range(mutated[i], g, b) >= 2) eligible.push_back(i);
    if (eligible.empty())
      for (size_t i = 0; i < mutated.size(); ++i) eligible.push_back(i);
    k = std::min(k, eligible.size());

    // Partial Fisher-Yates draw of k distinct eligible positions.
    for (size_t j = 0; j < k; ++j) {
      size_t pick = j + static_cast<size_t>(rng.below(eligible.size() - j));
      std::swap(eligible[j], eligible[pick]);
      Choice& c = mutated[eligible[j]];
      c.value = redraw(c, choice_range(c, g, b), rng);
    }
  }

  ReplaySource src(mutated, rng.next());
  return bounded_sample(g, b, src);
}

// ---------------------------------------------------------------------------
// CBGF loop
// ---------------------------------------------------------------------------

namespace {

struct Admission {
  bool admit = false;
  std::set<int> novel;
  bool via_valid = false;
};

Admission admission_for(const ExecutionFeedback& fb, const Corpus& corpus, ValidityMode mode) {
  Admission a;
  std::set<int> novel_cov;
  for (int id : fb.coverage)
    if (!corpus.cumulative_coverage.count(id)) novel_cov.insert(id);
  std::set<int> novel_valid;
  if (fb.valid)
    for (int id : fb.coverage)
      if (!corpus.cumulative_valid_coverage.count(id)) novel_valid.insert(id);

  if (mode == ValidityMode::Unrestricted && !novel_cov.empty()) {
    a.admit = true;
    a.novel = std::move(novel_cov);
    a.via_valid = false;
    return a;
  }
  if (!novel_valid.empty()) {
    a.admit = true;
    a.novel = std::move(novel_valid);
    a.via_valid = true;
  }
  return a;
}

}  // namespace

Corpus cbgf_run(const Target& target, const Grammar& g, const FuzzerConfig& cfg,
                const std::vector<SeedInput>& seeds, RunTrace* trace) {
  Corpus corpus;
  const std::string provenance = cfg.id();
  std::unordered_set<std::string> seen_texts;
  uint64_t since_last_admission = 0;

  auto note_execution = [&] {
    ++corpus.executions;
    if (trace) ++trace->executions;
  };

  auto admit_if_interesting = [&](const std::string& text, ChoiceSequence choices,
                                  const ExecutionFeedback& fb) {
    Admission a = admission_for(fb, corpus, cfg.mode);
    if (!a.admit || fb.coverage.empty() || seen_texts.count(text)) {
      ++since_last_admission;
      return;
    }
    SavedInput s;
    s.text = text;
    s.choices = std::move(choices);
    s.feedback = fb;
    s.size_bytes = ws_excluded_size(text);
    s.provenance = provenance;
    s.novel_branches = std::move(a.novel);
    s.via_valid_clause = a.via_valid;
    corpus.cumulative_coverage.insert(fb.coverage.begin(), fb.coverage.end());
    if (fb.valid)
      corpus.cumulative_valid_coverage.insert(fb.coverage.begin(), fb.coverage.end());
    seen_texts.insert(s.text);
    corpus.members.push_back(std::move(s));
    since_last_admission = 0;
    if (trace) ++trace->admissions;
  };

  auto budget_left = [&] { return corpus.executions < cfg.budget; };
  auto stagnated = [&] {
    return cfg.stop_on_stagnation > 0 && since_last_admission >= cfg.stop_on_stagnation;
  };

  Rng rng(cfg.prng_seed);

  try {
    // Seed phase: execute every seed, admit the interesting ones.
    for (const SeedInput& seed : seeds) {
      if (!budget_left()) break;
      ExecutionFeedback fb = target.execute(seed.text);
      note_execution();
      admit_if_interesting(seed.text, seed.choices, fb);
    }

    // First cycle mutates all seeds (even unadmitted ones), later cycles walk
    // the corpus in insertion order. Parent is taken by value: admissions
    // reallocate corpus.members mid-loop.
    auto fuzz_one = [&](SavedInput parent) {
      for (int child = 0; child < cfg.mutation_fanout && budget_left() && !stagnated();
           ++child) {
        SampleResult r = mutate(parent, g, cfg.bounds, rng);
        ExecutionFeedback fb = target.execute(r.text);
        note_execution();
        admit_if_interesting(r.text, std::move(r.choices), fb);
      }
    };

    for (const SeedInput& seed : seeds) {
      if (!budget_left() || stagnated()) break;
      SavedInput parent;
      parent.text = seed.text;
      parent.choices = seed.choices;
      fuzz_one(parent);
    }

    size_t next = 0;
    while (budget_left() && !stagnated()) {
      if (corpus.members.empty()) {
        // Nothing admitted yet: fall back to fresh samples.
        FreshSource src(rng.next());
        SampleResult r = bounded_sample(g, cfg.bounds, src);
        ExecutionFeedback fb = target.execute(r.text);
        note_execution();
        admit_if_interesting(r.text, std::move(r.choices), fb);
        continue;
      }
      fuzz_one(corpus.members[next % corpus.members.size()]);
      ++next;
    }
  } catch (const SamplingStuckError& e) {
    corpus.failure = e.what();
  } catch (const TargetError& e) {
    corpus.failure = e.what();
  }

  return corpus;
}

// ---------------------------------------------------------------------------
// Corpus persistence
// ---------------------------------------------------------------------------

void save_corpus(const Corpus& corpus, const std::string& dir) {
  fs::create_directories(dir);
  for (size_t i = 0; i < corpus.members.size(); ++i) {
    const SavedInput& s = corpus.members[i];
    const std::string stem = "input_" + std::to_string(i);
    {
      std::ofstream out(fs::path(dir) / (stem + ".txt"), std::ios::binary | std::ios::trunc);
      out << s.text;
    }
    json meta;
    meta["choices"] = json::parse(choices_to_json(s.choices));
    meta["feedback"] = {{"valid", s.feedback.valid},
                        {"coverage", std::vector<int>(s.feedback.coverage.begin(),
                                                      s.feedback.coverage.end())},
                        {"note", s.feedback.note}};
    meta["provenance"] = s.provenance;
    meta["size"] = s.size_bytes;
    meta["novel"] = std::vector<int>(s.novel_branches.begin(), s.novel_branches.end());
    meta["via_valid"] = s.via_valid_clause;
    meta["index"] = i;
    std::ofstream out(fs::path(dir) / (stem + ".meta.json"), std::ios::trunc);
    out << meta.dump(2) << "\n";
  }
  json summary;
  summary["members"] = corpus.members.size();
  summary["executions"] = corpus.executions;
  summary["failure"] = corpus.failure;
  std::ofstream out(fs::path(dir) / "summary.json", std::ios::trunc);
  out << summary.dump(2) << "\n";
}

Corpus load_corpus(const std::string& dir) {
  Corpus corpus;
  if (!fs::is_directory(dir)) throw std::runtime_error("not a corpus directory: " + dir);

  std::vector<std::pair<long, fs::path>> inputs;
  for (const auto& e : fs::directory_iterator(dir)) {
    const std::string name = e.path().filename().string();
    if (name.rfind("input_", 0) == 0 && name.size() > 10 &&
        name.substr(name.size() - 4) == ".txt")
      inputs.emplace_back(std::stol(name.substr(6, name.size() - 10)), e.path());
  }
  std::sort(inputs.begin(), inputs.end());

  for (const auto& [index, path] : inputs) {
    SavedInput s;
    {
      std::ifstream in(path, std::ios::binary);
      s.text.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    }
    fs::path meta_path = path;
    meta_path.replace_extension();  // drop .txt
    meta_path += ".meta.json";
    if (fs::exists(meta_path)) {
      std::ifstream in(meta_path);
      json meta = json::parse(in);
      s.choices = choices_from_json(meta.at("choices").dump());
      s.feedback.valid = meta.at("feedback").at("valid").get<bool>();
      for (const json& id : meta.at("feedback").at("coverage"))
        s.feedback.coverage.insert(id.get<int>());
      s.feedback.note = meta.at("feedback").value("note", "");
      s.provenance = meta.value("provenance", "");
      s.size_bytes = meta.value("size", ws_excluded_size(s.text));
      for (const json& id : meta.value("novel", json::array()))
        s.novel_branches.insert(id.get<int>());
      s.via_valid_clause = meta.value("via_valid", false);
    } else {
      s.size_bytes = ws_excluded_size(s.text);
    }
    corpus.cumulative_coverage.insert(s.feedback.coverage.begin(), s.feedback.coverage.end());
    if (s.feedback.valid)
      corpus.cumulative_valid_coverage.insert(s.feedback.coverage.begin(),
                                              s.feedback.coverage.end());
    corpus.members.push_back(std::move(s));
  }

  fs::path summary = fs::path(dir) / "summary.json";
  if (fs::exists(summary)) {
    std::ifstream in(summary);
    json j = json::parse(in);
    corpus.executions = j.value("executions", 0ULL);
    corpus.failure = j.value("failure", "");
  }
  return corpus;
}

std::vector<SeedInput> corpus_as_seeds(const Corpus& corpus) {
  std::vector<SeedInput> seeds;
  seeds.reserve(corpus.members.size());
  for (const SavedInput& s : corpus.members) seeds.push_back({s.text, s.choices});
  return seeds;
}

}  // namespace bonsai
