#pragma once

#include <string>
#include <vector>

#include "bonsai/fuzzer.hpp"

namespace bonsai {

// Corpus-quality measures: size distribution (whitespace excluded), file
// count, semantic-validity fraction, and branch coverage. Validity and
// coverage are recomputed by re-executing every member, never trusted from
// metadata.
struct MemberStat {
  size_t index = 0;
  size_t size = 0;
  bool valid = false;
  size_t covered = 0;
  size_t semantic_covered = 0;
};

struct CorpusStats {
  size_t file_count = 0;
  size_t size_min = 0;
  size_t size_max = 0;
  double size_mean = 0.0;
  double size_median = 0.0;
  std::map<size_t, size_t> size_histogram;
  double validity_fraction = 0.0;
  size_t covered = 0;
  size_t total_branches = 0;
  bool has_semantic_split = false;
  size_t semantic_covered = 0;
  size_t semantic_total = 0;
  uint64_t executions_consumed = 0;
  std::vector<MemberStat> per_member;
};

CorpusStats stats(const Corpus& corpus, const Target& target, int jobs = 1);

// Relative/absolute deltas between two corpora, a vs b (b is the baseline).
// mean_size_delta_rel = (b.mean - a.mean) / b.mean, i.e. how much smaller a's
// files are; the remaining fields are plain differences a - b.
struct StatsDelta {
  double mean_size_delta_rel = 0.0;
  double coverage_delta = 0.0;
  double semantic_coverage_delta = 0.0;
  double validity_delta = 0.0;
  double file_count_delta = 0.0;
};

StatsDelta compare(const CorpusStats& a, const CorpusStats& b);

std::string stats_to_json(const CorpusStats& s);
std::string stats_to_csv(const CorpusStats& s);  // one row per corpus member
std::string delta_to_json(const StatsDelta& d);

// Plain-text side-by-side table for two corpora plus their deltas.
std::string comparison_table(const std::string& label_a, const CorpusStats& a,
                             const std::string& label_b, const CorpusStats& b);

}  // namespace bonsai
