#include "bonsai/metrics.hpp"

#include <algorithm>
#include <sstream>

#include <json.hpp>

#include "bonsai/util.hpp"

namespace bonsai {

using nlohmann::json;

CorpusStats stats(const Corpus& corpus, const Target& target, int jobs) {
  CorpusStats out;
  out.file_count = corpus.members.size();
  out.total_branches = static_cast<size_t>(target.total_branches());
  out.has_semantic_split = target.has_semantic_split();
  out.executions_consumed = corpus.executions;
  if (out.has_semantic_split) {
    for (int id = 0; id < target.total_branches(); ++id)
      if (target.is_semantic_branch(id)) ++out.semantic_total;
  }
  if (corpus.members.empty()) return out;

  std::vector<ExecutionFeedback> feedback(corpus.members.size());
  auto run_one = [&](size_t i) {
    feedback[i] = target.execute(corpus.members[i].text);
  };
  if (jobs > 1) {
#ifdef BONSAI_HAVE_OPENMP
#pragma omp parallel for num_threads(jobs) schedule(dynamic)
    for (size_t i = 0; i < corpus.members.size(); ++i) run_one(i);
#else
    for (size_t i = 0; i < corpus.members.size(); ++i) run_one(i);
#endif
  } else {
    for (size_t i = 0; i < corpus.members.size(); ++i) run_one(i);
  }

  std::vector<size_t> sizes;
  sizes.reserve(corpus.members.size());
  std::set<int> covered, semantic;
  size_t valid_count = 0;
  for (size_t i = 0; i < corpus.members.size(); ++i) {
    const size_t size = ws_excluded_size(corpus.members[i].text);
    sizes.push_back(size);
    out.size_histogram[size] += 1;

    MemberStat ms;
    ms.index = i;
    ms.size = size;
    ms.valid = feedback[i].valid;
    ms.covered = feedback[i].coverage.size();
    if (out.has_semantic_split)
      for (int id : feedback[i].coverage)
        if (target.is_semantic_branch(id)) ++ms.semantic_covered;
    out.per_member.push_back(ms);

    if (feedback[i].valid) ++valid_count;
    covered.insert(feedback[i].coverage.begin(), feedback[i].coverage.end());
    if (out.has_semantic_split)
      for (int id : feedback[i].coverage)
        if (target.is_semantic_branch(id)) semantic.insert(id);
  }

  std::vector<size_t> sorted = sizes;
  std::sort(sorted.begin(), sorted.end());
  out.size_min = sorted.front();
  out.size_max = sorted.back();
  double sum = 0;
  for (size_t s : sizes) sum += static_cast<double>(s);
  out.size_mean = sum / static_cast<double>(sizes.size());
  const size_t mid = sorted.size() / 2;
  out.size_median = sorted.size() % 2 == 1
                        ? static_cast<double>(sorted[mid])
                        : (static_cast<double>(sorted[mid - 1]) + sorted[mid]) / 2.0;
  out.validity_fraction = static_cast<double>(valid_count) / sorted.size();
  out.covered = covered.size();
  out.semantic_covered = semantic.size();
  return out;
}

StatsDelta compare(const CorpusStats& a, const CorpusStats& b) {
  StatsDelta d;
  if (b.size_mean != 0.0) d.mean_size_delta_rel = (b.size_mean - a.size_mean) / b.size_mean;
  d.coverage_delta = static_cast<double>(a.covered) - static_cast<double>(b.covered);
  d.semantic_coverage_delta =
      static_cast<double>(a.semantic_covered) - static_cast<double>(b.semantic_covered);
  d.validity_delta = a.validity_fraction - b.validity_fraction;
  d.file_count_delta = static_cast<double>(a.file_count) - static_cast<double>(b.file_count);
  return d;
}

static json stats_json(const CorpusStats& s) {
  json j;
  j["file_count"] = s.file_count;
  j["size"] = {{"min", s.size_min},
               {"max", s.size_max},
               {"mean", s.size_mean},
               {"median", s.size_median}};
  json hist = json::object();
  for (const auto& [size, count] : s.size_histogram) hist[std::to_string(size)] = count;
  j["size"]["histogram"] = std::move(hist);
  j["validity_fraction"] = s.validity_fraction;
  j["coverage"] = {{"covered", s.covered}, {"total", s.total_branches}};
  if (s.has_semantic_split)
    j["coverage"]["semantic"] = {{"covered", s.semantic_covered}, {"total", s.semantic_total}};
  j["executions_consumed"] = s.executions_consumed;
  return j;
}

std::string stats_to_json(const CorpusStats& s) { return stats_json(s).dump(2) + "\n"; }

std::string stats_to_csv(const CorpusStats& s) {
  std::ostringstream out;
  out << "index,size,valid,covered,semantic_covered\n";
  for (const MemberStat& m : s.per_member)
    out << m.index << ',' << m.size << ',' << (m.valid ? 1 : 0) << ',' << m.covered << ','
        << m.semantic_covered << '\n';
  return out.str();
}

std::string delta_to_json(const StatsDelta& d) {
  json j;
  j["mean_size_delta_rel"] = d.mean_size_delta_rel;
  j["coverage_delta"] = d.coverage_delta;
  j["semantic_coverage_delta"] = d.semantic_coverage_delta;
  j["validity_delta"] = d.validity_delta;
  j["file_count_delta"] = d.file_count_delta;
  return j.dump(2) + "\n";
}

std::string comparison_table(const std::string& label_a, const CorpusStats& a,
                             const std::string& label_b, const CorpusStats& b) {
  StatsDelta d = compare(a, b);
  std::ostringstream out;
  auto row = [&](const std::string& name, double va, double vb, const std::string& delta) {
    out << "  " << name;
    for (size_t i = name.size(); i < 26; ++i) out << ' ';
    char buf[64];
    std::snprintf(buf, sizeof buf, "%12.3f %12.3f   %s\n", va, vb, delta.c_str());
    out << buf;
  };
  auto pct = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%+.2f%%", v * 100.0);
    return std::string(buf);
  };
  auto plain = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%+.3f", v);
    return std::string(buf);
  };

  out << "  metric                    " << label_a;
  for (size_t i = label_a.size(); i < 12; ++i) out << ' ';
  out << ' ' << label_b;
  for (size_t i = label_b.size(); i < 12; ++i) out << ' ';
  out << "  delta\n";
  row("mean size (non-ws chars)", a.size_mean, b.size_mean,
      pct(d.mean_size_delta_rel) + " smaller");
  row("median size", a.size_median, b.size_median, "");
  row("file count", static_cast<double>(a.file_count), static_cast<double>(b.file_count),
      plain(d.file_count_delta));
  row("validity fraction", a.validity_fraction, b.validity_fraction, plain(d.validity_delta));
  row("branch coverage", static_cast<double>(a.covered), static_cast<double>(b.covered),
      plain(d.coverage_delta));
  if (a.has_semantic_split)
    row("semantic branch coverage", static_cast<double>(a.semantic_covered),
        static_cast<double>(b.semantic_covered), plain(d.semantic_coverage_delta));
  return out.str();
}

}  // namespace bonsai
