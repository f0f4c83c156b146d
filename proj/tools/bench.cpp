// Benchmark: serial reference vs OpenMP-parallel paths of the lattice
// orchestrator, corpus re-execution (stats), and corpus reduction, verifying
// along the way that both paths produce identical results.

#include <chrono>
#include <cstdio>
#include <string>

#include "bonsai/lattice.hpp"
#include "bonsai/metrics.hpp"
#include "bonsai/reducer.hpp"

#ifdef BONSAI_HAVE_OPENMP
#include <omp.h>
#endif

using namespace bonsai;

namespace {

double seconds(std::chrono::steady_clock::time_point a,
               std::chrono::steady_clock::time_point b) {
  return std::chrono::duration<double>(b - a).count();
}

bool corpora_equal(const Corpus& a, const Corpus& b) {
  if (a.members.size() != b.members.size()) return false;
  for (size_t i = 0; i < a.members.size(); ++i)
    if (a.members[i].text != b.members[i].text || !(a.members[i].choices == b.members[i].choices))
      return false;
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  int jobs = 4;
  uint64_t node_budget = 3000;
  if (argc > 1) jobs = std::atoi(argv[1]);
  if (argc > 2) node_budget = std::strtoull(argv[2], nullptr, 0);

#ifndef BONSAI_HAVE_OPENMP
  std::printf("built without OpenMP; parallel runs fall back to the serial path\n");
#endif

  std::unique_ptr<Target> target = make_minilang_target();
  const Grammar& g = target->grammar();

  BonsaiOptions opt;
  opt.spec = {3, 3, 3, false};
  opt.node_budget = node_budget;
  opt.global_seed = 7;

  std::printf("bonsai lattice (3,3,3), %llu executions/node, minilang\n",
              static_cast<unsigned long long>(node_budget));

  opt.jobs = 1;
  auto t0 = std::chrono::steady_clock::now();
  BonsaiResult serial = bonsai_run(*target, g, opt);
  auto t1 = std::chrono::steady_clock::now();
  double serial_s = seconds(t0, t1);
  std::printf("  serial reference:  %8.3f s  (%zu final inputs)\n", serial_s,
              serial.final_corpus.members.size());

  opt.jobs = jobs;
  t0 = std::chrono::steady_clock::now();
  BonsaiResult parallel = bonsai_run(*target, g, opt);
  t1 = std::chrono::steady_clock::now();
  double parallel_s = seconds(t0, t1);
  std::printf("  parallel (%d jobs): %8.3f s  speedup %.2fx  results %s\n", jobs, parallel_s,
              serial_s / parallel_s,
              corpora_equal(serial.final_corpus, parallel.final_corpus) ? "identical"
                                                                        : "DIFFER");

  std::printf("corpus re-execution (stats) over %zu inputs x 64 rounds\n",
              serial.final_corpus.members.size());
  t0 = std::chrono::steady_clock::now();
  CorpusStats s1;
  for (int i = 0; i < 64; ++i) s1 = stats(serial.final_corpus, *target, 1);
  t1 = std::chrono::steady_clock::now();
  serial_s = seconds(t0, t1);
  std::printf("  serial reference:  %8.3f s\n", serial_s);
  t0 = std::chrono::steady_clock::now();
  CorpusStats s2;
  for (int i = 0; i < 64; ++i) s2 = stats(serial.final_corpus, *target, jobs);
  t1 = std::chrono::steady_clock::now();
  parallel_s = seconds(t0, t1);
  std::printf("  parallel (%d jobs): %8.3f s  speedup %.2fx  results %s\n", jobs, parallel_s,
              serial_s / parallel_s,
              s1.covered == s2.covered && s1.size_mean == s2.size_mean ? "identical" : "DIFFER");

  std::printf("hierarchical corpus reduction over %zu inputs\n",
              serial.final_corpus.members.size());
  ReduceOptions red;
  red.mode = ReduceMode::Hier;
  red.jobs = 1;
  t0 = std::chrono::steady_clock::now();
  auto [r1, rep1] = reduce_corpus(serial.final_corpus, *target, red);
  t1 = std::chrono::steady_clock::now();
  serial_s = seconds(t0, t1);
  std::printf("  serial reference:  %8.3f s\n", serial_s);
  red.jobs = jobs;
  t0 = std::chrono::steady_clock::now();
  auto [r2, rep2] = reduce_corpus(serial.final_corpus, *target, red);
  t1 = std::chrono::steady_clock::now();
  parallel_s = seconds(t0, t1);
  std::printf("  parallel (%d jobs): %8.3f s  speedup %.2fx  results %s\n", jobs, parallel_s,
              serial_s / parallel_s, corpora_equal(r1, r2) ? "identical" : "DIFFER");

  return 0;
}
