#ifndef EIGENSR_BENCH_HPP_
#define EIGENSR_BENCH_HPP_

#include <cstdint>
#include <ostream>
#include <vector>

namespace eigensr {

struct BenchRow {
  int rep = 0;
  long calls_rank = 0;
  double secs_rank = 0.0;
  long calls_full = 0;
  double secs_full = 0.0;
};

struct BenchReport {
  int bands = 0, rank = 0, iterations = 0, size = 0, reps = 0;
  std::vector<BenchRow> rows;
  double mean_secs_rank = 0.0;
  double mean_secs_full = 0.0;
  double call_ratio = 0.0;  // rank / bands, exact
  double time_ratio = 0.0;  // mean_secs_rank / mean_secs_full
  long beta_calls = 0;      // iterations * rank
};

/// Times single-pass inference with the bicubic operator (scale 2) on a
/// random bands x size x size cube: truncated to `rank` versus band-by-band
/// (rank = bands). Wall time is hardware-dependent; call counts are exact.
BenchReport run_bench(int bands, int rank, int iterations, int size, int reps, uint64_t seed,
                      int threads);

/// One timed row per rep plus a summary row of means and ratios.
void write_bench_csv(const BenchReport &report, std::ostream &out);

}  // namespace eigensr

#endif
