#include "eigensr/bench.hpp"

#include <chrono>
#include <cstdio>
#include <stdexcept>

#include "eigensr/inference.hpp"
#include "eigensr/rng.hpp"

namespace eigensr {
namespace {

HsiCube random_cube(int bands, int size, Rng &rng) {
  Matrix y(bands, size * size);
  for (double &v : y.a) v = rng.next_unit();
  return cube_from_matrix(std::move(y), size, size);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

BenchReport run_bench(int bands, int rank, int iterations, int size, int reps, uint64_t seed,
                      int threads) {
  if (bands < 1 || rank < 1 || rank > bands || iterations < 1 || size < 2 || reps < 1)
    throw std::invalid_argument("bench: invalid parameters");

  BenchReport rep;
  rep.bands = bands;
  rep.rank = rank;
  rep.iterations = iterations;
  rep.size = size;
  rep.reps = reps;

  Rng rng(seed);
  const HsiCube cube = random_cube(bands, size, rng);
  const SrOperator op = make_bicubic_sr(2);

  for (int r = 1; r <= reps; ++r) {
    BenchRow row;
    row.rep = r;

    auto t0 = std::chrono::steady_clock::now();
    const InferenceResult at_rank = eigensr_alpha(cube, op, rank, threads);
    row.secs_rank = seconds_since(t0);
    row.calls_rank = at_rank.sr_apply_calls;

    t0 = std::chrono::steady_clock::now();
    const InferenceResult full = eigensr_alpha(cube, op, bands, threads);
    row.secs_full = seconds_since(t0);
    row.calls_full = full.sr_apply_calls;

    rep.rows.push_back(row);
    rep.mean_secs_rank += row.secs_rank;
    rep.mean_secs_full += row.secs_full;
  }
  rep.mean_secs_rank /= reps;
  rep.mean_secs_full /= reps;
  rep.call_ratio = static_cast<double>(rank) / static_cast<double>(bands);
  rep.time_ratio = rep.mean_secs_rank / rep.mean_secs_full;

  InferenceConfig beta;
  beta.mode = SrMode::beta;
  beta.rank = rank;
  beta.iterations = iterations;
  rep.beta_calls = invocation_count(beta, bands);
  return rep;
}

void write_bench_csv(const BenchReport &report, std::ostream &out) {
  out << "rep,sr_calls_rank,wall_s_rank,sr_calls_full,wall_s_full,call_ratio,time_ratio,beta_sr_calls\n";
  char line[160];
  for (const BenchRow &row : report.rows) {
    std::snprintf(line, sizeof(line), "%d,%ld,%.6f,%ld,%.6f,%.6f,%.6f,%ld\n", row.rep,
                  row.calls_rank, row.secs_rank, row.calls_full, row.secs_full, report.call_ratio,
                  row.secs_rank / row.secs_full, report.beta_calls);
    out << line;
  }
  std::snprintf(line, sizeof(line), "summary,%d,%.6f,%d,%.6f,%.6f,%.6f,%ld\n", report.rank,
                report.mean_secs_rank, report.bands, report.mean_secs_full, report.call_ratio,
                report.time_ratio, report.beta_calls);
  out << line;
}

}  // namespace eigensr
