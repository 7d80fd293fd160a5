#include "eigensr/inference.hpp"

#include <stdexcept>
#include <string>

#include "eigensr/parallel.hpp"
#include "eigensr/resample.hpp"
#include "eigensr/speclin.hpp"

namespace eigensr {
namespace {

// Super-resolves every channel of a stack; channels write disjoint outputs,
// so the loop can fan out across threads without changing the result.
EigenimageStack sr_stack(const EigenimageStack &in, const SrOperator &model, int threads) {
  EigenimageStack out;
  out.channels = in.channels;
  out.height = in.height * model.scale;
  out.width = in.width * model.scale;
  out.data.assign(static_cast<size_t>(out.channels) * out.pixels(), 0.0);
  parallel_for(in.channels, threads, [&](int i) {
    const Image sr = sr_apply(model, in.channel_image(i));
    std::copy(sr.px.begin(), sr.px.end(), out.channel(i));
  });
  return out;
}

// One decompose/super-resolve/reconstruct pass using the basis of `basis_src`.
Matrix sr_pass(const Matrix &basis_src, const HsiCube &lr, const SrOperator &model, int rank,
               int threads) {
  const SpectralDecomposition dec = spectral_svd(basis_src);
  const EigenimageStack e_lr = project(matrix_view(lr), lr.height, lr.width, dec, rank);
  const EigenimageStack e_sr = sr_stack(e_lr, model, threads);
  return reconstruct(e_sr, dec);
}

void check_rank(int rank, int bands) {
  if (rank < 1 || rank > bands)
    throw std::invalid_argument("rank " + std::to_string(rank) + " out of range [1, " +
                                std::to_string(bands) + "]");
}

}  // namespace

InferenceConfig InferenceConfig::resolved(int bands) const {
  InferenceConfig c = *this;
  if (c.scale < 2) throw std::invalid_argument("inference config: scale must be >= 2");
  if (c.rank <= 0) c.rank = (bands + 1) / 2;
  check_rank(c.rank, bands);
  if (c.lambda <= 0.0) c.lambda = c.scale == 2 ? 0.8 : 0.4;
  if (c.mode == SrMode::alpha) {
    c.iterations = 1;
    c.lambda = 1.0;
  }
  if (c.iterations < 1) throw std::invalid_argument("inference config: iterations must be >= 1");
  if (!(c.lambda > 0.0 && c.lambda <= 1.0))
    throw std::invalid_argument("inference config: lambda must be in (0, 1]");
  if (c.threads < 1) c.threads = 1;
  return c;
}

InferenceResult eigensr_alpha(const HsiCube &lr, const SrOperator &model, int rank, int threads) {
  check_rank(rank, lr.bands);
  InferenceResult res;
  const Matrix y_sr = sr_pass(matrix_view(lr), lr, model, rank, threads);
  res.sr = cube_from_matrix(y_sr, lr.height * model.scale, lr.width * model.scale);
  res.sr_apply_calls = rank;
  return res;
}

InferenceResult eigensr_beta(const HsiCube &lr, const SrOperator &model, const InferenceConfig &cfg) {
  const InferenceConfig c = cfg.resolved(lr.bands);
  if (model.scale != c.scale)
    throw std::invalid_argument("model scale " + std::to_string(model.scale) +
                                " does not match configured scale " + std::to_string(c.scale));

  const int hr_h = lr.height * c.scale;
  const int hr_w = lr.width * c.scale;
  Matrix comb = matrix_view(lr);  // LR geometry on the first iteration only
  long calls = 0;

  for (int i = 0; i < c.iterations; ++i) {
    Matrix y_sr = sr_pass(comb, lr, model, c.rank, c.threads);
    calls += c.rank;
    if (static_cast<size_t>(y_sr.cols) != static_cast<size_t>(hr_h) * hr_w)
      throw std::logic_error("eigensr_beta: unexpected pass geometry");

    if (c.lambda == 1.0) {
      comb = std::move(y_sr);
      continue;
    }
    if (i == 0) {
      const HsiCube base = upsample_cube(lr, c.scale);
      comb = matrix_view(base);
    }
    for (size_t n = 0; n < comb.size(); ++n)
      comb.a[n] = c.lambda * y_sr.a[n] + (1.0 - c.lambda) * comb.a[n];
  }

  InferenceResult res;
  res.sr = cube_from_matrix(std::move(comb), hr_h, hr_w);
  res.sr_apply_calls = calls;
  return res;
}

long invocation_count(const InferenceConfig &cfg, int bands) {
  const InferenceConfig c = cfg.resolved(bands);
  return c.mode == SrMode::alpha ? c.rank : static_cast<long>(c.iterations) * c.rank;
}

}  // namespace eigensr
