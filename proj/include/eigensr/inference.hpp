#ifndef EIGENSR_INFERENCE_HPP_
#define EIGENSR_INFERENCE_HPP_

#include "eigensr/cube.hpp"
#include "eigensr/sr_model.hpp"

namespace eigensr {

enum class SrMode { alpha, beta };

/// Inference settings. rank <= 0 and lambda <= 0 select the defaults:
/// rank = ceil(bands / 2), lambda = 0.8 for scale 2 and 0.4 otherwise.
/// Alpha mode forces iterations = 1 and lambda = 1.
struct InferenceConfig {
  SrMode mode = SrMode::beta;
  int rank = 0;
  int iterations = 5;
  double lambda = 0.0;
  int scale = 2;
  int threads = 1;

  /// Fills defaults for the given band count and validates everything.
  InferenceConfig resolved(int bands) const;
};

struct InferenceResult {
  HsiCube sr;
  long sr_apply_calls = 0;
};

/// Single-pass super-resolution: decompose the LR cube, super-resolve the
/// first `rank` coefficient images channel-by-channel, reconstruct with the
/// same basis. Exactly `rank` operator invocations.
InferenceResult eigensr_alpha(const HsiCube &lr, const SrOperator &model, int rank, int threads = 1);

/// Iterative spectral regularization. Each iteration decomposes the running
/// combination, re-projects the original LR input, super-resolves, and blends:
/// comb <- lambda * sr + (1 - lambda) * comb (first iteration blends against
/// the bicubic-upsampled input so both terms share the HR geometry). Returns
/// the final combination; iterations * rank operator invocations.
InferenceResult eigensr_beta(const HsiCube &lr, const SrOperator &model, const InferenceConfig &cfg);

/// Operator invocation count for a configuration: rank for alpha,
/// iterations * rank for beta.
long invocation_count(const InferenceConfig &cfg, int bands);

}  // namespace eigensr

#endif
