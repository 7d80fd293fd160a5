#ifndef EIGENSR_SR_MODEL_HPP_
#define EIGENSR_SR_MODEL_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "eigensr/image.hpp"

namespace eigensr {

enum class SrKind { bicubic, tinynet };

/// One zero-padded "same" convolution layer (cross-correlation).
struct ConvLayer {
  int in_channels = 0;
  int out_channels = 0;
  int ksize = 0;
  std::vector<double> w;  // [out][in][ky][kx]
  std::vector<double> b;  // [out]

  double &wat(int oc, int ic, int ky, int kx) {
    return w[((static_cast<size_t>(oc) * in_channels + ic) * ksize + ky) * ksize + kx];
  }
  double wat(int oc, int ic, int ky, int kx) const {
    return w[((static_cast<size_t>(oc) * in_channels + ic) * ksize + ky) * ksize + kx];
  }
};

/// Three-layer post-upsampling net: 9x9 (1->32), relu, 5x5 (32->16), relu,
/// 5x5 (16->1). Runs on the bicubic-upsampled input; 17x17 receptive field.
struct TinyNet {
  ConvLayer c1, c2, c3;
};

/// Single-channel super-resolution operator: either plain bicubic upsampling
/// or the trainable net wrapped in per-call min-max normalization.
struct SrOperator {
  SrKind kind = SrKind::bicubic;
  int scale = 2;
  uint64_t init_seed = 0;  // tinynet weight-init seed, recorded in checkpoints
  TinyNet net;             // unused for bicubic
};

SrOperator make_bicubic_sr(int scale);
SrOperator make_tinynet_sr(int scale, uint64_t seed);

/// Parameter count of the tinynet architecture (weights + biases).
size_t tinynet_param_count();

/// Maps an h x w image to (h*scale) x (w*scale). For the tinynet kind the
/// input is shifted/scaled to [0, 1] by its own min/max (scale floored at
/// 1e-8), upsampled, run through the net, and mapped back.
Image sr_apply(const SrOperator &op, const Image &img);

/// Mean absolute difference.
double l1_loss(const Image &pred, const Image &target);

struct TinyNetGrads {
  std::vector<double> w1, b1, w2, b2, w3, b3;
};

struct BackwardResult {
  double loss = 0.0;
  TinyNetGrads grads;
};

/// Gradients of l1_loss(sr_apply(op, img), target) with respect to all net
/// parameters. The L1 subgradient at zero residual is zero. Tinynet only.
BackwardResult backward(const SrOperator &op, const Image &img, const Image &target);

struct AdamState {
  std::vector<double> m, v;
  long t = 0;
};

/// One Adam update with bias correction; weights and state are modified in
/// place. State vectors are sized on first use.
void adam_step(std::vector<double> &weights, const std::vector<double> &grads, AdamState &state,
               double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

/// Flat parameter vector in checkpoint order (c1.w, c1.b, c2.w, c2.b, c3.w, c3.b).
std::vector<double> flatten_params(const SrOperator &op);
void unflatten_params(SrOperator &op, const std::vector<double> &flat);
std::vector<double> flatten_grads(const TinyNetGrads &g);

/// Checkpoint I/O: "ESRW1" magic, JSON manifest (kind, scale, seed, param
/// shapes, blob sha256), float64 little-endian blob. Round-trips bit-exactly.
void save_weights(const SrOperator &op, const std::filesystem::path &path);
SrOperator load_weights(const std::filesystem::path &path);

}  // namespace eigensr

#endif
