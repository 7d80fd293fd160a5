#include "eigensr/resample.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace eigensr {
namespace {

// Per-output-sample tap list for one axis. Source indices are pre-clamped to
// the valid range (replicate boundary) and weights are normalized to sum 1,
// so the operator is exactly linear and constant-preserving.
struct AxisWeights {
  int taps = 0;
  std::vector<int> index;    // out_size * taps
  std::vector<double> weight;
};

// Output sample n sits at source coordinate (n + 0.5) * scale - 0.5.
// Downsampling (scale > 1) stretches the kernel by scale for anti-aliasing.
AxisWeights make_axis_weights(int in_size, int out_size, double scale, bool antialias) {
  const double stretch = antialias ? scale : 1.0;
  const int taps = 2 * static_cast<int>(std::ceil(2.0 * stretch));
  AxisWeights w;
  w.taps = taps;
  w.index.resize(static_cast<size_t>(out_size) * taps);
  w.weight.resize(static_cast<size_t>(out_size) * taps);
  for (int n = 0; n < out_size; ++n) {
    const double center = (n + 0.5) * scale - 0.5;
    const int k0 = static_cast<int>(std::floor(center - 2.0 * stretch)) + 1;
    double sum = 0.0;
    for (int t = 0; t < taps; ++t) {
      const int k = k0 + t;
      const double v = cubic_kernel((center - k) / stretch) / stretch;
      w.index[static_cast<size_t>(n) * taps + t] = std::clamp(k, 0, in_size - 1);
      w.weight[static_cast<size_t>(n) * taps + t] = v;
      sum += v;
    }
    for (int t = 0; t < taps; ++t) w.weight[static_cast<size_t>(n) * taps + t] /= sum;
  }
  return w;
}

// Resamples along the width axis: rows x in_w -> rows x out_w.
void apply_horizontal(const double *in, int rows, int in_w, const AxisWeights &w, int out_w,
                      double *out) {
  for (int y = 0; y < rows; ++y) {
    const double *src = in + static_cast<size_t>(y) * in_w;
    double *dst = out + static_cast<size_t>(y) * out_w;
    for (int x = 0; x < out_w; ++x) {
      const int *idx = &w.index[static_cast<size_t>(x) * w.taps];
      const double *wt = &w.weight[static_cast<size_t>(x) * w.taps];
      double acc = 0.0;
      for (int t = 0; t < w.taps; ++t) acc += wt[t] * src[idx[t]];
      dst[x] = acc;
    }
  }
}

// Resamples along the height axis: in_h x cols -> out_h x cols.
void apply_vertical(const double *in, int in_h, int cols, const AxisWeights &w, int out_h,
                    double *out) {
  for (int y = 0; y < out_h; ++y) {
    const int *idx = &w.index[static_cast<size_t>(y) * w.taps];
    const double *wt = &w.weight[static_cast<size_t>(y) * w.taps];
    double *dst = out + static_cast<size_t>(y) * cols;
    std::fill(dst, dst + cols, 0.0);
    for (int t = 0; t < w.taps; ++t) {
      const double *src = in + static_cast<size_t>(idx[t]) * cols;
      const double v = wt[t];
      for (int x = 0; x < cols; ++x) dst[x] += v * src[x];
    }
  }
}

void check_input(const Image &img, int factor) {
  if (factor < 2) throw std::invalid_argument("scale factor must be >= 2, got " + std::to_string(factor));
  if (img.height < 1 || img.width < 1) throw std::invalid_argument("empty image");
  for (double v : img.px)
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite value in image");
}

Image resample(const Image &img, int out_h, int out_w, double scale, bool antialias) {
  const AxisWeights wx = make_axis_weights(img.width, out_w, scale, antialias);
  const AxisWeights wy = make_axis_weights(img.height, out_h, scale, antialias);
  std::vector<double> mid(static_cast<size_t>(img.height) * out_w);
  apply_horizontal(img.px.data(), img.height, img.width, wx, out_w, mid.data());
  Image out(out_h, out_w);
  apply_vertical(mid.data(), img.height, out_w, wy, out_h, out.px.data());
  return out;
}

}  // namespace

double cubic_kernel(double t) {
  const double a = -0.5;
  const double x = std::fabs(t);
  if (x <= 1.0) return ((a + 2.0) * x - (a + 3.0)) * x * x + 1.0;
  if (x < 2.0) return ((a * x - 5.0 * a) * x + 8.0 * a) * x - 4.0 * a;
  return 0.0;
}

Image bicubic_downsample(const Image &img, int factor) {
  check_input(img, factor);
  if (img.height % factor != 0 || img.width % factor != 0)
    throw std::invalid_argument("image " + std::to_string(img.height) + "x" + std::to_string(img.width) +
                                " not divisible by factor " + std::to_string(factor));
  return resample(img, img.height / factor, img.width / factor, static_cast<double>(factor), true);
}

Image bicubic_upsample(const Image &img, int factor) {
  check_input(img, factor);
  return resample(img, img.height * factor, img.width * factor, 1.0 / factor, false);
}

namespace {

HsiCube per_band(const HsiCube &cube, int factor, Image (*op)(const Image &, int)) {
  Image band(cube.height, cube.width);
  Matrix out;
  int oh = 0, ow = 0;
  for (int l = 0; l < cube.bands; ++l) {
    std::copy(cube.y.row(l), cube.y.row(l) + cube.pixels(), band.px.begin());
    Image res = op(band, factor);
    if (l == 0) {
      oh = res.height;
      ow = res.width;
      out = Matrix(cube.bands, oh * ow);
    }
    std::copy(res.px.begin(), res.px.end(), out.row(l));
  }
  return cube_from_matrix(std::move(out), oh, ow);
}

}  // namespace

HsiCube downsample_cube(const HsiCube &cube, int factor) {
  return per_band(cube, factor, bicubic_downsample);
}

HsiCube upsample_cube(const HsiCube &cube, int factor) {
  return per_band(cube, factor, bicubic_upsample);
}

}  // namespace eigensr
