#include "eigensr/sr_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "eigensr/cube.hpp"
#include "eigensr/resample.hpp"
#include "eigensr/rng.hpp"
#include "eigensr/wire.hpp"
#include "json.hpp"

namespace eigensr {
namespace {

constexpr double kNormFloor = 1e-8;
constexpr char kCheckpointMagic[5] = {'E', 'S', 'R', 'W', '1'};

struct NormParams {
  double shift = 0.0;
  double scale = 1.0;
};

NormParams norm_params(const Image &img) {
  const auto [lo, hi] = std::minmax_element(img.px.begin(), img.px.end());
  return {*lo, std::max(*hi - *lo, kNormFloor)};
}

ConvLayer make_layer(int in_ch, int out_ch, int ksize) {
  ConvLayer l;
  l.in_channels = in_ch;
  l.out_channels = out_ch;
  l.ksize = ksize;
  l.w.assign(static_cast<size_t>(out_ch) * in_ch * ksize * ksize, 0.0);
  l.b.assign(out_ch, 0.0);
  return l;
}

void init_layer(ConvLayer &l, Rng &rng) {
  const double bound = std::sqrt(1.0 / (l.in_channels * l.ksize * l.ksize));
  for (double &w : l.w) w = rng.next_range(-bound, bound);
  // biases start at zero
}

// Feature maps as [channel][y][x], channels contiguous.
struct FeatureMap {
  int channels = 0, height = 0, width = 0;
  std::vector<double> v;
  FeatureMap() = default;
  FeatureMap(int c, int h, int w)
      : channels(c), height(h), width(w), v(static_cast<size_t>(c) * h * w, 0.0) {}
  double *ch(int c) { return v.data() + static_cast<size_t>(c) * height * width; }
  const double *ch(int c) const { return v.data() + static_cast<size_t>(c) * height * width; }
};

void conv_forward(const FeatureMap &in, const ConvLayer &l, FeatureMap &out) {
  const int h = in.height, w = in.width, k = l.ksize, pad = k / 2;
  out = FeatureMap(l.out_channels, h, w);
  for (int oc = 0; oc < l.out_channels; ++oc) {
    double *dst = out.ch(oc);
    std::fill(dst, dst + static_cast<size_t>(h) * w, l.b[oc]);
    for (int ic = 0; ic < l.in_channels; ++ic) {
      const double *src = in.ch(ic);
      for (int ky = 0; ky < k; ++ky) {
        const int dy = ky - pad;
        const int y0 = std::max(0, -dy), y1 = std::min(h, h - dy);
        for (int kx = 0; kx < k; ++kx) {
          const int dx = kx - pad;
          const int x0 = std::max(0, -dx), x1 = std::min(w, w - dx);
          const double wv = l.wat(oc, ic, ky, kx);
          for (int y = y0; y < y1; ++y) {
            double *o = dst + static_cast<size_t>(y) * w;
            const double *s = src + static_cast<size_t>(y + dy) * w + dx;
            for (int x = x0; x < x1; ++x) o[x] += wv * s[x];
          }
        }
      }
    }
  }
}

// dIn[ic] += sum_oc W[oc][ic] (*) dOut[oc], the adjoint of conv_forward.
void conv_backward_input(const FeatureMap &dout, const ConvLayer &l, FeatureMap &din) {
  const int h = dout.height, w = dout.width, k = l.ksize, pad = k / 2;
  din = FeatureMap(l.in_channels, h, w);
  for (int oc = 0; oc < l.out_channels; ++oc) {
    const double *src = dout.ch(oc);
    for (int ic = 0; ic < l.in_channels; ++ic) {
      double *dst = din.ch(ic);
      for (int ky = 0; ky < k; ++ky) {
        const int dy = ky - pad;
        const int y0 = std::max(0, -dy), y1 = std::min(h, h - dy);
        for (int kx = 0; kx < k; ++kx) {
          const int dx = kx - pad;
          const int x0 = std::max(0, -dx), x1 = std::min(w, w - dx);
          const double wv = l.wat(oc, ic, ky, kx);
          // output position y reads input y+dy, so dIn[y+dy] += w * dOut[y]
          for (int y = y0; y < y1; ++y) {
            double *o = dst + static_cast<size_t>(y + dy) * w + dx;
            const double *s = src + static_cast<size_t>(y) * w;
            for (int x = x0; x < x1; ++x) o[x] += wv * s[x];
          }
        }
      }
    }
  }
}

void conv_backward_params(const FeatureMap &in, const FeatureMap &dout, const ConvLayer &l,
                          std::vector<double> &dw, std::vector<double> &db) {
  const int h = in.height, w = in.width, k = l.ksize, pad = k / 2;
  dw.assign(l.w.size(), 0.0);
  db.assign(l.b.size(), 0.0);
  for (int oc = 0; oc < l.out_channels; ++oc) {
    const double *g = dout.ch(oc);
    double bsum = 0.0;
    for (size_t i = 0; i < static_cast<size_t>(h) * w; ++i) bsum += g[i];
    db[oc] = bsum;
    for (int ic = 0; ic < l.in_channels; ++ic) {
      const double *src = in.ch(ic);
      for (int ky = 0; ky < k; ++ky) {
        const int dy = ky - pad;
        const int y0 = std::max(0, -dy), y1 = std::min(h, h - dy);
        for (int kx = 0; kx < k; ++kx) {
          const int dx = kx - pad;
          const int x0 = std::max(0, -dx), x1 = std::min(w, w - dx);
          double acc = 0.0;
          for (int y = y0; y < y1; ++y) {
            const double *gr = g + static_cast<size_t>(y) * w;
            const double *sr = src + static_cast<size_t>(y + dy) * w + dx;
            for (int x = x0; x < x1; ++x) acc += gr[x] * sr[x];
          }
          dw[((static_cast<size_t>(oc) * l.in_channels + ic) * k + ky) * k + kx] = acc;
        }
      }
    }
  }
}

void relu_inplace(FeatureMap &m) {
  for (double &v : m.v) v = v > 0.0 ? v : 0.0;
}

struct ForwardTrace {
  FeatureMap x0;        // normalized, upsampled input (1 channel)
  FeatureMap z1, a1;    // conv1 pre/post relu
  FeatureMap z2, a2;    // conv2 pre/post relu
  FeatureMap z3;        // conv3 output
  NormParams norm;
};

void tinynet_forward(const SrOperator &op, const Image &img, ForwardTrace &tr) {
  tr.norm = norm_params(img);
  Image normed(img.height, img.width);
  for (size_t i = 0; i < img.px.size(); ++i) normed.px[i] = (img.px[i] - tr.norm.shift) / tr.norm.scale;
  Image up = bicubic_upsample(normed, op.scale);

  tr.x0 = FeatureMap(1, up.height, up.width);
  std::copy(up.px.begin(), up.px.end(), tr.x0.v.begin());

  conv_forward(tr.x0, op.net.c1, tr.z1);
  tr.a1 = tr.z1;
  relu_inplace(tr.a1);
  conv_forward(tr.a1, op.net.c2, tr.z2);
  tr.a2 = tr.z2;
  relu_inplace(tr.a2);
  conv_forward(tr.a2, op.net.c3, tr.z3);
}

void check_finite_input(const Image &img) {
  if (img.height < 1 || img.width < 1) throw std::invalid_argument("sr_apply: empty image");
  for (double v : img.px)
    if (!std::isfinite(v)) throw std::invalid_argument("sr_apply: non-finite input");
}

void append_shape(nlohmann::json &params, const char *name, std::initializer_list<int> shape) {
  params.push_back({{"name", name}, {"shape", shape}});
}

nlohmann::json expected_tinynet_params() {
  nlohmann::json params = nlohmann::json::array();
  append_shape(params, "conv1.weight", {32, 1, 9, 9});
  append_shape(params, "conv1.bias", {32});
  append_shape(params, "conv2.weight", {16, 32, 5, 5});
  append_shape(params, "conv2.bias", {16});
  append_shape(params, "conv3.weight", {1, 16, 5, 5});
  append_shape(params, "conv3.bias", {1});
  return params;
}

}  // namespace

SrOperator make_bicubic_sr(int scale) {
  if (scale < 2) throw std::invalid_argument("scale factor must be >= 2");
  SrOperator op;
  op.kind = SrKind::bicubic;
  op.scale = scale;
  return op;
}

SrOperator make_tinynet_sr(int scale, uint64_t seed) {
  if (scale < 2) throw std::invalid_argument("scale factor must be >= 2");
  SrOperator op;
  op.kind = SrKind::tinynet;
  op.scale = scale;
  op.init_seed = seed;
  op.net.c1 = make_layer(1, 32, 9);
  op.net.c2 = make_layer(32, 16, 5);
  op.net.c3 = make_layer(16, 1, 5);
  Rng rng(seed);
  init_layer(op.net.c1, rng);
  init_layer(op.net.c2, rng);
  init_layer(op.net.c3, rng);
  return op;
}

size_t tinynet_param_count() {
  return 32 * 1 * 9 * 9 + 32 + 16 * 32 * 5 * 5 + 16 + 1 * 16 * 5 * 5 + 1;
}

Image sr_apply(const SrOperator &op, const Image &img) {
  check_finite_input(img);
  if (op.kind == SrKind::bicubic) return bicubic_upsample(img, op.scale);

  ForwardTrace tr;
  tinynet_forward(op, img, tr);
  Image out(tr.z3.height, tr.z3.width);
  for (size_t i = 0; i < out.px.size(); ++i) out.px[i] = tr.z3.v[i] * tr.norm.scale + tr.norm.shift;
  return out;
}

double l1_loss(const Image &pred, const Image &target) {
  if (pred.height != target.height || pred.width != target.width)
    throw std::invalid_argument("l1_loss: shape mismatch");
  double sum = 0.0;
  for (size_t i = 0; i < pred.px.size(); ++i) sum += std::fabs(pred.px[i] - target.px[i]);
  return sum / static_cast<double>(pred.px.size());
}

BackwardResult backward(const SrOperator &op, const Image &img, const Image &target) {
  if (op.kind != SrKind::tinynet)
    throw std::invalid_argument("backward: operator is not trainable");
  check_finite_input(img);
  if (target.height != img.height * op.scale || target.width != img.width * op.scale)
    throw std::invalid_argument("backward: target shape mismatch");

  ForwardTrace tr;
  tinynet_forward(op, img, tr);

  const size_t n = tr.z3.v.size();
  BackwardResult res;
  FeatureMap dz3(1, tr.z3.height, tr.z3.width);
  double loss_sum = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double pred = tr.z3.v[i] * tr.norm.scale + tr.norm.shift;
    const double r = pred - target.px[i];
    loss_sum += std::fabs(r);
    const double sgn = r > 0.0 ? 1.0 : (r < 0.0 ? -1.0 : 0.0);
    dz3.v[i] = sgn * tr.norm.scale / static_cast<double>(n);
  }
  res.loss = loss_sum / static_cast<double>(n);

  conv_backward_params(tr.a2, dz3, op.net.c3, res.grads.w3, res.grads.b3);
  FeatureMap da2;
  conv_backward_input(dz3, op.net.c3, da2);
  for (size_t i = 0; i < da2.v.size(); ++i)
    if (tr.z2.v[i] <= 0.0) da2.v[i] = 0.0;

  conv_backward_params(tr.a1, da2, op.net.c2, res.grads.w2, res.grads.b2);
  FeatureMap da1;
  conv_backward_input(da2, op.net.c2, da1);
  for (size_t i = 0; i < da1.v.size(); ++i)
    if (tr.z1.v[i] <= 0.0) da1.v[i] = 0.0;

  conv_backward_params(tr.x0, da1, op.net.c1, res.grads.w1, res.grads.b1);
  return res;
}

void adam_step(std::vector<double> &weights, const std::vector<double> &grads, AdamState &state,
               double lr, double beta1, double beta2, double eps) {
  if (weights.size() != grads.size()) throw std::invalid_argument("adam_step: shape mismatch");
  if (state.m.empty()) {
    state.m.assign(weights.size(), 0.0);
    state.v.assign(weights.size(), 0.0);
  }
  if (state.m.size() != weights.size()) throw std::invalid_argument("adam_step: state shape mismatch");

  state.t += 1;
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.t));
  for (size_t i = 0; i < weights.size(); ++i) {
    state.m[i] = beta1 * state.m[i] + (1.0 - beta1) * grads[i];
    state.v[i] = beta2 * state.v[i] + (1.0 - beta2) * grads[i] * grads[i];
    const double mhat = state.m[i] / bc1;
    const double vhat = state.v[i] / bc2;
    weights[i] -= lr * mhat / (std::sqrt(vhat) + eps);
  }
}

std::vector<double> flatten_params(const SrOperator &op) {
  std::vector<double> flat;
  flat.reserve(tinynet_param_count());
  for (const ConvLayer *l : {&op.net.c1, &op.net.c2, &op.net.c3}) {
    flat.insert(flat.end(), l->w.begin(), l->w.end());
    flat.insert(flat.end(), l->b.begin(), l->b.end());
  }
  return flat;
}

void unflatten_params(SrOperator &op, const std::vector<double> &flat) {
  size_t pos = 0;
  for (ConvLayer *l : {&op.net.c1, &op.net.c2, &op.net.c3}) {
    std::copy(flat.begin() + pos, flat.begin() + pos + l->w.size(), l->w.begin());
    pos += l->w.size();
    std::copy(flat.begin() + pos, flat.begin() + pos + l->b.size(), l->b.begin());
    pos += l->b.size();
  }
  if (pos != flat.size()) throw std::invalid_argument("unflatten_params: size mismatch");
}

std::vector<double> flatten_grads(const TinyNetGrads &g) {
  std::vector<double> flat;
  flat.reserve(tinynet_param_count());
  for (const std::vector<double> *v : {&g.w1, &g.b1, &g.w2, &g.b2, &g.w3, &g.b3})
    flat.insert(flat.end(), v->begin(), v->end());
  return flat;
}

void save_weights(const SrOperator &op, const std::filesystem::path &path) {
  std::vector<uint8_t> blob;
  nlohmann::json params = nlohmann::json::array();
  if (op.kind == SrKind::tinynet) {
    const auto flat = flatten_params(op);
    blob.reserve(flat.size() * 8);
    for (double v : flat) wire::put_f64(blob, v);
    params = expected_tinynet_params();
  }
  nlohmann::json manifest = {
      {"kind", op.kind == SrKind::tinynet ? "tinynet" : "bicubic"},
      {"scale", op.scale},
      {"seed", op.init_seed},
      {"params", params},
      {"blob_doubles", blob.size() / 8},
      {"blob_sha256", wire::sha256_hex(blob.data(), blob.size())},
  };
  const std::string mstr = manifest.dump();

  std::vector<uint8_t> out;
  out.insert(out.end(), kCheckpointMagic, kCheckpointMagic + 5);
  wire::put_u32(out, static_cast<uint32_t>(mstr.size()));
  out.insert(out.end(), mstr.begin(), mstr.end());
  out.insert(out.end(), blob.begin(), blob.end());

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw FormatError("cannot open " + path.string() + " for writing");
  f.write(reinterpret_cast<const char *>(out.data()), static_cast<std::streamsize>(out.size()));
  if (!f) throw FormatError("failed writing " + path.string());
}

SrOperator load_weights(const std::filesystem::path &path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw FormatError("cannot open " + path.string());
  std::vector<uint8_t> buf((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  const std::string name = path.string();

  if (buf.size() < 9 || !std::equal(kCheckpointMagic, kCheckpointMagic + 5, buf.data()))
    throw FormatError(name + ": checkpoint version mismatch (expected ESRW1 magic)");
  const uint32_t mlen = wire::get_u32(buf.data() + 5);
  if (buf.size() < 9 + static_cast<size_t>(mlen)) throw FormatError(name + ": truncated manifest");
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(buf.begin() + 9, buf.begin() + 9 + mlen);
  } catch (const nlohmann::json::exception &e) {
    throw FormatError(name + ": malformed manifest: " + e.what());
  }

  const std::string kind = manifest.at("kind").get<std::string>();
  const int scale = manifest.at("scale").get<int>();
  const size_t blob_len = buf.size() - 9 - mlen;
  const size_t blob_doubles = manifest.at("blob_doubles").get<size_t>();
  if (blob_len != blob_doubles * 8)
    throw FormatError(name + ": blob length mismatch (have " + std::to_string(blob_len) +
                      " bytes, manifest says " + std::to_string(blob_doubles * 8) + ")");
  const std::string sha = wire::sha256_hex(buf.data() + 9 + mlen, blob_len);
  if (sha != manifest.at("blob_sha256").get<std::string>())
    throw FormatError(name + ": checksum failure");

  if (kind == "bicubic") {
    if (blob_doubles != 0) throw FormatError(name + ": bicubic checkpoint with parameters");
    return make_bicubic_sr(scale);
  }
  if (kind != "tinynet") throw FormatError(name + ": unknown operator kind '" + kind + "'");

  if (manifest.at("params") != expected_tinynet_params())
    throw FormatError(name + ": architecture mismatch");
  if (blob_doubles != tinynet_param_count())
    throw FormatError(name + ": architecture mismatch (parameter count)");

  SrOperator op = make_tinynet_sr(scale, manifest.at("seed").get<uint64_t>());
  std::vector<double> flat(blob_doubles);
  for (size_t i = 0; i < blob_doubles; ++i) flat[i] = wire::get_f64(buf.data() + 9 + mlen + 8 * i);
  unflatten_params(op, flat);
  return op;
}

}  // namespace eigensr
