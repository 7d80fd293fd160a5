#include "eigensr/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace eigensr {
namespace {

constexpr int kWindow = 11;
constexpr double kWindowSigma = 1.5;

void check_same_geometry(const HsiCube &pred, const HsiCube &ref) {
  if (pred.bands != ref.bands || pred.height != ref.height || pred.width != ref.width)
    throw std::invalid_argument("metrics: geometry mismatch (" + std::to_string(pred.bands) + "x" +
                                std::to_string(pred.height) + "x" + std::to_string(pred.width) +
                                " vs " + std::to_string(ref.bands) + "x" + std::to_string(ref.height) +
                                "x" + std::to_string(ref.width) + ")");
}

void check_peak(double peak) {
  if (!(peak > 0.0)) throw std::invalid_argument("metrics: peak must be positive");
}

std::vector<double> gaussian_window() {
  std::vector<double> w(kWindow);
  const int half = kWindow / 2;
  double sum = 0.0;
  for (int i = 0; i < kWindow; ++i) {
    const double d = i - half;
    w[i] = std::exp(-d * d / (2.0 * kWindowSigma * kWindowSigma));
    sum += w[i];
  }
  for (double &v : w) v /= sum;
  return w;
}

// Separable weighted filter over the valid region: (H-10) x (W-10) outputs.
Matrix filter_valid(const double *img, int h, int w, const std::vector<double> &g) {
  const int oh = h - kWindow + 1, ow = w - kWindow + 1;
  Matrix mid(h, ow);
  for (int y = 0; y < h; ++y) {
    const double *src = img + static_cast<size_t>(y) * w;
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int t = 0; t < kWindow; ++t) acc += g[t] * src[x + t];
      mid.at(y, x) = acc;
    }
  }
  Matrix out(oh, ow);
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int t = 0; t < kWindow; ++t) acc += g[t] * mid.at(y + t, x);
      out.at(y, x) = acc;
    }
  }
  return out;
}

}  // namespace

std::vector<double> psnr_per_band(const HsiCube &pred, const HsiCube &ref, double peak) {
  check_same_geometry(pred, ref);
  check_peak(peak);
  std::vector<double> out(pred.bands);
  const int n = pred.pixels();
  for (int l = 0; l < pred.bands; ++l) {
    const double *p = pred.y.row(l);
    const double *r = ref.y.row(l);
    double se = 0.0;
    for (int i = 0; i < n; ++i) {
      const double d = p[i] - r[i];
      se += d * d;
    }
    const double mse = se / n;
    out[l] = mse == 0.0 ? std::numeric_limits<double>::infinity()
                        : 10.0 * std::log10(peak * peak / mse);
  }
  return out;
}

std::vector<double> ssim_per_band(const HsiCube &pred, const HsiCube &ref, double peak) {
  check_same_geometry(pred, ref);
  check_peak(peak);
  if (pred.height < kWindow || pred.width < kWindow)
    throw std::invalid_argument("ssim: band " + std::to_string(pred.height) + "x" +
                                std::to_string(pred.width) + " smaller than the " +
                                std::to_string(kWindow) + "x" + std::to_string(kWindow) + " window");

  const double c1 = (0.01 * peak) * (0.01 * peak);
  const double c2 = (0.03 * peak) * (0.03 * peak);
  const auto g = gaussian_window();
  const int n = pred.pixels();

  std::vector<double> out(pred.bands);
  std::vector<double> xx(n), yy(n), xy(n);
  for (int l = 0; l < pred.bands; ++l) {
    const double *x = pred.y.row(l);
    const double *y = ref.y.row(l);
    for (int i = 0; i < n; ++i) {
      xx[i] = x[i] * x[i];
      yy[i] = y[i] * y[i];
      xy[i] = x[i] * y[i];
    }
    const Matrix mx = filter_valid(x, pred.height, pred.width, g);
    const Matrix my = filter_valid(y, pred.height, pred.width, g);
    const Matrix mxx = filter_valid(xx.data(), pred.height, pred.width, g);
    const Matrix myy = filter_valid(yy.data(), pred.height, pred.width, g);
    const Matrix mxy = filter_valid(xy.data(), pred.height, pred.width, g);

    double sum = 0.0;
    for (size_t i = 0; i < mx.size(); ++i) {
      const double ux = mx.a[i], uy = my.a[i];
      const double vx = mxx.a[i] - ux * ux;
      const double vy = myy.a[i] - uy * uy;
      const double cov = mxy.a[i] - ux * uy;
      sum += (2.0 * ux * uy + c1) * (2.0 * cov + c2) /
             ((ux * ux + uy * uy + c1) * (vx + vy + c2));
    }
    out[l] = sum / static_cast<double>(mx.size());
  }
  return out;
}

double sam_degrees(const HsiCube &pred, const HsiCube &ref) {
  check_same_geometry(pred, ref);
  if (pred.bands < 2) throw std::invalid_argument("sam: needs at least 2 bands");
  const int n = pred.pixels();
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    double dot = 0.0, pp = 0.0, rr = 0.0;
    for (int l = 0; l < pred.bands; ++l) {
      const double p = pred.y.at(l, i);
      const double r = ref.y.at(l, i);
      dot += p * r;
      pp += p * p;
      rr += r * r;
    }
    const double denom = std::sqrt(pp) * std::sqrt(rr);
    if (denom < 1e-12) continue;  // degenerate spectrum counts as zero angle
    sum += std::acos(std::clamp(dot / denom, -1.0, 1.0));
  }
  return sum / n * (180.0 / M_PI);
}

MetricReport evaluate(const HsiCube &pred, const HsiCube &ref, double peak) {
  if (peak <= 0.0) {
    peak = *std::max_element(ref.y.a.begin(), ref.y.a.end());
    if (!(peak > 0.0))
      throw std::invalid_argument("metrics: reference maximum is not positive; pass an explicit peak");
  }
  MetricReport rep;
  rep.peak = peak;
  rep.psnr_per_band = psnr_per_band(pred, ref, peak);
  rep.ssim_per_band = ssim_per_band(pred, ref, peak);
  rep.sam_degrees = sam_degrees(pred, ref);

  double psnr_sum = 0.0;
  int finite = 0;
  for (int l = 0; l < pred.bands; ++l) {
    if (std::isinf(rep.psnr_per_band[l])) {
      rep.psnr_infinite_bands.push_back(l);
    } else {
      psnr_sum += rep.psnr_per_band[l];
      ++finite;
    }
  }
  rep.psnr = finite > 0 ? psnr_sum / finite : std::numeric_limits<double>::infinity();

  double ssim_sum = 0.0;
  for (double v : rep.ssim_per_band) ssim_sum += v;
  rep.ssim = ssim_sum / pred.bands;
  return rep;
}

namespace {

nlohmann::json json_number(double v) {
  if (std::isinf(v)) return v > 0 ? "+inf" : "-inf";
  return v;
}

}  // namespace

nlohmann::json metric_report_to_json(const MetricReport &report) {
  nlohmann::json per_band_psnr = nlohmann::json::array();
  for (double v : report.psnr_per_band) per_band_psnr.push_back(json_number(v));
  return nlohmann::json{{"psnr", json_number(report.psnr)},
                        {"ssim", report.ssim},
                        {"sam", report.sam_degrees},
                        {"psnr_per_band", per_band_psnr},
                        {"ssim_per_band", report.ssim_per_band},
                        {"psnr_infinite_bands", report.psnr_infinite_bands},
                        {"peak", report.peak}};
}

}  // namespace eigensr
