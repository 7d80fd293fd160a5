#ifndef EIGENSR_METRICS_HPP_
#define EIGENSR_METRICS_HPP_

#include <vector>

#include "eigensr/cube.hpp"
#include "json.hpp"

namespace eigensr {

/// Reference-based quality report. Aggregate psnr/ssim are arithmetic means
/// of per-band values; bands with zero error report +inf PSNR and are
/// excluded from the mean (flagged in `psnr_infinite_bands`). sam is the
/// mean per-pixel spectral angle in degrees.
struct MetricReport {
  double psnr = 0.0;
  double ssim = 0.0;
  double sam_degrees = 0.0;
  std::vector<double> psnr_per_band;
  std::vector<double> ssim_per_band;
  std::vector<int> psnr_infinite_bands;
  double peak = 0.0;
};

/// Per-band PSNR in dB against `ref` (+inf where the band MSE is zero).
std::vector<double> psnr_per_band(const HsiCube &pred, const HsiCube &ref, double peak);

/// Per-band single-scale SSIM: 11x11 Gaussian window (sigma 1.5), valid
/// region only. Bands must be at least 11x11.
std::vector<double> ssim_per_band(const HsiCube &pred, const HsiCube &ref, double peak);

/// Mean spectral angle over pixels, in degrees. Needs >= 2 bands. Pixels
/// whose norm product underflows contribute zero and stay in the mean.
double sam_degrees(const HsiCube &pred, const HsiCube &ref);

/// Runs all three metrics. peak <= 0 selects the reference cube's maximum.
MetricReport evaluate(const HsiCube &pred, const HsiCube &ref, double peak = 0.0);

/// JSON form; infinite PSNR values are rendered as the string "+inf".
nlohmann::json metric_report_to_json(const MetricReport &report);

}  // namespace eigensr

#endif
