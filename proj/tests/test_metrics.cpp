#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "eigensr/metrics.hpp"
#include "test_util.hpp"

using namespace eigensr;

namespace {

// Naive double-loop oracles, independent of the library implementations.

double oracle_psnr_band(const HsiCube &pred, const HsiCube &ref, int band, double peak) {
  double se = 0.0;
  for (int y = 0; y < pred.height; ++y)
    for (int x = 0; x < pred.width; ++x) {
      const double d = pred.at(band, y, x) - ref.at(band, y, x);
      se += d * d;
    }
  const double mse = se / (pred.height * pred.width);
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(peak * peak / mse);
}

double oracle_ssim_band(const HsiCube &pred, const HsiCube &ref, int band, double peak) {
  const int win = 11;
  const double sigma = 1.5;
  double w[11][11];
  double wsum = 0.0;
  for (int i = 0; i < win; ++i)
    for (int j = 0; j < win; ++j) {
      const double dy = i - 5, dx = j - 5;
      w[i][j] = std::exp(-(dy * dy + dx * dx) / (2 * sigma * sigma));
      wsum += w[i][j];
    }
  for (int i = 0; i < win; ++i)
    for (int j = 0; j < win; ++j) w[i][j] /= wsum;

  const double c1 = (0.01 * peak) * (0.01 * peak);
  const double c2 = (0.03 * peak) * (0.03 * peak);
  double total = 0.0;
  int count = 0;
  for (int y0 = 0; y0 + win <= pred.height; ++y0)
    for (int x0 = 0; x0 + win <= pred.width; ++x0) {
      double mx = 0, my = 0, mxx = 0, myy = 0, mxy = 0;
      for (int i = 0; i < win; ++i)
        for (int j = 0; j < win; ++j) {
          const double a = pred.at(band, y0 + i, x0 + j);
          const double b = ref.at(band, y0 + i, x0 + j);
          mx += w[i][j] * a;
          my += w[i][j] * b;
          mxx += w[i][j] * a * a;
          myy += w[i][j] * b * b;
          mxy += w[i][j] * a * b;
        }
      const double vx = mxx - mx * mx, vy = myy - my * my, cov = mxy - mx * my;
      total += (2 * mx * my + c1) * (2 * cov + c2) / ((mx * mx + my * my + c1) * (vx + vy + c2));
      ++count;
    }
  return total / count;
}

double oracle_sam(const HsiCube &pred, const HsiCube &ref) {
  double total = 0.0;
  for (int y = 0; y < pred.height; ++y)
    for (int x = 0; x < pred.width; ++x) {
      double dot = 0, pp = 0, rr = 0;
      for (int l = 0; l < pred.bands; ++l) {
        dot += pred.at(l, y, x) * ref.at(l, y, x);
        pp += pred.at(l, y, x) * pred.at(l, y, x);
        rr += ref.at(l, y, x) * ref.at(l, y, x);
      }
      const double denom = std::sqrt(pp) * std::sqrt(rr);
      if (denom >= 1e-12) total += std::acos(std::clamp(dot / denom, -1.0, 1.0));
    }
  return total / (pred.height * pred.width) * 180.0 / M_PI;
}

}  // namespace

TEST_CASE("identical cubes give the identity metric values") {
  eigensr::Rng rng(41);
  const HsiCube cube = testutil::random_cube(4, 12, 12, rng, 0.0, 1.0);
  const MetricReport rep = evaluate(cube, cube);
  CHECK(std::isinf(rep.psnr));
  CHECK(rep.psnr_infinite_bands.size() == 4);
  CHECK(rep.ssim == 1.0);
  CHECK(rep.sam_degrees == 0.0);

  const auto j = metric_report_to_json(rep);
  CHECK(j["psnr"] == "+inf");
  CHECK(j["ssim"] == 1.0);
  CHECK(j["sam"] == 0.0);
}

TEST_CASE("constant offset PSNR is forced by the formula") {
  Matrix a(2, 64), b(2, 64);
  for (int n = 0; n < 64; ++n) {
    a.at(0, n) = 0.0;
    a.at(1, n) = 0.0;
    b.at(0, n) = 0.1;
    b.at(1, n) = 0.1;
  }
  const HsiCube pred = cube_from_matrix(a, 8, 8);
  const HsiCube ref = cube_from_matrix(b, 8, 8);
  const auto psnr = psnr_per_band(pred, ref, 1.0);
  CHECK(psnr[0] == doctest::Approx(20.0).epsilon(1e-12));
  CHECK(psnr[1] == doctest::Approx(20.0).epsilon(1e-12));
}

TEST_CASE("psnr matches the brute-force oracle") {
  eigensr::Rng rng(42);
  const HsiCube pred = testutil::random_cube(4, 8, 8, rng, 0.0, 1.0);
  const HsiCube ref = testutil::random_cube(4, 8, 8, rng, 0.0, 1.0);
  const auto psnr = psnr_per_band(pred, ref, 1.0);
  for (int l = 0; l < 4; ++l)
    CHECK(psnr[l] == doctest::Approx(oracle_psnr_band(pred, ref, l, 1.0)).epsilon(1e-9));
}

TEST_CASE("ssim matches the brute-force oracle") {
  eigensr::Rng rng(43);
  const HsiCube pred = testutil::random_cube(3, 16, 16, rng, 0.0, 1.0);
  const HsiCube ref = testutil::random_cube(3, 16, 16, rng, 0.0, 1.0);
  const auto ssim = ssim_per_band(pred, ref, 1.0);
  for (int l = 0; l < 3; ++l)
    CHECK(ssim[l] == doctest::Approx(oracle_ssim_band(pred, ref, l, 1.0)).epsilon(1e-9));
}

TEST_CASE("negated noise scores below one") {
  eigensr::Rng rng(44);
  HsiCube ref = testutil::random_cube(2, 16, 16, rng, -0.5, 0.5);
  HsiCube pred = ref;
  for (double &v : pred.y.a) v = -v;
  const auto ssim = ssim_per_band(pred, ref, 1.0);
  for (double v : ssim) CHECK(v < 1.0);
}

TEST_CASE("sam worked examples") {
  SUBCASE("orthogonal spectra give 90 degrees") {
    Matrix a(2, 16), b(2, 16);
    for (int n = 0; n < 16; ++n) {
      a.at(0, n) = 1.0;
      b.at(1, n) = 1.0;
    }
    const HsiCube pred = cube_from_matrix(a, 4, 4);
    const HsiCube ref = cube_from_matrix(b, 4, 4);
    CHECK(sam_degrees(pred, ref) == doctest::Approx(90.0).epsilon(1e-12));
  }
  SUBCASE("scaling either argument changes nothing") {
    eigensr::Rng rng(45);
    const HsiCube ref = testutil::random_cube(4, 8, 8, rng, 0.1, 1.0);
    HsiCube pred = ref;
    for (double &v : pred.y.a) v *= 2.0;
    CHECK(sam_degrees(pred, ref) == doctest::Approx(0.0).scale(1).epsilon(1e-7));

    const HsiCube other = testutil::random_cube(4, 8, 8, rng, 0.1, 1.0);
    const double base = sam_degrees(other, ref);
    HsiCube scaled = other;
    for (double &v : scaled.y.a) v *= 3.5;
    CHECK(sam_degrees(scaled, ref) == doctest::Approx(base).epsilon(1e-10));
  }
}

TEST_CASE("sam matches the brute-force oracle") {
  eigensr::Rng rng(46);
  const HsiCube pred = testutil::random_cube(4, 8, 8, rng, 0.0, 1.0);
  const HsiCube ref = testutil::random_cube(4, 8, 8, rng, 0.0, 1.0);
  CHECK(sam_degrees(pred, ref) == doctest::Approx(oracle_sam(pred, ref)).epsilon(1e-9));
}

TEST_CASE("psnr decreases as noise grows") {
  eigensr::Rng rng(47);
  const HsiCube ref = testutil::random_cube(3, 16, 16, rng, 0.0, 1.0);
  double prev = std::numeric_limits<double>::infinity();
  for (double amp : {0.01, 0.02, 0.04}) {
    HsiCube noisy = ref;
    eigensr::Rng noise(48);
    for (double &v : noisy.y.a) v += amp * (noise.next_unit() - 0.5);
    const MetricReport rep = evaluate(noisy, ref, 1.0);
    CHECK(rep.psnr < prev);
    prev = rep.psnr;
  }
}

TEST_CASE("metric validation errors") {
  eigensr::Rng rng(49);
  const HsiCube a = testutil::random_cube(3, 16, 16, rng);
  const HsiCube b = testutil::random_cube(3, 16, 8, rng);
  CHECK_THROWS_AS(psnr_per_band(a, b, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(psnr_per_band(a, a, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(ssim_per_band(testutil::random_cube(2, 8, 8, rng),
                                testutil::random_cube(2, 8, 8, rng), 1.0),
                  std::invalid_argument);
  const HsiCube one_band = testutil::random_cube(1, 4, 4, rng);
  CHECK_THROWS_AS(sam_degrees(one_band, one_band), std::invalid_argument);
}

TEST_CASE("mixed zero-error bands are excluded from the mean and flagged") {
  eigensr::Rng rng(50);
  HsiCube ref = testutil::random_cube(3, 8, 8, rng, 0.0, 1.0);
  HsiCube pred = ref;
  for (int n = 0; n < 64; ++n) pred.y.at(2, n) += 0.01;
  const auto psnr = psnr_per_band(pred, ref, 1.0);
  CHECK(std::isinf(psnr[0]));
  CHECK(std::isinf(psnr[1]));
  CHECK(std::isfinite(psnr[2]));

  MetricReport rep;
  rep.psnr_per_band = psnr;
  const MetricReport full = evaluate(pred, ref, 1.0);
  CHECK(full.psnr == doctest::Approx(psnr[2]));
  CHECK(full.psnr_infinite_bands == std::vector<int>{0, 1});
}
