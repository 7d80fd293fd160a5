#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <vector>

#include "doctest.h"
#include "eigensr/resample.hpp"
#include "test_util.hpp"

using namespace eigensr;

namespace {

// Independent materialization of the separable resampling operator as a
// dense (out_h*out_w) x (in_h*in_w) matrix, built directly from the kernel
// definition: half-pixel centers, replicate boundary, normalized taps,
// kernel stretched by the factor when anti-aliasing.
double keys(double t) {
  const double x = std::fabs(t);
  if (x <= 1.0) return 1.5 * x * x * x - 2.5 * x * x + 1.0;
  if (x < 2.0) return -0.5 * x * x * x + 2.5 * x * x - 4.0 * x + 2.0;
  return 0.0;
}

std::vector<std::vector<double>> axis_matrix(int in_size, int out_size, double scale, bool aa) {
  const double stretch = aa ? scale : 1.0;
  std::vector<std::vector<double>> rows(out_size, std::vector<double>(in_size, 0.0));
  for (int n = 0; n < out_size; ++n) {
    const double center = (n + 0.5) * scale - 0.5;
    std::vector<double> w;
    std::vector<int> idx;
    double sum = 0.0;
    for (int k = static_cast<int>(std::floor(center - 2 * stretch)) - 1;
         k <= static_cast<int>(std::ceil(center + 2 * stretch)) + 1; ++k) {
      const double v = keys((center - k) / stretch) / stretch;
      if (v == 0.0) continue;
      w.push_back(v);
      idx.push_back(std::clamp(k, 0, in_size - 1));
      sum += v;
    }
    for (size_t i = 0; i < w.size(); ++i) rows[n][idx[i]] += w[i] / sum;
  }
  return rows;
}

std::vector<std::vector<double>> full_matrix(int in_h, int in_w, int out_h, int out_w, double scale,
                                             bool aa) {
  const auto my = axis_matrix(in_h, out_h, scale, aa);
  const auto mx = axis_matrix(in_w, out_w, scale, aa);
  std::vector<std::vector<double>> d(static_cast<size_t>(out_h) * out_w,
                                     std::vector<double>(static_cast<size_t>(in_h) * in_w, 0.0));
  for (int oy = 0; oy < out_h; ++oy)
    for (int ox = 0; ox < out_w; ++ox)
      for (int iy = 0; iy < in_h; ++iy)
        for (int ix = 0; ix < in_w; ++ix)
          d[static_cast<size_t>(oy) * out_w + ox][static_cast<size_t>(iy) * in_w + ix] =
              my[oy][iy] * mx[ox][ix];
  return d;
}

Image apply_dense(const std::vector<std::vector<double>> &d, const Image &img, int out_h, int out_w) {
  Image out(out_h, out_w);
  for (size_t r = 0; r < d.size(); ++r) {
    double acc = 0.0;
    for (size_t c = 0; c < d[r].size(); ++c) acc += d[r][c] * img.px[c];
    out.px[r] = acc;
  }
  return out;
}

double max_abs_diff(const Image &a, const Image &b) {
  double m = 0.0;
  for (size_t i = 0; i < a.px.size(); ++i) m = std::max(m, std::fabs(a.px[i] - b.px[i]));
  return m;
}

}  // namespace

TEST_CASE("downsample preserves constants") {
  Image img(8, 8);
  for (double &v : img.px) v = 0.5;
  const Image out = bicubic_downsample(img, 2);
  REQUIRE(out.height == 4);
  REQUIRE(out.width == 4);
  for (double v : out.px) CHECK(v == doctest::Approx(0.5).epsilon(1e-13));
}

TEST_CASE("upsample preserves constants") {
  Image img(5, 3);
  for (double &v : img.px) v = -2.25;
  for (int k : {2, 4}) {
    const Image out = bicubic_upsample(img, k);
    REQUIRE(out.height == 5 * k);
    REQUIRE(out.width == 3 * k);
    for (double v : out.px) CHECK(v == doctest::Approx(-2.25).epsilon(1e-13));
  }
}

TEST_CASE("resampling is linear") {
  eigensr::Rng rng(11);
  const Image a = testutil::random_image(8, 8, rng);
  const Image b = testutil::random_image(8, 8, rng);
  Image combo(8, 8);
  for (size_t i = 0; i < combo.px.size(); ++i) combo.px[i] = 2.0 * a.px[i] + 3.0 * b.px[i];

  SUBCASE("downsample") {
    const Image da = bicubic_downsample(a, 2);
    const Image db = bicubic_downsample(b, 2);
    const Image dc = bicubic_downsample(combo, 2);
    for (size_t i = 0; i < dc.px.size(); ++i)
      CHECK(dc.px[i] == doctest::Approx(2.0 * da.px[i] + 3.0 * db.px[i]).epsilon(1e-12));
  }
  SUBCASE("upsample") {
    const Image ua = bicubic_upsample(a, 2);
    const Image ub = bicubic_upsample(b, 2);
    const Image uc = bicubic_upsample(combo, 2);
    for (size_t i = 0; i < uc.px.size(); ++i)
      CHECK(uc.px[i] == doctest::Approx(2.0 * ua.px[i] + 3.0 * ub.px[i]).epsilon(1e-12));
  }
}

TEST_CASE("downsample matches the dense-matrix oracle") {
  eigensr::Rng rng(12);
  const Image img = testutil::random_image(16, 16, rng);
  for (int k : {2, 4}) {
    const auto d = full_matrix(16, 16, 16 / k, 16 / k, k, true);
    const Image expect = apply_dense(d, img, 16 / k, 16 / k);
    const Image got = bicubic_downsample(img, k);
    CHECK(max_abs_diff(expect, got) < 1e-12);
  }
}

TEST_CASE("upsample matches the dense-matrix oracle") {
  eigensr::Rng rng(13);
  const Image img = testutil::random_image(6, 9, rng);
  for (int k : {2, 3}) {
    const auto d = full_matrix(6, 9, 6 * k, 9 * k, 1.0 / k, false);
    const Image expect = apply_dense(d, img, 6 * k, 9 * k);
    const Image got = bicubic_upsample(img, k);
    CHECK(max_abs_diff(expect, got) < 1e-12);
  }
}

TEST_CASE("upsampled impulse reproduces the kernel taps") {
  // Output n at factor 2 sits at source coordinate n/2 - 0.25, so each output
  // phase reads the kernel at |t| in {0.25, 0.75, 1.25, 1.75}. Those four
  // values are dyadic rationals and sum to exactly 1.
  CHECK(keys(0.25) == 0.8671875);
  CHECK(keys(0.75) == 0.2265625);
  CHECK(keys(1.25) == -0.0703125);
  CHECK(keys(1.75) == -0.0234375);

  Image img(9, 9);
  img.at(4, 4) = 1.0;
  const Image up = bicubic_upsample(img, 2);

  // Separable response: up(y, x) = w(y) * w(x), where w is the interior
  // column of the 1-D operator. Outputs 8 and 9 straddle the impulse.
  const auto ax = axis_matrix(9, 18, 0.5, false);
  CHECK(ax[8][4] == doctest::Approx(0.8671875).epsilon(1e-14));
  CHECK(ax[9][4] == doctest::Approx(0.8671875).epsilon(1e-14));
  CHECK(ax[7][4] == doctest::Approx(0.2265625).epsilon(1e-14));
  CHECK(ax[10][4] == doctest::Approx(0.2265625).epsilon(1e-14));
  CHECK(ax[6][4] == doctest::Approx(-0.0703125).epsilon(1e-14));
  CHECK(ax[5][4] == doctest::Approx(-0.0234375).epsilon(1e-14));
  for (int y = 0; y < 18; ++y)
    for (int x = 0; x < 18; ++x)
      CHECK(up.at(y, x) == doctest::Approx(ax[y][4] * ax[x][4]).epsilon(1e-12));
}

TEST_CASE("operator rows sum to one") {
  for (bool aa : {true, false}) {
    const double scale = aa ? 2.0 : 0.5;
    const int out = aa ? 8 : 32;
    const auto rows = axis_matrix(16, out, scale, aa);
    for (const auto &r : rows) {
      double sum = 0.0;
      for (double v : r) sum += v;
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("downsample rejects non-divisible dimensions") {
  Image img(9, 8);
  CHECK_THROWS_AS(bicubic_downsample(img, 2), std::invalid_argument);
  CHECK_THROWS_AS(bicubic_downsample(Image(8, 8), 1), std::invalid_argument);
}

TEST_CASE("cube operators equal the per-band image operators") {
  eigensr::Rng rng(14);
  const HsiCube cube = testutil::random_cube(3, 8, 8, rng);
  const HsiCube down = downsample_cube(cube, 2);
  const HsiCube up = upsample_cube(cube, 2);
  REQUIRE(down.bands == 3);
  REQUIRE(up.bands == 3);
  for (int l = 0; l < 3; ++l) {
    Image band(8, 8);
    std::copy(cube.y.row(l), cube.y.row(l) + 64, band.px.begin());
    const Image bd = bicubic_downsample(band, 2);
    const Image bu = bicubic_upsample(band, 2);
    for (int n = 0; n < bd.height * bd.width; ++n) CHECK(down.y.at(l, n) == bd.px[n]);
    for (int n = 0; n < bu.height * bu.width; ++n) CHECK(up.y.at(l, n) == bu.px[n]);
  }
}

TEST_CASE("constant cube survives downsampling") {
  Matrix y(3, 64);
  for (int l = 0; l < 3; ++l)
    for (int n = 0; n < 64; ++n) y.at(l, n) = 1.0 + l;
  const HsiCube cube = cube_from_matrix(y, 8, 8);
  const HsiCube down = downsample_cube(cube, 2);
  for (int l = 0; l < 3; ++l)
    for (int n = 0; n < 16; ++n) CHECK(down.y.at(l, n) == doctest::Approx(1.0 + l).epsilon(1e-13));
}

TEST_CASE("down-then-up of a smooth image stays close") {
  Image img(32, 32);
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 32; ++x)
      img.at(y, x) = std::sin(2.0 * M_PI * y / 32.0) * std::cos(2.0 * M_PI * x / 32.0);
  const Image round = bicubic_downsample(bicubic_upsample(img, 2), 2);
  CHECK(max_abs_diff(img, round) < 5e-2);
}
