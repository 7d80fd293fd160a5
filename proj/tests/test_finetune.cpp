#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <fstream>
#include <vector>

#include "doctest.h"
#include "eigensr/finetune.hpp"
#include "eigensr/resample.hpp"
#include "test_util.hpp"

using namespace eigensr;

namespace {

// Smooth synthetic cube with a controlled number of spectral components:
// random spectra mixed with coarse random maps upsampled to full size.
HsiCube smooth_cube(int bands, int rank, int height, int width, eigensr::Rng &rng) {
  Matrix mix(bands, rank);
  for (double &v : mix.a) v = rng.next_range(0.1, 1.0);
  Matrix maps(rank, height * width);
  for (int k = 0; k < rank; ++k) {
    Image coarse = testutil::random_image(height / 4, width / 4, rng, 0.0, 1.0);
    const Image fine = bicubic_upsample(coarse, 4);
    std::copy(fine.px.begin(), fine.px.end(), maps.row(k));
  }
  return cube_from_matrix(matmul(mix, maps), height, width);
}

}  // namespace

TEST_CASE("build_triplets records geometry, decomposition, and cutoff") {
  eigensr::Rng rng(101);
  std::vector<HsiCube> cubes = {smooth_cube(3, 2, 8, 8, rng), smooth_cube(3, 2, 8, 8, rng)};
  const auto triplets = build_triplets(cubes, 2, 0.97);
  REQUIRE(triplets.size() == 2);
  for (const TrainingTriplet &t : triplets) {
    CHECK(t.lr.bands == 3);
    CHECK(t.lr.height == 4);
    CHECK(t.lr.width == 4);
    CHECK(t.cutoff == channel_cutoff(t.dec.singular_values, 0.97));
    CHECK(t.cutoff >= 1);
    CHECK(t.cutoff <= 3);
  }
}

TEST_CASE("build_triplets propagates degenerate-input errors") {
  Matrix zero(3, 64);
  zero.at(0, 0) = 1.0;  // construction requires non-empty, then zero it
  HsiCube cube = cube_from_matrix(zero, 8, 8);
  cube.y.at(0, 0) = 0.0;
  CHECK_THROWS_AS(build_triplets({cube}, 2, 0.97), std::invalid_argument);

  eigensr::Rng rng(102);
  CHECK_THROWS_AS(build_triplets({testutil::random_cube(3, 9, 9, rng)}, 2, 0.97),
                  std::invalid_argument);
}

TEST_CASE("sampled pairs share one basis column across resolutions") {
  eigensr::Rng rng(103);
  std::vector<HsiCube> cubes = {smooth_cube(4, 3, 16, 16, rng)};
  const auto triplets = build_triplets(cubes, 2, 1.0);

  // the projected LR image must equal the downsampled projected HR image
  const double y_max = max_abs(matrix_view(cubes[0]));
  eigensr::Rng draw(104);
  for (int rep = 0; rep < 10; ++rep) {
    const auto [lr_img, hr_img] = sample_pair(triplets[0], draw);
    REQUIRE(lr_img.height == 8);
    REQUIRE(hr_img.height == 16);
    const Image down = bicubic_downsample(hr_img, 2);
    for (size_t i = 0; i < down.px.size(); ++i)
      CHECK(std::fabs(down.px[i] - lr_img.px[i]) <= 1e-9 * y_max);
  }
}

TEST_CASE("sample_pair with cutoff 1 always picks the leading channel") {
  eigensr::Rng rng(105);
  std::vector<HsiCube> cubes = {smooth_cube(4, 1, 8, 8, rng)};
  const auto triplets = build_triplets(cubes, 2, 0.5);
  REQUIRE(triplets[0].cutoff == 1);

  const Image lead = project(matrix_view(cubes[0]), 8, 8, triplets[0].dec, 1).channel_image(0);
  eigensr::Rng draw(106);
  for (int rep = 0; rep < 5; ++rep) {
    const auto [lr_img, hr_img] = sample_pair(triplets[0], draw);
    CHECK(hr_img.px == lead.px);
  }
}

TEST_CASE("sampling sequence is reproducible") {
  eigensr::Rng rng(107);
  std::vector<HsiCube> cubes = {smooth_cube(5, 4, 8, 8, rng)};
  const auto triplets = build_triplets(cubes, 2, 1.0);
  eigensr::Rng a(1), b(1);
  for (int rep = 0; rep < 10; ++rep) {
    const auto pa = sample_pair(triplets[0], a);
    const auto pb = sample_pair(triplets[0], b);
    CHECK(pa.first.px == pb.first.px);
    CHECK(pa.second.px == pb.second.px);
  }
}

TEST_CASE("training is deterministic given a seed") {
  eigensr::Rng rng(108);
  std::vector<HsiCube> cubes;
  for (int i = 0; i < 3; ++i) cubes.push_back(smooth_cube(4, 2, 16, 16, rng));

  TrainConfig cfg;
  cfg.scale = 2;
  cfg.epochs = 3;
  cfg.batch_size = 2;
  cfg.patch = 8;
  cfg.seed = 5;

  const SrOperator init = make_tinynet_sr(2, 99);
  const FinetuneResult a = finetune(init, cubes, cfg);
  const FinetuneResult b = finetune(init, cubes, cfg);
  CHECK(flatten_params(a.model) == flatten_params(b.model));
  REQUIRE(a.log.size() == 3);
  for (size_t i = 0; i < 3; ++i) CHECK(a.log[i].mean_loss == b.log[i].mean_loss);
}

TEST_CASE("zero epochs returns the initial model unchanged") {
  eigensr::Rng rng(109);
  std::vector<HsiCube> cubes = {smooth_cube(3, 2, 8, 8, rng)};
  TrainConfig cfg;
  cfg.epochs = 0;
  const SrOperator init = make_tinynet_sr(2, 7);
  const FinetuneResult res = finetune(init, cubes, cfg);
  CHECK(flatten_params(res.model) == flatten_params(init));
  CHECK(res.log.empty());
}

TEST_CASE("training loss decreases on an exactly degraded set") {
  eigensr::Rng rng(110);
  std::vector<HsiCube> cubes;
  for (int i = 0; i < 4; ++i) cubes.push_back(smooth_cube(4, 2, 16, 16, rng));

  TrainConfig cfg;
  cfg.scale = 2;
  cfg.epochs = 10;
  cfg.batch_size = 4;
  cfg.patch = 8;

  int improved = 0;
  for (uint64_t seed = 0; seed < 10; ++seed) {
    cfg.seed = seed;
    const FinetuneResult res = finetune(make_tinynet_sr(2, seed), cubes, cfg);
    if (res.log.back().mean_loss < res.log.front().mean_loss) ++improved;
  }
  CHECK(improved >= 9);
}

TEST_CASE("zero-image batches leave the weights untouched") {
  // all-zero cubes are rejected upstream, so build the degenerate batch by
  // hand: a triplet whose sampled eigenimages are zero away from channel 1
  eigensr::Rng rng(111);
  HsiCube cube = smooth_cube(3, 1, 8, 8, rng);
  auto triplets = build_triplets({cube}, 2, 0.5);
  REQUIRE(triplets[0].cutoff == 1);

  // force the leading eigenimage pair to zero: train on data whose LR/HR
  // images are both zero, giving zero residual at every step
  for (double &v : triplets[0].hr.y.a) v = 0.0;
  for (double &v : triplets[0].lr.y.a) v = 0.0;

  TrainerState state;
  state.model = make_tinynet_sr(2, 3);
  const auto before = flatten_params(state.model);
  TrainConfig cfg;
  cfg.patch = 4;
  cfg.batch_size = 1;
  eigensr::Rng epoch_rng(0);
  const double loss = train_epoch(state, triplets, cfg, epoch_rng);
  CHECK(loss == 0.0);
  CHECK(flatten_params(state.model) == before);
}

TEST_CASE("patch larger than the LR image is rejected") {
  eigensr::Rng rng(112);
  std::vector<HsiCube> cubes = {smooth_cube(3, 2, 8, 8, rng)};
  const auto triplets = build_triplets(cubes, 2, 0.97);
  TrainerState state;
  state.model = make_tinynet_sr(2, 1);
  TrainConfig cfg;
  cfg.patch = 5;  // LR is 4x4
  eigensr::Rng epoch_rng(0);
  CHECK_THROWS_AS(train_epoch(state, triplets, cfg, epoch_rng), std::invalid_argument);
}

TEST_CASE("resume from a saved state reproduces the uninterrupted run") {
  eigensr::Rng rng(113);
  std::vector<HsiCube> cubes;
  for (int i = 0; i < 2; ++i) cubes.push_back(smooth_cube(3, 2, 16, 16, rng));

  TrainConfig cfg;
  cfg.scale = 2;
  cfg.epochs = 6;
  cfg.batch_size = 2;
  cfg.patch = 8;
  cfg.seed = 11;
  cfg.checkpoint_every = 3;

  testutil::TempDir tmp("resume");
  const SrOperator init = make_tinynet_sr(2, 42);
  const FinetuneResult full = finetune(init, cubes, cfg, tmp.path());

  const TrainerState mid = load_train_state(tmp.path() / "state_epoch_0003.esrt");
  CHECK(mid.next_epoch == 3);
  const FinetuneResult resumed = finetune(init, cubes, cfg, std::nullopt, &mid);

  CHECK(flatten_params(resumed.model) == flatten_params(full.model));
  REQUIRE(resumed.log.size() == 3);
  for (size_t i = 0; i < 3; ++i) CHECK(resumed.log[i].mean_loss == full.log[i + 3].mean_loss);
}

TEST_CASE("finetune writes checkpoints and a log with one row per epoch") {
  eigensr::Rng rng(114);
  std::vector<HsiCube> cubes = {smooth_cube(3, 2, 16, 16, rng)};
  TrainConfig cfg;
  cfg.epochs = 4;
  cfg.checkpoint_every = 2;
  cfg.patch = 8;

  testutil::TempDir tmp("ckpts");
  const FinetuneResult res = finetune(make_tinynet_sr(2, 1), cubes, cfg, tmp.path());
  CHECK(res.log.size() == 4);
  CHECK(std::filesystem::exists(tmp.path() / "model_epoch_0002.esrw"));
  CHECK(std::filesystem::exists(tmp.path() / "model_epoch_0004.esrw"));
  CHECK(std::filesystem::exists(tmp.path() / "model_final.esrw"));
  CHECK(std::filesystem::exists(tmp.path() / "train_log.csv"));

  std::ifstream log(tmp.path() / "train_log.csv");
  std::string line;
  int rows = -1;  // header
  while (std::getline(log, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 4);

  // final checkpoint equals the returned model
  const SrOperator final_ckpt = load_weights(tmp.path() / "model_final.esrw");
  CHECK(flatten_params(final_ckpt) == flatten_params(res.model));
}

TEST_CASE("train config json round trip and validation") {
  TrainConfig cfg;
  cfg.scale = 4;
  cfg.tau = 0.99;
  cfg.epochs = 12;
  cfg.batch_size = 8;
  cfg.learning_rate = 0.01;
  cfg.seed = 77;
  cfg.patch = 16;
  cfg.checkpoint_every = 6;

  const TrainConfig back = train_config_from_json(train_config_to_json(cfg));
  CHECK(back.scale == 4);
  CHECK(back.tau == 0.99);
  CHECK(back.epochs == 12);
  CHECK(back.batch_size == 8);
  CHECK(back.learning_rate == 0.01);
  CHECK(back.seed == 77);
  CHECK(back.patch == 16);
  CHECK(back.checkpoint_every == 6);

  CHECK_THROWS_AS(train_config_from_json({{"tau", 1.5}}), std::invalid_argument);
  CHECK_THROWS_AS(train_config_from_json({{"scale", 1}}), std::invalid_argument);
}
