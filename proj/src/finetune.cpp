#include "eigensr/finetune.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "eigensr/resample.hpp"
#include "eigensr/wire.hpp"

namespace eigensr {
namespace {

constexpr char kStateMagic[5] = {'E', 'S', 'R', 'T', '1'};

Image project_channel(const Matrix &y, const SpectralDecomposition &dec, int channel, int height,
                      int width) {
  Image img(height, width);
  for (int l = 0; l < y.rows; ++l) {
    const double u = dec.basis.at(l, channel);
    const double *row = y.row(l);
    for (int n = 0; n < y.cols; ++n) img.px[n] += u * row[n];
  }
  return img;
}

Image crop(const Image &img, int y0, int x0, int size) {
  Image out(size, size);
  for (int y = 0; y < size; ++y)
    std::copy(img.row(y0 + y) + x0, img.row(y0 + y) + x0 + size, out.row(y));
  return out;
}

}  // namespace

void TrainConfig::validate() const {
  if (scale < 2) throw std::invalid_argument("train config: scale must be >= 2");
  if (!(tau > 0.0 && tau <= 1.0)) throw std::invalid_argument("train config: tau must be in (0, 1]");
  if (epochs < 0) throw std::invalid_argument("train config: epochs must be >= 0");
  if (batch_size < 1) throw std::invalid_argument("train config: batch_size must be >= 1");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("train config: learning_rate must be > 0");
  if (patch < 1) throw std::invalid_argument("train config: patch must be >= 1");
  if (checkpoint_every < 1) throw std::invalid_argument("train config: checkpoint_every must be >= 1");
}

TrainConfig train_config_from_json(const nlohmann::json &j) {
  TrainConfig cfg;
  cfg.scale = j.value("scale", cfg.scale);
  cfg.tau = j.value("tau", cfg.tau);
  cfg.epochs = j.value("epochs", cfg.epochs);
  cfg.batch_size = j.value("batch_size", cfg.batch_size);
  cfg.learning_rate = j.value("learning_rate", cfg.learning_rate);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.patch = j.value("patch", cfg.patch);
  cfg.checkpoint_every = j.value("checkpoint_every", cfg.checkpoint_every);
  cfg.validate();
  return cfg;
}

nlohmann::json train_config_to_json(const TrainConfig &cfg) {
  return nlohmann::json{{"scale", cfg.scale},
                        {"tau", cfg.tau},
                        {"epochs", cfg.epochs},
                        {"batch_size", cfg.batch_size},
                        {"learning_rate", cfg.learning_rate},
                        {"seed", cfg.seed},
                        {"patch", cfg.patch},
                        {"checkpoint_every", cfg.checkpoint_every}};
}

std::vector<TrainingTriplet> build_triplets(const std::vector<HsiCube> &cubes, int scale, double tau) {
  std::vector<TrainingTriplet> out;
  out.reserve(cubes.size());
  for (const HsiCube &hr : cubes) {
    TrainingTriplet t;
    t.lr = downsample_cube(hr, scale);
    t.dec = spectral_svd(matrix_view(hr));
    t.cutoff = channel_cutoff(t.dec.singular_values, tau);
    t.hr = hr;
    out.push_back(std::move(t));
  }
  return out;
}

std::pair<Image, Image> sample_pair(const TrainingTriplet &triplet, Rng &rng) {
  const int c = sample_channel(triplet.cutoff, rng);
  Image lr = project_channel(matrix_view(triplet.lr), triplet.dec, c, triplet.lr.height,
                             triplet.lr.width);
  Image hr = project_channel(matrix_view(triplet.hr), triplet.dec, c, triplet.hr.height,
                             triplet.hr.width);
  return {std::move(lr), std::move(hr)};
}

double train_epoch(TrainerState &state, const std::vector<TrainingTriplet> &triplets,
                   const TrainConfig &cfg, Rng &rng) {
  cfg.validate();
  if (state.model.kind != SrKind::tinynet)
    throw std::invalid_argument("train_epoch: model is not trainable");
  if (triplets.empty()) throw std::invalid_argument("train_epoch: no training data");
  for (const TrainingTriplet &t : triplets)
    if (cfg.patch > t.lr.height || cfg.patch > t.lr.width)
      throw std::invalid_argument("train_epoch: patch size " + std::to_string(cfg.patch) +
                                  " exceeds LR image " + std::to_string(t.lr.height) + "x" +
                                  std::to_string(t.lr.width));

  std::vector<int> order(triplets.size());
  std::iota(order.begin(), order.end(), 0);
  for (int i = static_cast<int>(order.size()) - 1; i > 0; --i)
    std::swap(order[i], order[rng.next_below(i + 1)]);

  auto weights = flatten_params(state.model);
  double loss_sum = 0.0;
  size_t pos = 0;
  while (pos < order.size()) {
    const size_t batch_end = std::min(order.size(), pos + static_cast<size_t>(cfg.batch_size));
    const int batch_n = static_cast<int>(batch_end - pos);
    std::vector<double> grad_acc(weights.size(), 0.0);
    for (; pos < batch_end; ++pos) {
      const TrainingTriplet &t = triplets[order[pos]];
      auto [lr_img, hr_img] = sample_pair(t, rng);
      const int y0 = rng.next_below(lr_img.height - cfg.patch + 1);
      const int x0 = rng.next_below(lr_img.width - cfg.patch + 1);
      const Image lr_patch = crop(lr_img, y0, x0, cfg.patch);
      const Image hr_patch = crop(hr_img, y0 * cfg.scale, x0 * cfg.scale, cfg.patch * cfg.scale);

      BackwardResult res = backward(state.model, lr_patch, hr_patch);
      loss_sum += res.loss;
      const auto flat = flatten_grads(res.grads);
      for (size_t i = 0; i < flat.size(); ++i) grad_acc[i] += flat[i];
    }
    for (double &g : grad_acc) g /= batch_n;
    adam_step(weights, grad_acc, state.adam, cfg.learning_rate);
    unflatten_params(state.model, weights);
  }
  return loss_sum / static_cast<double>(order.size());
}

FinetuneResult finetune(const SrOperator &init, const std::vector<HsiCube> &cubes,
                        const TrainConfig &cfg, const std::optional<std::filesystem::path> &out_dir,
                        const TrainerState *resume) {
  cfg.validate();
  TrainerState state;
  if (resume) {
    state = *resume;
  } else {
    state.model = init;
    state.next_epoch = 0;
  }

  std::vector<TrainingTriplet> triplets;
  if (cfg.epochs > state.next_epoch) triplets = build_triplets(cubes, cfg.scale, cfg.tau);

  FinetuneResult result;
  if (out_dir) std::filesystem::create_directories(*out_dir);

  for (int epoch = state.next_epoch; epoch < cfg.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    Rng rng = rng_for_epoch(cfg.seed, epoch);
    const double loss = train_epoch(state, triplets, cfg, rng);
    state.next_epoch = epoch + 1;
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    result.log.push_back({epoch, loss, secs});

    if (out_dir && ((epoch + 1) % cfg.checkpoint_every == 0 || epoch + 1 == cfg.epochs)) {
      char name[64];
      std::snprintf(name, sizeof(name), "model_epoch_%04d.esrw", epoch + 1);
      save_weights(state.model, *out_dir / name);
      std::snprintf(name, sizeof(name), "state_epoch_%04d.esrt", epoch + 1);
      save_train_state(state, *out_dir / name);
    }
  }

  if (out_dir) {
    save_weights(state.model, *out_dir / "model_final.esrw");
    write_train_log_csv(result.log, *out_dir / "train_log.csv");
  }
  result.model = std::move(state.model);
  return result;
}

void save_train_state(const TrainerState &state, const std::filesystem::path &path) {
  if (state.model.kind != SrKind::tinynet)
    throw std::invalid_argument("save_train_state: model is not trainable");
  const auto weights = flatten_params(state.model);
  AdamState adam = state.adam;
  if (adam.m.empty()) {
    adam.m.assign(weights.size(), 0.0);
    adam.v.assign(weights.size(), 0.0);
  }

  std::vector<uint8_t> blob;
  blob.reserve((weights.size() * 3) * 8);
  for (const std::vector<double> *v : {&weights, &std::as_const(adam).m, &std::as_const(adam).v})
    for (double x : *v) wire::put_f64(blob, x);

  nlohmann::json manifest = {{"next_epoch", state.next_epoch},
                             {"adam_t", adam.t},
                             {"scale", state.model.scale},
                             {"seed", state.model.init_seed},
                             {"param_count", weights.size()},
                             {"blob_sha256", wire::sha256_hex(blob.data(), blob.size())}};
  const std::string mstr = manifest.dump();

  std::vector<uint8_t> out;
  out.insert(out.end(), kStateMagic, kStateMagic + 5);
  wire::put_u32(out, static_cast<uint32_t>(mstr.size()));
  out.insert(out.end(), mstr.begin(), mstr.end());
  out.insert(out.end(), blob.begin(), blob.end());

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw FormatError("cannot open " + path.string() + " for writing");
  f.write(reinterpret_cast<const char *>(out.data()), static_cast<std::streamsize>(out.size()));
  if (!f) throw FormatError("failed writing " + path.string());
}

TrainerState load_train_state(const std::filesystem::path &path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw FormatError("cannot open " + path.string());
  std::vector<uint8_t> buf((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  const std::string name = path.string();

  if (buf.size() < 9 || !std::equal(kStateMagic, kStateMagic + 5, buf.data()))
    throw FormatError(name + ": state version mismatch (expected ESRT1 magic)");
  const uint32_t mlen = wire::get_u32(buf.data() + 5);
  if (buf.size() < 9 + static_cast<size_t>(mlen)) throw FormatError(name + ": truncated manifest");
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(buf.begin() + 9, buf.begin() + 9 + mlen);
  } catch (const nlohmann::json::exception &e) {
    throw FormatError(name + ": malformed manifest: " + e.what());
  }

  const size_t count = manifest.at("param_count").get<size_t>();
  if (count != tinynet_param_count()) throw FormatError(name + ": architecture mismatch");
  const size_t blob_len = buf.size() - 9 - mlen;
  if (blob_len != count * 3 * 8) throw FormatError(name + ": blob length mismatch");
  if (wire::sha256_hex(buf.data() + 9 + mlen, blob_len) !=
      manifest.at("blob_sha256").get<std::string>())
    throw FormatError(name + ": checksum failure");

  TrainerState state;
  state.model =
      make_tinynet_sr(manifest.at("scale").get<int>(), manifest.at("seed").get<uint64_t>());
  state.next_epoch = manifest.at("next_epoch").get<int>();
  state.adam.t = manifest.at("adam_t").get<long>();

  const uint8_t *p = buf.data() + 9 + mlen;
  std::vector<double> weights(count);
  state.adam.m.resize(count);
  state.adam.v.resize(count);
  for (size_t i = 0; i < count; ++i) weights[i] = wire::get_f64(p + 8 * i);
  for (size_t i = 0; i < count; ++i) state.adam.m[i] = wire::get_f64(p + 8 * (count + i));
  for (size_t i = 0; i < count; ++i) state.adam.v[i] = wire::get_f64(p + 8 * (2 * count + i));
  unflatten_params(state.model, weights);
  return state;
}

void write_train_log_csv(const std::vector<TrainLogRow> &log, const std::filesystem::path &path) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw FormatError("cannot open " + path.string() + " for writing");
  f << "epoch,mean_loss,wall_time\n";
  for (const TrainLogRow &row : log) {
    char line[96];
    std::snprintf(line, sizeof(line), "%d,%.17g,%.6f\n", row.epoch, row.mean_loss, row.wall_seconds);
    f << line;
  }
}

}  // namespace eigensr
