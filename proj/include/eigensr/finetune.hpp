#ifndef EIGENSR_FINETUNE_HPP_
#define EIGENSR_FINETUNE_HPP_

#include <filesystem>
#include <optional>
#include <utility>
#include <vector>

#include "eigensr/cube.hpp"
#include "eigensr/rng.hpp"
#include "eigensr/speclin.hpp"
#include "eigensr/sr_model.hpp"
#include "json.hpp"

namespace eigensr {

/// One training item: an HR cube, its bicubic-downsampled LR twin, the HR
/// cube's spectral decomposition, and the channel cutoff for the configured
/// cumulative-energy threshold.
struct TrainingTriplet {
  HsiCube hr;
  HsiCube lr;
  SpectralDecomposition dec;
  int cutoff = 1;  // p, channels eligible for sampling
};

struct TrainConfig {
  int scale = 2;
  double tau = 0.97;
  int epochs = 200;
  int batch_size = 64;
  double learning_rate = 0.001;
  uint64_t seed = 0;
  int patch = 24;  // LR crop size; HR crops are patch * scale
  int checkpoint_every = 50;

  void validate() const;
};

TrainConfig train_config_from_json(const nlohmann::json &j);
nlohmann::json train_config_to_json(const TrainConfig &cfg);

/// Downsamples and decomposes each HR cube once. Cube dimensions must be
/// divisible by cfg.scale.
std::vector<TrainingTriplet> build_triplets(const std::vector<HsiCube> &cubes, int scale, double tau);

/// Draws a channel c uniformly from the triplet's eligible range and projects
/// both resolutions with the same HR basis column: (coefficient image of lr,
/// coefficient image of hr).
std::pair<Image, Image> sample_pair(const TrainingTriplet &triplet, Rng &rng);

/// Mutable training state: model weights plus optimizer state.
struct TrainerState {
  SrOperator model;
  AdamState adam;
  int next_epoch = 0;
};

/// One pass over all triplets in shuffled order, batched; one Adam update
/// per batch on the mean gradient. Returns the mean sample loss.
double train_epoch(TrainerState &state, const std::vector<TrainingTriplet> &triplets,
                   const TrainConfig &cfg, Rng &rng);

struct TrainLogRow {
  int epoch = 0;
  double mean_loss = 0.0;
  double wall_seconds = 0.0;
};

struct FinetuneResult {
  SrOperator model;
  std::vector<TrainLogRow> log;
};

/// Full fine-tuning loop. When out_dir is set, writes model checkpoints and
/// resume states at the configured cadence, the final model, and a
/// "epoch,mean_loss,wall_time" CSV log. Deterministic given (seed, data,
/// config); a run resumed from a saved state matches the uninterrupted one.
FinetuneResult finetune(const SrOperator &init, const std::vector<HsiCube> &cubes,
                        const TrainConfig &cfg,
                        const std::optional<std::filesystem::path> &out_dir = std::nullopt,
                        const TrainerState *resume = nullptr);

/// Resume-state I/O: "ESRT1" magic, JSON manifest, float64 blob holding
/// weights and both Adam moment vectors.
void save_train_state(const TrainerState &state, const std::filesystem::path &path);
TrainerState load_train_state(const std::filesystem::path &path);

void write_train_log_csv(const std::vector<TrainLogRow> &log, const std::filesystem::path &path);

}  // namespace eigensr

#endif
