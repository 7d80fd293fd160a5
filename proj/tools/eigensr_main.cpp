// eigensr: batch toolkit for spectral-decomposition single-image
// super-resolution of hyperspectral cubes.
//
//   convert    .hsc <-> NPY container conversion
//   decompose  spectral basis, singular values, coefficient images
//   train      fine-tune the single-channel operator on coefficient images
//   infer      single-pass or iterative super-resolution
//   eval       PSNR / SSIM / spectral-angle report against a reference
//   bench      call-count and wall-time comparison vs band-by-band

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "eigensr/bench.hpp"
#include "eigensr/cube.hpp"
#include "eigensr/finetune.hpp"
#include "eigensr/inference.hpp"
#include "eigensr/metrics.hpp"
#include "eigensr/parallel.hpp"
#include "eigensr/resample.hpp"
#include "eigensr/speclin.hpp"
#include "json.hpp"

namespace {

using namespace eigensr;

constexpr int kExitComputation = 1;
constexpr int kExitUsage = 2;

bool is_npy(const std::filesystem::path &path) {
  std::ifstream f(path, std::ios::binary);
  char magic[6] = {};
  f.read(magic, 6);
  return f && magic[0] == '\x93' && std::string(magic + 1, 5) == "NUMPY";
}

int cmd_convert(const std::string &in, const std::string &out) {
  const HsiCube cube = read_cube(in);
  if (is_npy(in))
    write_cube(cube, out);
  else
    write_cube_npy(cube, out);
  return 0;
}

int cmd_decompose(const std::string &in, const std::string &out_dir, int rank, double tau) {
  const HsiCube cube = read_cube(in);
  if (rank > cube.bands || rank < 0)
    throw CLI::ValidationError("--rank", "rank " + std::to_string(rank) + " out of range [1, " +
                                             std::to_string(cube.bands) + "]");
  if (rank == 0) rank = (cube.bands + 1) / 2;
  std::filesystem::create_directories(out_dir);
  const std::filesystem::path dir(out_dir);

  const SpectralDecomposition dec = spectral_svd(matrix_view(cube));
  const int p = channel_cutoff(dec.singular_values, tau);

  {
    std::ofstream f(dir / "sigma.csv", std::ios::trunc);
    f << "index,sigma\n";
    for (int i = 0; i < dec.bands(); ++i) {
      char line[64];
      std::snprintf(line, sizeof(line), "%d,%.17g\n", i + 1, dec.singular_values[i]);
      f << line;
    }
  }
  // basis stored as a single-band bands x bands image
  write_cube(cube_from_matrix(Matrix{dec.basis}, dec.bands(), dec.bands()), dir / "basis.hsc");

  const EigenimageStack stack = project(matrix_view(cube), cube.height, cube.width, dec, rank);
  for (int i = 0; i < rank; ++i) {
    Matrix ch(1, stack.pixels());
    std::copy(stack.channel(i), stack.channel(i) + stack.pixels(), ch.row(0));
    char name[48];
    std::snprintf(name, sizeof(name), "eigenimage_%03d.hsc", i + 1);
    write_cube(cube_from_matrix(std::move(ch), cube.height, cube.width), dir / name);
  }

  nlohmann::json cutoff = {{"tau", tau}, {"p", p}, {"bands", cube.bands}};
  std::ofstream(dir / "cutoff.json", std::ios::trunc) << cutoff.dump(2) << "\n";
  return 0;
}

struct TrainCli {
  std::string config_path;
  std::vector<std::string> data;
  std::string out_dir = "train_out";
  std::string init_path;    // optional starting checkpoint
  std::string resume_path;  // optional training state
  // flag overrides; negative/zero means "not set" where the field is positive
  int scale = 0, epochs = -1, batch = 0, patch = 0, checkpoint_every = 0;
  double tau = 0.0, lr = 0.0;
  int64_t seed = -1;
};

int cmd_train(const TrainCli &cli) {
  TrainConfig cfg;
  if (!cli.config_path.empty()) {
    std::ifstream f(cli.config_path);
    if (!f) throw CLI::ValidationError("--config", "cannot open " + cli.config_path);
    nlohmann::json j;
    f >> j;
    cfg = train_config_from_json(j);
  }
  if (cli.scale > 0) cfg.scale = cli.scale;
  if (cli.epochs >= 0) cfg.epochs = cli.epochs;
  if (cli.batch > 0) cfg.batch_size = cli.batch;
  if (cli.patch > 0) cfg.patch = cli.patch;
  if (cli.checkpoint_every > 0) cfg.checkpoint_every = cli.checkpoint_every;
  if (cli.tau > 0.0) cfg.tau = cli.tau;
  if (cli.lr > 0.0) cfg.learning_rate = cli.lr;
  if (cli.seed >= 0) cfg.seed = static_cast<uint64_t>(cli.seed);
  cfg.validate();

  std::vector<HsiCube> cubes;
  cubes.reserve(cli.data.size());
  for (const std::string &path : cli.data) cubes.push_back(read_cube(path));

  SrOperator init = cli.init_path.empty() ? make_tinynet_sr(cfg.scale, cfg.seed)
                                          : load_weights(cli.init_path);
  if (init.kind != SrKind::tinynet)
    throw std::invalid_argument("train: initial checkpoint is not a trainable operator");
  if (init.scale != cfg.scale)
    throw std::invalid_argument("train: checkpoint scale " + std::to_string(init.scale) +
                                " does not match configured scale " + std::to_string(cfg.scale));

  std::optional<TrainerState> resume;
  if (!cli.resume_path.empty()) resume = load_train_state(cli.resume_path);

  const FinetuneResult res = finetune(init, cubes, cfg, std::filesystem::path(cli.out_dir),
                                      resume ? &*resume : nullptr);
  std::printf("trained %zu epochs; final loss %.6g; model at %s/model_final.esrw\n",
              res.log.size(), res.log.empty() ? 0.0 : res.log.back().mean_loss,
              cli.out_dir.c_str());
  return 0;
}

struct InferCli {
  std::string in, out;
  std::string model = "bicubic";
  std::string mode = "beta";
  int rank = 0, iters = 0, scale = 0, threads = 0;
  double lambda = 0.0;
};

int cmd_infer(const InferCli &cli) {
  const HsiCube lr = read_cube(cli.in);

  SrOperator op;
  if (cli.model == "bicubic") {
    if (cli.scale <= 0)
      throw CLI::ValidationError("--scale", "required with the bicubic operator");
    op = make_bicubic_sr(cli.scale);
  } else {
    op = load_weights(cli.model);
    if (cli.scale > 0 && cli.scale != op.scale)
      throw CLI::ValidationError("--scale", "checkpoint was trained for scale " +
                                                std::to_string(op.scale) + ", job asked for " +
                                                std::to_string(cli.scale));
  }

  InferenceConfig cfg;
  cfg.mode = cli.mode == "alpha" ? SrMode::alpha : SrMode::beta;
  cfg.scale = op.scale;
  cfg.rank = cli.rank;
  if (cli.iters > 0) cfg.iterations = cli.iters;
  cfg.lambda = cli.lambda;
  cfg.threads = cli.threads > 0 ? cli.threads : default_thread_count();

  const InferenceConfig resolved = cfg.resolved(lr.bands);
  const InferenceResult res = resolved.mode == SrMode::alpha
                                  ? eigensr_alpha(lr, op, resolved.rank, resolved.threads)
                                  : eigensr_beta(lr, op, resolved);
  write_cube(res.sr, cli.out);
  std::printf("wrote %s (%dx%dx%d, %ld operator calls)\n", cli.out.c_str(), res.sr.bands,
              res.sr.height, res.sr.width, res.sr_apply_calls);
  return 0;
}

int cmd_eval(const std::string &pred_path, const std::string &ref_path, const std::string &out,
             double peak) {
  const HsiCube pred = read_cube(pred_path);
  const HsiCube ref = read_cube(ref_path);
  const MetricReport rep = evaluate(pred, ref, peak);
  const nlohmann::json j = metric_report_to_json(rep);
  if (out.empty() || out == "-") {
    std::cout << j.dump(2) << "\n";
  } else {
    std::ofstream f(out, std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + out + " for writing");
    f << j.dump(2) << "\n";
  }
  return 0;
}

int cmd_bench(int bands, int rank, int iters, int size, int reps, uint64_t seed, int threads,
              const std::string &out) {
  const BenchReport rep = run_bench(bands, rank, iters, size, reps, seed, threads);
  if (out.empty() || out == "-") {
    write_bench_csv(rep, std::cout);
  } else {
    std::ofstream f(out, std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + out + " for writing");
    write_bench_csv(rep, f);
  }
  std::fprintf(stderr, "call ratio %.3f, time ratio %.3f\n", rep.call_ratio, rep.time_ratio);
  return 0;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Hyperspectral single-image super-resolution via spectral decomposition"};
  app.require_subcommand(1);

  // convert
  std::string conv_in, conv_out;
  CLI::App *convert = app.add_subcommand("convert", "Convert between .hsc and NPY");
  convert->add_option("input", conv_in, "Input cube (.hsc or .npy)")->required();
  convert->add_option("output", conv_out, "Output path")->required();

  // decompose
  std::string dec_in, dec_out = "decompose_out";
  int dec_rank = 0;
  double dec_tau = 0.97;
  CLI::App *decompose = app.add_subcommand("decompose", "Write basis, spectrum, and eigenimages");
  decompose->add_option("input", dec_in, "Input cube")->required();
  decompose->add_option("--out", dec_out, "Output directory");
  decompose->add_option("--rank", dec_rank, "Eigenimages to export (default: half the bands)");
  decompose->add_option("--tau", dec_tau, "Cumulative-energy threshold in (0, 1]");

  // train
  TrainCli tr;
  CLI::App *train = app.add_subcommand("train", "Fine-tune the trainable operator");
  train->add_option("--config", tr.config_path, "JSON config with TrainConfig fields");
  train->add_option("--data", tr.data, "Training cube paths")->required()->expected(-1);
  train->add_option("--out", tr.out_dir, "Output directory");
  train->add_option("--init", tr.init_path, "Starting checkpoint (.esrw)");
  train->add_option("--resume", tr.resume_path, "Training state to resume from (.esrt)");
  train->add_option("--scale", tr.scale, "Upscaling factor");
  train->add_option("--epochs", tr.epochs, "Training epochs");
  train->add_option("--batch", tr.batch, "Batch size");
  train->add_option("--patch", tr.patch, "LR crop size");
  train->add_option("--checkpoint-every", tr.checkpoint_every, "Checkpoint cadence");
  train->add_option("--tau", tr.tau, "Cumulative-energy threshold");
  train->add_option("--lr", tr.lr, "Learning rate");
  train->add_option("--seed", tr.seed, "RNG seed");

  // infer
  InferCli inf;
  CLI::App *infer = app.add_subcommand("infer", "Super-resolve a cube");
  infer->add_option("input", inf.in, "LR input cube")->required();
  infer->add_option("--model", inf.model, "Checkpoint path or 'bicubic'");
  infer->add_option("--out", inf.out, "Output cube path")->required();
  infer->add_option("--mode", inf.mode, "alpha | beta")
      ->check(CLI::IsMember({"alpha", "beta"}));
  infer->add_option("--rank", inf.rank, "Spectral rank (default: half the bands)");
  infer->add_option("--iters", inf.iters, "Iterations (beta mode)");
  infer->add_option("--lambda", inf.lambda, "Combination weight in (0, 1]");
  infer->add_option("--scale", inf.scale, "Upscaling factor (required for bicubic)");
  infer->add_option("--threads", inf.threads, "Worker cap (default: EIGENSR_THREADS)");

  // eval
  std::string eval_pred, eval_ref, eval_out;
  double eval_peak = 0.0;
  CLI::App *eval = app.add_subcommand("eval", "Quality report against a reference cube");
  eval->add_option("pred", eval_pred, "Predicted cube")->required();
  eval->add_option("ref", eval_ref, "Reference cube")->required();
  eval->add_option("--out", eval_out, "Report path (default: stdout)");
  eval->add_option("--peak", eval_peak, "Peak value (default: reference maximum)");

  // bench
  int b_bands = 102, b_rank = 51, b_iters = 5, b_size = 64, b_reps = 3, b_threads = 0;
  int64_t b_seed = 0;
  std::string bench_out;
  CLI::App *bench = app.add_subcommand("bench", "Call-count and wall-time comparison");
  bench->add_option("--bands", b_bands, "Synthetic cube bands");
  bench->add_option("--rank", b_rank, "Truncation rank");
  bench->add_option("--iters", b_iters, "Iterations for the reported iterative call count");
  bench->add_option("--size", b_size, "Synthetic cube height/width");
  bench->add_option("--reps", b_reps, "Timed repetitions");
  bench->add_option("--seed", b_seed, "RNG seed");
  bench->add_option("--threads", b_threads, "Worker cap");
  bench->add_option("--out", bench_out, "CSV path (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (convert->parsed()) return cmd_convert(conv_in, conv_out);
    if (decompose->parsed()) return cmd_decompose(dec_in, dec_out, dec_rank, dec_tau);
    if (train->parsed()) return cmd_train(tr);
    if (infer->parsed()) return cmd_infer(inf);
    if (eval->parsed()) return cmd_eval(eval_pred, eval_ref, eval_out, eval_peak);
    if (bench->parsed())
      return cmd_bench(b_bands, b_rank, b_iters, b_size, b_reps, static_cast<uint64_t>(b_seed),
                       b_threads > 0 ? b_threads : default_thread_count(), bench_out);
  } catch (const CLI::ValidationError &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const FormatError &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitComputation;
  }
  return 0;
}
