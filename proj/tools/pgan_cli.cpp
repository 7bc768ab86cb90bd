#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "pgan/evaluation.hpp"
#include "pgan/image_io.hpp"
#include "pgan/log.hpp"
#include "pgan/service.hpp"

namespace fs = std::filesystem;
using namespace pgan;

namespace {

int run_train(const std::string& config_path, const std::string& resume) {
  if (!fs::exists(config_path)) throw std::runtime_error("config file not found: " + config_path);
  auto config = TrainConfig::from_file(config_path);
  Trainer trainer = resume.empty() ? Trainer(config) : load_checkpoint(resume);
  if (!resume.empty()) {
    log_info("resumed " + resume + " at step " + std::to_string(trainer.step()));
  }
  const auto& cfg = trainer.config();
  fs::create_directories(cfg.output_dir);
  const auto metrics_path = fs::path(cfg.output_dir) / "metrics.csv";
  const bool fresh = !fs::exists(metrics_path) || resume.empty();
  std::ofstream metrics(metrics_path, fresh ? std::ios::trunc : std::ios::app);
  if (!metrics) throw std::runtime_error("cannot write " + metrics_path.string());
  if (fresh) metrics << metrics_csv_header() << '\n';

  const auto save = [&](const std::string& name) {
    const auto path = (fs::path(cfg.output_dir) / name).string();
    save_checkpoint(trainer, path);
    log_info("checkpoint " + path);
  };
  while (trainer.step() < cfg.total_steps) {
    const auto m = trainer.train_step();
    metrics << metrics_csv_row(m) << '\n';
    if (cfg.log_every && m.step % cfg.log_every == 0) {
      log_info("step " + std::to_string(m.step) + " d=" + std::to_string(m.d_loss) +
               " g=" + std::to_string(m.g_total));
    }
    if (cfg.checkpoint_every && m.step % cfg.checkpoint_every == 0) {
      metrics.flush();
      char name[32];
      std::snprintf(name, sizeof name, "step_%06zu.ckpt", m.step);
      save(name);
    }
  }
  save("final.ckpt");
  return 0;
}

int run_eval(const std::string& ckpt, const std::string& out, const std::string& format) {
  const auto model = load_inference_model(ckpt);
  const Corpus corpus(model.config.corpus);
  const auto report = evaluate_modality_transfer(model, corpus);
  const auto text = format == "table" ? report.to_table() : report.to_json() + "\n";
  write_file(out, text);
  log_info("eval: mse " + std::to_string(report.mean_mse) + ", ssim " + std::to_string(report.mean_ssim));
  return 0;
}

int run_infer(const std::string& ckpt, const std::string& image_path, const std::string& landmarks_path,
              std::size_t modality, const std::string& out) {
  const auto model = load_inference_model(ckpt);
  const auto image = read_png(image_path);
  const auto landmarks = LandmarkSet::from_json(read_file(landmarks_path));
  write_png(out, infer_image(model, image, landmarks, modality).final);
  return 0;
}

int run_data(std::uint64_t seed, std::size_t count, const std::string& out, std::size_t size,
             std::size_t modalities) {
  CorpusConfig cfg;
  cfg.seed = seed;
  cfg.train_identities = std::max<std::size_t>(count, 1);
  cfg.held_out_identities = 0;
  cfg.image_size = size;
  cfg.n_modalities = modalities;
  const Corpus corpus(cfg);
  fs::create_directories(out);
  for (std::size_t i = 0; i < count; ++i) {
    const auto emotion = i % canonical_emotions().size();
    for (std::size_t m = 0; m < modalities; ++m) {
      const auto s = corpus.sample(i, emotion, m);
      char stem[64];
      std::snprintf(stem, sizeof stem, "sample_%04zu_m%zu", i, m);
      write_png((fs::path(out) / (std::string(stem) + ".png")).string(), s.image);
      if (m == 0) {
        std::snprintf(stem, sizeof stem, "sample_%04zu", i);
        write_file((fs::path(out) / (std::string(stem) + ".json")).string(), s.landmarks.to_json() + "\n");
      }
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  init_logging();
  CLI::App app{"PortraitGAN desk-scale trainer and inference tool"};
  app.require_subcommand(1);

  std::string config_path, resume;
  auto* train = app.add_subcommand("train", "Train from a key = value config file");
  train->add_option("--config", config_path, "Config file")->required();
  train->add_option("--resume", resume, "Checkpoint to continue from");

  std::string ckpt, out, format = "json";
  auto* eval = app.add_subcommand("eval", "Score held-out modality transfer");
  eval->add_option("--ckpt", ckpt, "Checkpoint")->required();
  eval->add_option("--out", out, "Report path")->required();
  eval->add_option("--format", format, "Report format")->check(CLI::IsMember({"json", "table"}));

  std::string image_path, landmarks_path;
  std::size_t modality = 0;
  auto* infer = app.add_subcommand("infer", "Translate one image");
  infer->add_option("--ckpt", ckpt, "Checkpoint")->required();
  infer->add_option("--image", image_path, "Input PNG")->required();
  infer->add_option("--landmarks", landmarks_path, "Landmarks JSON")->required();
  infer->add_option("--modality", modality, "Target modality index")->required();
  infer->add_option("--out", out, "Output PNG")->required();

  std::uint64_t seed = 1;
  std::size_t count = 0, size = 64, modalities = 2;
  auto* data = app.add_subcommand("data", "Render synthetic corpus samples");
  data->add_option("--seed", seed, "Corpus seed")->required();
  data->add_option("--count", count, "Number of identities")->required();
  data->add_option("--out", out, "Output directory")->required();
  data->add_option("--size", size, "Image size");
  data->add_option("--modalities", modalities, "Modalities to render")->check(CLI::Range(1, 3));

  int port = 8080;
  std::string host = "127.0.0.1";
  auto* serve_cmd = app.add_subcommand("serve", "Serve /infer, /health and /meta");
  serve_cmd->add_option("--ckpt", ckpt, "Checkpoint")->required();
  serve_cmd->add_option("--port", port, "Port")->check(CLI::Range(1, 65535));
  serve_cmd->add_option("--host", host, "Bind address");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) return run_train(config_path, resume);
    if (*eval) return run_eval(ckpt, out, format);
    if (*infer) return run_infer(ckpt, image_path, landmarks_path, modality, out);
    if (*data) return run_data(seed, count, out, size, modalities);
    if (*serve_cmd) {
      const InferenceService service(load_inference_model(ckpt));
      serve(service, host, port);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
