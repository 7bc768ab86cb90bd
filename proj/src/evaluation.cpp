#include "pgan/evaluation.hpp"

#include <chrono>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "pgan/ops.hpp"

namespace pgan {

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

TranslateFn<float> translator_for(const Generator<float>& generator, std::size_t stroke) {
  return [&generator, stroke](const TensorF& image, const LandmarkSet& lm, const ModalityCode& code) {
    NoGradGuard no_grad;
    return generator.forward(condition(image, lm, code, stroke));
  };
}

}  // namespace

std::vector<TransferPair> held_out_pairs(const Corpus& corpus, std::size_t source, std::size_t target) {
  const auto& cfg = corpus.config();
  if (source >= cfg.n_modalities || target >= cfg.n_modalities) {
    throw ContractViolation("evaluation: corpus has " + std::to_string(cfg.n_modalities) +
                            " modalities, cannot pair " + std::to_string(source) + " -> " +
                            std::to_string(target));
  }
  std::vector<TransferPair> pairs;
  for (std::size_t id = cfg.train_identities; id < corpus.size(); ++id) {
    for (std::size_t e = 0; e < canonical_emotions().size(); ++e) {
      pairs.push_back({id, e, corpus.sample(id, e, source), corpus.sample(id, e, target)});
    }
  }
  return pairs;
}

EvalReport evaluate_modality_transfer(const TranslateFn<float>& translator,
                                      const std::vector<TransferPair>& pairs,
                                      const std::string& corpus_descriptor,
                                      const std::string& checkpoint_id,
                                      const SsimOptions& ssim_options) {
  if (pairs.empty()) throw ContractViolation("evaluation: no held-out pairs to score");
  EvalReport report;
  report.corpus = corpus_descriptor;
  report.checkpoint_id = checkpoint_id;
  report.ssim_options = ssim_options;
  for (const auto& p : pairs) {
    if (!p.target.image.defined()) throw ContractViolation("evaluation: pair without ground truth");
    const auto start = std::chrono::steady_clock::now();
    auto out = translator(p.source.image, p.source.landmarks, p.target.modality);
    const double secs = seconds_since(start);
    const auto fake = to_unit_range(out.final);
    const auto real = to_unit_range(p.target.image);
    report.samples.push_back({p.identity, p.emotion, mse(fake, real), ssim(fake, real, ssim_options), secs});
  }
  for (const auto& s : report.samples) {
    report.mean_mse += s.mse;
    report.mean_ssim += s.ssim;
    report.mean_inference_seconds += s.seconds;
  }
  const double n = static_cast<double>(report.samples.size());
  report.mean_mse /= n;
  report.mean_ssim /= n;
  report.mean_inference_seconds /= n;
  return report;
}

EvalReport evaluate_modality_transfer(const InferenceModel& model, const Corpus& held_out) {
  const auto& c = held_out.config();
  std::ostringstream desc;
  desc << "toy-faces seed=" << c.seed << " identities=" << c.train_identities << "+"
       << c.held_out_identities << " size=" << c.image_size << " modality 0->1";
  return evaluate_modality_transfer(translator_for(model.generator, model.config.landmark_stroke),
                                    held_out_pairs(held_out), desc.str(), model.checkpoint_id);
}

double transfer_l1(const Generator<float>& generator, const std::vector<TransferPair>& pairs,
                   std::size_t landmark_stroke) {
  if (pairs.empty()) throw ContractViolation("transfer_l1: no pairs");
  NoGradGuard no_grad;
  double total = 0;
  for (const auto& p : pairs) {
    auto out = generator.forward(condition(p.source.image, p.source.landmarks, p.target.modality,
                                           landmark_stroke));
    total += identity_l1(p.target.image, out.final).item();
  }
  return total / static_cast<double>(pairs.size());
}

BenchmarkResult benchmark_inference(const Generator<float>& generator,
                                    const std::vector<TransferPair>& pairs, std::size_t repetitions,
                                    std::size_t warmup, std::size_t landmark_stroke) {
  if (pairs.empty() || repetitions == 0) {
    throw ContractViolation("benchmark_inference: need pairs and repetitions >= 1");
  }
  NoGradGuard no_grad;
  const auto run = [&](std::size_t i) {
    const auto& p = pairs[i % pairs.size()];
    return generator.forward(condition(p.source.image, p.source.landmarks, p.target.modality,
                                       landmark_stroke));
  };
  for (std::size_t i = 0; i < warmup; ++i) run(i);
  double total = 0;
  for (std::size_t i = 0; i < repetitions; ++i) {
    const auto start = std::chrono::steady_clock::now();
    auto out = run(i);
    total += seconds_since(start);
  }
  return {total / static_cast<double>(repetitions), generator.config().image_size, repetitions,
          hardware_description()};
}

std::string hardware_description() {
  std::string model = "unknown cpu";
  std::ifstream cpuinfo("/proc/cpuinfo");
  for (std::string line; std::getline(cpuinfo, line);) {
    if (line.rfind("model name", 0) == 0) {
      auto colon = line.find(':');
      if (colon != std::string::npos) model = line.substr(colon + 2);
      break;
    }
  }
  return model + ", " + std::to_string(std::thread::hardware_concurrency()) + " hw threads";
}

std::string EvalReport::to_json() const {
  nlohmann::json j;
  j["checkpoint_id"] = checkpoint_id;
  j["corpus"] = corpus;
  j["aggregate"] = {{"mse", mean_mse}, {"ssim", mean_ssim}, {"inference_seconds", mean_inference_seconds}};
  j["ssim_parameters"] = {{"window", ssim_options.window}, {"sigma", ssim_options.sigma},
                          {"k1", ssim_options.k1},         {"k2", ssim_options.k2},
                          {"dynamic_range", ssim_options.dynamic_range}};
  auto& arr = j["samples"] = nlohmann::json::array();
  for (const auto& s : samples) {
    arr.push_back({{"identity", s.identity}, {"emotion", canonical_emotion_names().at(s.emotion)},
                   {"mse", s.mse}, {"ssim", s.ssim}, {"inference_seconds", s.seconds}});
  }
  return j.dump(2);
}

std::string EvalReport::to_table() const {
  std::ostringstream os;
  os << "checkpoint " << checkpoint_id << "\ncorpus     " << corpus << "\n\n";
  os << std::left << std::setw(10) << "identity" << std::setw(12) << "emotion" << std::right
     << std::setw(10) << "MSE" << std::setw(10) << "SSIM" << std::setw(12) << "time (s)" << '\n';
  os << std::fixed;
  for (const auto& s : samples) {
    os << std::left << std::setw(10) << s.identity << std::setw(12)
       << canonical_emotion_names().at(s.emotion) << std::right << std::setprecision(5)
       << std::setw(10) << s.mse << std::setw(10) << s.ssim << std::setw(12) << s.seconds << '\n';
  }
  os << std::left << std::setw(22) << "mean" << std::right << std::setw(10) << mean_mse
     << std::setw(10) << mean_ssim << std::setw(12) << mean_inference_seconds << '\n';
  os << "SSIM window " << ssim_options.window << ", sigma " << std::setprecision(2)
     << ssim_options.sigma << ", k1 " << ssim_options.k1 << ", k2 " << ssim_options.k2 << '\n';
  return os.str();
}

}  // namespace pgan
