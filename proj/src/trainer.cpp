#include "pgan/trainer.hpp"

#include <chrono>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "pgan/ops.hpp"

namespace pgan {

namespace {

struct Direction {
  const TensorF* source;
  const TensorF* target;
  const LandmarkSet* target_landmarks;
  const ModalityCode* target_code;
  GeneratorOutput<float> fake;
};

// Real image at each supervised scale, finest first.
std::vector<TensorF> pyramid(const TensorF& image, std::size_t levels) {
  std::vector<TensorF> out{image};
  for (std::size_t k = 1; k < levels; ++k) out.push_back(average_downsample(out.back()));
  return out;
}

// Fake samples judged at level k: the final image downsampled k times, plus
// the side-branch image of the same scale.
std::vector<TensorF> fake_samples(const GeneratorOutput<float>& out, std::size_t levels,
                                  bool detach) {
  std::vector<TensorF> samples;
  TensorF scaled = detach ? out.final.detach() : out.final;
  for (std::size_t k = 0; k < levels; ++k) {
    if (k > 0) {
      scaled = average_downsample(scaled);
      samples.push_back(detach ? out.intermediates.at(k - 1).detach() : out.intermediates.at(k - 1));
    }
    samples.push_back(scaled);
  }
  return samples;
}

// Index range of level k inside fake_samples().
std::pair<std::size_t, std::size_t> level_range(std::size_t k) {
  if (k == 0) return {0, 1};
  return {2 * k - 1, 2 * k + 1};
}

double value_of(const TensorF& t) { return t.defined() ? static_cast<double>(t.item()) : 0.0; }

void require_finite(const TensorF& t, const char* name) {
  if (t.defined() && !t.all_finite()) {
    throw NonFiniteError(std::string("train_step: non-finite ") + name + " loss");
  }
}

TensorF accumulate(const TensorF& total, const TensorF& term) {
  return total.defined() ? add(total, term) : term;
}

}  // namespace

std::vector<std::pair<std::string, double>> StepMetrics::named_losses() const {
  return {{"d_loss", d_loss},     {"g_total", g_total},
          {"adv_ab", adv_ab},     {"adv_ba", adv_ba},
          {"cycle", cycle},       {"feature_matching", feature_matching},
          {"identity", identity}, {"texture", texture}};
}

std::string metrics_csv_header() {
  std::string h = "step";
  for (const auto& [name, v] : StepMetrics{}.named_losses()) h += "," + name;
  return h + ",wall_seconds";
}

std::string metrics_csv_row(const StepMetrics& m) {
  std::ostringstream os;
  os << m.step << std::setprecision(9);
  for (const auto& [name, v] : m.named_losses()) os << ',' << v;
  os << ',' << std::setprecision(6) << m.wall_seconds;
  return os.str();
}

Trainer::Trainer(TrainConfig config)
    : config_((config.sync_derived(), config.validate(), std::move(config))),
      corpus_(config_.corpus),
      generator_(config_.generator, config_.seed * 2 + 1),
      discriminators_(config_.discriminator, config_.seed * 2 + 2),
      texture_net_(config_.texture_seed),
      adam_g_(AdamState::for_params(generator_.params())),
      pool_(config_.pool_capacity, config_.seed * 2 + 3),
      data_rng_(config_.seed * 2 + 4) {
  for (std::size_t k = 0; k < discriminators_.levels(); ++k) {
    adam_d_.push_back(AdamState::for_params(discriminators_.level(k).params()));
  }
}

std::size_t Trainer::supervised_levels() const {
  return config_.mode == ObjectiveMode::Base ? 1 : discriminators_.levels();
}

TrainingTuple Trainer::next_tuple() { return corpus_.sample_training_tuple(data_rng_); }

StepMetrics Trainer::train_step() {
  std::vector<TrainingTuple> batch;
  for (std::size_t i = 0; i < config_.batch_size; ++i) batch.push_back(next_tuple());
  return train_step(batch);
}

StepMetrics Trainer::train_step(const TrainingTuple& tuple) {
  return train_step(std::span<const TrainingTuple>(&tuple, 1));
}

StepMetrics Trainer::train_step(std::span<const TrainingTuple> tuples) {
  if (tuples.empty()) throw ContractViolation("train_step: empty batch");
  const auto started = std::chrono::steady_clock::now();
  const bool full = config_.mode == ObjectiveMode::Full;
  const std::size_t levels = supervised_levels();
  const float inv_batch = 1.0f / static_cast<float>(tuples.size());
  const auto& w = config_.weights;

  // Generator outputs keep their graph for the G half-step; the D half-step
  // only sees detached copies, and G params are unchanged in between.
  std::vector<std::vector<Direction>> per_tuple;
  for (const auto& t : tuples) {
    const auto size = config_.image_size();
    for (const auto* img : {&t.image_a, &t.image_b}) {
      if (img->shape() != Shape{3, size, size}) {
        throw ContractViolation("train_step: tuple image has shape " + shape_str(img->shape()));
      }
    }
    std::vector<Direction> dirs;
    dirs.push_back({&t.image_a, &t.image_b, &t.landmarks_b, &t.code_b,
                    generator_.forward(condition(t.image_a, t.landmarks_b, t.code_b,
                                                 config_.landmark_stroke))});
    if (full) {
      dirs.push_back({&t.image_b, &t.image_a, &t.landmarks_a, &t.code_a,
                      generator_.forward(condition(t.image_b, t.landmarks_a, t.code_a,
                                                   config_.landmark_stroke))});
    }
    per_tuple.push_back(std::move(dirs));
  }

  // Discriminator half-step.
  generator_.params().zero_grad();
  discriminators_.zero_grad();
  TensorF d_total;
  for (auto& dirs : per_tuple) {
    for (auto& d : dirs) {
      auto reals = pyramid(*d.target, levels);
      auto fakes = fake_samples(d.fake, levels, true);
      if (config_.pool_target == PoolTarget::Fake) {
        fakes[0] = pool_.query(fakes[0]);
        for (std::size_t k = 1; k < levels; ++k) {
          fakes[level_range(k).second - 1] =
              average_downsample(fakes[level_range(k - 1).second - 1]);
        }
      }
      for (std::size_t k = 0; k < levels; ++k) {
        const auto& disc = discriminators_.level(k);
        auto real_resp = disc.forward(reals[k]);
        std::vector<PatchResponse<float>> fake_resp;
        auto [lo, hi] = level_range(k);
        for (auto i = lo; i < hi; ++i) fake_resp.push_back(disc.forward(fakes[i]));
        d_total = accumulate(d_total, adv_loss_d<float>(real_resp, fake_resp));
      }
    }
  }
  d_total = scale(d_total, inv_batch);
  require_finite(d_total, "discriminator");
  d_total.backward();
  if (!generator_.params().grads_are_zero()) {
    throw std::logic_error("train_step: discriminator update produced generator gradients");
  }
  for (std::size_t k = 0; k < levels; ++k) {
    adam_update(discriminators_.level(k).params(), adam_d_[k], config_.adam_d);
  }

  // Generator half-step with frozen discriminators.
  discriminators_.set_requires_grad(false);
  LossParts<float> parts;
  for (std::size_t ti = 0; ti < tuples.size(); ++ti) {
    const auto& t = tuples[ti];
    auto& dirs = per_tuple[ti];
    for (std::size_t di = 0; di < dirs.size(); ++di) {
      auto& d = dirs[di];
      auto fakes = fake_samples(d.fake, levels, false);
      TensorF adv, fm;
      TensorF pooled_real;
      if (full) {
        pooled_real = config_.pool_target == PoolTarget::Real ? pool_.query(d.target->detach())
                                                              : d.target->detach();
      }
      auto real_levels = full ? pyramid(pooled_real, levels) : std::vector<TensorF>{};
      for (std::size_t k = 0; k < levels; ++k) {
        const auto& disc = discriminators_.level(k);
        auto [lo, hi] = level_range(k);
        TensorF level_adv;
        std::vector<std::vector<TensorF>> fake_features;
        for (auto i = lo; i < hi; ++i) {
          auto resp = disc.forward(fakes[i]);
          level_adv = accumulate(level_adv, adv_loss_g(resp));
          fake_features.push_back(std::move(resp.features));
        }
        adv = accumulate(adv, scale(level_adv, 1.0f / static_cast<float>(hi - lo)));
        if (full) {
          PatchResponse<float> real_resp;
          {
            NoGradGuard no_grad;
            real_resp = disc.forward(real_levels[k]);
          }
          auto fake_mean = batch_mean_features<float>(fake_features);
          fm = accumulate(fm, feature_matching<float>(real_resp.features, fake_mean));
        }
      }
      auto& adv_slot = di == 0 ? parts.adv_ab : parts.adv_ba;
      adv_slot = accumulate(adv_slot, adv);
      parts.identity = accumulate(parts.identity, identity_l1(*d.target, d.fake.final));
      if (full) {
        parts.feature_matching = accumulate(parts.feature_matching, fm);
        parts.texture =
            accumulate(parts.texture, texture_loss(d.fake.final, *d.target, texture_net_));
      }
    }
    if (full) {
      auto rec_a = generator_.forward(
          condition(dirs[0].fake.final, t.landmarks_a, t.code_a, config_.landmark_stroke));
      auto rec_b = generator_.forward(
          condition(dirs[1].fake.final, t.landmarks_b, t.code_b, config_.landmark_stroke));
      parts.cycle = accumulate(parts.cycle, cycle_loss(t.image_a, rec_a.final, t.image_b, rec_b.final));
    }
  }
  for (auto* p : {&parts.adv_ab, &parts.adv_ba, &parts.cycle, &parts.feature_matching,
                  &parts.identity, &parts.texture}) {
    if (p->defined()) *p = scale(*p, inv_batch);
  }
  TensorF g_total;
  try {
    g_total = total_objective(parts, w, config_.mode);
  } catch (...) {
    discriminators_.set_requires_grad(true);
    throw;
  }
  g_total.backward();
  const bool d_clean = discriminators_.grads_are_zero();
  discriminators_.set_requires_grad(true);
  if (!d_clean) throw std::logic_error("train_step: generator update produced discriminator gradients");
  adam_update(generator_.params(), adam_g_, config_.adam_g);

  ++step_;
  StepMetrics m;
  m.step = step_;
  m.d_loss = value_of(d_total);
  m.g_total = value_of(g_total);
  m.adv_ab = value_of(parts.adv_ab);
  m.adv_ba = value_of(parts.adv_ba);
  m.cycle = value_of(parts.cycle);
  m.feature_matching = value_of(parts.feature_matching);
  m.identity = value_of(parts.identity);
  m.texture = value_of(parts.texture);
  m.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return m;
}

}  // namespace pgan
