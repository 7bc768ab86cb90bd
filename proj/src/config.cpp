#include "pgan/config.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <iomanip>
#include <sstream>
#include <vector>

namespace pgan {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string fmt_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

double parse_double(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double out = 0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != v.size()) throw ContractViolation("config: " + key + " expects a number, got '" + v + "'");
  return out;
}

std::uint64_t parse_uint(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  unsigned long long out = 0;
  try {
    if (!v.empty() && v[0] != '-') out = std::stoull(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size()) {
    throw ContractViolation("config: " + key + " expects a non-negative integer, got '" + v + "'");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ContractViolation("config: " + key + " expects true/false, got '" + v + "'");
}

struct Binding {
  const char* key;
  std::function<std::string(const TrainConfig&)> get;
  std::function<void(TrainConfig&, const std::string&)> set;
};

template <typename Field>
Binding real(const char* key, Field field) {
  return {key, [field](const TrainConfig& c) { return fmt_double(field(const_cast<TrainConfig&>(c))); },
          [key, field](TrainConfig& c, const std::string& v) { field(c) = parse_double(key, v); }};
}

template <typename Field>
Binding whole(const char* key, Field field) {
  return {key,
          [field](const TrainConfig& c) { return std::to_string(field(const_cast<TrainConfig&>(c))); },
          [key, field](TrainConfig& c, const std::string& v) {
            using Out = std::remove_reference_t<decltype(field(c))>;
            field(c) = static_cast<Out>(parse_uint(key, v));
          }};
}

const std::vector<Binding>& bindings() {
  static const std::vector<Binding> table = {
      real("alpha", [](TrainConfig& c) -> double& { return c.weights.alpha; }),
      real("beta", [](TrainConfig& c) -> double& { return c.weights.beta; }),
      real("gamma", [](TrainConfig& c) -> double& { return c.weights.gamma; }),
      real("eta", [](TrainConfig& c) -> double& { return c.weights.eta; }),
      real("lambda", [](TrainConfig& c) -> double& { return c.weights.lambda_base; }),
      {"mode", [](const TrainConfig& c) { return std::string(mode_name(c.mode)); },
       [](TrainConfig& c, const std::string& v) { c.mode = parse_mode(v); }},
      real("lr_g", [](TrainConfig& c) -> double& { return c.adam_g.lr; }),
      real("lr_d", [](TrainConfig& c) -> double& { return c.adam_d.lr; }),
      real("beta1", [](TrainConfig& c) -> double& { return c.adam_g.beta1; }),
      real("beta2", [](TrainConfig& c) -> double& { return c.adam_g.beta2; }),
      real("adam_eps", [](TrainConfig& c) -> double& { return c.adam_g.eps; }),
      whole("batch_size", [](TrainConfig& c) -> std::size_t& { return c.batch_size; }),
      whole("total_steps", [](TrainConfig& c) -> std::size_t& { return c.total_steps; }),
      whole("pool_capacity", [](TrainConfig& c) -> std::size_t& { return c.pool_capacity; }),
      {"pool_target",
       [](const TrainConfig& c) { return std::string(c.pool_target == PoolTarget::Real ? "real" : "fake"); },
       [](TrainConfig& c, const std::string& v) {
         if (v == "real") c.pool_target = PoolTarget::Real;
         else if (v == "fake") c.pool_target = PoolTarget::Fake;
         else throw ContractViolation("config: pool_target expects real|fake, got '" + v + "'");
       }},
      whole("seed", [](TrainConfig& c) -> std::uint64_t& { return c.seed; }),
      whole("checkpoint_every", [](TrainConfig& c) -> std::size_t& { return c.checkpoint_every; }),
      whole("log_every", [](TrainConfig& c) -> std::size_t& { return c.log_every; }),
      {"output_dir", [](const TrainConfig& c) { return c.output_dir; },
       [](TrainConfig& c, const std::string& v) { c.output_dir = v; }},
      whole("landmark_stroke", [](TrainConfig& c) -> std::size_t& { return c.landmark_stroke; }),
      whole("image_size", [](TrainConfig& c) -> std::size_t& { return c.generator.image_size; }),
      whole("n_modalities", [](TrainConfig& c) -> std::size_t& { return c.generator.n_modalities; }),
      whole("base_channels", [](TrainConfig& c) -> std::size_t& { return c.generator.base_channels; }),
      whole("max_channels", [](TrainConfig& c) -> std::size_t& { return c.generator.max_channels; }),
      whole("n_down", [](TrainConfig& c) -> std::size_t& { return c.generator.n_down; }),
      whole("n_resblocks", [](TrainConfig& c) -> std::size_t& { return c.generator.n_resblocks; }),
      whole("stem_kernel", [](TrainConfig& c) -> std::size_t& { return c.generator.stem_kernel; }),
      whole("down_kernel", [](TrainConfig& c) -> std::size_t& { return c.generator.down_kernel; }),
      whole("d_levels", [](TrainConfig& c) -> std::size_t& { return c.discriminator.n_levels; }),
      whole("d_base_channels", [](TrainConfig& c) -> std::size_t& { return c.d_base_channels; }),
      real("d_leaky_slope", [](TrainConfig& c) -> double& { return c.discriminator.leaky_slope; }),
      {"d_instance_norm",
       [](const TrainConfig& c) { return std::string(c.discriminator.instance_norm ? "true" : "false"); },
       [](TrainConfig& c, const std::string& v) {
         c.discriminator.instance_norm = parse_bool("d_instance_norm", v);
       }},
      whole("train_identities", [](TrainConfig& c) -> std::size_t& { return c.corpus.train_identities; }),
      whole("held_out_identities",
            [](TrainConfig& c) -> std::size_t& { return c.corpus.held_out_identities; }),
      whole("corpus_seed", [](TrainConfig& c) -> std::uint64_t& { return c.corpus.seed; }),
      whole("texture_seed", [](TrainConfig& c) -> std::uint64_t& { return c.texture_seed; }),
  };
  return table;
}

}  // namespace

void TrainConfig::sync_derived() {
  auto& c = *this;
  c.generator.n_up = c.generator.n_down;
  c.corpus.image_size = c.generator.image_size;
  c.corpus.n_modalities = c.generator.n_modalities;
  c.discriminator.layers = DiscriminatorConfig::default_layers(c.d_base_channels);
  c.adam_d.beta1 = c.adam_g.beta1;
  c.adam_d.beta2 = c.adam_g.beta2;
  c.adam_d.eps = c.adam_g.eps;
}

std::map<std::string, std::string> parse_key_values(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream is(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ContractViolation("config: line " + std::to_string(lineno) + " is not 'key = value'");
    }
    auto key = trim(line.substr(0, eq));
    auto value = trim(line.substr(eq + 1));
    if (key.empty()) throw ContractViolation("config: empty key on line " + std::to_string(lineno));
    if (!out.emplace(key, value).second) throw ContractViolation("config: duplicate key " + key);
  }
  return out;
}

void TrainConfig::validate() const {
  weights.validate();
  if (!(adam_g.lr > 0) || !(adam_d.lr > 0)) throw ContractViolation("config: learning rates must be > 0");
  if (batch_size == 0) throw ContractViolation("config: batch_size must be >= 1");
  if (landmark_stroke == 0) throw ContractViolation("config: landmark_stroke must be >= 1");
  if (generator.n_modalities > kMaxModalities) {
    throw ContractViolation("config: the toy corpus renders at most 3 modalities");
  }
  generator.validate();
  discriminator.validate();
  if (generator.image_size >> (discriminator.n_levels - 1) < 8) {
    throw ContractViolation("config: too many discriminator levels for image_size");
  }
  if (discriminator.n_levels > generator.n_up) {
    throw ContractViolation("config: more discriminator levels than generator scales");
  }
}

std::string TrainConfig::to_text() const {
  std::ostringstream os;
  for (const auto& b : bindings()) os << b.key << " = " << b.get(*this) << '\n';
  return os.str();
}

TrainConfig TrainConfig::from_text(const std::string& text) {
  TrainConfig c;
  const auto& table = bindings();
  for (const auto& [key, value] : parse_key_values(text)) {
    auto it = std::find_if(table.begin(), table.end(), [&](const Binding& b) { return key == b.key; });
    if (it == table.end()) throw ContractViolation("config: unknown key '" + key + "'");
    it->set(c, value);
  }
  c.sync_derived();
  c.validate();
  return c;
}

TrainConfig TrainConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_text(ss.str());
}

}  // namespace pgan
