#include "pgan/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace pgan {

namespace {

constexpr char kMagic[8] = {'P', 'G', 'A', 'N', 'C', 'K', 'P', 'T'};

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

class Writer {
 public:
  template <typename T>
  void pod(T v) {
    out_.append(reinterpret_cast<const char*>(&v), sizeof(T));
  }
  void str(const std::string& s) {
    pod<std::uint64_t>(s.size());
    out_ += s;
  }
  void floats(std::span<const float> v) {
    pod<std::uint64_t>(v.size());
    out_.append(reinterpret_cast<const char*>(v.data()), v.size() * sizeof(float));
  }
  void tensor(const TensorF& t) {
    pod<std::uint64_t>(t.rank());
    for (auto d : t.shape()) pod<std::uint64_t>(d);
    floats(t.data());
  }
  void params(const ParamStore<float>& store) {
    pod<std::uint64_t>(store.size());
    for (const auto& [name, t] : store.entries()) {
      str(name);
      tensor(t);
    }
  }
  void adam(const AdamState& s) {
    pod<std::uint64_t>(s.step);
    pod<std::uint64_t>(s.m.size());
    for (std::size_t i = 0; i < s.m.size(); ++i) {
      floats(s.m[i]);
      floats(s.v[i]);
    }
  }
  const std::string& bytes() const { return out_; }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(const std::string& bytes) : in_(bytes) {}

  template <typename T>
  T pod() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, in_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::string str() {
    const auto n = count();
    need(n);
    auto s = in_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::vector<float> floats() {
    const auto n = count();
    need(n * sizeof(float));
    std::vector<float> v(n);
    std::memcpy(v.data(), in_.data() + pos_, n * sizeof(float));
    pos_ += n * sizeof(float);
    return v;
  }
  TensorF tensor() {
    Shape shape(count());
    for (auto& d : shape) d = count();
    auto data = floats();
    if (data.size() != shape_numel(shape)) throw CheckpointError("checkpoint corrupt: tensor size mismatch");
    return TensorF::from_data(shape, std::move(data));
  }
  void params_into(ParamStore<float>& store) {
    const auto n = count();
    if (n != store.size()) {
      throw CheckpointError("checkpoint corrupt: expected " + std::to_string(store.size()) +
                            " parameter tensors, found " + std::to_string(n));
    }
    for (std::size_t i = 0; i < n; ++i) {
      auto name = str();
      auto value = tensor();
      if (!store.contains(name)) throw CheckpointError("checkpoint corrupt: unknown parameter " + name);
      auto& dst = store.get_mut(name);
      if (dst.shape() != value.shape()) {
        throw CheckpointError("checkpoint corrupt: shape mismatch for " + name);
      }
      std::memcpy(dst.mutable_data().data(), value.data().data(), value.numel() * sizeof(float));
    }
  }
  void adam_into(AdamState& s) {
    s.step = count();
    const auto n = count();
    if (n != s.m.size()) throw CheckpointError("checkpoint corrupt: optimizer slot count mismatch");
    for (std::size_t i = 0; i < n; ++i) {
      auto m = floats();
      auto v = floats();
      if (m.size() != s.m[i].size() || v.size() != s.v[i].size()) {
        throw CheckpointError("checkpoint corrupt: optimizer moment size mismatch");
      }
      s.m[i] = std::move(m);
      s.v[i] = std::move(v);
    }
  }
  bool done() const { return pos_ == in_.size(); }

 private:
  std::size_t count() {
    const auto n = pod<std::uint64_t>();
    if (n > in_.size()) throw CheckpointError("checkpoint corrupt: implausible length field");
    return static_cast<std::size_t>(n);
  }
  void need(std::size_t n) const {
    if (in_.size() - pos_ < n) throw CheckpointError("checkpoint corrupt: payload ends early");
  }

  const std::string& in_;
  std::size_t pos_ = 0;
};

// Validates the container and returns the payload bytes.
std::string read_payload(const std::string& path, std::string* id) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint " + path);
  std::string file((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const std::size_t header = sizeof(kMagic) + sizeof(std::uint32_t) + sizeof(std::uint64_t);
  if (file.size() < header || std::memcmp(file.data(), kMagic, sizeof(kMagic)) != 0) {
    throw CheckpointError("checkpoint corrupt: " + path + " is not a checkpoint file");
  }
  std::uint32_t version;
  std::memcpy(&version, file.data() + sizeof(kMagic), sizeof(version));
  if (version != kCheckpointVersion) {
    throw CheckpointError("checkpoint version mismatch: file has version " + std::to_string(version) +
                          ", this build reads version " + std::to_string(kCheckpointVersion));
  }
  std::uint64_t size;
  std::memcpy(&size, file.data() + sizeof(kMagic) + sizeof(version), sizeof(size));
  if (file.size() != header + size + sizeof(std::uint64_t)) {
    throw CheckpointError("checkpoint corrupt: " + path + " is truncated or has trailing bytes");
  }
  auto payload = file.substr(header, size);
  std::uint64_t checksum;
  std::memcpy(&checksum, file.data() + header + size, sizeof(checksum));
  if (checksum != fnv1a(payload)) throw CheckpointError("checkpoint corrupt: checksum mismatch in " + path);
  if (id) *id = hex(checksum);
  return payload;
}

}  // namespace

void save_checkpoint(const Trainer& trainer, const std::string& path) {
  Writer w;
  w.str(trainer.config_.to_text());
  w.pod<std::uint64_t>(trainer.step_);
  {
    std::ostringstream rng;
    rng << trainer.data_rng_;
    w.str(rng.str());
  }
  w.params(trainer.generator_.params());
  w.pod<std::uint64_t>(trainer.discriminators_.levels());
  for (std::size_t k = 0; k < trainer.discriminators_.levels(); ++k) {
    w.params(trainer.discriminators_.level(k).params());
  }
  w.adam(trainer.adam_g_);
  for (const auto& s : trainer.adam_d_) w.adam(s);
  w.str(trainer.pool_.rng_state());
  w.pod<std::uint64_t>(trainer.pool_.size());
  for (const auto& t : trainer.pool_.buffer()) w.tensor(t);

  const auto& payload = w.bytes();
  std::string file(kMagic, sizeof(kMagic));
  const std::uint32_t version = kCheckpointVersion;
  const std::uint64_t size = payload.size();
  const std::uint64_t checksum = fnv1a(payload);
  file.append(reinterpret_cast<const char*>(&version), sizeof(version));
  file.append(reinterpret_cast<const char*>(&size), sizeof(size));
  file += payload;
  file.append(reinterpret_cast<const char*>(&checksum), sizeof(checksum));

  // Write-then-rename so an interrupted save never leaves a half file behind.
  const auto tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw CheckpointError("cannot write checkpoint " + path);
    out.write(file.data(), static_cast<std::streamsize>(file.size()));
    if (!out) throw CheckpointError("short write to checkpoint " + path);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) throw CheckpointError("cannot move checkpoint into " + path);
}

Trainer load_checkpoint(const std::string& path) {
  const auto payload = read_payload(path, nullptr);
  Reader r(payload);
  Trainer t(TrainConfig::from_text(r.str()));
  t.step_ = r.pod<std::uint64_t>();
  {
    std::istringstream rng(r.str());
    rng >> t.data_rng_;
    if (!rng) throw CheckpointError("checkpoint corrupt: malformed data RNG state");
  }
  r.params_into(t.generator_.params());
  if (r.pod<std::uint64_t>() != t.discriminators_.levels()) {
    throw CheckpointError("checkpoint corrupt: discriminator level count mismatch");
  }
  for (std::size_t k = 0; k < t.discriminators_.levels(); ++k) {
    r.params_into(t.discriminators_.level(k).params());
  }
  r.adam_into(t.adam_g_);
  for (auto& s : t.adam_d_) r.adam_into(s);
  auto pool_rng = r.str();
  std::vector<TensorF> buffer(r.pod<std::uint64_t>());
  if (buffer.size() > t.pool_.capacity()) throw CheckpointError("checkpoint corrupt: pool over capacity");
  for (auto& b : buffer) b = r.tensor();
  t.pool_.restore(std::move(buffer), pool_rng);
  if (!r.done()) throw CheckpointError("checkpoint corrupt: unread payload bytes");
  return t;
}

InferenceModel load_inference_model(const std::string& path) {
  std::string id;
  const auto payload = read_payload(path, &id);
  Reader r(payload);
  auto config = TrainConfig::from_text(r.str());
  r.pod<std::uint64_t>();
  r.str();
  InferenceModel model{config, Generator<float>(config.generator, 0), id};
  r.params_into(model.generator.params());
  model.generator.params().set_requires_grad(false);
  return model;
}

}  // namespace pgan
