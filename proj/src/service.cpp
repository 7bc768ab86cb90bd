#include "pgan/service.hpp"

#include <chrono>

#include "httplib.h"
#include "json.hpp"
#include "pgan/image_io.hpp"
#include "pgan/log.hpp"

namespace pgan {

namespace {

using nlohmann::json;

HttpReply error_reply(int status, const std::string& message) {
  return {status, json{{"error", message}}.dump()};
}

// Request schema problems map to 422; the body was valid JSON.
struct SchemaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace

GeneratorOutput<float> infer_image(const InferenceModel& model, const TensorF& image,
                                   const LandmarkSet& landmarks, std::size_t modality) {
  const auto size = model.config.image_size();
  if (image.shape() != Shape{3, size, size}) {
    throw ContractViolation("image is " + shape_str(image.shape()) + ", model expects 3x" +
                            std::to_string(size) + "x" + std::to_string(size));
  }
  const ModalityCode code(modality, model.config.generator.n_modalities);
  NoGradGuard no_grad;
  return model.generator.forward(condition(image, landmarks, code, model.config.landmark_stroke));
}

InferenceService::InferenceService(InferenceModel model) : model_(std::move(model)) {}

HttpReply InferenceService::infer(const std::string& request_body) const {
  json req;
  try {
    req = json::parse(request_body);
  } catch (const json::exception& e) {
    return error_reply(400, std::string("malformed JSON: ") + e.what());
  }
  try {
    if (!req.is_object()) throw SchemaError("request body must be a JSON object");
    for (const char* key : {"image", "landmarks", "modality"}) {
      if (!req.contains(key)) throw SchemaError(std::string("missing field '") + key + "'");
    }
    if (!req["image"].is_string()) throw SchemaError("'image' must be a base64 PNG string");
    if (!req["landmarks"].is_array()) throw SchemaError("'landmarks' must be an array of [x,y] pairs");
    if (!req["modality"].is_number_integer() || req["modality"].get<long long>() < 0) {
      throw SchemaError("'modality' must be a non-negative integer");
    }
    bool intermediates = false;
    if (req.contains("options")) {
      const auto& opt = req["options"];
      if (!opt.is_object()) throw SchemaError("'options' must be an object");
      if (opt.contains("return_intermediates")) {
        if (!opt["return_intermediates"].is_boolean()) {
          throw SchemaError("'options.return_intermediates' must be a boolean");
        }
        intermediates = opt["return_intermediates"].get<bool>();
      }
    }

    std::vector<Point2> points;
    for (const auto& p : req["landmarks"]) {
      if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
        throw SchemaError("each landmark must be a pair of numbers");
      }
      points.push_back({p[0].get<double>(), p[1].get<double>()});
    }
    LandmarkSet landmarks;
    TensorF image;
    std::size_t modality = req["modality"].get<std::size_t>();
    try {
      landmarks = LandmarkSet::from_points(points);
      image = decode_png(base64_decode(req["image"].get<std::string>()));
      if (modality >= model_.config.generator.n_modalities) {
        throw SchemaError("modality " + std::to_string(modality) + " out of range for " +
                          std::to_string(model_.config.generator.n_modalities) + " modalities");
      }
      const auto size = model_.config.image_size();
      if (image.dim(1) != size || image.dim(2) != size) {
        throw SchemaError("image is " + std::to_string(image.dim(2)) + "x" + std::to_string(image.dim(1)) +
                          ", model resolution is " + std::to_string(size) + "x" + std::to_string(size));
      }
    } catch (const ContractViolation& e) {
      throw SchemaError(e.what());
    }

    const auto start = std::chrono::steady_clock::now();
    auto out = infer_image(model_, image, landmarks, modality);
    const double ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    json reply{{"image", base64_encode(encode_png(out.final))}, {"latency_ms", ms}};
    if (intermediates) {
      auto& arr = reply["intermediates"] = json::array();
      for (const auto& t : out.intermediates) arr.push_back(base64_encode(encode_png(t)));
    }
    log_debug("infer: modality " + std::to_string(modality) + " in " + std::to_string(ms) + " ms");
    return {200, reply.dump()};
  } catch (const SchemaError& e) {
    return error_reply(422, e.what());
  } catch (const std::exception& e) {
    log_error(std::string("infer failed: ") + e.what());
    return error_reply(500, std::string("internal error: ") + e.what());
  }
}

HttpReply InferenceService::health() const {
  json j{{"status", "ok"},
         {"checkpoint_id", model_.checkpoint_id},
         {"model_resolution", model_.config.image_size()},
         {"n_modalities", model_.config.generator.n_modalities}};
  return {200, j.dump()};
}

HttpReply InferenceService::meta() const {
  json groups = json::array();
  for (const auto& g : landmark_groups()) {
    groups.push_back({{"name", g.name}, {"first", g.first}, {"last", g.last}, {"closed", g.closed}});
  }
  json modalities = json::array();
  static const char* names[] = {"flat", "stripes", "grain"};
  for (std::size_t i = 0; i < model_.config.generator.n_modalities; ++i) {
    modalities.push_back({{"index", i}, {"name", names[i]}});
  }
  const auto& c = model_.config.corpus;
  json j{{"landmarks",
          {{"count", kNumLandmarks}, {"coordinates", "normalized [x, y] in [0, 1], origin top-left"},
           {"groups", groups}}},
         {"modalities", modalities},
         {"model_resolution", model_.config.image_size()},
         {"demo_corpus",
          {{"seed", c.seed},
           {"identities", c.train_identities + c.held_out_identities},
           {"emotions", canonical_emotion_names()}}}};
  return {200, j.dump()};
}

struct HttpServer::Impl {
  httplib::Server server;
};

HttpServer::HttpServer(const InferenceService& service) : impl_(std::make_unique<Impl>()) {
  auto& server = impl_->server;
  const auto send = [](httplib::Response& res, const HttpReply& reply) {
    res.status = reply.status;
    res.set_content(reply.body, "application/json");
  };
  server.Post("/infer", [&service, send](const httplib::Request& req, httplib::Response& res) {
    send(res, service.infer(req.body));
  });
  server.Get("/health", [&service, send](const httplib::Request&, httplib::Response& res) {
    send(res, service.health());
  });
  server.Get("/meta", [&service, send](const httplib::Request&, httplib::Response& res) {
    send(res, service.meta());
  });
  server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr) {
    res.status = 500;
    res.set_content(json{{"error", "internal error"}}.dump(), "application/json");
  });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  const int bound = port == 0 ? impl_->server.bind_to_any_port(host) : (impl_->server.bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw std::runtime_error("cannot listen on " + host + ":" + std::to_string(port));
  return bound;
}

void HttpServer::run() { impl_->server.listen_after_bind(); }

void HttpServer::stop() { impl_->server.stop(); }

void serve(const InferenceService& service, const std::string& host, int port) {
  HttpServer server(service);
  const int bound = server.bind(host, port);
  log_info("serving on " + host + ":" + std::to_string(bound));
  server.run();
}

}  // namespace pgan
