#pragma once

#include <memory>
#include <string>
#include <vector>

#include "pgan/checkpoint.hpp"

namespace pgan {

/// Deterministic single-image inference shared by the CLI and the service.
GeneratorOutput<float> infer_image(const InferenceModel& model, const TensorF& image,
                                   const LandmarkSet& landmarks, std::size_t modality);

struct HttpReply {
  int status = 200;
  std::string body;  // JSON
};

/// Endpoint logic without a socket. Parameters are never modified, so
/// handlers may run concurrently.
class InferenceService {
 public:
  explicit InferenceService(InferenceModel model);

  /// POST /infer: {image: base64 PNG, landmarks: [[x,y] x 68], modality: int,
  /// options: {return_intermediates: bool}}.
  HttpReply infer(const std::string& request_body) const;
  /// GET /health
  HttpReply health() const;
  /// GET /meta: landmark schema and connectivity groups.
  HttpReply meta() const;

  const InferenceModel& model() const { return model_; }

 private:
  InferenceModel model_;
};

/// HTTP front end for an InferenceService.
class HttpServer {
 public:
  explicit HttpServer(const InferenceService& service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds host:port; port 0 picks a free port. Returns the bound port.
  int bind(const std::string& host, int port);
  /// Serves until stop() is called from another thread.
  void run();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Blocks serving /infer, /health and /meta on host:port.
void serve(const InferenceService& service, const std::string& host, int port);

}  // namespace pgan
