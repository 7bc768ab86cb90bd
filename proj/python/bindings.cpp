#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pgan/checkpoint.hpp"
#include "pgan/metrics.hpp"
#include "pgan/service.hpp"

namespace py = pybind11;
using namespace pgan;

namespace {

using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;
using DoubleArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

template <typename T>
Tensor<T> to_tensor(const py::array_t<T, py::array::c_style | py::array::forcecast>& a) {
  Shape shape(a.shape(), a.shape() + a.ndim());
  return Tensor<T>::from_data(shape, std::vector<T>(a.data(), a.data() + a.size()));
}

template <typename T>
py::array_t<T> to_array(const Tensor<T>& t) {
  std::vector<py::ssize_t> shape(t.shape().begin(), t.shape().end());
  py::array_t<T> out(shape);
  std::copy(t.data().begin(), t.data().end(), out.mutable_data());
  return out;
}

LandmarkSet to_landmarks(const DoubleArray& a) {
  if (a.ndim() != 2 || a.shape(1) != 2) throw ContractViolation("landmarks must be an (N, 2) array");
  std::vector<Point2> pts;
  for (py::ssize_t i = 0; i < a.shape(0); ++i) pts.push_back({a.at(i, 0), a.at(i, 1)});
  return LandmarkSet::from_points(pts);
}

py::array_t<double> landmarks_array(const LandmarkSet& lm) {
  py::array_t<double> out({static_cast<py::ssize_t>(kNumLandmarks), py::ssize_t{2}});
  auto v = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < kNumLandmarks; ++i) {
    v(i, 0) = lm[i].x;
    v(i, 1) = lm[i].y;
  }
  return out;
}

py::dict metrics_dict(const StepMetrics& m) {
  py::dict d;
  d["step"] = m.step;
  for (const auto& [name, v] : m.named_losses()) d[name.c_str()] = v;
  d["wall_seconds"] = m.wall_seconds;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Landmark- and modality-conditioned portrait translation";

  py::register_exception<ContractViolation>(m, "ContractViolation", PyExc_ValueError);
  py::register_exception<NonFiniteError>(m, "NonFiniteError", PyExc_ArithmeticError);
  py::register_exception<CheckpointError>(m, "CheckpointError", PyExc_IOError);

  m.def(
      "render_sample",
      [](std::uint64_t identity_seed, std::size_t emotion, std::size_t modality, std::size_t n_modalities,
         std::size_t size) {
        const auto spec = sample_identity(identity_seed).with_emotion(canonical_emotions().at(emotion));
        const auto s = render(spec, ModalityCode(modality, n_modalities), size);
        return py::make_tuple(to_array(s.image), landmarks_array(s.landmarks));
      },
      py::arg("identity_seed"), py::arg("emotion") = 0, py::arg("modality") = 0, py::arg("n_modalities") = 2,
      py::arg("size") = 64, "Toy face image (3, H, W) in [-1, 1] and its (68, 2) landmarks.");

  m.def(
      "rasterize_landmarks",
      [](const DoubleArray& landmarks, std::size_t height, std::size_t width, std::size_t stroke) {
        return to_array(rasterize_landmarks<float>(to_landmarks(landmarks), height, width, stroke));
      },
      py::arg("landmarks"), py::arg("height"), py::arg("width"), py::arg("stroke") = 1);

  m.def(
      "gram", [](const DoubleArray& f, bool normalize) { return to_array(gram(to_tensor(f), normalize)); },
      py::arg("features"), py::arg("normalize") = false, "Gram matrix of a (kappa, H, W) feature map.");

  m.def(
      "mse", [](const DoubleArray& a, const DoubleArray& b) { return mse(to_tensor(a), to_tensor(b)); },
      py::arg("a"), py::arg("b"));

  m.def(
      "ssim",
      [](const DoubleArray& a, const DoubleArray& b, std::size_t window, double sigma) {
        SsimOptions opt;
        opt.window = window;
        opt.sigma = sigma;
        return ssim(to_tensor(a), to_tensor(b), opt);
      },
      py::arg("a"), py::arg("b"), py::arg("window") = 11, py::arg("sigma") = 1.5,
      "Mean SSIM of two (3, H, W) images in [0, 1].");

  m.def(
      "receptive_field",
      [](const std::vector<std::pair<std::size_t, std::size_t>>& layers) {
        std::vector<ConvSpec> specs;
        for (auto [k, s] : layers) specs.push_back({k, s, 1, 0});
        if (specs.empty()) specs = DiscriminatorConfig::default_layers(64);
        return receptive_field(specs);
      },
      py::arg("layers") = std::vector<std::pair<std::size_t, std::size_t>>{},
      "Receptive field of (kernel, stride) layers; the default discriminator if empty.");

  py::class_<Trainer>(m, "Trainer")
      .def(py::init([](const std::string& config_text) { return Trainer(TrainConfig::from_text(config_text)); }),
           py::arg("config_text") = "")
      .def("train_step", [](Trainer& t) { return metrics_dict(t.train_step()); })
      .def("save", [](const Trainer& t, const std::string& path) { save_checkpoint(t, path); })
      .def_static("load", &load_checkpoint)
      .def_property_readonly("step", &Trainer::step)
      .def_property_readonly("config_text", [](const Trainer& t) { return t.config().to_text(); });

  py::class_<InferenceModel>(m, "Model")
      .def(
          "infer",
          [](const InferenceModel& model, const FloatArray& image, const DoubleArray& landmarks,
             std::size_t modality) {
            auto tensor = to_tensor(image);
            auto lm = to_landmarks(landmarks);
            GeneratorOutput<float> out;
            {
              py::gil_scoped_release release;
              out = infer_image(model, tensor, lm, modality);
            }
            return to_array(out.final);
          },
          py::arg("image"), py::arg("landmarks"), py::arg("modality"))
      .def_property_readonly("checkpoint_id", [](const InferenceModel& m) { return m.checkpoint_id; })
      .def_property_readonly("image_size", [](const InferenceModel& m) { return m.config.image_size(); })
      .def_property_readonly("n_modalities",
                             [](const InferenceModel& m) { return m.config.generator.n_modalities; });

  m.def("load_model", &load_inference_model, py::arg("path"), "Generator-only view of a checkpoint.");
}
