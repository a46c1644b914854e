// Python bindings for the core operations: tensor math, attention with
// structural bias, metrics and the synthetic dataset generator.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ssdm/attention.hpp"
#include "ssdm/bench.hpp"
#include "ssdm/experiment.hpp"
#include "ssdm/gradsuite.hpp"
#include "ssdm/metrics.hpp"
#include "ssdm/oracles.hpp"
#include "ssdm/ops.hpp"
#include "ssdm/prior.hpp"
#include "ssdm/semm.hpp"
#include "ssdm/smm.hpp"

namespace py = pybind11;

namespace {

using Arr = py::array_t<double, py::array::c_style | py::array::forcecast>;
using ArrU8 = py::array_t<uint8_t, py::array::c_style | py::array::forcecast>;

ssdm::Tensor<double> to_tensor(const Arr& arr) {
  ssdm::Shape shape(arr.ndim());
  for (py::ssize_t i = 0; i < arr.ndim(); ++i) shape[static_cast<size_t>(i)] = arr.shape(i);
  std::vector<double> data(arr.data(), arr.data() + arr.size());
  return ssdm::Tensor<double>::from_data(std::move(shape), std::move(data));
}

Arr to_array(const ssdm::Tensor<double>& t) {
  std::vector<py::ssize_t> shape(t.shape().begin(), t.shape().end());
  Arr arr(shape);
  std::copy(t.values().begin(), t.values().end(), arr.mutable_data());
  return arr;
}

ssdm::LabelMap to_labels(const ArrU8& arr) {
  if (arr.ndim() != 2) throw ssdm::DimensionError("label map must be 2-D");
  ssdm::LabelMap labels;
  labels.height = arr.shape(0);
  labels.width = arr.shape(1);
  labels.values.assign(arr.data(), arr.data() + arr.size());
  return labels;
}

ArrU8 from_labels(const ssdm::LabelMap& labels) {
  ArrU8 arr({static_cast<py::ssize_t>(labels.height),
             static_cast<py::ssize_t>(labels.width)});
  std::copy(labels.values.begin(), labels.values.end(), arr.mutable_data());
  return arr;
}

ssdm::SceneSpec spec_from_kwargs(int64_t height, int64_t width, int64_t classes,
                                 int64_t cells, double texture, double brightness,
                                 int64_t embed_factor, double drift, uint64_t seed) {
  ssdm::SceneSpec spec;
  spec.height = height;
  spec.width = width;
  spec.num_classes = classes;
  spec.num_cells = cells;
  spec.texture_amplitude = texture;
  spec.brightness_jitter = brightness;
  spec.embed_factor = embed_factor;
  spec.drift_prob = drift;
  spec.seed = seed;
  return spec;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "structure/semantic decoupled modulation testbed (native core)";

  m.def("matmul", [](const Arr& a, const Arr& b) {
    return to_array(ssdm::matmul(to_tensor(a), to_tensor(b)));
  });
  m.def("softmax_lastdim", [](const Arr& x) {
    return to_array(ssdm::softmax_lastdim(to_tensor(x)));
  });
  m.def("gelu", [](const Arr& x) { return to_array(ssdm::gelu(to_tensor(x))); });
  m.def(
      "conv2d",
      [](const Arr& x, const Arr& w, const Arr& b, int64_t stride) {
        return to_array(ssdm::conv2d(to_tensor(x), to_tensor(w), to_tensor(b), stride));
      },
      py::arg("x"), py::arg("w"), py::arg("b"), py::arg("stride") = 1);
  m.def("resize_bilinear", [](const Arr& x, int64_t h, int64_t w) {
    return to_array(ssdm::resize_bilinear(to_tensor(x), h, w));
  });
  m.def("concat_channels", [](const Arr& a, const Arr& b) {
    return to_array(ssdm::concat_channels(to_tensor(a), to_tensor(b)));
  });
  m.def("l2_normalize_channels", [](const Arr& x) {
    return to_array(ssdm::l2_normalize_channels(to_tensor(x)));
  });
  m.def(
      "cross_entropy",
      [](const Arr& logits, const ArrU8& labels, int ignore_index) {
        return ssdm::cross_entropy(to_tensor(logits), to_labels(labels), ignore_index)
            .item();
      },
      py::arg("logits"), py::arg("labels"), py::arg("ignore_index") = 255);

  m.def(
      "row_attention",
      [](const Arr& q, const Arr& k, const Arr& v, const Arr& bias, int64_t heads) {
        return to_array(
            ssdm::row_attention(to_tensor(q), to_tensor(k), to_tensor(v),
                                to_tensor(bias), heads));
      },
      py::arg("q"), py::arg("k"), py::arg("v"), py::arg("bias"), py::arg("heads") = 2);
  m.def(
      "col_attention",
      [](const Arr& q, const Arr& k, const Arr& v, const Arr& bias, int64_t heads) {
        return to_array(
            ssdm::col_attention(to_tensor(q), to_tensor(k), to_tensor(v),
                                to_tensor(bias), heads));
      },
      py::arg("q"), py::arg("k"), py::arg("v"), py::arg("bias"), py::arg("heads") = 2);

  m.def("directional_affinities", [](const Arr& geometry, double tau) {
    auto [gx, gy] = ssdm::directional_affinities(to_tensor(geometry),
                                                 ssdm::Tensor<double>::scalar(tau));
    return py::make_tuple(to_array(gx), to_array(gy));
  });
  m.def("materialize_full_affinity", [](const Arr& geometry, double tau) {
    return to_array(ssdm::materialize_full_affinity(
        to_tensor(geometry), ssdm::Tensor<double>::scalar(tau)));
  });

  m.def("confusion", [](const ArrU8& gt, const ArrU8& pred, int64_t num_classes) {
    const ssdm::ConfusionMatrix cm =
        ssdm::confusion(to_labels(gt), to_labels(pred), num_classes);
    py::array_t<uint64_t> arr({static_cast<py::ssize_t>(num_classes),
                               static_cast<py::ssize_t>(num_classes)});
    std::copy(cm.counts.begin(), cm.counts.end(), arr.mutable_data());
    return arr;
  });
  m.def("compute_metrics", [](const py::array_t<uint64_t>& cm_arr) {
    if (cm_arr.ndim() != 2 || cm_arr.shape(0) != cm_arr.shape(1)) {
      throw ssdm::DimensionError("confusion matrix must be square");
    }
    ssdm::ConfusionMatrix cm(cm_arr.shape(0));
    std::copy(cm_arr.data(), cm_arr.data() + cm_arr.size(), cm.counts.begin());
    const ssdm::MetricSummary s = ssdm::compute_metrics(cm);
    py::dict d;
    d["oa"] = s.oa;
    d["miou"] = s.miou;
    d["macc"] = s.macc;
    d["class_iou"] = s.class_iou;
    d["class_acc"] = s.class_acc;
    d["evaluated_classes"] = s.evaluated_classes;
    return d;
  });
  m.def("fragmentation_index",
        [](const ArrU8& gt, const ArrU8& pred, int64_t num_classes) {
          return ssdm::fragmentation_index(to_labels(gt), to_labels(pred), num_classes);
        });

  m.def(
      "gen_scene",
      [](int64_t height, int64_t width, int64_t classes, int64_t cells, double texture,
         double brightness, int64_t embed_factor, double drift, uint64_t seed,
         int64_t sample_index) {
        const ssdm::SceneSpec spec = spec_from_kwargs(
            height, width, classes, cells, texture, brightness, embed_factor, drift,
            seed);
        spec.validate();
        const ssdm::Rng root = ssdm::sample_rng(spec, sample_index);
        ssdm::Rng label_rng = root.fork("labels");
        ssdm::Rng image_rng = root.fork("image");
        ssdm::Rng embed_rng = root.fork("embed");
        const ssdm::LabelMap labels = ssdm::gen_labelmap(spec, label_rng);
        const auto image = ssdm::render_image(labels, spec, image_rng);
        const auto embedding = ssdm::gen_embedding(labels, spec, embed_rng);

        auto to_f32 = [](const ssdm::Tensor<float>& t) {
          std::vector<py::ssize_t> shape(t.shape().begin(), t.shape().end());
          py::array_t<float> arr(shape);
          std::copy(t.values().begin(), t.values().end(), arr.mutable_data());
          return arr;
        };
        return py::make_tuple(to_f32(image), to_f32(embedding.values),
                              from_labels(labels));
      },
      py::arg("height") = 64, py::arg("width") = 64, py::arg("classes") = 6,
      py::arg("cells") = 12, py::arg("texture") = 0.4, py::arg("brightness") = 0.3,
      py::arg("embed_factor") = 8, py::arg("drift") = 0.0, py::arg("seed") = 0,
      py::arg("sample_index") = 0);

  m.def(
      "gen_dataset",
      [](const std::string& dir, int64_t count, double train_ratio, int64_t height,
         int64_t width, int64_t classes, int64_t cells, double texture,
         double brightness, int64_t embed_factor, double drift, uint64_t seed) {
        const ssdm::SceneSpec spec = spec_from_kwargs(
            height, width, classes, cells, texture, brightness, embed_factor, drift,
            seed);
        const auto index = ssdm::gen_dataset(spec, count, train_ratio, dir);
        return py::make_tuple(index.train_ids, index.test_ids);
      },
      py::arg("dir"), py::arg("count") = 10, py::arg("train_ratio") = 0.8,
      py::arg("height") = 64, py::arg("width") = 64, py::arg("classes") = 6,
      py::arg("cells") = 12, py::arg("texture") = 0.4, py::arg("brightness") = 0.3,
      py::arg("embed_factor") = 8, py::arg("drift") = 0.0, py::arg("seed") = 0);

  m.def(
      "gradcheck_suite",
      [](uint64_t seed, int instances) {
        py::list out;
        for (const auto& c : ssdm::run_gradcheck_suite(seed, instances)) {
          py::dict d;
          d["name"] = c.name;
          d["max_rel_err"] = c.max_rel_err;
          d["coords"] = c.coords;
          d["pass"] = c.pass;
          out.append(std::move(d));
        }
        return out;
      },
      py::arg("seed") = 0, py::arg("instances") = 3);

  m.def(
      "oracle_suite",
      [](uint64_t seed) {
        py::list out;
        for (const auto& c : ssdm::oracles::run_oracle_suite(seed)) {
          py::dict d;
          d["name"] = c.name;
          d["pass"] = c.pass;
          d["detail"] = c.detail;
          out.append(std::move(d));
        }
        return out;
      },
      py::arg("seed") = 0);

  m.def("decomposed_attention_mac_formula", &ssdm::decomposed_attention_mac_formula,
        py::arg("heads"), py::arg("d_head"), py::arg("h"), py::arg("w"));

  m.attr("__version__") = "0.1.0";
}
