#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "aqnn/baselines.hpp"
#include "aqnn/dataset.hpp"
#include "aqnn/gradcheck.hpp"
#include "aqnn/metrics.hpp"
#include "aqnn/model_io.hpp"
#include "aqnn/network.hpp"
#include "aqnn/train.hpp"

namespace py = pybind11;

namespace {

aqnn::FeatureMap column_from(const std::vector<float>& readings) {
  return aqnn::FeatureMap::column(std::vector<float>(readings));
}

py::dict report_dict(const aqnn::ClassificationReport& report) {
  py::dict d;
  d["accuracy"] = report.accuracy;
  py::list classes;
  for (int c = 0; c < aqnn::kNumClasses; ++c) {
    const auto& m = report.per_class[static_cast<std::size_t>(c)];
    py::dict e;
    e["name"] = aqnn::kActivityNames[static_cast<std::size_t>(c)];
    e["precision"] = m.precision;
    e["recall"] = m.recall;
    e["f1"] = m.f1;
    e["support"] = m.support;
    classes.append(e);
  }
  d["classes"] = classes;
  py::dict macro;
  macro["precision"] = report.macro_precision;
  macro["recall"] = report.macro_recall;
  macro["f1"] = report.macro_f1;
  d["macro"] = macro;
  py::dict weighted;
  weighted["precision"] = report.weighted_precision;
  weighted["recall"] = report.weighted_recall;
  weighted["f1"] = report.weighted_f1;
  d["weighted"] = weighted;
  d["total_support"] = report.total_support;
  d["zero_division_flagged"] = report.zero_division_flagged;
  return d;
}

}  // namespace

PYBIND11_MODULE(aqnn, m) {
  m.doc() = "Six-sensor indoor activity classifier: tiny 1D-CNN training, evaluation and "
            "inference";
  m.attr("__version__") = "0.1.0";
  {
    py::list names;
    for (const char* n : aqnn::kActivityNames) names.append(n);
    m.attr("ACTIVITY_NAMES") = names;
    py::list sensors;
    for (const char* n : aqnn::kSensorNames) sensors.append(n);
    m.attr("SENSOR_NAMES") = sensors;
  }

  py::class_<aqnn::Dataset>(m, "Dataset")
      .def("__len__", [](const aqnn::Dataset& ds) { return ds.size(); })
      .def_property_readonly(
          "synthetic",
          [](const aqnn::Dataset& ds) { return ds.provenance == aqnn::Provenance::synthetic; })
      .def("rows",
           [](const aqnn::Dataset& ds) {
             py::list rows;
             for (const aqnn::SensorSample& s : ds.samples) {
               py::list readings;
               for (float r : s.readings) readings.append(r);
               rows.append(py::make_tuple(readings, s.label ? py::cast(*s.label) : py::none()));
             }
             return rows;
           })
      .def("class_distribution", [](const aqnn::Dataset& ds) {
        const aqnn::ClassCounts counts = aqnn::class_distribution(ds);
        return std::vector<long>(counts.counts.begin(), counts.counts.end());
      });

  py::class_<aqnn::NormStats>(m, "NormStats")
      .def_property_readonly("mean",
                             [](const aqnn::NormStats& s) {
                               return std::vector<float>(s.mean.begin(), s.mean.end());
                             })
      .def_property_readonly("std", [](const aqnn::NormStats& s) {
        return std::vector<float>(s.std.begin(), s.std.end());
      });

  py::class_<aqnn::Network>(m, "Network")
      .def("count_params", [](const aqnn::Network& net) { return aqnn::count_params(net); })
      .def("params", [](const aqnn::Network& net) { return aqnn::get_params(net); });

  py::class_<aqnn::KNNModel>(m, "KNNModel")
      .def_property_readonly("k", [](const aqnn::KNNModel& model) { return model.k; })
      .def("__len__", [](const aqnn::KNNModel& model) { return model.points.size(); });

  m.def("synth_generate", &aqnn::synth_generate, py::arg("n_per_class"), py::arg("seed"));
  m.def("load_csv",
        [](const std::string& path) { return aqnn::load_csv(path); }, py::arg("path"));
  m.def("save_csv",
        [](const aqnn::Dataset& ds, const std::string& path) { aqnn::save_csv(ds, path); },
        py::arg("dataset"), py::arg("path"));
  m.def(
      "shuffle_split",
      [](const aqnn::Dataset& ds, double train, double val, double test, std::uint32_t seed) {
        aqnn::Split split = aqnn::shuffle_split(ds, aqnn::SplitSpec{train, val, test, seed});
        return py::make_tuple(std::move(split.train), std::move(split.val),
                              std::move(split.test));
      },
      py::arg("dataset"), py::arg("train") = 0.7, py::arg("val") = 0.2, py::arg("test") = 0.1,
      py::arg("seed") = 42);
  m.def("fit_normalizer", &aqnn::fit_normalizer, py::arg("train"));

  m.def(
      "reference_cnn",
      [](std::uint32_t seed) { return aqnn::init_network(aqnn::reference_cnn_arch(), seed); },
      py::arg("seed") = 42);
  m.def("reference_mlp", &aqnn::build_mlp, py::arg("seed") = 42);

  m.def(
      "train",
      [](aqnn::Network& net, const aqnn::Dataset& train_ds, const aqnn::Dataset& val_ds,
         const aqnn::NormStats& norm, int epochs, int batch_size, float lr, std::uint32_t seed,
         bool verbose) {
        aqnn::TrainConfig cfg;
        cfg.epochs = epochs;
        cfg.batch_size = batch_size;
        cfg.lr = lr;
        cfg.seed = seed;
        cfg.verbose = verbose;
        aqnn::TrainResult result;
        {
          py::gil_scoped_release release;
          const aqnn::TrainingSet train_set = aqnn::normalize_dataset(train_ds, norm);
          const aqnn::TrainingSet val_set = aqnn::normalize_dataset(val_ds, norm);
          result = aqnn::train(net, train_set, val_set, cfg);
          aqnn::set_params(net, result.best.params);
          net.clear_cache();
        }
        py::list history;
        for (const aqnn::EpochMetrics& e : result.history) {
          py::dict d;
          d["epoch"] = e.epoch;
          d["train_loss"] = e.train_loss;
          d["train_acc"] = e.train_acc;
          d["val_loss"] = e.val_loss;
          d["val_acc"] = e.val_acc;
          history.append(d);
        }
        py::dict out;
        out["history"] = history;
        out["best_epoch"] = result.best.epoch;
        out["best_val_acc"] = result.best.val_acc;
        return out;
      },
      py::arg("net"), py::arg("train"), py::arg("val"), py::arg("norm"), py::arg("epochs") = 200,
      py::arg("batch_size") = 64, py::arg("lr") = 1e-3f, py::arg("seed") = 42,
      py::arg("verbose") = false,
      "Train in place; the network is left at the best-validation checkpoint.");

  m.def(
      "evaluate",
      [](const aqnn::Network& net, const aqnn::Dataset& ds, const aqnn::NormStats& norm) {
        aqnn::EvalResult r;
        {
          py::gil_scoped_release release;
          r = aqnn::evaluate(net, ds, norm);
        }
        py::dict d = report_dict(r.report);
        d["mean_loss"] = r.mean_loss;
        py::list cm;
        for (const auto& row : r.cm.counts) {
          py::list cells;
          for (long c : row) cells.append(c);
          cm.append(cells);
        }
        d["confusion"] = cm;
        return d;
      },
      py::arg("net"), py::arg("dataset"), py::arg("norm"));

  m.def(
      "predict",
      [](const aqnn::Network& net, const aqnn::NormStats& norm,
         const std::vector<float>& readings) {
        if (readings.size() != aqnn::kNumSensors)
          throw std::invalid_argument("predict: expected 6 readings");
        aqnn::SensorSample sample;
        std::copy_n(readings.begin(), aqnn::kNumSensors, sample.readings.begin());
        const std::vector<float> probs = aqnn::infer(net, aqnn::apply_normalizer(sample, norm));
        const int cls = aqnn::predict_class(probs);
        return py::make_tuple(cls, aqnn::kActivityNames[static_cast<std::size_t>(cls)], probs);
      },
      py::arg("net"), py::arg("norm"), py::arg("readings"),
      "Returns (class_index, class_name, probs) for raw sensor readings.");

  m.def(
      "grad_check",
      [](aqnn::Network& net, const std::vector<float>& normalized_input, int target, double eps,
         std::size_t max_params) {
        return aqnn::grad_check(net, column_from(normalized_input), target, eps, max_params);
      },
      py::arg("net"), py::arg("normalized_input"), py::arg("target"), py::arg("eps") = 1e-3,
      py::arg("max_params") = 0);

  m.def(
      "save_model",
      [](const aqnn::Network& net, const aqnn::NormStats& norm, const std::string& path) {
        return aqnn::save_model(net, norm, path);
      },
      py::arg("net"), py::arg("norm"), py::arg("path"));
  m.def(
      "load_model",
      [](const std::string& path) {
        aqnn::LoadedModel loaded = aqnn::load_model(path);
        return py::make_tuple(std::move(loaded.net), loaded.norm);
      },
      py::arg("path"));

  m.def(
      "latency_benchmark",
      [](const aqnn::Network& net, const aqnn::Dataset& ds, const aqnn::NormStats& norm,
         int iterations) {
        std::vector<aqnn::FeatureMap> samples;
        samples.reserve(ds.size());
        for (const aqnn::SensorSample& s : ds.samples)
          samples.push_back(aqnn::apply_normalizer(s, norm));
        aqnn::LatencyStats st;
        {
          py::gil_scoped_release release;
          st = aqnn::latency_benchmark(net, samples, iterations);
        }
        py::dict d;
        d["mean_s"] = st.mean_s;
        d["p50_s"] = st.p50_s;
        d["p99_s"] = st.p99_s;
        d["max_s"] = st.max_s;
        d["count"] = st.count;
        return d;
      },
      py::arg("net"), py::arg("dataset"), py::arg("norm"), py::arg("iterations") = 1000);

  m.def("knn_fit", &aqnn::knn_fit, py::arg("train"), py::arg("norm"), py::arg("k") = 5);
  m.def(
      "knn_predict",
      [](const aqnn::KNNModel& model, const std::vector<float>& normalized_query) {
        return aqnn::knn_predict(model, normalized_query);
      },
      py::arg("model"), py::arg("normalized_query"));
  m.def(
      "knn_evaluate",
      [](const aqnn::KNNModel& model, const aqnn::Dataset& ds, const aqnn::NormStats& norm) {
        const aqnn::KnnEval eval = aqnn::knn_evaluate(model, ds, norm);
        return py::make_tuple(eval.accuracy, eval.predictions);
      },
      py::arg("model"), py::arg("dataset"), py::arg("norm"));
}
