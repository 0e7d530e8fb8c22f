// Python bindings for the core operations: filtering, features, boosting,
// cross-validation and the synthetic generator.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "neosleep/boosting.hpp"
#include "neosleep/dataio.hpp"
#include "neosleep/evaluation.hpp"
#include "neosleep/features.hpp"
#include "neosleep/filtering.hpp"

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace py = pybind11;
using namespace neosleep;

namespace {

Matrix to_matrix(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw std::invalid_argument("empty feature matrix");
  Matrix x(rows.size(), rows[0].size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != x.cols)
      throw std::invalid_argument("ragged feature matrix");
    std::copy(rows[r].begin(), rows[r].end(), x.row(r));
  }
  return x;
}

} // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "single-channel EEG sleep/wake pipeline core";

  m.def(
      "filter_signal",
      [](const std::vector<double>& signal, double fs, double low_hz,
         double high_hz, int n_taps) {
        const FirFilter f = design_bandpass(fs, low_hz, high_hz, n_taps);
        return apply(f, signal);
      },
      py::arg("signal"), py::arg("fs"), py::arg("low_hz") = 0.3,
      py::arg("high_hz") = 35.0, py::arg("n_taps") = 4001,
      "Zero-delay FIR bandpass with reflection padding.");

  m.def(
      "filter_response",
      [](double fs, double low_hz, double high_hz, int n_taps,
         const std::vector<double>& freqs) {
        const FirFilter f = design_bandpass(fs, low_hz, high_hz, n_taps);
        std::vector<double> mags;
        mags.reserve(freqs.size());
        for (double hz : freqs) mags.push_back(frequency_response(f, hz));
        return mags;
      },
      py::arg("fs"), py::arg("low_hz"), py::arg("high_hz"), py::arg("n_taps"),
      py::arg("freqs"), "Magnitude response of the designed filter.");

  m.def(
      "hjorth",
      [](const std::vector<double>& signal) {
        const HjorthParams h = hjorth(std::span<const double>(signal));
        return py::make_tuple(h.activity, h.mobility, h.complexity);
      },
      py::arg("signal"), "(activity, mobility, complexity)");

  m.def(
      "featurize",
      [](const std::vector<double>& signal, double fs) {
        const FeatureVector fv =
            featurize(std::span<const double>(signal), fs);
        const auto names = feature_names(FeatureMode::All14);
        const auto values = feature_values(fv, FeatureMode::All14);
        py::dict out;
        for (std::size_t i = 0; i < names.size(); ++i)
          out[py::str(names[i])] = values[i];
        return out;
      },
      py::arg("signal"), py::arg("fs"),
      "All per-epoch features as a name -> value dict.");

  m.def("feature_names", [] { return feature_names(FeatureMode::All14); });

  py::class_<Hyperparams>(m, "Hyperparams")
      .def(py::init([](int n_estimators, int max_depth, double learning_rate,
                       int min_samples_leaf) {
             Hyperparams hp;
             hp.n_estimators = n_estimators;
             hp.max_depth = max_depth;
             hp.learning_rate = learning_rate;
             hp.min_samples_leaf = min_samples_leaf;
             return hp;
           }),
           py::arg("n_estimators") = 149, py::arg("max_depth") = 10,
           py::arg("learning_rate") = 0.104, py::arg("min_samples_leaf") = 5)
      .def_readwrite("n_estimators", &Hyperparams::n_estimators)
      .def_readwrite("max_depth", &Hyperparams::max_depth)
      .def_readwrite("learning_rate", &Hyperparams::learning_rate)
      .def_readwrite("min_samples_leaf", &Hyperparams::min_samples_leaf);

  py::class_<GbtModel>(m, "Model")
      .def_readonly("initial_score", &GbtModel::initial_score)
      .def_readonly("feature_names", &GbtModel::feature_names)
      .def_property_readonly(
          "n_stages", [](const GbtModel& mod) { return mod.stages.size(); })
      .def("predict_proba",
           [](const GbtModel& mod, const std::vector<double>& x) {
             return predict_proba(mod, std::span<const double>(x));
           })
      .def("predict",
           [](const GbtModel& mod, const std::vector<double>& x,
              double threshold) {
             return predict_label(mod, std::span<const double>(x), threshold);
           },
           py::arg("x"), py::arg("threshold") = 0.5)
      .def("to_json", [](const GbtModel& mod) { return save_model(mod); })
      .def("save", [](const GbtModel& mod, const std::string& path) {
        save_model_file(mod, path);
      });

  m.def(
      "train",
      [](const std::vector<std::vector<double>>& rows,
         const std::vector<int>& labels, const Hyperparams& hp,
         std::uint64_t seed) { return train(to_matrix(rows), labels, hp, seed); },
      py::arg("x"), py::arg("labels"), py::arg("hp") = Hyperparams{},
      py::arg("seed") = 0, "Gradient-boosted trees on the logistic loss.");

  m.def("load_model",
        [](const std::string& path) { return load_model_file(path); });
  m.def("model_from_json",
        [](const std::string& text) { return load_model(text); });

  m.def(
      "cross_validate",
      [](const std::vector<std::vector<double>>& rows,
         const std::vector<int>& labels, const Hyperparams& hp, int k,
         std::uint64_t seed) {
        const CvResult cv = cross_validate(to_matrix(rows), labels, hp, k, seed);
        py::dict out;
        out["pooled_accuracy"] = cv.pooled_metrics.accuracy;
        out["pooled_sensitivity"] = cv.pooled_metrics.sensitivity;
        out["pooled_specificity"] = cv.pooled_metrics.specificity;
        out["pooled_kappa"] = cv.pooled_metrics.kappa;
        out["pooled_auc"] = cv.pooled_roc.auc;
        out["mean_accuracy"] = cv.mean_metrics.accuracy;
        out["sd_accuracy"] = cv.sd_metrics.accuracy;
        out["mean_auc"] = cv.mean_auc;
        std::vector<double> fold_acc;
        for (const Metrics& f : cv.fold_metrics) fold_acc.push_back(f.accuracy);
        out["fold_accuracies"] = fold_acc;
        return out;
      },
      py::arg("x"), py::arg("labels"), py::arg("hp") = Hyperparams{},
      py::arg("k") = 5, py::arg("seed") = 0,
      "Stratified k-fold protocol; returns the headline numbers.");

  m.def(
      "generate_record",
      [](int record_index, double seconds, double fs, double wake_fraction,
         double noise_level, std::uint64_t seed) {
        SynthConfig cfg;
        cfg.record_seconds = seconds;
        cfg.fs = fs;
        cfg.wake_fraction = wake_fraction;
        cfg.noise_level = noise_level;
        cfg.seed = seed;
        std::vector<Stage> stages;
        const EegRecord rec = generate_synthetic_record(cfg, record_index, &stages);
        std::vector<int> labels;
        labels.reserve(stages.size());
        for (Stage s : stages) labels.push_back(s == Stage::Wake ? 1 : 0);
        return py::make_tuple(rec.samples, labels);
      },
      py::arg("record_index") = 0, py::arg("seconds") = 300.0,
      py::arg("fs") = 500.0, py::arg("wake_fraction") = 0.4,
      py::arg("noise_level") = 1.0, py::arg("seed") = 0,
      "(samples, epoch_labels) for one synthetic record.");
}
