#pragma once

#include "neosleep/boosting.hpp"
#include "neosleep/dataio.hpp"
#include "neosleep/evaluation.hpp"
#include "neosleep/features.hpp"
#include "neosleep/tuning.hpp"

#include <cstdint>
#include <string>

namespace neosleep {

struct FilterConfig {
  double low_hz = 0.3;
  double high_hz = 35.0;
  int n_taps = 4001;
};

/// One reproducible configuration for every pipeline stage. Defaults follow
/// the reference protocol: 30 s epochs, 5% artifact rule, 0.3-35 Hz bandpass,
/// 5 folds, and the tuned gradient-boosting point (149 trees, depth 10,
/// learning rate 0.104).
struct PipelineConfig {
  std::string out_dir = "out";
  std::string records_dir;   // empty -> <out_dir>/records
  std::string features_path; // empty -> <out_dir>/features.csv
  std::string model_path;    // empty -> <out_dir>/model.json

  FilterConfig filter;
  std::string dump_filter_path; // optional coefficient dump

  double epoch_seconds = 30.0;
  double artifact_threshold = 0.05;
  FeatureMode feature_mode = FeatureMode::All14;

  Hyperparams hyperparams;
  SearchSpace search;
  SelectionMetric selection = SelectionMetric::Accuracy;

  int k = 5;
  bool stratify = true;
  bool group_by_record = false;
  double threshold = 0.5;

  SynthConfig synth;
  std::uint64_t seed = 12345;

  std::string resolved_records_dir() const;
  std::string resolved_features_path() const;
  std::string resolved_model_path() const;
};

/// Parse a JSON config file into `cfg` (missing keys keep their values).
void apply_config_file(PipelineConfig& cfg, const std::string& path);
std::string config_to_json(const PipelineConfig& cfg);

struct SynthStats {
  int n_records = 0;
  std::size_t n_epochs = 0;
  std::size_t n_wake = 0;
};

struct FeaturizeStats {
  std::size_t n_records = 0;
  std::size_t n_segments = 0; // pre-exclusion epoch count
  std::size_t n_excluded_artifact = 0;
  std::size_t n_excluded_no_majority = 0;
  std::size_t n_degenerate = 0;
  std::size_t n_rows = 0; // rows written to the feature table
};

struct TrainStats {
  std::size_t n_rows = 0;
  double final_deviance = 0.0;
  double training_accuracy = 0.0;
};

/// synth: write record/annotation files plus the ground-truth epoch labels.
SynthStats run_synth(const PipelineConfig& cfg);

/// featurize: filter -> segment -> label_and_filter -> featurize, one row
/// per kept epoch; writes the feature table and a processing log.
FeaturizeStats run_featurize(const PipelineConfig& cfg);

/// train: fit on the whole feature table, write the model document and the
/// per-stage deviance log.
TrainStats run_train(const PipelineConfig& cfg);

/// tune: random search; writes the leaderboard and the best point as a
/// config fragment loadable by train.
SearchResult run_tune(const PipelineConfig& cfg);

/// evaluate: the full k-fold protocol; writes the metrics table and the ROC
/// export.
CvResult run_evaluate(const PipelineConfig& cfg);

} // namespace neosleep
