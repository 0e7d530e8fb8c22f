// Command-line front end: synth -> featurize -> train/tune -> evaluate, all
// driven by one reproducible config (JSON file, overridable by flags).
#include <CLI11.hpp>

#include "neosleep/pipeline.hpp"

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

using namespace neosleep;

namespace {

struct CliValues {
  std::string config_path;
  std::uint64_t seed = 0;
  std::string out_dir;

  int n_records = 0;
  double record_seconds = 0.0;
  double fs = 0.0;
  double wake_fraction = 0.0;
  double noise_level = 0.0;

  std::string records_dir;
  std::string features_path;
  std::string model_path;
  std::string dump_filter_path;
  double low_hz = 0.0;
  double high_hz = 0.0;
  int n_taps = 0;
  double epoch_seconds = 0.0;
  double artifact_threshold = 0.0;
  std::string feature_mode;

  int n_estimators = 0;
  int max_depth = 0;
  double learning_rate = 0.0;
  int min_samples_leaf = 0;
  double threshold = 0.0;

  std::vector<int> n_estimators_range;
  std::vector<int> max_depth_range;
  std::vector<double> learning_rate_range;
  int n_candidates = 0;
  std::string metric;

  int k = 0;
  bool no_stratify = false;
  bool group_by_record = false;
};

void add_hyperparam_flags(CLI::App* cmd, CliValues& v) {
  cmd->add_option("--n-estimators", v.n_estimators, "boosting stages");
  cmd->add_option("--max-depth", v.max_depth, "tree depth limit");
  cmd->add_option("--learning-rate", v.learning_rate, "shrinkage in (0,1]");
  cmd->add_option("--min-samples-leaf", v.min_samples_leaf,
                  "minimum samples per leaf");
}

void add_table_flags(CLI::App* cmd, CliValues& v) {
  cmd->add_option("--features", v.features_path, "feature table path");
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"single-channel EEG sleep/wake pipeline"};
  app.require_subcommand(1);
  // Let --config/--seed/--out be written after the subcommand name too.
  app.fallthrough();

  CliValues v;
  auto* config_opt =
      app.add_option("--config", v.config_path, "JSON config file")
          ->check(CLI::ExistingFile);
  auto* seed_opt = app.add_option("--seed", v.seed, "master seed");
  auto* out_opt = app.add_option("--out", v.out_dir, "output directory");

  CLI::App* synth = app.add_subcommand("synth", "generate a labeled corpus");
  auto* records_opt = synth->add_option("--records", v.n_records, "record count");
  auto* seconds_opt =
      synth->add_option("--record-seconds", v.record_seconds, "record length");
  auto* fs_opt = synth->add_option("--fs", v.fs, "sampling rate in Hz");
  auto* wake_opt = synth->add_option("--wake-fraction", v.wake_fraction,
                                     "fraction of wake epochs");
  auto* noise_opt =
      synth->add_option("--noise-level", v.noise_level, "shared noise scale");

  CLI::App* featurize =
      app.add_subcommand("featurize", "filter, segment and extract features");
  auto* recdir_opt =
      featurize->add_option("--records-dir", v.records_dir, "input records");
  add_table_flags(featurize, v);
  auto* low_opt = featurize->add_option("--low-hz", v.low_hz, "passband low edge");
  auto* high_opt =
      featurize->add_option("--high-hz", v.high_hz, "passband high edge");
  auto* taps_opt = featurize->add_option("--taps", v.n_taps, "FIR tap count");
  auto* epochsec_opt =
      featurize->add_option("--epoch-seconds", v.epoch_seconds, "epoch length");
  auto* artifact_opt = featurize->add_option(
      "--artifact-threshold", v.artifact_threshold, "exclusion fraction");
  auto* mode_opt = featurize->add_option("--feature-mode", v.feature_mode,
                                         "all14 or paper13");
  auto* dump_opt = featurize->add_option("--dump-filter", v.dump_filter_path,
                                         "write coefficients here");
  auto* synthfs_opt =
      featurize->add_option("--fs", v.fs, "expected sampling rate");

  CLI::App* train_cmd =
      app.add_subcommand("train", "fit the model on a feature table");
  add_table_flags(train_cmd, v);
  auto* model_opt = train_cmd->add_option("--model", v.model_path, "model path");
  add_hyperparam_flags(train_cmd, v);
  auto* thr_train_opt = train_cmd->add_option(
      "--threshold", v.threshold, "decision threshold for the summary");

  CLI::App* tune = app.add_subcommand("tune", "random hyperparameter search");
  add_table_flags(tune, v);
  auto* ne_range_opt =
      tune->add_option("--n-estimators-range", v.n_estimators_range,
                       "lo hi (inclusive)")
          ->expected(2);
  auto* depth_range_opt =
      tune->add_option("--max-depth-range", v.max_depth_range,
                       "lo hi (inclusive)")
          ->expected(2);
  auto* lr_range_opt =
      tune->add_option("--learning-rate-range", v.learning_rate_range,
                       "lo hi, log-uniform on (lo,hi]")
          ->expected(2);
  auto* cands_opt =
      tune->add_option("--candidates", v.n_candidates, "points to draw");
  auto* metric_opt = tune->add_option("--metric", v.metric,
                                      "selection metric: accuracy or kappa");
  auto* k_tune_opt = tune->add_option("--k", v.k, "folds per candidate");

  CLI::App* evaluate =
      app.add_subcommand("evaluate", "k-fold cross-validated metrics");
  add_table_flags(evaluate, v);
  add_hyperparam_flags(evaluate, v);
  auto* k_eval_opt = evaluate->add_option("--k", v.k, "fold count");
  auto* nostrat_opt = evaluate->add_flag("--no-stratify", v.no_stratify,
                                         "plain shuffled folds");
  auto* group_opt = evaluate->add_flag("--group-by-record", v.group_by_record,
                                       "whole records per fold");
  auto* thr_eval_opt =
      evaluate->add_option("--threshold", v.threshold, "decision threshold");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  try {
    PipelineConfig cfg;
    if (config_opt->count()) apply_config_file(cfg, v.config_path);
    if (seed_opt->count()) cfg.seed = v.seed;
    if (out_opt->count()) cfg.out_dir = v.out_dir;

    if (records_opt->count()) cfg.synth.n_records = v.n_records;
    if (seconds_opt->count()) cfg.synth.record_seconds = v.record_seconds;
    if (fs_opt->count() || synthfs_opt->count()) cfg.synth.fs = v.fs;
    if (wake_opt->count()) cfg.synth.wake_fraction = v.wake_fraction;
    if (noise_opt->count()) cfg.synth.noise_level = v.noise_level;

    if (recdir_opt->count()) cfg.records_dir = v.records_dir;
    if (!v.features_path.empty()) cfg.features_path = v.features_path;
    if (model_opt->count()) cfg.model_path = v.model_path;
    if (low_opt->count()) cfg.filter.low_hz = v.low_hz;
    if (high_opt->count()) cfg.filter.high_hz = v.high_hz;
    if (taps_opt->count()) cfg.filter.n_taps = v.n_taps;
    if (epochsec_opt->count()) cfg.epoch_seconds = v.epoch_seconds;
    if (artifact_opt->count()) cfg.artifact_threshold = v.artifact_threshold;
    if (mode_opt->count())
      cfg.feature_mode = feature_mode_from_string(v.feature_mode);
    if (dump_opt->count()) cfg.dump_filter_path = v.dump_filter_path;

    if (v.n_estimators > 0) cfg.hyperparams.n_estimators = v.n_estimators;
    if (v.max_depth > 0) cfg.hyperparams.max_depth = v.max_depth;
    if (v.learning_rate > 0.0) cfg.hyperparams.learning_rate = v.learning_rate;
    if (v.min_samples_leaf > 0)
      cfg.hyperparams.min_samples_leaf = v.min_samples_leaf;
    if (thr_train_opt->count() || thr_eval_opt->count())
      cfg.threshold = v.threshold;

    if (ne_range_opt->count()) {
      cfg.search.n_estimators_lo = v.n_estimators_range[0];
      cfg.search.n_estimators_hi = v.n_estimators_range[1];
    }
    if (depth_range_opt->count()) {
      cfg.search.max_depth_lo = v.max_depth_range[0];
      cfg.search.max_depth_hi = v.max_depth_range[1];
    }
    if (lr_range_opt->count()) {
      cfg.search.learning_rate_lo = v.learning_rate_range[0];
      cfg.search.learning_rate_hi = v.learning_rate_range[1];
    }
    if (cands_opt->count()) cfg.search.n_candidates = v.n_candidates;
    if (metric_opt->count())
      cfg.selection = v.metric == "kappa" ? SelectionMetric::Kappa
                                          : SelectionMetric::Accuracy;
    if (k_tune_opt->count() || k_eval_opt->count()) cfg.k = v.k;
    if (nostrat_opt->count()) cfg.stratify = false;
    if (group_opt->count()) cfg.group_by_record = true;

    if (app.got_subcommand(synth)) {
      const SynthStats stats = run_synth(cfg);
      std::printf("synth: records=%d epochs=%zu wake=%zu -> %s\n",
                  stats.n_records, stats.n_epochs, stats.n_wake,
                  cfg.resolved_records_dir().c_str());
    } else if (app.got_subcommand(featurize)) {
      const FeaturizeStats stats = run_featurize(cfg);
      std::printf("featurize: records=%zu segments=%zu rows=%zu "
                  "excluded_artifact=%zu excluded_no_majority=%zu "
                  "degenerate=%zu -> %s\n",
                  stats.n_records, stats.n_segments, stats.n_rows,
                  stats.n_excluded_artifact, stats.n_excluded_no_majority,
                  stats.n_degenerate, cfg.resolved_features_path().c_str());
    } else if (app.got_subcommand(train_cmd)) {
      const TrainStats stats = run_train(cfg);
      std::printf("train: rows=%zu final_deviance=%.6f "
                  "training_accuracy=%.2f%% -> %s\n",
                  stats.n_rows, stats.final_deviance, stats.training_accuracy,
                  cfg.resolved_model_path().c_str());
    } else if (app.got_subcommand(tune)) {
      const SearchResult result = run_tune(cfg);
      std::printf("tune: best n_estimators=%d max_depth=%d "
                  "learning_rate=%g mean_acc=%.2f%% -> %s\n",
                  result.best.n_estimators, result.best.max_depth,
                  result.best.learning_rate,
                  result.leaderboard.front().mean_accuracy,
                  cfg.out_dir.c_str());
    } else if (app.got_subcommand(evaluate)) {
      const CvResult cv = run_evaluate(cfg);
      std::fputs(format_metrics_report(cv).c_str(), stdout);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
