#include "neosleep/pipeline.hpp"

#include "neosleep/errors.hpp"
#include "neosleep/filtering.hpp"
#include "neosleep/seeding.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace neosleep {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

std::string join(const std::string& dir, const std::string& leaf) {
  return (fs::path(dir) / leaf).string();
}

void write_text(const std::string& path, const std::string& text) {
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty()) {
    std::error_code ec;
    fs::create_directories(parent, ec);
    if (ec) throw IoError("cannot create " + parent.string());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("write failed for " + path);
}

std::string format_double(double v) {
  char num[64];
  const auto res = std::to_chars(num, num + sizeof(num), v);
  return std::string(num, res.ptr);
}

std::string selection_to_string(SelectionMetric m) {
  return m == SelectionMetric::Kappa ? "kappa" : "accuracy";
}

SelectionMetric selection_from_string(const std::string& s) {
  if (s == "accuracy") return SelectionMetric::Accuracy;
  if (s == "kappa") return SelectionMetric::Kappa;
  throw ParameterError("unknown selection metric '" + s + "'");
}

} // namespace

std::string PipelineConfig::resolved_records_dir() const {
  return records_dir.empty() ? join(out_dir, "records") : records_dir;
}

std::string PipelineConfig::resolved_features_path() const {
  return features_path.empty() ? join(out_dir, "features.csv") : features_path;
}

std::string PipelineConfig::resolved_model_path() const {
  return model_path.empty() ? join(out_dir, "model.json") : model_path;
}

void apply_config_file(PipelineConfig& cfg, const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();

  ordered_json j;
  try {
    j = ordered_json::parse(ss.str());
  } catch (const std::exception& e) {
    throw ParseError(path, 0, e.what());
  }
  if (!j.is_object()) throw ParseError(path, 0, "config must be an object");

  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "out_dir") {
        cfg.out_dir = value.get<std::string>();
      } else if (key == "records_dir") {
        cfg.records_dir = value.get<std::string>();
      } else if (key == "features_path") {
        cfg.features_path = value.get<std::string>();
      } else if (key == "model_path") {
        cfg.model_path = value.get<std::string>();
      } else if (key == "dump_filter_path") {
        cfg.dump_filter_path = value.get<std::string>();
      } else if (key == "filter") {
        if (value.contains("low_hz")) cfg.filter.low_hz = value.at("low_hz");
        if (value.contains("high_hz")) cfg.filter.high_hz = value.at("high_hz");
        if (value.contains("n_taps")) cfg.filter.n_taps = value.at("n_taps");
      } else if (key == "epoch_seconds") {
        cfg.epoch_seconds = value;
      } else if (key == "artifact_threshold") {
        cfg.artifact_threshold = value;
      } else if (key == "feature_mode") {
        cfg.feature_mode = feature_mode_from_string(value.get<std::string>());
      } else if (key == "hyperparams") {
        if (value.contains("n_estimators"))
          cfg.hyperparams.n_estimators = value.at("n_estimators");
        if (value.contains("max_depth"))
          cfg.hyperparams.max_depth = value.at("max_depth");
        if (value.contains("learning_rate"))
          cfg.hyperparams.learning_rate = value.at("learning_rate");
        if (value.contains("min_samples_leaf"))
          cfg.hyperparams.min_samples_leaf = value.at("min_samples_leaf");
      } else if (key == "search") {
        if (value.contains("n_estimators")) {
          cfg.search.n_estimators_lo = value.at("n_estimators").at(0);
          cfg.search.n_estimators_hi = value.at("n_estimators").at(1);
        }
        if (value.contains("max_depth")) {
          cfg.search.max_depth_lo = value.at("max_depth").at(0);
          cfg.search.max_depth_hi = value.at("max_depth").at(1);
        }
        if (value.contains("learning_rate")) {
          cfg.search.learning_rate_lo = value.at("learning_rate").at(0);
          cfg.search.learning_rate_hi = value.at("learning_rate").at(1);
        }
        if (value.contains("n_candidates"))
          cfg.search.n_candidates = value.at("n_candidates");
        if (value.contains("min_samples_leaf"))
          cfg.search.min_samples_leaf = value.at("min_samples_leaf");
      } else if (key == "selection") {
        cfg.selection = selection_from_string(value.get<std::string>());
      } else if (key == "k") {
        cfg.k = value;
      } else if (key == "stratify") {
        cfg.stratify = value;
      } else if (key == "group_by_record") {
        cfg.group_by_record = value;
      } else if (key == "threshold") {
        cfg.threshold = value;
      } else if (key == "synth") {
        if (value.contains("n_records"))
          cfg.synth.n_records = value.at("n_records");
        if (value.contains("record_seconds"))
          cfg.synth.record_seconds = value.at("record_seconds");
        if (value.contains("fs")) cfg.synth.fs = value.at("fs");
        if (value.contains("wake_fraction"))
          cfg.synth.wake_fraction = value.at("wake_fraction");
        if (value.contains("noise_level"))
          cfg.synth.noise_level = value.at("noise_level");
      } else if (key == "seed") {
        cfg.seed = value.get<std::uint64_t>();
      } else {
        throw ParameterError("unknown config key '" + key + "' in " + path);
      }
    }
  } catch (const ordered_json::exception& e) {
    throw ParseError(path, 0, e.what());
  }
}

std::string config_to_json(const PipelineConfig& cfg) {
  ordered_json j;
  j["out_dir"] = cfg.out_dir;
  if (!cfg.records_dir.empty()) j["records_dir"] = cfg.records_dir;
  if (!cfg.features_path.empty()) j["features_path"] = cfg.features_path;
  if (!cfg.model_path.empty()) j["model_path"] = cfg.model_path;
  j["filter"] = {{"low_hz", cfg.filter.low_hz},
                 {"high_hz", cfg.filter.high_hz},
                 {"n_taps", cfg.filter.n_taps}};
  if (!cfg.dump_filter_path.empty())
    j["dump_filter_path"] = cfg.dump_filter_path;
  j["epoch_seconds"] = cfg.epoch_seconds;
  j["artifact_threshold"] = cfg.artifact_threshold;
  j["feature_mode"] = to_string(cfg.feature_mode);
  j["hyperparams"] = {{"n_estimators", cfg.hyperparams.n_estimators},
                      {"max_depth", cfg.hyperparams.max_depth},
                      {"learning_rate", cfg.hyperparams.learning_rate},
                      {"min_samples_leaf", cfg.hyperparams.min_samples_leaf}};
  j["search"] = {
      {"n_estimators",
       {cfg.search.n_estimators_lo, cfg.search.n_estimators_hi}},
      {"max_depth", {cfg.search.max_depth_lo, cfg.search.max_depth_hi}},
      {"learning_rate",
       {cfg.search.learning_rate_lo, cfg.search.learning_rate_hi}},
      {"n_candidates", cfg.search.n_candidates},
      {"min_samples_leaf", cfg.search.min_samples_leaf}};
  j["selection"] = selection_to_string(cfg.selection);
  j["k"] = cfg.k;
  j["stratify"] = cfg.stratify;
  j["group_by_record"] = cfg.group_by_record;
  j["threshold"] = cfg.threshold;
  j["synth"] = {{"n_records", cfg.synth.n_records},
                {"record_seconds", cfg.synth.record_seconds},
                {"fs", cfg.synth.fs},
                {"wake_fraction", cfg.synth.wake_fraction},
                {"noise_level", cfg.synth.noise_level}};
  j["seed"] = cfg.seed;
  return j.dump(2) + "\n";
}

SynthStats run_synth(const PipelineConfig& cfg) {
  SynthConfig sc = cfg.synth;
  sc.seed = cfg.seed;

  const std::string records_dir = cfg.resolved_records_dir();
  std::error_code ec;
  fs::create_directories(records_dir, ec);
  if (ec) throw IoError("cannot create " + records_dir);

  SynthStats stats;
  std::vector<std::string> gt_records;
  std::vector<int> gt_indices;
  std::vector<Stage> gt_labels;

  for (int r = 0; r < sc.n_records; ++r) {
    std::vector<Stage> labels;
    const EegRecord rec = generate_synthetic_record(sc, r, &labels);
    save_record(rec, join(records_dir, rec.record_id + ".rec"),
                join(records_dir, rec.record_id + ".ann"));
    for (std::size_t e = 0; e < labels.size(); ++e) {
      gt_records.push_back(rec.record_id);
      gt_indices.push_back(static_cast<int>(e));
      gt_labels.push_back(labels[e]);
      if (labels[e] == Stage::Wake) ++stats.n_wake;
    }
    stats.n_epochs += labels.size();
    ++stats.n_records;
  }

  write_epoch_labels(join(cfg.out_dir, "ground_truth.csv"), gt_records,
                     gt_indices, gt_labels);
  return stats;
}

FeaturizeStats run_featurize(const PipelineConfig& cfg) {
  const std::string records_dir = cfg.resolved_records_dir();
  if (!fs::is_directory(records_dir))
    throw IoError("record directory not found: " + records_dir);

  std::vector<std::string> record_paths;
  for (const auto& entry : fs::directory_iterator(records_dir))
    if (entry.is_regular_file() && entry.path().extension() == ".rec")
      record_paths.push_back(entry.path().string());
  std::sort(record_paths.begin(), record_paths.end());
  if (record_paths.empty())
    throw IoError("no .rec files in " + records_dir);

  const FirFilter filter = design_bandpass(
      cfg.synth.fs, cfg.filter.low_hz, cfg.filter.high_hz, cfg.filter.n_taps);
  if (!cfg.dump_filter_path.empty()) dump_taps(filter, cfg.dump_filter_path);

  std::string log = "filter: low_hz=" + format_double(cfg.filter.low_hz) +
                    " high_hz=" + format_double(cfg.filter.high_hz) +
                    " n_taps=" + std::to_string(cfg.filter.n_taps) + "\n";

  FeaturizeStats stats;
  FeatureTable table;
  table.feature_names = feature_names(cfg.feature_mode);
  table.x.cols = table.feature_names.size();

  for (const std::string& path : record_paths) {
    EegRecord rec = load_record(path);
    // The filter is designed once at the corpus rate; a record at a
    // different rate gets its own design for the same band.
    const FirFilter* active = &filter;
    FirFilter own;
    if (rec.fs != filter.fs) {
      own = design_bandpass(rec.fs, cfg.filter.low_hz, cfg.filter.high_hz,
                            cfg.filter.n_taps);
      active = &own;
    }
    rec.samples = neosleep::apply(*active, rec.samples);

    const std::vector<Epoch> all = segment(rec, cfg.epoch_seconds);
    LabelStats label_stats;
    const std::vector<Epoch> kept =
        label_and_filter(all, rec, cfg.artifact_threshold, &label_stats);

    std::size_t degenerate = 0;
    for (const Epoch& epoch : kept) {
      FeatureVector fv;
      try {
        fv = featurize(epoch, rec.fs);
      } catch (const DegenerateSignalError& e) {
        ++degenerate;
        log += std::string("skip: ") + e.what() + "\n";
        continue;
      }
      const std::vector<double> row = feature_values(fv, cfg.feature_mode);
      table.record_ids.push_back(epoch.record_id);
      table.epoch_indices.push_back(epoch.index);
      table.labels.push_back(epoch.label == Stage::Wake ? 1 : 0);
      table.x.values.insert(table.x.values.end(), row.begin(), row.end());
      ++table.x.rows;
    }

    log += rec.record_id + ": segments=" + std::to_string(all.size()) +
           " kept=" + std::to_string(kept.size() - degenerate) +
           " excluded_artifact=" + std::to_string(label_stats.excluded_artifact) +
           " excluded_no_majority=" +
           std::to_string(label_stats.excluded_no_majority) +
           " degenerate=" + std::to_string(degenerate) + "\n";

    ++stats.n_records;
    stats.n_segments += all.size();
    stats.n_excluded_artifact += label_stats.excluded_artifact;
    stats.n_excluded_no_majority += label_stats.excluded_no_majority;
    stats.n_degenerate += degenerate;
  }
  stats.n_rows = table.size();

  log += "total: records=" + std::to_string(stats.n_records) +
         " segments=" + std::to_string(stats.n_segments) +
         " excluded_artifact=" + std::to_string(stats.n_excluded_artifact) +
         " excluded_no_majority=" +
         std::to_string(stats.n_excluded_no_majority) +
         " degenerate=" + std::to_string(stats.n_degenerate) +
         " rows=" + std::to_string(stats.n_rows) + "\n";

  const std::string features_path = cfg.resolved_features_path();
  const fs::path parent = fs::path(features_path).parent_path();
  if (!parent.empty()) {
    std::error_code ec;
    fs::create_directories(parent, ec);
    if (ec) throw IoError("cannot create " + parent.string());
  }
  write_feature_table(table, features_path);
  write_text(join(cfg.out_dir, "featurize.log"), log);
  return stats;
}

TrainStats run_train(const PipelineConfig& cfg) {
  const FeatureTable table = read_feature_table(cfg.resolved_features_path());

  std::vector<double> deviance_log;
  GbtModel model = train(table.x, table.labels, cfg.hyperparams,
                         derive_seed(cfg.seed, "train"), &deviance_log);
  model.feature_names = table.feature_names;
  save_model_file(model, cfg.resolved_model_path());

  std::string log = "stage,mean_deviance\n";
  for (std::size_t s = 0; s < deviance_log.size(); ++s) {
    log += std::to_string(s);
    log += ',';
    log += format_double(deviance_log[s]);
    log += '\n';
  }
  write_text(join(cfg.out_dir, "train_log.csv"), log);

  TrainStats stats;
  stats.n_rows = table.size();
  stats.final_deviance = deviance_log.back();
  std::size_t correct = 0;
  for (std::size_t i = 0; i < table.size(); ++i) {
    const std::span<const double> row(table.x.row(i), table.x.cols);
    if (predict_label(model, row, cfg.threshold) == table.labels[i]) ++correct;
  }
  stats.training_accuracy =
      100.0 * static_cast<double>(correct) / static_cast<double>(table.size());
  return stats;
}

SearchResult run_tune(const PipelineConfig& cfg) {
  const FeatureTable table = read_feature_table(cfg.resolved_features_path());

  SearchSpace space = cfg.search;
  space.seed = derive_seed(cfg.seed, "tune-sample");
  const SearchResult result =
      random_search(table.x, table.labels, space, cfg.k,
                    derive_seed(cfg.seed, "tune"), cfg.selection);

  write_text(join(cfg.out_dir, "leaderboard.csv"), format_leaderboard(result));

  ordered_json best;
  best["hyperparams"] = {
      {"n_estimators", result.best.n_estimators},
      {"max_depth", result.best.max_depth},
      {"learning_rate", result.best.learning_rate},
      {"min_samples_leaf", result.best.min_samples_leaf}};
  write_text(join(cfg.out_dir, "best_config.json"), best.dump(2) + "\n");
  return result;
}

CvResult run_evaluate(const PipelineConfig& cfg) {
  const FeatureTable table = read_feature_table(cfg.resolved_features_path());

  CvOptions options;
  options.k = cfg.k;
  options.seed = cfg.seed;
  options.stratify = cfg.stratify;
  options.threshold = cfg.threshold;
  if (cfg.group_by_record) options.groups = &table.record_ids;

  const CvResult cv =
      cross_validate(table.x, table.labels, cfg.hyperparams, options);
  write_text(join(cfg.out_dir, "metrics.txt"), format_metrics_report(cv));
  write_text(join(cfg.out_dir, "roc.csv"), format_roc_export(cv));
  return cv;
}

} // namespace neosleep
