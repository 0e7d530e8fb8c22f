#include <doctest.h>

#include "neosleep/errors.hpp"
#include "neosleep/pipeline.hpp"
#include "test_util.hpp"

#include <filesystem>
#include <sstream>
#include <string>

using namespace neosleep;
namespace fs = std::filesystem;

namespace {

PipelineConfig tiny_config(const testutil::TempDir& dir) {
  PipelineConfig cfg;
  cfg.out_dir = dir.str("out");
  cfg.synth.n_records = 3;
  cfg.synth.record_seconds = 120.0;
  cfg.synth.fs = 100.0;
  cfg.synth.wake_fraction = 0.5;
  cfg.synth.noise_level = 0.5;
  cfg.k = 3;
  return cfg;
}

} // namespace

TEST_CASE("synth stage writes the corpus and its ground truth") {
  testutil::TempDir dir("pipe_synth");
  const PipelineConfig cfg = tiny_config(dir);
  const SynthStats stats = run_synth(cfg);

  CHECK(stats.n_records == 3);
  CHECK(stats.n_epochs == 12); // 3 records x 120 s / 30 s
  CHECK(stats.n_wake == 6);    // wake_fraction 0.5, exact per record

  for (int r = 0; r < 3; ++r) {
    const std::string stem =
        cfg.resolved_records_dir() + "/record_00" + std::to_string(r);
    CHECK(fs::exists(stem + ".rec"));
    CHECK(fs::exists(stem + ".ann"));
  }

  // stats agree with the written ground-truth table
  const std::string gt = testutil::read_file(dir.str("out/ground_truth.csv"));
  std::istringstream in(gt);
  std::string line;
  std::getline(in, line);
  CHECK(line == "record_id,epoch_index,label");
  std::size_t rows = 0, wake = 0;
  while (std::getline(in, line)) {
    ++rows;
    if (line.find(",wake") != std::string::npos) ++wake;
  }
  CHECK(rows == stats.n_epochs);
  CHECK(wake == stats.n_wake);

  SUBCASE("rerun reproduces identical record files") {
    const std::string before =
        testutil::read_file(cfg.resolved_records_dir() + "/record_001.rec");
    run_synth(cfg);
    CHECK(testutil::read_file(cfg.resolved_records_dir() +
                              "/record_001.rec") == before);
  }
}

TEST_CASE("featurize stage builds the labeled feature table") {
  testutil::TempDir dir("pipe_feat");
  PipelineConfig cfg = tiny_config(dir);
  cfg.dump_filter_path = dir.str("taps.txt");
  run_synth(cfg);
  const FeaturizeStats stats = run_featurize(cfg);

  CHECK(stats.n_records == 3);
  CHECK(stats.n_segments == 12);
  CHECK(stats.n_excluded_artifact == 0); // the generator injects none
  CHECK(stats.n_excluded_no_majority == 0);
  CHECK(stats.n_degenerate == 0);
  CHECK(stats.n_rows == 12);

  const FeatureTable table = read_feature_table(cfg.resolved_features_path());
  CHECK(table.size() == 12);
  CHECK(table.feature_names == feature_names(FeatureMode::All14));
  CHECK(table.record_ids.front() == "record_000");

  const std::string log = testutil::read_file(dir.str("out/featurize.log"));
  CHECK(log.find("filter: low_hz=0.3 high_hz=35 n_taps=4001") !=
        std::string::npos);
  CHECK(log.find("record_000: segments=4 kept=4") != std::string::npos);
  CHECK(log.find("total:") != std::string::npos);

  // coefficient dump: one tap per line
  const std::string taps = testutil::read_file(dir.str("taps.txt"));
  std::size_t lines = 0;
  for (char c : taps)
    if (c == '\n') ++lines;
  CHECK(lines == 4001);

  SUBCASE("feature rows match the ground-truth labels") {
    const std::string gt = testutil::read_file(dir.str("out/ground_truth.csv"));
    std::istringstream in(gt);
    std::string line;
    std::getline(in, line); // header
    std::size_t i = 0;
    while (std::getline(in, line)) {
      REQUIRE(i < table.size());
      const bool wake = line.find(",wake") != std::string::npos;
      CHECK(table.labels[i] == (wake ? 1 : 0));
      ++i;
    }
    CHECK(i == table.size());
  }

  SUBCASE("stage isolation: regeneration is byte-identical") {
    const std::string before = testutil::read_file(cfg.resolved_features_path());
    fs::remove(cfg.resolved_features_path());
    run_featurize(cfg);
    CHECK(testutil::read_file(cfg.resolved_features_path()) == before);
  }

  SUBCASE("paper-13 mode drops the redundant column") {
    PipelineConfig alt = cfg;
    alt.feature_mode = FeatureMode::Paper13;
    alt.features_path = dir.str("out/f13.csv");
    run_featurize(alt);
    const FeatureTable t13 = read_feature_table(dir.str("out/f13.csv"));
    CHECK(t13.feature_names.size() == 13);
  }
}

TEST_CASE("train stage persists the model and its deviance trace") {
  testutil::TempDir dir("pipe_train");
  PipelineConfig cfg = tiny_config(dir);
  cfg.hyperparams.n_estimators = 25;
  cfg.hyperparams.max_depth = 3;
  cfg.hyperparams.learning_rate = 0.25;
  cfg.hyperparams.min_samples_leaf = 2;
  run_synth(cfg);
  run_featurize(cfg);
  const TrainStats stats = run_train(cfg);

  CHECK(stats.n_rows == 12);
  CHECK(stats.final_deviance > 0.0);
  CHECK(stats.training_accuracy >= 50.0);

  const GbtModel model = load_model_file(cfg.resolved_model_path());
  CHECK(model.hyperparams == cfg.hyperparams);
  CHECK(model.feature_names == feature_names(FeatureMode::All14));
  CHECK(model.stages.size() == 25);

  const std::string log = testutil::read_file(dir.str("out/train_log.csv"));
  std::istringstream in(log);
  std::string line;
  std::getline(in, line);
  CHECK(line == "stage,mean_deviance");
  std::size_t rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 26); // prior plus one row per stage
}

TEST_CASE("tune stage emits a leaderboard and a loadable best config") {
  testutil::TempDir dir("pipe_tune");
  PipelineConfig cfg = tiny_config(dir);
  cfg.search.n_estimators_lo = cfg.search.n_estimators_hi = 7;
  cfg.search.max_depth_lo = cfg.search.max_depth_hi = 2;
  cfg.search.learning_rate_lo = cfg.search.learning_rate_hi = 0.25;
  cfg.search.n_candidates = 2;
  cfg.search.min_samples_leaf = 2;
  cfg.k = 2;
  run_synth(cfg);
  run_featurize(cfg);
  const SearchResult result = run_tune(cfg);

  CHECK(result.best.n_estimators == 7);
  CHECK(result.best.max_depth == 2);
  CHECK(result.best.learning_rate == 0.25);
  CHECK(result.leaderboard.size() == 2);
  CHECK(fs::exists(dir.str("out/leaderboard.csv")));

  // the emitted best point feeds straight back into a config
  PipelineConfig loaded;
  apply_config_file(loaded, dir.str("out/best_config.json"));
  CHECK(loaded.hyperparams.n_estimators == 7);
  CHECK(loaded.hyperparams.max_depth == 2);
  CHECK(loaded.hyperparams.learning_rate == 0.25);

  const std::string board = testutil::read_file(dir.str("out/leaderboard.csv"));
  CHECK(board.rfind("rank,", 0) == 0);
}

TEST_CASE("evaluate stage writes metrics and roc exports deterministically") {
  testutil::TempDir dir("pipe_eval");
  PipelineConfig cfg = tiny_config(dir);
  cfg.hyperparams.n_estimators = 10;
  cfg.hyperparams.max_depth = 2;
  cfg.hyperparams.learning_rate = 0.3;
  cfg.hyperparams.min_samples_leaf = 2;
  run_synth(cfg);
  run_featurize(cfg);
  const CvResult cv = run_evaluate(cfg);

  CHECK(cv.fold_metrics.size() == 3);
  CHECK(cv.pooled_cm.total() == 12);

  const std::string metrics = testutil::read_file(dir.str("out/metrics.txt"));
  CHECK(metrics.find("folds: 3") != std::string::npos);
  CHECK(metrics.find("pooled:") != std::string::npos);
  const std::string roc_csv = testutil::read_file(dir.str("out/roc.csv"));
  CHECK(roc_csv.rfind("fold,fp_rate,tp_rate\n", 0) == 0);

  SUBCASE("second run is byte-identical") {
    run_evaluate(cfg);
    CHECK(testutil::read_file(dir.str("out/metrics.txt")) == metrics);
    CHECK(testutil::read_file(dir.str("out/roc.csv")) == roc_csv);
  }

  SUBCASE("record-wise folds keep epochs of one record together") {
    PipelineConfig grouped = cfg;
    grouped.group_by_record = true;
    const CvResult gcv = run_evaluate(grouped);
    const FeatureTable table =
        read_feature_table(cfg.resolved_features_path());
    for (std::size_t i = 1; i < table.size(); ++i)
      if (table.record_ids[i] == table.record_ids[i - 1])
        CHECK(gcv.fold_assignment[i] == gcv.fold_assignment[i - 1]);
  }
}

TEST_CASE("config files round-trip and reject unknown keys") {
  testutil::TempDir dir("pipe_cfg");

  PipelineConfig cfg;
  cfg.out_dir = "elsewhere";
  cfg.filter.low_hz = 0.5;
  cfg.filter.high_hz = 30.0;
  cfg.filter.n_taps = 1001;
  cfg.epoch_seconds = 20.0;
  cfg.artifact_threshold = 0.1;
  cfg.feature_mode = FeatureMode::Paper13;
  cfg.hyperparams.n_estimators = 42;
  cfg.hyperparams.learning_rate = 0.125;
  cfg.search.n_candidates = 9;
  cfg.search.learning_rate_lo = 0.0625;
  cfg.selection = SelectionMetric::Kappa;
  cfg.k = 4;
  cfg.stratify = false;
  cfg.group_by_record = true;
  cfg.threshold = 0.375;
  cfg.synth.n_records = 5;
  cfg.synth.noise_level = 2.5;
  cfg.seed = 777;

  const std::string text = config_to_json(cfg);
  testutil::write_file(dir.str("cfg.json"), text);

  PipelineConfig back;
  apply_config_file(back, dir.str("cfg.json"));
  CHECK(config_to_json(back) == text);
  CHECK(back.hyperparams.n_estimators == 42);
  CHECK(back.filter.n_taps == 1001);
  CHECK(back.synth.n_records == 5);
  CHECK(back.seed == 777);
  CHECK(back.feature_mode == FeatureMode::Paper13);
  CHECK(back.selection == SelectionMetric::Kappa);
  CHECK_FALSE(back.stratify);

  SUBCASE("unknown keys are an error") {
    testutil::write_file(dir.str("bad.json"), R"({"lerning_rate": 0.1})");
    PipelineConfig c;
    CHECK_THROWS_AS(apply_config_file(c, dir.str("bad.json")), ParameterError);
  }
  SUBCASE("malformed json is a parse error") {
    testutil::write_file(dir.str("bad.json"), "{nope");
    PipelineConfig c;
    CHECK_THROWS_AS(apply_config_file(c, dir.str("bad.json")), ParseError);
  }
  SUBCASE("missing file is an io error") {
    PipelineConfig c;
    CHECK_THROWS_AS(apply_config_file(c, dir.str("nope.json")), IoError);
  }
}
