#include <doctest.h>

#include "test_util.hpp"

#include <cstdlib>
#include <string>

#ifndef NEOSLEEP_CLI_PATH
#error "NEOSLEEP_CLI_PATH must point at the built binary"
#endif

#include <sys/wait.h>

namespace {

int run(const std::string& args, const std::string& stdout_path = "/dev/null",
        const std::string& stderr_path = "/dev/null") {
  const std::string cmd = std::string("\"") + NEOSLEEP_CLI_PATH + "\" " + args +
                          " > " + stdout_path + " 2> " + stderr_path;
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::size_t count_char(const std::string& s, char c) {
  std::size_t n = 0;
  for (char v : s)
    if (v == c) ++n;
  return n;
}

} // namespace

TEST_CASE("cli end-to-end on a miniature corpus") {
  testutil::TempDir dir("cli");
  const std::string out = dir.str("out");
  const std::string common = " --out \"" + out + "\" ";

  CHECK(run("synth" + common +
            "--records 3 --record-seconds 120 --fs 100 --wake-fraction 0.5 "
            "--noise-level 0.5",
            dir.str("synth.txt")) == 0);
  const std::string synth_line = testutil::read_file(dir.str("synth.txt"));
  CHECK(synth_line.find("synth: records=3 epochs=12 wake=6") !=
        std::string::npos);

  CHECK(run("featurize" + common + "--fs 100", dir.str("feat.txt")) == 0);
  CHECK(testutil::read_file(dir.str("feat.txt"))
            .find("featurize: records=3 segments=12 rows=12") !=
        std::string::npos);

  CHECK(run("train" + common +
            "--n-estimators 5 --max-depth 2 --learning-rate 0.3 "
            "--min-samples-leaf 2",
            dir.str("train.txt")) == 0);
  CHECK(testutil::read_file(dir.str("train.txt")).find("train: rows=12") !=
        std::string::npos);
  CHECK(testutil::read_file(out + "/model.json").find("neosleep-gbt-v1") !=
        std::string::npos);

  CHECK(run("evaluate" + common +
            "--n-estimators 5 --max-depth 2 --learning-rate 0.3 "
            "--min-samples-leaf 2 --k 3",
            dir.str("eval.txt")) == 0);
  const std::string report = testutil::read_file(dir.str("eval.txt"));
  CHECK(report.find("folds: 3") != std::string::npos);
  CHECK(report.find("pooled:") != std::string::npos);
  CHECK(testutil::read_file(out + "/metrics.txt") == report);

  SUBCASE("tune with collapsed ranges") {
    CHECK(run("tune" + common +
              "--n-estimators-range 4 4 --max-depth-range 2 2 "
              "--learning-rate-range 0.25 0.25 --candidates 2 --k 2",
              dir.str("tune.txt")) == 0);
    CHECK(testutil::read_file(dir.str("tune.txt"))
              .find("tune: best n_estimators=4 max_depth=2 "
                    "learning_rate=0.25") != std::string::npos);
    CHECK(testutil::read_file(out + "/leaderboard.csv").rfind("rank,", 0) == 0);
  }

  SUBCASE("synth rerun reproduces the corpus bytes") {
    const std::string rec = out + "/records/record_002.rec";
    const std::string before = testutil::read_file(rec);
    CHECK(run("synth" + common +
              "--records 3 --record-seconds 120 --fs 100 --wake-fraction 0.5 "
              "--noise-level 0.5") == 0);
    CHECK(testutil::read_file(rec) == before);
  }

  SUBCASE("reduced feature mode drops one column") {
    CHECK(run("featurize" + common + "--fs 100 --feature-mode paper13 "
              "--features \"" + dir.str("f13.csv") + "\"") == 0);
    const std::string text = testutil::read_file(dir.str("f13.csv"));
    const std::string header = text.substr(0, text.find('\n'));
    CHECK(count_char(header, ',') == 15); // 3 id columns + 13 features
    CHECK(header.find("standard_deviation") == std::string::npos);
  }
}

TEST_CASE("cli failure modes") {
  testutil::TempDir dir("cli_err");

  SUBCASE("help exits zero") {
    CHECK(run("--help") == 0);
    CHECK(run("synth --help") == 0);
  }
  SUBCASE("no subcommand") {
    CHECK(run("", "/dev/null", dir.str("err.txt")) == 1);
    const std::string err = testutil::read_file(dir.str("err.txt"));
    CHECK(err.rfind("error: ", 0) == 0);
    CHECK(count_char(err, '\n') == 1); // exactly one diagnostic line
  }
  SUBCASE("unknown flag") {
    CHECK(run("synth --frobnicate", "/dev/null", dir.str("err.txt")) == 1);
    CHECK(testutil::read_file(dir.str("err.txt")).rfind("error: ", 0) == 0);
  }
  SUBCASE("missing config file") {
    CHECK(run("synth --config " + dir.str("nope.json"), "/dev/null",
              dir.str("err.txt")) == 1);
    CHECK(testutil::read_file(dir.str("err.txt")).rfind("error: ", 0) == 0);
  }
  SUBCASE("featurize without records") {
    CHECK(run("featurize --out " + dir.str("empty"), "/dev/null",
              dir.str("err.txt")) == 1);
    const std::string err = testutil::read_file(dir.str("err.txt"));
    CHECK(err.rfind("error: ", 0) == 0);
    CHECK(count_char(err, '\n') == 1);
  }
  SUBCASE("bad hyperparameter value") {
    testutil::TempDir corpus("cli_err_corpus");
    const std::string out = corpus.str("out");
    CHECK(run("synth --out \"" + out +
              "\" --records 2 --record-seconds 60 --fs 100") == 0);
    CHECK(run("featurize --out \"" + out + "\" --fs 100") == 0);
    CHECK(run("train --out \"" + out + "\" --learning-rate 1.5", "/dev/null",
              dir.str("err.txt")) == 1);
    CHECK(testutil::read_file(dir.str("err.txt")).rfind("error: ", 0) == 0);
  }
}

TEST_CASE("cli config file feeds every stage") {
  testutil::TempDir dir("cli_cfg");
  const std::string out = dir.str("out");
  testutil::write_file(dir.str("cfg.json"), std::string(R"({
  "out_dir": ")") + out + R"(",
  "synth": {"n_records": 3, "record_seconds": 120, "fs": 100,
            "wake_fraction": 0.5, "noise_level": 0.5},
  "hyperparams": {"n_estimators": 4, "max_depth": 2, "learning_rate": 0.3,
                  "min_samples_leaf": 2},
  "k": 3
}
)");
  const std::string use = " --config \"" + dir.str("cfg.json") + "\"";
  CHECK(run("synth" + use) == 0);
  CHECK(run("featurize" + use) == 0);
  CHECK(run("evaluate" + use, dir.str("eval.txt")) == 0);
  CHECK(testutil::read_file(dir.str("eval.txt")).find("folds: 3") !=
        std::string::npos);

  // explicit flags override the file
  CHECK(run("evaluate" + use + " --k 2", dir.str("eval2.txt")) == 0);
  CHECK(testutil::read_file(dir.str("eval2.txt")).find("folds: 2") !=
        std::string::npos);
}
