#include <doctest.h>

#include "neosleep/errors.hpp"
#include "neosleep/features.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>

using namespace neosleep;
using oracle::close_rel;

namespace {

std::vector<double> sine(double freq_hz, double fs, double seconds,
                         double amp = 1.0) {
  const auto n = static_cast<std::size_t>(seconds * fs);
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i)
    x[i] = amp * std::sin(2.0 * std::numbers::pi * freq_hz *
                          static_cast<double>(i) / fs);
  return x;
}

} // namespace

TEST_CASE("hjorth spot values") {
  const std::vector<double> x = {0, 1, 0, -1, 0, 1, 0, -1};
  const HjorthParams h = hjorth(x);
  CHECK(h.activity == 0.5); // exact

  CHECK_THROWS_AS(hjorth(std::vector<double>{3.0, 3.0, 3.0, 3.0}),
                  DegenerateSignalError);
  CHECK_THROWS_AS(hjorth(std::vector<double>{1.0, 2.0}), ParameterError);
  // Linear ramp: first difference is constant, complexity undefined.
  CHECK_THROWS_AS(hjorth(std::vector<double>{1.0, 2.0, 3.0, 4.0}),
                  DegenerateSignalError);
}

TEST_CASE("hjorth mobility is exactly scale and shift invariant") {
  // Power-of-two scales and integer shifts commute with every rounding step
  // on this integer-valued signal, so the variance ratios are bit-identical.
  const std::vector<double> x = {0, 1, 0, -1, 0, 1, 0, -1};
  const HjorthParams base = hjorth(x);

  for (const auto& [a, b] : std::vector<std::pair<double, double>>{
           {2.0, 0.0}, {2.0, 5.0}, {4.0, -7.0}, {0.5, 1.0}}) {
    std::vector<double> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = a * x[i] + b;
    const HjorthParams h = hjorth(y);
    CHECK(h.mobility == base.mobility);     // exact
    CHECK(h.complexity == base.complexity); // exact
  }

  // Non-power-of-two scales can shift the last bit of an intermediate mean,
  // so only near-exact equality is guaranteed there.
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = 3.0 * x[i] - 7.0;
  const HjorthParams h = hjorth(y);
  CHECK(close_rel(h.mobility, base.mobility, 1e-15));
  CHECK(close_rel(h.complexity, base.complexity, 1e-15));
}

TEST_CASE("time feature spot values") {
  SUBCASE("alternating unit signal") {
    const TimeFeatures t = time_features(std::vector<double>{1, -1, 1, -1});
    CHECK(t.mean == 0.0);
    CHECK(t.standard_deviation == 1.0);
    CHECK(t.rms == 1.0);
    CHECK(t.energy == 4.0);
    CHECK(t.minimum == -1.0);
    CHECK(t.maximum == 1.0);
    CHECK(t.kurtosis == 1.0);
  }
  SUBCASE("one-hot signal") {
    const TimeFeatures t = time_features(std::vector<double>{0, 0, 0, 4});
    CHECK(t.mean == 1.0);
    CHECK(t.energy == 16.0);
    CHECK(t.standard_deviation == doctest::Approx(std::sqrt(3.0)).epsilon(1e-12));
  }
  SUBCASE("mirror negates skewness") {
    const auto x = testutil::random_signal(256, 17);
    std::vector<double> neg(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) neg[i] = -x[i];
    CHECK(time_features(x).skewness ==
          doctest::Approx(-time_features(neg).skewness).epsilon(1e-12));
  }
  SUBCASE("degenerate input") {
    CHECK_THROWS_AS(time_features(std::vector<double>{2.0, 2.0, 2.0}),
                    DegenerateSignalError);
    CHECK_THROWS_AS(time_features(std::vector<double>{1.0}), ParameterError);
  }
}

TEST_CASE("spectral features on canonical signals") {
  SUBCASE("pure 10 Hz sine concentrates the spectrum") {
    const SpectralFeatures s = spectral_features(sine(10.0, 500.0, 30.0), 500.0);
    CHECK(std::abs(s.centroid - 10.0) <= 0.2);
    CHECK(s.spread <= 0.5);
    CHECK(s.flatness <= 0.01);
  }
  SUBCASE("white noise is spectrally flat") {
    const auto x = testutil::random_signal(15000, 2024);
    const SpectralFeatures s = spectral_features(x, 500.0);
    CHECK(s.flatness >= 0.5);
    CHECK(s.flatness <= 1.0);
  }
  SUBCASE("all-zero signal is degenerate") {
    CHECK_THROWS_AS(spectral_features(std::vector<double>(64, 0.0), 100.0),
                    DegenerateSignalError);
    // Constant signal: only the excluded DC bin carries power.
    CHECK_THROWS_AS(spectral_features(std::vector<double>(64, 3.0), 100.0),
                    DegenerateSignalError);
  }
  SUBCASE("preconditions") {
    CHECK_THROWS_AS(spectral_features(std::vector<double>{1, 2, 3}, 100.0),
                    ParameterError);
    CHECK_THROWS_AS(spectral_features(std::vector<double>{1, 2, 3, 4}, 0.0),
                    ParameterError);
  }
}

TEST_CASE("oracle equivalence on 100 seeded signals") {
  const double fs = 500.0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    const auto x = testutil::random_signal(512, 1000 + s, 20.0);

    const FeatureVector fv = featurize(x, fs);
    const auto t = oracle::time_oracle(x);
    const auto h = oracle::hjorth_oracle(x);
    const auto sp = oracle::spectral_oracle(x, fs);

    CHECK(close_rel(fv.minimum, t.minimum, 1e-9));
    CHECK(close_rel(fv.maximum, t.maximum, 1e-9));
    CHECK(close_rel(fv.mean_amplitude, t.mean, 1e-9));
    CHECK(close_rel(fv.standard_deviation, t.sd, 1e-9));
    CHECK(close_rel(fv.skewness, t.skewness, 1e-9));
    CHECK(close_rel(fv.kurtosis, t.kurtosis, 1e-9));
    CHECK(close_rel(fv.rms, t.rms, 1e-9));
    CHECK(close_rel(fv.energy, t.energy, 1e-9));
    CHECK(close_rel(fv.hjorth_activity, h.activity, 1e-9));
    CHECK(close_rel(fv.hjorth_mobility, h.mobility, 1e-9));
    CHECK(close_rel(fv.hjorth_complexity, h.complexity, 1e-9));
    CHECK(close_rel(fv.spectral_centroid, sp.centroid, 1e-9));
    CHECK(close_rel(fv.spectral_spread, sp.spread, 1e-9));
    CHECK(close_rel(fv.spectral_flatness, sp.flatness, 1e-9));
  }
}

TEST_CASE("scale laws under x -> a*x") {
  const double fs = 250.0;
  const auto x = testutil::random_signal(512, 99, 10.0);
  const FeatureVector base = featurize(x, fs);

  SUBCASE("power-of-two scaling leaves flatness bit-identical") {
    std::vector<double> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = 4.0 * x[i];
    const FeatureVector fv = featurize(y, fs);
    CHECK(fv.spectral_flatness == base.spectral_flatness); // exact
    CHECK(fv.hjorth_mobility == base.hjorth_mobility);     // exact
    CHECK(fv.energy == 16.0 * base.energy);                // exact
  }
  SUBCASE("general scaling within 1e-9") {
    const double a = 1.7;
    std::vector<double> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = a * x[i];
    const FeatureVector fv = featurize(y, fs);

    CHECK(close_rel(fv.minimum, a * base.minimum, 1e-9));
    CHECK(close_rel(fv.maximum, a * base.maximum, 1e-9));
    CHECK(close_rel(fv.mean_amplitude, a * base.mean_amplitude, 1e-9));
    CHECK(close_rel(fv.standard_deviation, a * base.standard_deviation, 1e-9));
    CHECK(close_rel(fv.rms, a * base.rms, 1e-9));
    CHECK(close_rel(fv.energy, a * a * base.energy, 1e-9));
    CHECK(close_rel(fv.hjorth_activity, a * a * base.hjorth_activity, 1e-9));
    CHECK(close_rel(fv.skewness, base.skewness, 1e-9));
    CHECK(close_rel(fv.kurtosis, base.kurtosis, 1e-9));
    CHECK(close_rel(fv.hjorth_mobility, base.hjorth_mobility, 1e-9));
    CHECK(close_rel(fv.hjorth_complexity, base.hjorth_complexity, 1e-9));
    CHECK(close_rel(fv.spectral_centroid, base.spectral_centroid, 1e-9));
    CHECK(close_rel(fv.spectral_spread, base.spectral_spread, 1e-9));
    CHECK(close_rel(fv.spectral_flatness, base.spectral_flatness, 1e-9));
  }
}

TEST_CASE("shift law under x -> x + b") {
  const double fs = 250.0;
  const auto x = testutil::random_signal(512, 101, 10.0);
  const FeatureVector base = featurize(x, fs);
  const double b = 3.25;
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] + b;
  const FeatureVector fv = featurize(y, fs);

  CHECK(close_rel(fv.minimum, base.minimum + b, 1e-9));
  CHECK(close_rel(fv.maximum, base.maximum + b, 1e-9));
  CHECK(close_rel(fv.mean_amplitude, base.mean_amplitude + b, 1e-9));
  CHECK(close_rel(fv.standard_deviation, base.standard_deviation, 1e-9));
  CHECK(close_rel(fv.hjorth_activity, base.hjorth_activity, 1e-9));
  CHECK(close_rel(fv.hjorth_mobility, base.hjorth_mobility, 1e-9));
  CHECK(close_rel(fv.hjorth_complexity, base.hjorth_complexity, 1e-9));
}

TEST_CASE("mobility grows monotonically with sine frequency") {
  const double fs = 100.0;
  double prev = 0.0;
  for (double hz = 1.0; hz <= 24.0; hz += 1.0) { // up to fs/4 - epsilon
    const double mob = hjorth(sine(hz, fs, 10.0)).mobility;
    CHECK(mob > prev);
    prev = mob;
  }
}

TEST_CASE("featurize ties the fields together") {
  const double fs = 100.0;
  const auto x = testutil::random_signal(512, 5, 15.0);
  const FeatureVector fv = featurize(x, fs);
  CHECK(close_rel(fv.hjorth_activity,
                  fv.standard_deviation * fv.standard_deviation, 1e-9));
  CHECK(fv.minimum <= fv.mean_amplitude);
  CHECK(fv.mean_amplitude <= fv.maximum);
  CHECK(fv.spectral_flatness >= 0.0);
  CHECK(fv.spectral_flatness <= 1.0);
  CHECK(fv.spectral_centroid >= 0.0);
  CHECK(fv.spectral_centroid <= fs / 2.0);

  const FeatureVector again = featurize(x, fs);
  CHECK(fv.energy == again.energy); // determinism
}

TEST_CASE("epoch featurize carries provenance in errors") {
  Epoch epoch;
  epoch.record_id = "record_007";
  epoch.index = 42;
  epoch.samples.assign(128, 1.5);
  try {
    featurize(epoch, 100.0);
    FAIL("expected a degenerate-signal error");
  } catch (const DegenerateSignalError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("record_007") != std::string::npos);
    CHECK(msg.find("42") != std::string::npos);
  }
}

TEST_CASE("feature name list and paper-13 mode") {
  const auto all = feature_names(FeatureMode::All14);
  const auto p13 = feature_names(FeatureMode::Paper13);
  CHECK(all.size() == 14);
  CHECK(p13.size() == 13);
  for (const auto& name : p13) CHECK(name != "standard_deviation");

  const auto x = testutil::random_signal(128, 9);
  const FeatureVector fv = featurize(x, 100.0);
  CHECK(feature_values(fv, FeatureMode::All14).size() == 14);
  CHECK(feature_values(fv, FeatureMode::Paper13).size() == 13);
  CHECK(feature_mode_from_string("paper13") == FeatureMode::Paper13);
  CHECK(feature_mode_from_string("all-14") == FeatureMode::All14);
  CHECK_THROWS_AS(feature_mode_from_string("all"), ParameterError);
}

TEST_CASE("feature table round-trips bit-exactly") {
  testutil::TempDir dir("features");
  FeatureTable table;
  table.feature_names = feature_names(FeatureMode::All14);
  const std::size_t cols = table.feature_names.size();
  table.x = Matrix(3, cols);
  for (int r = 0; r < 3; ++r) {
    const auto x = testutil::random_signal(128, 300 + static_cast<unsigned>(r), 12.0);
    const auto vals = feature_values(featurize(x, 100.0), FeatureMode::All14);
    std::copy(vals.begin(), vals.end(), table.x.row(static_cast<std::size_t>(r)));
    table.record_ids.push_back("record_00" + std::to_string(r));
    table.epoch_indices.push_back(r * 3);
    table.labels.push_back(r % 2);
  }

  write_feature_table(table, dir.str("f.csv"));
  const FeatureTable back = read_feature_table(dir.str("f.csv"));
  CHECK(back.feature_names == table.feature_names);
  CHECK(back.record_ids == table.record_ids);
  CHECK(back.epoch_indices == table.epoch_indices);
  CHECK(back.labels == table.labels);
  REQUIRE(back.x.values.size() == table.x.values.size());
  for (std::size_t i = 0; i < table.x.values.size(); ++i)
    CHECK(back.x.values[i] == table.x.values[i]); // bit-exact

  write_feature_table(back, dir.str("g.csv"));
  CHECK(testutil::read_file(dir.str("f.csv")) ==
        testutil::read_file(dir.str("g.csv")));
}

TEST_CASE("feature table parser rejects malformed rows") {
  testutil::TempDir dir("features");
  SUBCASE("bad header") {
    testutil::write_file(dir.str("f.csv"), "a,b,c,d\n");
    CHECK_THROWS_AS(read_feature_table(dir.str("f.csv")), ParseError);
  }
  SUBCASE("bad label") {
    testutil::write_file(dir.str("f.csv"),
                         "record_id,epoch_index,label,x\nr0,0,awake,1.0\n");
    CHECK_THROWS_AS(read_feature_table(dir.str("f.csv")), ParseError);
  }
  SUBCASE("wrong feature count") {
    testutil::write_file(dir.str("f.csv"),
                         "record_id,epoch_index,label,x,y\nr0,0,wake,1.0\n");
    CHECK_THROWS_AS(read_feature_table(dir.str("f.csv")), ParseError);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(read_feature_table(dir.str("nope.csv")), IoError);
  }
}
