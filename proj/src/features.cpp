#include "neosleep/features.hpp"

#include "fft_utils.hpp"
#include "neosleep/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <string_view>

namespace neosleep {

namespace {

double population_variance(std::span<const double> x) {
  const auto n = static_cast<double>(x.size());
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : x) {
    const double d = v - mean;
    ss += d * d;
  }
  return ss / n;
}

std::vector<double> first_difference(std::span<const double> x) {
  std::vector<double> d(x.size() - 1);
  for (std::size_t i = 0; i + 1 < x.size(); ++i) d[i] = x[i + 1] - x[i];
  return d;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.remove_suffix(1);
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  return s;
}

} // namespace

FeatureMode feature_mode_from_string(const std::string& s) {
  if (s == "all14" || s == "all-14") return FeatureMode::All14;
  if (s == "paper13" || s == "paper-13") return FeatureMode::Paper13;
  throw ParameterError("unknown feature mode '" + s + "'");
}

std::string to_string(FeatureMode mode) {
  return mode == FeatureMode::All14 ? "all14" : "paper13";
}

HjorthParams hjorth(std::span<const double> signal) {
  if (signal.size() < 3)
    throw ParameterError("hjorth needs at least 3 samples");

  const double var0 = population_variance(signal);
  if (var0 == 0.0)
    throw DegenerateSignalError("zero-variance signal in hjorth");

  const std::vector<double> d1 = first_difference(signal);
  const double var1 = population_variance(d1);
  if (var1 == 0.0)
    throw DegenerateSignalError(
        "zero-variance first difference in hjorth complexity");

  const std::vector<double> d2 = first_difference(d1);
  const double var2 = population_variance(d2);

  HjorthParams h;
  h.activity = var0;
  h.mobility = std::sqrt(var1 / var0);
  h.complexity = std::sqrt(var2 / var1) / std::sqrt(var1 / var0);
  return h;
}

TimeFeatures time_features(std::span<const double> signal) {
  if (signal.size() < 2)
    throw ParameterError("time features need at least 2 samples");

  const auto n = static_cast<double>(signal.size());
  TimeFeatures f;
  f.minimum = signal[0];
  f.maximum = signal[0];
  double sum = 0.0, sum_sq = 0.0;
  for (double v : signal) {
    f.minimum = std::min(f.minimum, v);
    f.maximum = std::max(f.maximum, v);
    sum += v;
    sum_sq += v * v;
  }
  f.mean = sum / n;
  f.energy = sum_sq;
  f.rms = std::sqrt(sum_sq / n);

  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double v : signal) {
    const double d = v - f.mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  if (m2 == 0.0)
    throw DegenerateSignalError(
        "zero-variance signal: skewness/kurtosis undefined");

  f.standard_deviation = std::sqrt(m2);
  f.skewness = m3 / (m2 * std::sqrt(m2));
  f.kurtosis = m4 / (m2 * m2); // Pearson, non-excess
  return f;
}

SpectralFeatures spectral_features(std::span<const double> signal, double fs) {
  if (signal.size() < 4)
    throw ParameterError("spectral features need at least 4 samples");
  if (!(fs > 0.0)) throw ParameterError("fs must be positive");

  const std::size_t n = signal.size();
  const std::vector<double> power = detail::power_spectrum(signal);

  // One-sided periodogram bins k = 1..floor(n/2); DC excluded.
  const std::size_t n_bins = n / 2;
  double total = 0.0;
  double weighted = 0.0;
  const double bin_hz = fs / static_cast<double>(n);
  for (std::size_t k = 1; k <= n_bins; ++k) {
    total += power[k];
    weighted += static_cast<double>(k) * bin_hz * power[k];
  }
  if (total == 0.0)
    throw DegenerateSignalError("all-zero spectrum");

  SpectralFeatures s;
  s.centroid = weighted / total;

  double spread_acc = 0.0;
  for (std::size_t k = 1; k <= n_bins; ++k) {
    const double d = static_cast<double>(k) * bin_hz - s.centroid;
    spread_acc += d * d * power[k];
  }
  s.spread = std::sqrt(spread_acc / total);

  // Flatness over the mean-normalized bins; a zero bin collapses the
  // geometric mean to zero.
  const double arith_mean = total / static_cast<double>(n_bins);
  bool has_zero = false;
  double log_acc = 0.0;
  for (std::size_t k = 1; k <= n_bins; ++k) {
    if (power[k] == 0.0) {
      has_zero = true;
      break;
    }
    log_acc += std::log(power[k] / arith_mean);
  }
  s.flatness =
      has_zero ? 0.0 : std::exp(log_acc / static_cast<double>(n_bins));
  return s;
}

FeatureVector featurize(std::span<const double> signal, double fs) {
  const TimeFeatures t = time_features(signal);
  const HjorthParams h = hjorth(signal);
  const SpectralFeatures s = spectral_features(signal, fs);

  FeatureVector fv;
  fv.minimum = t.minimum;
  fv.maximum = t.maximum;
  fv.mean_amplitude = t.mean;
  fv.standard_deviation = t.standard_deviation;
  fv.skewness = t.skewness;
  fv.kurtosis = t.kurtosis;
  fv.rms = t.rms;
  fv.energy = t.energy;
  fv.hjorth_activity = h.activity;
  fv.hjorth_mobility = h.mobility;
  fv.hjorth_complexity = h.complexity;
  fv.spectral_centroid = s.centroid;
  fv.spectral_spread = s.spread;
  fv.spectral_flatness = s.flatness;
  return fv;
}

FeatureVector featurize(const Epoch& epoch, double fs) {
  try {
    return featurize(std::span<const double>(epoch.samples), fs);
  } catch (const DegenerateSignalError& e) {
    std::string_view what = e.what();
    constexpr std::string_view prefix = "degenerate signal: ";
    if (what.starts_with(prefix)) what.remove_prefix(prefix.size());
    throw DegenerateSignalError(epoch.record_id + " epoch " +
                                std::to_string(epoch.index) + ": " +
                                std::string(what));
  }
}

std::vector<std::string> feature_names(FeatureMode mode) {
  std::vector<std::string> names = {
      "minimum",          "maximum",           "mean_amplitude",
      "standard_deviation", "skewness",        "kurtosis",
      "rms",              "energy",            "hjorth_activity",
      "hjorth_mobility",  "hjorth_complexity", "spectral_centroid",
      "spectral_spread",  "spectral_flatness"};
  if (mode == FeatureMode::Paper13)
    names.erase(names.begin() + 3); // standard_deviation duplicates activity
  return names;
}

std::vector<double> feature_values(const FeatureVector& fv, FeatureMode mode) {
  std::vector<double> values = {
      fv.minimum,          fv.maximum,           fv.mean_amplitude,
      fv.standard_deviation, fv.skewness,        fv.kurtosis,
      fv.rms,              fv.energy,            fv.hjorth_activity,
      fv.hjorth_mobility,  fv.hjorth_complexity, fv.spectral_centroid,
      fv.spectral_spread,  fv.spectral_flatness};
  if (mode == FeatureMode::Paper13) values.erase(values.begin() + 3);
  return values;
}

void write_feature_table(const FeatureTable& table, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);

  std::string buf = "record_id,epoch_index,label";
  for (const std::string& name : table.feature_names) {
    buf += ',';
    buf += name;
  }
  buf += '\n';

  char num[64];
  for (std::size_t i = 0; i < table.size(); ++i) {
    buf += table.record_ids[i];
    buf += ',';
    buf += std::to_string(table.epoch_indices[i]);
    buf += ',';
    buf += table.labels[i] == 1 ? "wake" : "sleep";
    for (std::size_t j = 0; j < table.x.cols; ++j) {
      buf += ',';
      const auto res =
          std::to_chars(num, num + sizeof(num), table.x(i, j));
      buf.append(num, res.ptr);
    }
    buf += '\n';
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError("write failed for " + path);
}

FeatureTable read_feature_table(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);

  FeatureTable table;
  std::string line;
  std::size_t line_no = 0;

  if (!std::getline(in, line)) throw ParseError(path, 1, "empty file");
  ++line_no;
  {
    std::string_view view = trim(line);
    std::size_t col = 0;
    while (!view.empty()) {
      const std::size_t comma = view.find(',');
      const std::string_view field =
          comma == std::string_view::npos ? view : view.substr(0, comma);
      view = comma == std::string_view::npos ? std::string_view{}
                                             : view.substr(comma + 1);
      switch (col) {
        case 0:
          if (field != "record_id")
            throw ParseError(path, 1, "expected 'record_id' column");
          break;
        case 1:
          if (field != "epoch_index")
            throw ParseError(path, 1, "expected 'epoch_index' column");
          break;
        case 2:
          if (field != "label")
            throw ParseError(path, 1, "expected 'label' column");
          break;
        default:
          table.feature_names.emplace_back(field);
      }
      ++col;
    }
    if (table.feature_names.empty())
      throw ParseError(path, 1, "no feature columns");
  }

  std::vector<double> values;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = trim(line);
    if (view.empty()) continue;

    std::size_t col = 0;
    std::size_t row_features = 0;
    while (true) {
      const std::size_t comma = view.find(',');
      const std::string_view field =
          comma == std::string_view::npos ? view : view.substr(0, comma);
      if (col == 0) {
        table.record_ids.emplace_back(field);
      } else if (col == 1) {
        int idx = 0;
        const auto [p, ec] =
            std::from_chars(field.data(), field.data() + field.size(), idx);
        if (ec != std::errc{} || p != field.data() + field.size())
          throw ParseError(path, line_no, "bad epoch_index");
        table.epoch_indices.push_back(idx);
      } else if (col == 2) {
        if (field == "wake")
          table.labels.push_back(1);
        else if (field == "sleep")
          table.labels.push_back(0);
        else
          throw ParseError(path, line_no,
                           "label must be 'wake' or 'sleep'");
      } else {
        double v = 0.0;
        const auto [p, ec] =
            std::from_chars(field.data(), field.data() + field.size(), v);
        if (ec != std::errc{} || p != field.data() + field.size())
          throw ParseError(path, line_no, "bad feature value");
        values.push_back(v);
        ++row_features;
      }
      if (comma == std::string_view::npos) break;
      view = view.substr(comma + 1);
      ++col;
    }
    if (row_features != table.feature_names.size())
      throw ParseError(path, line_no, "row has wrong number of features");
  }

  table.x.rows = table.labels.size();
  table.x.cols = table.feature_names.size();
  table.x.values = std::move(values);
  return table;
}

} // namespace neosleep
