#pragma once

#include "neosleep/dataio.hpp"
#include "neosleep/matrix.hpp"

#include <span>
#include <string>
#include <vector>

namespace neosleep {

struct HjorthParams {
  double activity = 0.0;
  double mobility = 0.0;
  double complexity = 0.0;
};

struct TimeFeatures {
  double minimum = 0.0;
  double maximum = 0.0;
  double mean = 0.0;
  double standard_deviation = 0.0;
  double skewness = 0.0;
  double kurtosis = 0.0;
  double rms = 0.0;
  double energy = 0.0;
};

struct SpectralFeatures {
  double centroid = 0.0; // Hz
  double spread = 0.0;   // Hz
  double flatness = 0.0; // in [0,1]
};

/// Per-epoch feature set, field order matches feature_names(FeatureMode::All14).
struct FeatureVector {
  double minimum = 0.0;
  double maximum = 0.0;
  double mean_amplitude = 0.0;
  double standard_deviation = 0.0;
  double skewness = 0.0;
  double kurtosis = 0.0;
  double rms = 0.0;
  double energy = 0.0;
  double hjorth_activity = 0.0;
  double hjorth_mobility = 0.0;
  double hjorth_complexity = 0.0;
  double spectral_centroid = 0.0;
  double spectral_spread = 0.0;
  double spectral_flatness = 0.0;
};

/// Paper13 drops standard_deviation (the square root of Hjorth activity).
enum class FeatureMode { All14, Paper13 };

FeatureMode feature_mode_from_string(const std::string& s);
std::string to_string(FeatureMode mode);

/// Hjorth activity/mobility/complexity. Activity is the population variance;
/// mobility and complexity are variance ratios of successive first
/// differences (no sampling-rate scaling; it cancels in the ratios).
/// Requires length >= 3 and a non-constant signal; complexity additionally
/// requires a non-constant first difference.
HjorthParams hjorth(std::span<const double> signal);

/// Population moments (divide by n), Pearson kurtosis (non-excess),
/// rms = sqrt(mean of squares), energy = sum of squares.
/// Zero-variance input is a degenerate-signal error.
TimeFeatures time_features(std::span<const double> signal);

/// Spectral centroid, spread and flatness over the one-sided periodogram
/// excluding the DC bin. Flatness is geometric mean / arithmetic mean of the
/// power bins. All-zero input is a degenerate-signal error.
SpectralFeatures spectral_features(std::span<const double> signal, double fs);

FeatureVector featurize(std::span<const double> signal, double fs);

/// Epoch variant; degenerate-signal errors carry epoch provenance.
FeatureVector featurize(const Epoch& epoch, double fs);

std::vector<std::string> feature_names(FeatureMode mode);
std::vector<double> feature_values(const FeatureVector& fv, FeatureMode mode);

/// Labeled feature rows: one epoch per row plus provenance columns.
struct FeatureTable {
  std::vector<std::string> feature_names;
  std::vector<std::string> record_ids;
  std::vector<int> epoch_indices;
  std::vector<int> labels; // 1 = Wake, 0 = Sleep
  Matrix x;

  std::size_t size() const { return labels.size(); }
};

/// CSV with header `record_id,epoch_index,label,<feature names...>`.
void write_feature_table(const FeatureTable& table, const std::string& path);
FeatureTable read_feature_table(const std::string& path);

} // namespace neosleep
