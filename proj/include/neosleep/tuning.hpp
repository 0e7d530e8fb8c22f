#pragma once

#include "neosleep/boosting.hpp"
#include "neosleep/evaluation.hpp"
#include "neosleep/matrix.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace neosleep {

/// Random-search ranges. Integer dimensions are sampled uniformly inclusive;
/// the learning rate is log-uniform on (lo, hi].
struct SearchSpace {
  int n_estimators_lo = 50;
  int n_estimators_hi = 300;
  int max_depth_lo = 2;
  int max_depth_hi = 12;
  double learning_rate_lo = 0.01;
  double learning_rate_hi = 0.3;
  int n_candidates = 50;
  int min_samples_leaf = 5; // not searched
  std::uint64_t seed = 0;
};

enum class SelectionMetric { Accuracy, Kappa };

struct LeaderboardEntry {
  Hyperparams hp;
  double mean_accuracy = 0.0;
  double sd_accuracy = 0.0;
  double mean_kappa = 0.0;
  double sd_kappa = 0.0;
};

struct SearchResult {
  Hyperparams best;
  std::vector<LeaderboardEntry> leaderboard; // sorted, best first
};

/// n_candidates independent draws; duplicates permitted; deterministic for
/// a given space.seed.
std::vector<Hyperparams> sample_candidates(const SearchSpace& space);

/// Evaluate every candidate by mean stratified k-fold accuracy (fold seeds
/// derive from (seed, candidate index)) and rank the leaderboard best first.
/// Ties break by fewer estimators, then shallower depth, then lower learning
/// rate. SelectionMetric::Kappa ranks by mean kappa instead.
SearchResult random_search(const Matrix& x, const std::vector<int>& labels,
                           const SearchSpace& space, int k,
                           std::uint64_t seed,
                           SelectionMetric metric = SelectionMetric::Accuracy);

/// `rank,n_estimators,max_depth,learning_rate,mean_acc,sd_acc` rows.
std::string format_leaderboard(const SearchResult& result);

} // namespace neosleep
