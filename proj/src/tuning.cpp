#include "neosleep/tuning.hpp"

#include "neosleep/errors.hpp"
#include "neosleep/seeding.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <random>

namespace neosleep {

namespace {

// 53-bit mantissa draw in [0, 1).
double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

int uniform_int_inclusive(std::mt19937_64& rng, int lo, int hi) {
  const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
  return lo + static_cast<int>(rng() % span);
}

void check_space(const SearchSpace& space) {
  if (space.n_estimators_lo < 1 ||
      space.n_estimators_lo > space.n_estimators_hi)
    throw ParameterError("bad n_estimators range");
  if (space.max_depth_lo < 1 || space.max_depth_lo > space.max_depth_hi)
    throw ParameterError("bad max_depth range");
  if (!(space.learning_rate_lo > 0.0) ||
      space.learning_rate_lo > space.learning_rate_hi ||
      space.learning_rate_hi > 1.0)
    throw ParameterError("bad learning_rate range");
  if (space.n_candidates < 1) throw ParameterError("n_candidates must be >= 1");
  if (space.min_samples_leaf < 1)
    throw ParameterError("min_samples_leaf must be >= 1");
}

} // namespace

std::vector<Hyperparams> sample_candidates(const SearchSpace& space) {
  check_space(space);
  std::mt19937_64 rng(space.seed);
  const double log_span =
      std::log(space.learning_rate_hi / space.learning_rate_lo);

  std::vector<Hyperparams> candidates;
  candidates.reserve(static_cast<std::size_t>(space.n_candidates));
  for (int i = 0; i < space.n_candidates; ++i) {
    Hyperparams hp;
    hp.n_estimators =
        uniform_int_inclusive(rng, space.n_estimators_lo, space.n_estimators_hi);
    hp.max_depth =
        uniform_int_inclusive(rng, space.max_depth_lo, space.max_depth_hi);
    // Log-uniform on (lo, hi]; a collapsed range short-circuits to hi so the
    // singleton space reproduces its point exactly.
    if (space.learning_rate_lo == space.learning_rate_hi) {
      hp.learning_rate = space.learning_rate_hi;
    } else {
      const double u = unit_uniform(rng) * log_span; // [0, log_span)
      hp.learning_rate = space.learning_rate_hi * std::exp(-u);
    }
    hp.min_samples_leaf = space.min_samples_leaf;
    candidates.push_back(hp);
  }
  return candidates;
}

SearchResult random_search(const Matrix& x, const std::vector<int>& labels,
                           const SearchSpace& space, int k,
                           std::uint64_t seed, SelectionMetric metric) {
  const std::vector<Hyperparams> candidates = sample_candidates(space);

  SearchResult result;
  result.leaderboard.reserve(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    CvOptions options;
    options.k = k;
    options.seed = derive_seed(seed, "candidate", i);
    const CvResult cv = cross_validate(x, labels, candidates[i], options);

    LeaderboardEntry entry;
    entry.hp = candidates[i];
    entry.mean_accuracy = cv.mean_metrics.accuracy;
    entry.sd_accuracy = cv.sd_metrics.accuracy;
    entry.mean_kappa = cv.mean_metrics.kappa;
    entry.sd_kappa = cv.sd_metrics.kappa;
    result.leaderboard.push_back(entry);
  }

  const auto key = [metric](const LeaderboardEntry& e) {
    return metric == SelectionMetric::Kappa ? e.mean_kappa : e.mean_accuracy;
  };
  std::stable_sort(result.leaderboard.begin(), result.leaderboard.end(),
                   [&](const LeaderboardEntry& a, const LeaderboardEntry& b) {
                     if (key(a) != key(b)) return key(a) > key(b);
                     if (a.hp.n_estimators != b.hp.n_estimators)
                       return a.hp.n_estimators < b.hp.n_estimators;
                     if (a.hp.max_depth != b.hp.max_depth)
                       return a.hp.max_depth < b.hp.max_depth;
                     return a.hp.learning_rate < b.hp.learning_rate;
                   });
  result.best = result.leaderboard.front().hp;
  return result;
}

std::string format_leaderboard(const SearchResult& result) {
  std::string out = "rank,n_estimators,max_depth,learning_rate,mean_acc,sd_acc\n";
  char num[64];
  const auto append_num = [&](double v) {
    const auto res = std::to_chars(num, num + sizeof(num), v);
    out.append(num, res.ptr);
  };
  for (std::size_t i = 0; i < result.leaderboard.size(); ++i) {
    const LeaderboardEntry& e = result.leaderboard[i];
    out += std::to_string(i + 1);
    out += ',';
    out += std::to_string(e.hp.n_estimators);
    out += ',';
    out += std::to_string(e.hp.max_depth);
    out += ',';
    append_num(e.hp.learning_rate);
    out += ',';
    append_num(e.mean_accuracy);
    out += ',';
    append_num(e.sd_accuracy);
    out += '\n';
  }
  return out;
}

} // namespace neosleep
