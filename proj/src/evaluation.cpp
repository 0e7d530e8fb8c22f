#include "neosleep/evaluation.hpp"

#include "neosleep/errors.hpp"
#include "neosleep/seeding.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>

namespace neosleep {

namespace {

// Explicit Fisher-Yates so fold layouts do not depend on the standard
// library's std::shuffle internals.
template <typename T>
void shuffle_indices(std::vector<T>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i)
    std::swap(v[i - 1], v[rng() % i]);
}

void check_binary(const std::vector<int>& y, const char* what) {
  for (int v : y)
    if (v != 0 && v != 1)
      throw ParameterError(std::string(what) + " must be 0 or 1");
}

} // namespace

ConfusionMatrix confusion(const std::vector<int>& y_true,
                          const std::vector<int>& y_pred) {
  if (y_true.size() != y_pred.size() || y_true.empty())
    throw ParameterError("prediction/label length mismatch");
  check_binary(y_true, "labels");
  check_binary(y_pred, "predictions");

  ConfusionMatrix cm;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    if (y_true[i] == 1)
      ++(y_pred[i] == 1 ? cm.tp : cm.fn);
    else
      ++(y_pred[i] == 0 ? cm.tn : cm.fp);
  }
  return cm;
}

Metrics metrics(const ConfusionMatrix& cm) {
  if (cm.tp < 0 || cm.tn < 0 || cm.fp < 0 || cm.fn < 0)
    throw ParameterError("negative confusion count");
  const double total = static_cast<double>(cm.total());
  if (cm.tp + cm.fn == 0)
    throw UndefinedMetricError("sensitivity has zero denominator (no positives)");
  if (cm.tn + cm.fp == 0)
    throw UndefinedMetricError("specificity has zero denominator (no negatives)");

  Metrics m;
  m.sensitivity =
      100.0 * static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fn);
  m.specificity =
      100.0 * static_cast<double>(cm.tn) / static_cast<double>(cm.tn + cm.fp);
  m.accuracy = 100.0 * static_cast<double>(cm.tp + cm.tn) / total;

  const double p_agree = static_cast<double>(cm.tp + cm.tn) / total;
  const double p_chance =
      (static_cast<double>(cm.tp + cm.fn) * static_cast<double>(cm.tp + cm.fp) +
       static_cast<double>(cm.tn + cm.fp) * static_cast<double>(cm.tn + cm.fn)) /
      (total * total);
  if (1.0 - p_chance == 0.0)
    throw UndefinedMetricError("kappa has zero denominator (chance agreement is 1)");
  m.kappa = (p_agree - p_chance) / (1.0 - p_chance);
  return m;
}

RocCurve roc(const std::vector<int>& y_true,
             const std::vector<double>& scores) {
  if (y_true.size() != scores.size() || y_true.empty())
    throw ParameterError("scores/label length mismatch");
  check_binary(y_true, "labels");

  long long n_pos = 0, n_neg = 0;
  for (int y : y_true) ++(y == 1 ? n_pos : n_neg);
  if (n_pos == 0 || n_neg == 0)
    throw SingleClassError("roc needs both classes");

  std::vector<std::size_t> order(y_true.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });

  RocCurve curve;
  curve.fp_rate.push_back(0.0);
  curve.tp_rate.push_back(0.0);
  long long tp = 0, fp = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    const double s = scores[order[i]];
    // All ties advance as one step.
    while (i < order.size() && scores[order[i]] == s) {
      ++(y_true[order[i]] == 1 ? tp : fp);
      ++i;
    }
    curve.fp_rate.push_back(static_cast<double>(fp) /
                            static_cast<double>(n_neg));
    curve.tp_rate.push_back(static_cast<double>(tp) /
                            static_cast<double>(n_pos));
  }

  double auc = 0.0;
  for (std::size_t j = 1; j < curve.fp_rate.size(); ++j)
    auc += (curve.fp_rate[j] - curve.fp_rate[j - 1]) *
           (curve.tp_rate[j] + curve.tp_rate[j - 1]) * 0.5;
  curve.auc = auc;
  return curve;
}

std::vector<int> kfold_split(std::size_t n, int k,
                             const std::vector<int>& labels,
                             std::uint64_t seed, bool stratify) {
  if (k < 2) throw ParameterError("k must be >= 2");
  if (n < static_cast<std::size_t>(k))
    throw ParameterError("fewer points than folds");

  std::mt19937_64 rng(seed);
  std::vector<int> fold(n, -1);

  if (!stratify) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    shuffle_indices(idx, rng);
    for (std::size_t j = 0; j < n; ++j)
      fold[idx[j]] = static_cast<int>(j % static_cast<std::size_t>(k));
    return fold;
  }

  if (labels.size() != n)
    throw ParameterError("labels length must match n for stratified folds");
  check_binary(labels, "labels");

  for (int cls = 0; cls <= 1; ++cls) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < n; ++i)
      if (labels[i] == cls) idx.push_back(i);
    if (idx.size() < static_cast<std::size_t>(k))
      throw ParameterError("class " + std::to_string(cls) +
                           " has fewer members than folds");
    shuffle_indices(idx, rng);
    for (std::size_t j = 0; j < idx.size(); ++j)
      fold[idx[j]] = static_cast<int>(j % static_cast<std::size_t>(k));
  }
  return fold;
}

std::vector<int> group_kfold_split(const std::vector<std::string>& group_ids,
                                   int k, std::uint64_t seed) {
  if (k < 2) throw ParameterError("k must be >= 2");
  if (group_ids.empty()) throw ParameterError("no points to split");

  std::vector<std::string> groups; // first-appearance order
  for (const std::string& g : group_ids)
    if (std::find(groups.begin(), groups.end(), g) == groups.end())
      groups.push_back(g);
  if (groups.size() < static_cast<std::size_t>(k))
    throw ParameterError("fewer groups than folds");

  std::mt19937_64 rng(seed);
  std::vector<std::size_t> order(groups.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  shuffle_indices(order, rng);

  std::vector<int> group_fold(groups.size(), -1);
  for (std::size_t j = 0; j < order.size(); ++j)
    group_fold[order[j]] = static_cast<int>(j % static_cast<std::size_t>(k));

  std::vector<int> fold(group_ids.size(), -1);
  for (std::size_t i = 0; i < group_ids.size(); ++i) {
    const auto it = std::find(groups.begin(), groups.end(), group_ids[i]);
    fold[i] = group_fold[static_cast<std::size_t>(it - groups.begin())];
  }
  return fold;
}

double roc_interpolate(const RocCurve& curve, double fp_rate) {
  if (curve.fp_rate.empty()) throw ParameterError("empty roc curve");
  const auto ub = std::upper_bound(curve.fp_rate.begin(), curve.fp_rate.end(),
                                   fp_rate);
  if (ub == curve.fp_rate.begin()) return curve.tp_rate.front();
  const std::size_t lo =
      static_cast<std::size_t>(ub - curve.fp_rate.begin()) - 1;
  // lo is the last point at or below fp_rate; duplicates share an fp value
  // and tp is non-decreasing, so this picks the max tp at that fp.
  if (curve.fp_rate[lo] == fp_rate || ub == curve.fp_rate.end())
    return curve.tp_rate[lo];
  const std::size_t hi = lo + 1;
  const double t = (fp_rate - curve.fp_rate[lo]) /
                   (curve.fp_rate[hi] - curve.fp_rate[lo]);
  return curve.tp_rate[lo] + t * (curve.tp_rate[hi] - curve.tp_rate[lo]);
}

namespace {

Metrics mean_of(const std::vector<Metrics>& folds) {
  Metrics m;
  for (const Metrics& f : folds) {
    m.sensitivity += f.sensitivity;
    m.specificity += f.specificity;
    m.accuracy += f.accuracy;
    m.kappa += f.kappa;
  }
  const double k = static_cast<double>(folds.size());
  m.sensitivity /= k;
  m.specificity /= k;
  m.accuracy /= k;
  m.kappa /= k;
  return m;
}

Metrics sd_of(const std::vector<Metrics>& folds, const Metrics& mean) {
  Metrics m;
  for (const Metrics& f : folds) {
    m.sensitivity += (f.sensitivity - mean.sensitivity) *
                     (f.sensitivity - mean.sensitivity);
    m.specificity += (f.specificity - mean.specificity) *
                     (f.specificity - mean.specificity);
    m.accuracy += (f.accuracy - mean.accuracy) * (f.accuracy - mean.accuracy);
    m.kappa += (f.kappa - mean.kappa) * (f.kappa - mean.kappa);
  }
  const double k = static_cast<double>(folds.size());
  m.sensitivity = std::sqrt(m.sensitivity / k);
  m.specificity = std::sqrt(m.specificity / k);
  m.accuracy = std::sqrt(m.accuracy / k);
  m.kappa = std::sqrt(m.kappa / k);
  return m;
}

} // namespace

CvResult cross_validate(const Matrix& x, const std::vector<int>& labels,
                        const Hyperparams& hp, const CvOptions& options) {
  if (x.rows != labels.size() || x.rows == 0)
    throw ParameterError("labels length must match rows");
  if (options.k < 2) throw ParameterError("k must be >= 2");
  if (!(options.threshold > 0.0) || !(options.threshold < 1.0))
    throw ParameterError("threshold must be in (0, 1)");

  CvResult cv;
  const std::uint64_t split_seed = derive_seed(options.seed, "cv");
  if (options.groups) {
    if (options.groups->size() != x.rows)
      throw ParameterError("groups length must match rows");
    cv.fold_assignment = group_kfold_split(*options.groups, options.k,
                                           split_seed);
  } else {
    cv.fold_assignment =
        kfold_split(x.rows, options.k, labels, split_seed, options.stratify);
  }

  std::vector<int> pooled_true, pooled_pred;
  std::vector<double> pooled_scores;
  pooled_true.reserve(x.rows);
  pooled_pred.reserve(x.rows);
  pooled_scores.reserve(x.rows);

  for (int f = 0; f < options.k; ++f) {
    std::vector<std::size_t> train_rows, test_rows;
    for (std::size_t i = 0; i < x.rows; ++i)
      (cv.fold_assignment[i] == f ? test_rows : train_rows).push_back(i);
    if (train_rows.empty() || test_rows.empty())
      throw ParameterError("fold " + std::to_string(f + 1) + " is empty");

    Matrix xt(train_rows.size(), x.cols);
    std::vector<int> yt(train_rows.size());
    for (std::size_t r = 0; r < train_rows.size(); ++r) {
      std::copy_n(x.row(train_rows[r]), x.cols, xt.row(r));
      yt[r] = labels[train_rows[r]];
    }

    const GbtModel model = train(
        xt, yt, hp, derive_seed(options.seed, "fold", static_cast<std::uint64_t>(f)));

    std::vector<int> y_true, y_pred;
    std::vector<double> y_score;
    y_true.reserve(test_rows.size());
    for (std::size_t i : test_rows) {
      const std::span<const double> row(x.row(i), x.cols);
      const double p = predict_proba(model, row);
      y_true.push_back(labels[i]);
      y_score.push_back(p);
      y_pred.push_back(p >= options.threshold ? 1 : 0);
    }

    cv.fold_metrics.push_back(metrics(confusion(y_true, y_pred)));
    cv.fold_rocs.push_back(roc(y_true, y_score));
    pooled_true.insert(pooled_true.end(), y_true.begin(), y_true.end());
    pooled_pred.insert(pooled_pred.end(), y_pred.begin(), y_pred.end());
    pooled_scores.insert(pooled_scores.end(), y_score.begin(), y_score.end());
  }

  cv.mean_metrics = mean_of(cv.fold_metrics);
  cv.sd_metrics = sd_of(cv.fold_metrics, cv.mean_metrics);
  for (const RocCurve& r : cv.fold_rocs) cv.mean_auc += r.auc;
  cv.mean_auc /= static_cast<double>(options.k);
  double var_auc = 0.0;
  for (const RocCurve& r : cv.fold_rocs)
    var_auc += (r.auc - cv.mean_auc) * (r.auc - cv.mean_auc);
  cv.sd_auc = std::sqrt(var_auc / static_cast<double>(options.k));

  cv.pooled_cm = confusion(pooled_true, pooled_pred);
  cv.pooled_metrics = metrics(cv.pooled_cm);
  cv.pooled_roc = roc(pooled_true, pooled_scores);

  // Vertical averaging on a fixed fp grid.
  for (int g = 0; g <= 100; ++g) {
    const double fp = static_cast<double>(g) / 100.0;
    double tp = 0.0;
    for (const RocCurve& r : cv.fold_rocs) tp += roc_interpolate(r, fp);
    cv.mean_roc.fp_rate.push_back(fp);
    cv.mean_roc.tp_rate.push_back(tp / static_cast<double>(options.k));
  }
  for (std::size_t j = 1; j < cv.mean_roc.fp_rate.size(); ++j)
    cv.mean_roc.auc += (cv.mean_roc.fp_rate[j] - cv.mean_roc.fp_rate[j - 1]) *
                       (cv.mean_roc.tp_rate[j] + cv.mean_roc.tp_rate[j - 1]) *
                       0.5;
  return cv;
}

CvResult cross_validate(const Matrix& x, const std::vector<int>& labels,
                        const Hyperparams& hp, int k, std::uint64_t seed) {
  CvOptions options;
  options.k = k;
  options.seed = seed;
  return cross_validate(x, labels, hp, options);
}

std::string format_metrics_report(const CvResult& cv) {
  std::string out;
  char buf[256];
  const auto line = [&](const char* tag, const Metrics& m, double auc) {
    std::snprintf(buf, sizeof(buf),
                  "%s sensitivity=%.2f%% specificity=%.2f%% accuracy=%.2f%% "
                  "kappa=%.4f auc=%.4f\n",
                  tag, m.sensitivity, m.specificity, m.accuracy, m.kappa, auc);
    out += buf;
  };

  std::snprintf(buf, sizeof(buf), "folds: %zu\n", cv.fold_metrics.size());
  out += buf;
  for (std::size_t f = 0; f < cv.fold_metrics.size(); ++f) {
    std::snprintf(buf, sizeof(buf), "fold %zu:", f + 1);
    std::string tag = buf;
    line(tag.c_str(), cv.fold_metrics[f], cv.fold_rocs[f].auc);
  }
  line("mean:", cv.mean_metrics, cv.mean_auc);
  line("sd:", cv.sd_metrics, cv.sd_auc);
  line("pooled:", cv.pooled_metrics, cv.pooled_roc.auc);
  std::snprintf(buf, sizeof(buf),
                "pooled confusion: tp=%lld fn=%lld tn=%lld fp=%lld\n",
                cv.pooled_cm.tp, cv.pooled_cm.fn, cv.pooled_cm.tn,
                cv.pooled_cm.fp);
  out += buf;
  std::snprintf(buf, sizeof(buf), "mean roc auc: %.4f\n", cv.mean_roc.auc);
  out += buf;
  return out;
}

std::string format_roc_export(const CvResult& cv) {
  std::string out = "fold,fp_rate,tp_rate\n";
  char num[64];
  const auto append_num = [&](double v) {
    const auto res = std::to_chars(num, num + sizeof(num), v);
    out.append(num, res.ptr);
  };
  for (std::size_t f = 0; f < cv.fold_rocs.size(); ++f) {
    const RocCurve& r = cv.fold_rocs[f];
    for (std::size_t j = 0; j < r.fp_rate.size(); ++j) {
      out += std::to_string(f + 1);
      out += ',';
      append_num(r.fp_rate[j]);
      out += ',';
      append_num(r.tp_rate[j]);
      out += '\n';
    }
  }
  for (std::size_t j = 0; j < cv.mean_roc.fp_rate.size(); ++j) {
    out += "mean,";
    append_num(cv.mean_roc.fp_rate[j]);
    out += ',';
    append_num(cv.mean_roc.tp_rate[j]);
    out += '\n';
  }
  return out;
}

} // namespace neosleep
