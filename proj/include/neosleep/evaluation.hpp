#pragma once

#include "neosleep/boosting.hpp"
#include "neosleep/matrix.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace neosleep {

/// Wake is the positive class: tp counts correctly classified wake epochs,
/// tn correctly classified sleep epochs.
struct ConfusionMatrix {
  long long tp = 0;
  long long tn = 0;
  long long fp = 0;
  long long fn = 0;

  long long total() const { return tp + tn + fp + fn; }
};

/// Se/Sp/Acc as percentages, kappa in [-1,1].
struct Metrics {
  double sensitivity = 0.0;
  double specificity = 0.0;
  double accuracy = 0.0;
  double kappa = 0.0;
};

/// Threshold-sweep ROC; points run from (0,0) to (1,1), both coordinates
/// non-decreasing. auc is the trapezoidal area.
struct RocCurve {
  std::vector<double> fp_rate;
  std::vector<double> tp_rate;
  double auc = 0.0;
};

struct CvResult {
  std::vector<Metrics> fold_metrics;
  std::vector<RocCurve> fold_rocs;
  Metrics mean_metrics;
  Metrics sd_metrics;
  double mean_auc = 0.0;
  double sd_auc = 0.0;
  Metrics pooled_metrics;
  ConfusionMatrix pooled_cm;
  RocCurve pooled_roc;
  RocCurve mean_roc; // vertical average on a fixed 101-point fp grid
  std::vector<int> fold_assignment;
};

ConfusionMatrix confusion(const std::vector<int>& y_true,
                          const std::vector<int>& y_pred);

/// Se = tp/(tp+fn), Sp = tn/(tn+fp), Acc = (tp+tn)/total (all *100);
/// kappa = (P_Agree - P_Chance)/(1 - P_Chance) with
/// P_Agree = (tp+tn)/total and
/// P_Chance = [(tp+fn)(tp+fp) + (tn+fp)(tn+fn)]/total^2.
/// A zero denominator raises an undefined-metric error naming the metric.
Metrics metrics(const ConfusionMatrix& cm);

/// Threshold sweep over descending distinct scores; tied scores advance as a
/// single step. AUC by the trapezoidal rule. Requires both classes present.
RocCurve roc(const std::vector<int>& y_true,
             const std::vector<double>& scores);

/// Fold index per point. Stratified (per-class counts across folds differ by
/// at most one) unless stratify is false, in which case points are dealt to
/// folds after a plain shuffle. Requires k >= 2 and, when stratified, every
/// class to have at least k members.
std::vector<int> kfold_split(std::size_t n, int k,
                             const std::vector<int>& labels,
                             std::uint64_t seed, bool stratify = true);

/// Subject-wise assignment: whole records go to folds, epochs follow their
/// record. Requires at least k distinct groups.
std::vector<int> group_kfold_split(const std::vector<std::string>& group_ids,
                                   int k, std::uint64_t seed);

struct CvOptions {
  int k = 5;
  std::uint64_t seed = 0;
  bool stratify = true;
  double threshold = 0.5;
  // When non-null, group-wise fold assignment by these ids (size n).
  const std::vector<std::string>* groups = nullptr;
};

/// Train k models, each evaluated only on its held-out fold. Emits per-fold
/// metrics/ROC, their mean and standard deviation across folds, pooled
/// metrics/ROC over all held-out predictions, and the vertically averaged
/// mean ROC.
CvResult cross_validate(const Matrix& x, const std::vector<int>& labels,
                        const Hyperparams& hp, const CvOptions& options);

CvResult cross_validate(const Matrix& x, const std::vector<int>& labels,
                        const Hyperparams& hp, int k, std::uint64_t seed);

/// Linear interpolation of a fold ROC at one fp_rate (max tp at duplicated
/// fp values); used by the mean-ROC vertical averaging.
double roc_interpolate(const RocCurve& curve, double fp_rate);

std::string format_metrics_report(const CvResult& cv);
std::string format_roc_export(const CvResult& cv);

} // namespace neosleep
