#pragma once

#include "neosleep/matrix.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace neosleep {

struct Hyperparams {
  int n_estimators = 149;
  int max_depth = 10;
  double learning_rate = 0.104; // shrinkage, in (0,1]
  int min_samples_leaf = 5;
};

bool operator==(const Hyperparams& a, const Hyperparams& b);

/// Regression tree stored as a node pool; nodes[0] is the root. A leaf has
/// left == -1 and carries a log-odds increment in `value`. An internal node
/// routes x to `left` iff x[feature_index] <= threshold.
struct Tree {
  struct Node {
    int feature_index = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;
  };
  std::vector<Node> nodes;

  bool empty() const { return nodes.empty(); }
  double predict(std::span<const double> x) const;
  int depth() const;
  int n_internal() const;
};

bool operator==(const Tree& a, const Tree& b);

struct GbtStage {
  Tree tree;
  double scale = 0.0; // the shrinkage v recorded per stage
};

/// Additive model: initial log-odds plus shrunken regression-tree stages.
struct GbtModel {
  double initial_score = 0.0;
  Hyperparams hyperparams;
  std::vector<std::string> feature_names;
  std::vector<GbtStage> stages;
};

bool operator==(const GbtModel& a, const GbtModel& b);

/// Log-odds of the positive-class fraction: the constant minimizing total
/// logistic loss. Errors when only one class is present.
double initial_score(const std::vector<int>& labels);

/// Greedy recursive least-squares partitioning of the residuals. Split
/// candidates are midpoints between consecutive distinct sorted feature
/// values; the chosen split maximizes the squared-error reduction, ties
/// broken by lowest feature index then smallest threshold. Each leaf holds
/// the Newton step sum(residuals)/sum(weights) over its members. Recursion
/// stops at depth_limit, at min_samples_leaf, or when no split reduces the
/// error (a single-leaf tree is returned, not an error).
Tree fit_tree(const Matrix& x, const std::vector<double>& residuals,
              const std::vector<double>& weights, int depth_limit,
              int min_samples_leaf);

/// Stage-wise training: start from initial_score, then per stage fit a tree
/// to the residuals y - sigmoid(F) with hessian weights p(1-p) and add it
/// scaled by the learning rate. `seed` is accepted for interface stability;
/// training has no stochastic step. If `deviance_log` is given it receives
/// the mean logistic loss after the initial score and after every stage.
GbtModel train(const Matrix& x, const std::vector<int>& labels,
               const Hyperparams& hp, std::uint64_t seed = 0,
               std::vector<double>* deviance_log = nullptr);

/// F(x) = F0 + sum of scale * tree(x) over stages. Errors on dimension
/// mismatch.
double predict_score(const GbtModel& model, std::span<const double> x);

/// sigmoid(predict_score), in (0,1).
double predict_proba(const GbtModel& model, std::span<const double> x);

/// 1 (Wake) iff predict_proba >= threshold; ties go positive.
int predict_label(const GbtModel& model, std::span<const double> x,
                  double threshold = 0.5);

double sigmoid(double score);
double mean_deviance(const std::vector<int>& labels,
                     const std::vector<double>& scores);

/// Self-describing text document with stable key order; load(save(m)) == m
/// bit-exactly.
std::string save_model(const GbtModel& model);
GbtModel load_model(const std::string& text);
void save_model_file(const GbtModel& model, const std::string& path);
GbtModel load_model_file(const std::string& path);

} // namespace neosleep
