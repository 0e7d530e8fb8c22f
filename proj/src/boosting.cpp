#include "neosleep/boosting.hpp"

#include "neosleep/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace neosleep {

using ordered_json = nlohmann::ordered_json;

bool operator==(const Hyperparams& a, const Hyperparams& b) {
  return a.n_estimators == b.n_estimators && a.max_depth == b.max_depth &&
         a.learning_rate == b.learning_rate &&
         a.min_samples_leaf == b.min_samples_leaf;
}

bool operator==(const Tree& a, const Tree& b) {
  if (a.nodes.size() != b.nodes.size()) return false;
  for (std::size_t i = 0; i < a.nodes.size(); ++i) {
    const Tree::Node& p = a.nodes[i];
    const Tree::Node& q = b.nodes[i];
    if (p.feature_index != q.feature_index || p.threshold != q.threshold ||
        p.left != q.left || p.right != q.right || p.value != q.value)
      return false;
  }
  return true;
}

bool operator==(const GbtModel& a, const GbtModel& b) {
  if (!(a.initial_score == b.initial_score &&
        a.hyperparams == b.hyperparams && a.feature_names == b.feature_names &&
        a.stages.size() == b.stages.size()))
    return false;
  for (std::size_t i = 0; i < a.stages.size(); ++i)
    if (!(a.stages[i].scale == b.stages[i].scale &&
          a.stages[i].tree == b.stages[i].tree))
      return false;
  return true;
}

double Tree::predict(std::span<const double> x) const {
  int i = 0;
  while (nodes[static_cast<std::size_t>(i)].left != -1) {
    const Node& n = nodes[static_cast<std::size_t>(i)];
    i = x[static_cast<std::size_t>(n.feature_index)] <= n.threshold ? n.left
                                                                    : n.right;
  }
  return nodes[static_cast<std::size_t>(i)].value;
}

namespace {

int node_depth(const Tree& t, int i) {
  const Tree::Node& n = t.nodes[static_cast<std::size_t>(i)];
  if (n.left == -1) return 0;
  return 1 + std::max(node_depth(t, n.left), node_depth(t, n.right));
}

} // namespace

int Tree::depth() const { return nodes.empty() ? 0 : node_depth(*this, 0); }

int Tree::n_internal() const {
  int count = 0;
  for (const Node& n : nodes)
    if (n.left != -1) ++count;
  return count;
}

double sigmoid(double score) {
  if (score >= 0.0) return 1.0 / (1.0 + std::exp(-score));
  const double e = std::exp(score);
  return e / (1.0 + e);
}

namespace {

double softplus(double z) {
  return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
}

struct SplitChoice {
  bool found = false;
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
};

// Best residual-SSE-reduction split over the subset `idx`. Candidates are
// midpoints between consecutive distinct sorted values; strict > keeps the
// first (lowest feature, smallest threshold) of any tied gain.
SplitChoice best_split(const Matrix& x, const std::vector<double>& residuals,
                       const std::vector<std::size_t>& idx,
                       int min_samples_leaf) {
  SplitChoice best;
  const double n = static_cast<double>(idx.size());
  double total = 0.0;
  for (std::size_t i : idx) total += residuals[i];
  const double base = total * total / n;

  std::vector<std::size_t> order(idx);
  for (std::size_t f = 0; f < x.cols; ++f) {
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return x(a, f) < x(b, f); });

    double left_sum = 0.0;
    for (std::size_t pos = 0; pos + 1 < order.size(); ++pos) {
      left_sum += residuals[order[pos]];
      const double v = x(order[pos], f);
      const double next = x(order[pos + 1], f);
      if (v == next) continue;

      const auto n_left = pos + 1;
      const auto n_right = order.size() - n_left;
      if (n_left < static_cast<std::size_t>(min_samples_leaf) ||
          n_right < static_cast<std::size_t>(min_samples_leaf))
        continue;

      const double right_sum = total - left_sum;
      const double gain = left_sum * left_sum / static_cast<double>(n_left) +
                          right_sum * right_sum / static_cast<double>(n_right) -
                          base;
      if (gain > best.gain) {
        best.found = true;
        best.feature = static_cast<int>(f);
        best.threshold = (v + next) * 0.5;
        best.gain = gain;
      }
    }
  }
  return best;
}

double leaf_value(const std::vector<double>& residuals,
                  const std::vector<double>& weights,
                  const std::vector<std::size_t>& idx) {
  double num = 0.0, den = 0.0;
  for (std::size_t i : idx) {
    num += residuals[i];
    den += weights[i];
  }
  return num / std::max(den, 1e-12);
}

int grow(Tree& tree, const Matrix& x, const std::vector<double>& residuals,
         const std::vector<double>& weights, std::vector<std::size_t>& idx,
         int depth, int depth_limit, int min_samples_leaf) {
  const int me = static_cast<int>(tree.nodes.size());
  tree.nodes.emplace_back();

  SplitChoice split;
  if (depth < depth_limit &&
      idx.size() >= 2 * static_cast<std::size_t>(min_samples_leaf))
    split = best_split(x, residuals, idx, min_samples_leaf);

  if (!split.found) {
    tree.nodes[static_cast<std::size_t>(me)].value =
        leaf_value(residuals, weights, idx);
    return me;
  }

  std::vector<std::size_t> left_idx, right_idx;
  left_idx.reserve(idx.size());
  right_idx.reserve(idx.size());
  for (std::size_t i : idx) {
    if (x(i, static_cast<std::size_t>(split.feature)) <= split.threshold)
      left_idx.push_back(i);
    else
      right_idx.push_back(i);
  }
  idx.clear();
  idx.shrink_to_fit();

  const int left =
      grow(tree, x, residuals, weights, left_idx, depth + 1, depth_limit,
           min_samples_leaf);
  const int right =
      grow(tree, x, residuals, weights, right_idx, depth + 1, depth_limit,
           min_samples_leaf);
  Tree::Node& n = tree.nodes[static_cast<std::size_t>(me)];
  n.feature_index = split.feature;
  n.threshold = split.threshold;
  n.left = left;
  n.right = right;
  return me;
}

void check_hyperparams(const Hyperparams& hp) {
  if (hp.n_estimators < 0) throw ParameterError("n_estimators must be >= 0");
  if (hp.max_depth < 1) throw ParameterError("max_depth must be >= 1");
  if (!(hp.learning_rate > 0.0) || hp.learning_rate > 1.0)
    throw ParameterError("learning_rate must be in (0, 1]");
  if (hp.min_samples_leaf < 1)
    throw ParameterError("min_samples_leaf must be >= 1");
}

} // namespace

double initial_score(const std::vector<int>& labels) {
  if (labels.empty()) throw ParameterError("no training labels");
  std::size_t pos = 0;
  for (int y : labels) {
    if (y != 0 && y != 1) throw ParameterError("labels must be 0 or 1");
    pos += static_cast<std::size_t>(y);
  }
  if (pos == 0 || pos == labels.size())
    throw SingleClassError("training labels contain a single class");
  const double p =
      static_cast<double>(pos) / static_cast<double>(labels.size());
  return std::log(p / (1.0 - p));
}

Tree fit_tree(const Matrix& x, const std::vector<double>& residuals,
              const std::vector<double>& weights, int depth_limit,
              int min_samples_leaf) {
  if (x.rows == 0 || x.cols == 0) throw ParameterError("empty matrix");
  if (residuals.size() != x.rows || weights.size() != x.rows)
    throw ParameterError("residuals/weights length must match rows");
  if (depth_limit < 1) throw ParameterError("depth_limit must be >= 1");
  if (min_samples_leaf < 1)
    throw ParameterError("min_samples_leaf must be >= 1");

  Tree tree;
  std::vector<std::size_t> idx(x.rows);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  grow(tree, x, residuals, weights, idx, 0, depth_limit, min_samples_leaf);
  return tree;
}

GbtModel train(const Matrix& x, const std::vector<int>& labels,
               const Hyperparams& hp, std::uint64_t /*seed*/,
               std::vector<double>* deviance_log) {
  check_hyperparams(hp);
  if (x.rows != labels.size())
    throw ParameterError("labels length must match rows");
  if (x.rows == 0 || x.cols == 0) throw ParameterError("empty matrix");
  for (std::size_t i = 0; i < x.rows; ++i)
    for (std::size_t j = 0; j < x.cols; ++j)
      if (!std::isfinite(x(i, j)))
        throw ParameterError("non-finite feature value at row " +
                             std::to_string(i));

  GbtModel model;
  model.hyperparams = hp;
  model.initial_score = initial_score(labels);

  std::vector<double> scores(x.rows, model.initial_score);
  if (deviance_log) {
    deviance_log->clear();
    deviance_log->push_back(mean_deviance(labels, scores));
  }

  std::vector<double> residuals(x.rows), weights(x.rows);
  model.stages.reserve(static_cast<std::size_t>(hp.n_estimators));
  for (int m = 0; m < hp.n_estimators; ++m) {
    for (std::size_t i = 0; i < x.rows; ++i) {
      const double p = sigmoid(scores[i]);
      residuals[i] = static_cast<double>(labels[i]) - p;
      weights[i] = p * (1.0 - p);
    }
    GbtStage stage;
    stage.tree = fit_tree(x, residuals, weights, hp.max_depth,
                          hp.min_samples_leaf);
    stage.scale = hp.learning_rate;
    for (std::size_t i = 0; i < x.rows; ++i)
      scores[i] += stage.scale * stage.tree.predict(
                                     std::span<const double>(x.row(i), x.cols));
    model.stages.push_back(std::move(stage));
    if (deviance_log) deviance_log->push_back(mean_deviance(labels, scores));
  }
  return model;
}

double predict_score(const GbtModel& model, std::span<const double> x) {
  if (!model.feature_names.empty() && x.size() != model.feature_names.size())
    throw ParameterError("feature vector has wrong length");
  double score = model.initial_score;
  for (const GbtStage& stage : model.stages)
    score += stage.scale * stage.tree.predict(x);
  return score;
}

double predict_proba(const GbtModel& model, std::span<const double> x) {
  return sigmoid(predict_score(model, x));
}

int predict_label(const GbtModel& model, std::span<const double> x,
                  double threshold) {
  if (threshold < 0.0 || threshold > 1.0)
    throw ParameterError("threshold must be in [0, 1]");
  return predict_proba(model, x) >= threshold ? 1 : 0;
}

double mean_deviance(const std::vector<int>& labels,
                     const std::vector<double>& scores) {
  if (labels.size() != scores.size() || labels.empty())
    throw ParameterError("labels/scores length mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i)
    acc += labels[i] == 1 ? softplus(-scores[i]) : softplus(scores[i]);
  return acc / static_cast<double>(labels.size());
}

namespace {

constexpr const char* kFormatTag = "neosleep-gbt-v1";

ordered_json node_to_json(const Tree& tree, int i) {
  const Tree::Node& n = tree.nodes[static_cast<std::size_t>(i)];
  ordered_json j;
  if (n.left == -1) {
    j["value"] = n.value;
  } else {
    j["feature_index"] = n.feature_index;
    j["threshold"] = n.threshold;
    j["left"] = node_to_json(tree, n.left);
    j["right"] = node_to_json(tree, n.right);
  }
  return j;
}

int node_from_json(Tree& tree, const ordered_json& j) {
  const int me = static_cast<int>(tree.nodes.size());
  tree.nodes.emplace_back();
  if (j.contains("value")) {
    tree.nodes[static_cast<std::size_t>(me)].value = j.at("value");
    return me;
  }
  const int f = j.at("feature_index");
  const double t = j.at("threshold");
  const int left = node_from_json(tree, j.at("left"));
  const int right = node_from_json(tree, j.at("right"));
  Tree::Node& n = tree.nodes[static_cast<std::size_t>(me)];
  n.feature_index = f;
  n.threshold = t;
  n.left = left;
  n.right = right;
  return me;
}

} // namespace

std::string save_model(const GbtModel& model) {
  ordered_json j;
  j["format"] = kFormatTag;
  j["initial_score"] = model.initial_score;
  j["hyperparams"] = {
      {"n_estimators", model.hyperparams.n_estimators},
      {"max_depth", model.hyperparams.max_depth},
      {"learning_rate", model.hyperparams.learning_rate},
      {"min_samples_leaf", model.hyperparams.min_samples_leaf}};
  j["feature_names"] = model.feature_names;
  ordered_json stages = ordered_json::array();
  for (const GbtStage& s : model.stages) {
    ordered_json e;
    e["scale"] = s.scale;
    e["tree"] = node_to_json(s.tree, 0);
    stages.push_back(std::move(e));
  }
  j["stages"] = std::move(stages);
  return j.dump(2) + "\n";
}

GbtModel load_model(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const std::exception& e) {
    throw ParseError("model", 0, e.what());
  }
  try {
    if (j.at("format").get<std::string>() != kFormatTag)
      throw ParseError("model", 0, "unsupported model format");
    GbtModel model;
    model.initial_score = j.at("initial_score");
    const ordered_json& hp = j.at("hyperparams");
    model.hyperparams.n_estimators = hp.at("n_estimators");
    model.hyperparams.max_depth = hp.at("max_depth");
    model.hyperparams.learning_rate = hp.at("learning_rate");
    model.hyperparams.min_samples_leaf = hp.at("min_samples_leaf");
    model.feature_names =
        j.at("feature_names").get<std::vector<std::string>>();
    for (const ordered_json& e : j.at("stages")) {
      GbtStage stage;
      stage.scale = e.at("scale");
      node_from_json(stage.tree, e.at("tree"));
      model.stages.push_back(std::move(stage));
    }
    return model;
  } catch (const ordered_json::exception& e) {
    throw ParseError("model", 0, e.what());
  }
}

void save_model_file(const GbtModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  const std::string text = save_model(model);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("write failed for " + path);
}

GbtModel load_model_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_model(ss.str());
}

} // namespace neosleep
