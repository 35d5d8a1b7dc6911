#include "revmatch/classifiers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace revmatch::classifiers {

using detail::BoostParams;
using detail::KnnParams;
using detail::NbParams;
using detail::OneRParams;
using detail::StumpParams;
using detail::TreeNode;
using detail::TreeParams;
using json = nlohmann::json;

namespace {

constexpr double kVarianceFloor = 1e-9;
constexpr int kClasses = 5;

// Argmax over per-class scores; equal scores resolve to the lower star.
int argmax_label(const std::array<double, kClasses>& scores) {
  int best = 0;
  for (int c = 1; c < kClasses; ++c)
    if (scores[c] > scores[best]) best = c;
  return best + 1;
}

int weighted_majority(const std::array<double, kClasses>& counts) {
  return argmax_label(counts);
}

double entropy(const std::array<double, kClasses>& counts, double total) {
  if (total <= 0) return 0.0;
  double h = 0.0;
  for (double c : counts) {
    if (c <= 0) continue;
    double p = c / total;
    h -= p * std::log2(p);
  }
  return h;
}

struct StumpFit {
  StumpParams params;
  double weighted_error = 0.0;
};

// Exhaustive threshold search minimizing weighted misclassification.
// Candidate thresholds are midpoints between adjacent distinct values.
StumpFit train_stump(const Dataset& data, const std::vector<double>& weights) {
  const std::size_t n = data.size();
  const int dims = data.dim();
  std::array<double, kClasses> total_counts{};
  double total_weight = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    total_counts[static_cast<std::size_t>(data.y[i].value() - 1)] += weights[i];
    total_weight += weights[i];
  }
  const int global_majority = weighted_majority(total_counts);

  StumpFit best;
  best.params.split = false;
  best.params.left_label = best.params.right_label = global_majority;
  best.weighted_error =
      total_weight -
      total_counts[static_cast<std::size_t>(global_majority - 1)];

  std::vector<std::size_t> order(n);
  for (int d = 0; d < dims; ++d) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return data.x[a].values[static_cast<std::size_t>(d)] <
             data.x[b].values[static_cast<std::size_t>(d)];
    });
    std::array<double, kClasses> left{};
    std::array<double, kClasses> right = total_counts;
    for (std::size_t pos = 0; pos + 1 < n; ++pos) {
      std::size_t i = order[pos];
      int cls = data.y[i].value() - 1;
      left[static_cast<std::size_t>(cls)] += weights[i];
      right[static_cast<std::size_t>(cls)] -= weights[i];
      double v = data.x[i].values[static_cast<std::size_t>(d)];
      double v_next =
          data.x[order[pos + 1]].values[static_cast<std::size_t>(d)];
      if (v == v_next) continue;
      int left_label = weighted_majority(left);
      int right_label = weighted_majority(right);
      double err = total_weight -
                   left[static_cast<std::size_t>(left_label - 1)] -
                   right[static_cast<std::size_t>(right_label - 1)];
      if (err < best.weighted_error) {
        best.weighted_error = err;
        best.params.split = true;
        best.params.dim = d;
        best.params.threshold = v + (v_next - v) / 2.0;
        best.params.left_label = left_label;
        best.params.right_label = right_label;
      }
    }
  }
  return best;
}

int stump_predict(const StumpParams& p, const features::FeatureVector& x) {
  if (!p.split) return p.left_label;
  return x.values[static_cast<std::size_t>(p.dim)] <= p.threshold
             ? p.left_label
             : p.right_label;
}

NbParams train_nb(const Dataset& data) {
  const int dims = data.dim();
  NbParams p;
  p.mean.assign(static_cast<std::size_t>(dims), {});
  p.var.assign(static_cast<std::size_t>(dims), {});
  std::array<double, kClasses> counts{};
  for (std::size_t i = 0; i < data.size(); ++i)
    counts[static_cast<std::size_t>(data.y[i].value() - 1)] += 1.0;
  for (int c = 0; c < kClasses; ++c)
    p.prior[static_cast<std::size_t>(c)] =
        counts[static_cast<std::size_t>(c)] / static_cast<double>(data.size());
  for (int d = 0; d < dims; ++d) {
    std::array<double, kClasses> sum{}, sum_sq{};
    for (std::size_t i = 0; i < data.size(); ++i) {
      int c = data.y[i].value() - 1;
      double v = data.x[i].values[static_cast<std::size_t>(d)];
      sum[static_cast<std::size_t>(c)] += v;
      sum_sq[static_cast<std::size_t>(c)] += v * v;
    }
    for (int c = 0; c < kClasses; ++c) {
      double cnt = counts[static_cast<std::size_t>(c)];
      if (cnt == 0) continue;
      double mean = sum[static_cast<std::size_t>(c)] / cnt;
      double var = sum_sq[static_cast<std::size_t>(c)] / cnt - mean * mean;
      p.mean[static_cast<std::size_t>(d)][static_cast<std::size_t>(c)] = mean;
      p.var[static_cast<std::size_t>(d)][static_cast<std::size_t>(c)] =
          std::max(var, kVarianceFloor);
    }
  }
  return p;
}

int nb_predict(const NbParams& p, const features::FeatureVector& x) {
  std::array<double, kClasses> scores;
  scores.fill(-std::numeric_limits<double>::infinity());
  for (int c = 0; c < kClasses; ++c) {
    double prior = p.prior[static_cast<std::size_t>(c)];
    if (prior == 0) continue;
    double log_p = std::log(prior);
    for (std::size_t d = 0; d < x.values.size(); ++d) {
      double mean = p.mean[d][static_cast<std::size_t>(c)];
      double var = std::max(p.var[d][static_cast<std::size_t>(c)],
                            kVarianceFloor);
      double diff = x.values[d] - mean;
      log_p += -0.5 * std::log(2.0 * M_PI * var) - diff * diff / (2.0 * var);
    }
    scores[static_cast<std::size_t>(c)] = log_p;
  }
  return argmax_label(scores);
}

OneRParams train_oner(const Dataset& data, int max_bins) {
  const std::size_t n = data.size();
  const int dims = data.dim();
  std::array<double, kClasses> total_counts{};
  for (std::size_t i = 0; i < n; ++i)
    total_counts[static_cast<std::size_t>(data.y[i].value() - 1)] += 1.0;

  OneRParams best;
  best.default_label = weighted_majority(total_counts);
  long best_errors = std::numeric_limits<long>::max();

  std::vector<std::size_t> order(n);
  for (int d = 0; d < dims; ++d) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return data.x[a].values[static_cast<std::size_t>(d)] <
             data.x[b].values[static_cast<std::size_t>(d)];
    });
    // Equal-frequency bins; a bin never ends mid-run of equal values.
    std::size_t target =
        std::max<std::size_t>(1, (n + max_bins - 1) / max_bins);
    std::vector<double> bounds;
    std::vector<int> labels;
    long errors = 0;
    std::size_t pos = 0;
    while (pos < n) {
      std::size_t end = std::min(pos + target, n);
      while (end < n &&
             data.x[order[end]].values[static_cast<std::size_t>(d)] ==
                 data.x[order[end - 1]].values[static_cast<std::size_t>(d)])
        ++end;
      std::array<double, kClasses> counts{};
      double bin_total = 0.0;
      for (std::size_t q = pos; q < end; ++q) {
        counts[static_cast<std::size_t>(data.y[order[q]].value() - 1)] += 1.0;
        bin_total += 1.0;
      }
      int label = weighted_majority(counts);
      errors += static_cast<long>(
          bin_total - counts[static_cast<std::size_t>(label - 1)]);
      labels.push_back(label);
      if (end < n) {
        double hi = data.x[order[end - 1]].values[static_cast<std::size_t>(d)];
        double next = data.x[order[end]].values[static_cast<std::size_t>(d)];
        bounds.push_back(hi + (next - hi) / 2.0);
      } else {
        bounds.push_back(std::numeric_limits<double>::infinity());
      }
      pos = end;
    }
    if (errors < best_errors) {
      best_errors = errors;
      best.dim = d;
      best.upper_bounds = bounds;
      best.labels = labels;
    }
  }
  return best;
}

int oner_predict(const OneRParams& p, const features::FeatureVector& x) {
  double v = x.values[static_cast<std::size_t>(p.dim)];
  for (std::size_t b = 0; b < p.upper_bounds.size(); ++b)
    if (v <= p.upper_bounds[b]) return p.labels[b];
  return p.default_label;
}

struct TreeBuilder {
  const Dataset& data;
  int min_leaf;
  std::vector<TreeNode> nodes;

  int build(std::vector<std::size_t> rows) {
    std::array<double, kClasses> counts{};
    for (std::size_t i : rows)
      counts[static_cast<std::size_t>(data.y[i].value() - 1)] += 1.0;
    const double total = static_cast<double>(rows.size());
    const int majority = weighted_majority(counts);
    const double node_entropy = entropy(counts, total);

    int node_index = static_cast<int>(nodes.size());
    nodes.emplace_back();
    nodes[static_cast<std::size_t>(node_index)].label = majority;
    if (node_entropy == 0.0 ||
        rows.size() < 2 * static_cast<std::size_t>(min_leaf))
      return node_index;

    // Best split by information gain over midpoint thresholds; both
    // children must keep at least min_leaf rows.
    int best_dim = -1;
    double best_threshold = 0.0;
    double best_gain = 0.0;
    const int dims = data.dim();
    std::vector<std::size_t> order;
    for (int d = 0; d < dims; ++d) {
      order = rows;
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) {
                         return data.x[a].values[static_cast<std::size_t>(d)] <
                                data.x[b].values[static_cast<std::size_t>(d)];
                       });
      std::array<double, kClasses> left{};
      std::array<double, kClasses> right = counts;
      for (std::size_t pos = 0; pos + 1 < order.size(); ++pos) {
        std::size_t i = order[pos];
        int cls = data.y[i].value() - 1;
        left[static_cast<std::size_t>(cls)] += 1.0;
        right[static_cast<std::size_t>(cls)] -= 1.0;
        double v = data.x[i].values[static_cast<std::size_t>(d)];
        double v_next =
            data.x[order[pos + 1]].values[static_cast<std::size_t>(d)];
        if (v == v_next) continue;
        double n_left = static_cast<double>(pos + 1);
        double n_right = total - n_left;
        if (n_left < min_leaf || n_right < min_leaf) continue;
        double gain = node_entropy - (n_left / total) * entropy(left, n_left) -
                      (n_right / total) * entropy(right, n_right);
        if (gain > best_gain + 1e-12) {
          best_gain = gain;
          best_dim = d;
          best_threshold = v + (v_next - v) / 2.0;
        }
      }
    }
    if (best_dim < 0) return node_index;

    std::vector<std::size_t> left_rows, right_rows;
    for (std::size_t i : rows) {
      if (data.x[i].values[static_cast<std::size_t>(best_dim)] <=
          best_threshold)
        left_rows.push_back(i);
      else
        right_rows.push_back(i);
    }
    int left = build(std::move(left_rows));
    int right = build(std::move(right_rows));
    TreeNode& node = nodes[static_cast<std::size_t>(node_index)];
    node.dim = best_dim;
    node.threshold = best_threshold;
    node.left = left;
    node.right = right;
    return node_index;
  }
};

int tree_predict(const TreeParams& p, const features::FeatureVector& x) {
  int node = 0;
  for (;;) {
    const TreeNode& n = p.nodes[static_cast<std::size_t>(node)];
    if (n.dim < 0) return n.label;
    node = x.values[static_cast<std::size_t>(n.dim)] <= n.threshold ? n.left
                                                                    : n.right;
  }
}

BoostParams train_boost(const Dataset& data, int rounds) {
  const std::size_t n = data.size();
  BoostParams p;
  std::array<double, kClasses> total_counts{};
  for (std::size_t i = 0; i < n; ++i)
    total_counts[static_cast<std::size_t>(data.y[i].value() - 1)] += 1.0;
  p.default_label = weighted_majority(total_counts);

  std::vector<double> weights(n, 1.0 / static_cast<double>(n));
  for (int round = 0; round < rounds; ++round) {
    StumpFit fit = train_stump(data, weights);
    double epsilon = fit.weighted_error;
    if (epsilon >= 1.0 - 1.0 / kClasses) break;  // abort round and stop
    if (epsilon <= 0.0) {
      // Perfect learner: cap its vote and stop.
      p.stumps.push_back(fit.params);
      p.alphas.push_back(std::log((1.0 - 1e-10) / 1e-10) +
                         std::log(kClasses - 1.0));
      break;
    }
    double alpha =
        std::log((1.0 - epsilon) / epsilon) + std::log(kClasses - 1.0);
    p.stumps.push_back(fit.params);
    p.alphas.push_back(alpha);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      bool wrong = stump_predict(fit.params, data.x[i]) != data.y[i].value();
      if (wrong) weights[i] *= std::exp(alpha);
      sum += weights[i];
    }
    for (double& w : weights) w /= sum;
  }
  return p;
}

int boost_predict(const BoostParams& p, const features::FeatureVector& x) {
  if (p.stumps.empty()) return p.default_label;
  std::array<double, kClasses> votes{};
  for (std::size_t s = 0; s < p.stumps.size(); ++s)
    votes[static_cast<std::size_t>(stump_predict(p.stumps[s], x) - 1)] +=
        p.alphas[s];
  return argmax_label(votes);
}

KnnParams train_knn(const Dataset& data, const Config& config) {
  if (config.knn_k < 1) throw UsageError("BadConfig: knn k must be >= 1");
  KnnParams p;
  p.k = config.knn_k;
  p.cosine = config.knn_cosine;
  for (std::size_t i = 0; i < data.size(); ++i) {
    p.rows.push_back(data.x[i].values);
    p.labels.push_back(data.y[i].value());
  }
  return p;
}

int knn_predict(const KnnParams& p, const features::FeatureVector& x) {
  const std::size_t n = p.rows.size();
  std::vector<std::pair<double, std::size_t>> dist(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& row = p.rows[i];
    double d;
    if (p.cosine) {
      double dot = 0, na = 0, nb = 0;
      for (std::size_t j = 0; j < row.size(); ++j) {
        dot += row[j] * x.values[j];
        na += row[j] * row[j];
        nb += x.values[j] * x.values[j];
      }
      double denom = std::sqrt(na) * std::sqrt(nb);
      d = denom > 0 ? 1.0 - dot / denom : 1.0;
    } else {
      double sq = 0;
      for (std::size_t j = 0; j < row.size(); ++j) {
        double diff = row[j] - x.values[j];
        sq += diff * diff;
      }
      d = sq;
    }
    dist[i] = {d, i};
  }
  std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(p.k), n);
  std::partial_sort(dist.begin(), dist.begin() + static_cast<long>(k),
                    dist.end());
  std::array<double, kClasses> votes{};
  for (std::size_t i = 0; i < k; ++i)
    votes[static_cast<std::size_t>(p.labels[dist[i].second] - 1)] += 1.0;
  return argmax_label(votes);
}

}  // namespace

Algorithm algorithm_from_name(const std::string& name) {
  if (name == "nb" || name == "naive-bayes") return Algorithm::NaiveBayes;
  if (name == "stump") return Algorithm::DecisionStump;
  if (name == "oner" || name == "1r") return Algorithm::OneR;
  if (name == "knn" || name == "ibk") return Algorithm::Knn;
  if (name == "tree" || name == "j48") return Algorithm::DecisionTree;
  if (name == "adaboost" || name == "boost") return Algorithm::AdaBoost;
  throw UsageError("UnknownAlgorithm: " + name);
}

std::string algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::NaiveBayes: return "nb";
    case Algorithm::DecisionStump: return "stump";
    case Algorithm::OneR: return "oner";
    case Algorithm::Knn: return "knn";
    case Algorithm::DecisionTree: return "tree";
    case Algorithm::AdaBoost: return "adaboost";
  }
  throw UsageError("UnknownAlgorithm");
}

BaselineModel train(Algorithm algorithm, const Dataset& data,
                    const Config& config) {
  if (data.size() == 0) throw DataError("EmptyDataset");
  if (config.boost_rounds < 1)
    throw UsageError("BadConfig: boost rounds must be >= 1");
  const int dim = data.dim();
  for (const auto& row : data.x)
    if (static_cast<int>(row.values.size()) != dim)
      throw DataError("SchemaMismatch: inconsistent row widths");

  switch (algorithm) {
    case Algorithm::NaiveBayes:
      return {algorithm, dim, train_nb(data)};
    case Algorithm::DecisionStump: {
      std::vector<double> uniform(data.size(), 1.0);
      return {algorithm, dim, train_stump(data, uniform).params};
    }
    case Algorithm::OneR:
      return {algorithm, dim, train_oner(data, config.oner_bins)};
    case Algorithm::Knn:
      return {algorithm, dim, train_knn(data, config)};
    case Algorithm::DecisionTree: {
      TreeBuilder builder{data, config.min_leaf, {}};
      std::vector<std::size_t> rows(data.size());
      std::iota(rows.begin(), rows.end(), std::size_t{0});
      builder.build(std::move(rows));
      return {algorithm, dim, TreeParams{std::move(builder.nodes)}};
    }
    case Algorithm::AdaBoost:
      return {algorithm, dim, train_boost(data, config.boost_rounds)};
  }
  throw UsageError("UnknownAlgorithm");
}

corpus::StarRating BaselineModel::predict(
    const features::FeatureVector& x) const {
  if (static_cast<int>(x.values.size()) != dim_)
    throw DataError("SchemaMismatch: expected dim " + std::to_string(dim_) +
                    ", got " + std::to_string(x.values.size()));
  int label = std::visit(
      [&](const auto& p) -> int {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, NbParams>) return nb_predict(p, x);
        else if constexpr (std::is_same_v<T, StumpParams>)
          return stump_predict(p, x);
        else if constexpr (std::is_same_v<T, OneRParams>)
          return oner_predict(p, x);
        else if constexpr (std::is_same_v<T, KnnParams>)
          return knn_predict(p, x);
        else if constexpr (std::is_same_v<T, TreeParams>)
          return tree_predict(p, x);
        else
          return boost_predict(p, x);
      },
      params_);
  return corpus::StarRating(label);
}

namespace {

json stump_to_json(const StumpParams& p) {
  return {{"dim", p.dim},
          {"threshold", p.threshold},
          {"left_label", p.left_label},
          {"right_label", p.right_label},
          {"split", p.split}};
}

StumpParams stump_from_json(const json& j) {
  StumpParams p;
  p.dim = j.at("dim");
  p.threshold = j.at("threshold");
  p.left_label = j.at("left_label");
  p.right_label = j.at("right_label");
  p.split = j.at("split");
  return p;
}

}  // namespace

json BaselineModel::to_json() const {
  json doc;
  doc["format_version"] = 1;
  doc["algorithm"] = algorithm_name(algo_);
  doc["dim"] = dim_;
  json params;
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, NbParams>) {
          params = {{"prior", p.prior}, {"mean", p.mean}, {"var", p.var}};
        } else if constexpr (std::is_same_v<T, StumpParams>) {
          params = stump_to_json(p);
        } else if constexpr (std::is_same_v<T, OneRParams>) {
          // +inf is not representable in JSON; encode bounds as strings.
          std::vector<std::string> bounds;
          for (double b : p.upper_bounds)
            bounds.push_back(std::isinf(b) ? "inf" : std::to_string(b));
          params = {{"dim", p.dim},
                    {"upper_bounds", bounds},
                    {"labels", p.labels},
                    {"default_label", p.default_label}};
        } else if constexpr (std::is_same_v<T, KnnParams>) {
          params = {{"k", p.k},
                    {"cosine", p.cosine},
                    {"rows", p.rows},
                    {"labels", p.labels}};
        } else if constexpr (std::is_same_v<T, TreeParams>) {
          json nodes = json::array();
          for (const TreeNode& n : p.nodes)
            nodes.push_back({{"dim", n.dim},
                             {"threshold", n.threshold},
                             {"left", n.left},
                             {"right", n.right},
                             {"label", n.label}});
          params = {{"nodes", nodes}};
        } else {
          json stumps = json::array();
          for (const StumpParams& s : p.stumps) stumps.push_back(stump_to_json(s));
          params = {{"stumps", stumps},
                    {"alphas", p.alphas},
                    {"default_label", p.default_label}};
        }
      },
      params_);
  doc["params"] = params;
  return doc;
}

BaselineModel BaselineModel::from_json(const json& doc) {
  if (!doc.contains("format_version") || doc["format_version"] != 1)
    throw DataError("VersionMismatch: unsupported model format");
  Algorithm algo = algorithm_from_name(doc.at("algorithm"));
  int dim = doc.at("dim");
  const json& p = doc.at("params");
  switch (algo) {
    case Algorithm::NaiveBayes: {
      NbParams nb;
      nb.prior = p.at("prior");
      nb.mean = p.at("mean").get<std::vector<std::array<double, 5>>>();
      nb.var = p.at("var").get<std::vector<std::array<double, 5>>>();
      return {algo, dim, nb};
    }
    case Algorithm::DecisionStump:
      return {algo, dim, stump_from_json(p)};
    case Algorithm::OneR: {
      OneRParams o;
      o.dim = p.at("dim");
      for (const auto& b : p.at("upper_bounds"))
        o.upper_bounds.push_back(
            b.get<std::string>() == "inf"
                ? std::numeric_limits<double>::infinity()
                : std::stod(b.get<std::string>()));
      o.labels = p.at("labels").get<std::vector<int>>();
      o.default_label = p.at("default_label");
      return {algo, dim, o};
    }
    case Algorithm::Knn: {
      KnnParams k;
      k.k = p.at("k");
      k.cosine = p.at("cosine");
      k.rows = p.at("rows").get<std::vector<std::vector<double>>>();
      k.labels = p.at("labels").get<std::vector<int>>();
      return {algo, dim, k};
    }
    case Algorithm::DecisionTree: {
      TreeParams t;
      for (const auto& n : p.at("nodes")) {
        TreeNode node;
        node.dim = n.at("dim");
        node.threshold = n.at("threshold");
        node.left = n.at("left");
        node.right = n.at("right");
        node.label = n.at("label");
        t.nodes.push_back(node);
      }
      return {algo, dim, t};
    }
    case Algorithm::AdaBoost: {
      BoostParams b;
      for (const auto& s : p.at("stumps")) b.stumps.push_back(stump_from_json(s));
      b.alphas = p.at("alphas").get<std::vector<double>>();
      b.default_label = p.at("default_label");
      return {algo, dim, b};
    }
  }
  throw DataError("UnknownAlgorithm in model file");
}

}  // namespace revmatch::classifiers
