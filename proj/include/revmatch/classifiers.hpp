#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "revmatch/corpus.hpp"
#include "revmatch/features.hpp"

namespace revmatch::classifiers {

enum class Algorithm {
  NaiveBayes,     // Gaussian likelihoods per dimension
  DecisionStump,  // one-level decision tree
  OneR,           // single-attribute rule with equal-frequency binning
  Knn,            // IBk
  DecisionTree,   // entropy-based, J48-style (no pruning)
  AdaBoost,       // AdaBoost.M1 over stumps
};

Algorithm algorithm_from_name(const std::string& name);
std::string algorithm_name(Algorithm a);

struct Config {
  int knn_k = 3;
  bool knn_cosine = false;  // cosine distance, for sparse TF-IDF schemas
  int boost_rounds = 10;
  int oner_bins = 10;
  int min_leaf = 2;
};

struct Dataset {
  std::vector<features::FeatureVector> x;
  std::vector<corpus::StarRating> y;

  int dim() const {
    return x.empty() ? 0 : static_cast<int>(x.front().values.size());
  }
  std::size_t size() const { return x.size(); }
};

namespace detail {

struct NbParams {
  std::array<double, 5> prior{};           // 0 for unseen classes
  std::vector<std::array<double, 5>> mean; // per dim, per class
  std::vector<std::array<double, 5>> var;
};

struct StumpParams {
  int dim = 0;
  double threshold = 0.0;
  int left_label = 1;   // value <= threshold
  int right_label = 1;  // value > threshold
  bool split = false;   // false: always predict left_label
};

struct OneRParams {
  int dim = 0;
  std::vector<double> upper_bounds;  // bin b covers (bounds[b-1], bounds[b]]
  std::vector<int> labels;           // one per bin
  int default_label = 1;
};

struct KnnParams {
  int k = 1;
  bool cosine = false;
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
};

struct TreeNode {
  int dim = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  int label = 1;
};

struct TreeParams {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
};

struct BoostParams {
  std::vector<StumpParams> stumps;
  std::vector<double> alphas;
  int default_label = 1;
};

}  // namespace detail

class BaselineModel {
 public:
  corpus::StarRating predict(const features::FeatureVector& x) const;

  Algorithm algorithm() const { return algo_; }
  int dim() const { return dim_; }

  nlohmann::json to_json() const;
  static BaselineModel from_json(const nlohmann::json& doc);

  using Params =
      std::variant<detail::NbParams, detail::StumpParams, detail::OneRParams,
                   detail::KnnParams, detail::TreeParams, detail::BoostParams>;

  BaselineModel(Algorithm algo, int dim, Params params)
      : algo_(algo), dim_(dim), params_(std::move(params)) {}

 private:
  Algorithm algo_;
  int dim_ = 0;
  Params params_;
};

// Deterministic given data order and config.
BaselineModel train(Algorithm algorithm, const Dataset& data,
                    const Config& config);

}  // namespace revmatch::classifiers
