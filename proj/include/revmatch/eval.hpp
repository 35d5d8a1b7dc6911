#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "revmatch/corpus.hpp"

namespace revmatch::eval {

// Category-level accuracy: a prediction counts as correct iff it falls in
// the same Good/Neutral/Bad category as the truth.
double accuracy(const std::vector<corpus::StarRating>& pred,
                const std::vector<corpus::StarRating>& truth);

struct FoldPlan {
  std::vector<std::vector<int>> folds;  // disjoint, covering 0..n-1
  std::uint64_t seed = 0;
};

// Seeded shuffle then contiguous split; when n mod k != 0 the earlier folds
// take the extra items.
FoldPlan kfold_plan(int n, int k, std::uint64_t seed);

struct CvResult {
  double mean_accuracy = 0.0;
  std::vector<double> per_fold;
};

// trainer(train_indices) must refit all state (percentiles, TF-IDF,
// vocabulary) on the training rows only and return a predictor over row
// indices. Each fold is the test set exactly once.
using Trainer = std::function<
    std::function<corpus::StarRating(int)>(const std::vector<int>&)>;

CvResult cross_validate(const Trainer& trainer,
                        const std::vector<corpus::StarRating>& truth,
                        const FoldPlan& plan);

// Pearson r and Spearman rho (Pearson on midranks). Both inputs need
// non-zero variance.
std::pair<double, double> correlate(const std::vector<double>& ratings,
                                    const std::vector<double>& scores);

struct AppReport {
  std::string app_id;
  long review_count = 0;
  long mismatch_count = 0;
  double mismatch_pct = 0.0;
  double original_mean = 0.0;
  double predicted_mean = 0.0;
};

struct EvalReport {
  double accuracy = 0.0;
  corpus::MismatchMatrix confusion;  // predicted vs original
  std::vector<AppReport> per_app;
  long total_reviews = 0;
  long total_mismatches = 0;
  double overall_mismatch_pct = 0.0;
};

// Requires every corpus review to carry an original rating and to appear in
// the prediction map.
EvalReport prevalence_report(
    const corpus::Corpus& corpus,
    const std::map<std::string, corpus::StarRating>& predictions);

nlohmann::json report_to_json(const EvalReport& report);
std::string report_to_text(const EvalReport& report);
std::string confusion_to_csv(const corpus::MismatchMatrix& m);
// Per-app (app, match count, mismatch count) rows for external plotting.
std::string chart_data_csv(const EvalReport& report);

}  // namespace revmatch::eval
