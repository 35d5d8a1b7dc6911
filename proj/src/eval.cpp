#include "revmatch/eval.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "revmatch/rng.hpp"

namespace revmatch::eval {

using corpus::StarRating;

double accuracy(const std::vector<StarRating>& pred,
                const std::vector<StarRating>& truth) {
  if (pred.size() != truth.size()) throw DataError("LengthMismatch");
  if (pred.empty()) throw DataError("Empty");
  long correct = 0;
  for (std::size_t i = 0; i < pred.size(); ++i)
    if (corpus::category_of(pred[i]) == corpus::category_of(truth[i]))
      ++correct;
  return static_cast<double>(correct) / static_cast<double>(pred.size());
}

FoldPlan kfold_plan(int n, int k, std::uint64_t seed) {
  if (k < 2) throw UsageError("BadK: need k >= 2");
  if (n < k) throw UsageError("BadK: need n >= k");
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  Rng rng(derive_seed(seed, "kfold"));
  rng.shuffle(order);

  FoldPlan plan;
  plan.seed = seed;
  int base = n / k;
  int extra = n % k;  // earlier folds take one extra item each
  std::size_t pos = 0;
  for (int f = 0; f < k; ++f) {
    int size = base + (f < extra ? 1 : 0);
    plan.folds.emplace_back(order.begin() + static_cast<long>(pos),
                            order.begin() + static_cast<long>(pos) + size);
    pos += static_cast<std::size_t>(size);
  }
  return plan;
}

CvResult cross_validate(const Trainer& trainer,
                        const std::vector<StarRating>& truth,
                        const FoldPlan& plan) {
  std::size_t covered = 0;
  for (const auto& fold : plan.folds) covered += fold.size();
  if (covered != truth.size())
    throw DataError("LengthMismatch: plan does not match dataset size");

  CvResult result;
  for (std::size_t f = 0; f < plan.folds.size(); ++f) {
    std::vector<int> train_indices;
    for (std::size_t g = 0; g < plan.folds.size(); ++g) {
      if (g == f) continue;
      train_indices.insert(train_indices.end(), plan.folds[g].begin(),
                           plan.folds[g].end());
    }
    auto predictor = trainer(train_indices);
    std::vector<StarRating> pred, fold_truth;
    for (int i : plan.folds[f]) {
      pred.push_back(predictor(i));
      fold_truth.push_back(truth[static_cast<std::size_t>(i)]);
    }
    result.per_fold.push_back(accuracy(pred, fold_truth));
  }
  result.mean_accuracy =
      std::accumulate(result.per_fold.begin(), result.per_fold.end(), 0.0) /
      static_cast<double>(result.per_fold.size());
  return result;
}

namespace {

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double dx = x[i] - mx;
    double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0 || syy == 0) throw DataError("ZeroVariance");
  return sxy / std::sqrt(sxx * syy);
}

std::vector<double> midranks(const std::vector<double>& v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t q = i; q <= j; ++q) ranks[order[q]] = rank;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

std::pair<double, double> correlate(const std::vector<double>& ratings,
                                    const std::vector<double>& scores) {
  if (ratings.size() != scores.size()) throw DataError("LengthMismatch");
  if (ratings.size() < 3) throw DataError("LengthMismatch: need >= 3 pairs");
  double r = pearson(ratings, scores);
  double rho = pearson(midranks(ratings), midranks(scores));
  return {r, rho};
}

EvalReport prevalence_report(
    const corpus::Corpus& corpus,
    const std::map<std::string, StarRating>& predictions) {
  std::string missing;
  for (const auto& review : corpus.reviews()) {
    if (!predictions.contains(review.review_id)) {
      if (!missing.empty()) missing += ", ";
      missing += review.review_id;
    }
    if (!review.rating)
      throw DataError("MissingRating: " + review.review_id);
  }
  if (!missing.empty()) throw DataError("MissingPredictions: " + missing);

  EvalReport report;
  std::vector<StarRating> pred, truth;
  std::vector<std::pair<StarRating, StarRating>> pairs;

  for (const auto& [app_id, ids] : corpus.per_app()) {
    AppReport app;
    app.app_id = app_id;
    double orig_sum = 0.0, pred_sum = 0.0;
    for (const std::string& id : ids) {
      const corpus::Review* review = corpus.find(id);
      StarRating original = *review->rating;
      StarRating predicted = predictions.at(id);
      app.review_count++;
      orig_sum += original.value();
      pred_sum += predicted.value();
      if (corpus::is_mismatch(original, predicted)) app.mismatch_count++;
      pred.push_back(predicted);
      truth.push_back(original);
      pairs.emplace_back(original, predicted);
    }
    app.mismatch_pct = 100.0 * static_cast<double>(app.mismatch_count) /
                       static_cast<double>(app.review_count);
    app.original_mean = orig_sum / static_cast<double>(app.review_count);
    app.predicted_mean = pred_sum / static_cast<double>(app.review_count);
    report.per_app.push_back(std::move(app));
    report.total_reviews += ids.size();
  }

  report.accuracy = accuracy(pred, truth);
  auto [matrix, mismatches] = corpus::mismatch_matrix(pairs);
  report.confusion = matrix;
  report.total_mismatches = mismatches;
  report.overall_mismatch_pct = 100.0 * static_cast<double>(mismatches) /
                                static_cast<double>(report.total_reviews);
  return report;
}

nlohmann::json report_to_json(const EvalReport& report) {
  nlohmann::json doc;
  doc["accuracy"] = report.accuracy;
  doc["total_reviews"] = report.total_reviews;
  doc["total_mismatches"] = report.total_mismatches;
  doc["overall_mismatch_pct"] = report.overall_mismatch_pct;
  nlohmann::json apps = nlohmann::json::array();
  for (const AppReport& a : report.per_app) {
    apps.push_back({{"app", a.app_id},
                    {"reviews", a.review_count},
                    {"mismatches", a.mismatch_count},
                    {"mismatch_pct", a.mismatch_pct},
                    {"original_mean", a.original_mean},
                    {"predicted_mean", a.predicted_mean}});
  }
  doc["per_app"] = apps;
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : report.confusion.counts) rows.push_back(row);
  doc["confusion"] = rows;
  return doc;
}

std::string report_to_text(const EvalReport& report) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(2);
  out << std::left << std::setw(20) << "app" << std::right << std::setw(10)
      << "reviews" << std::setw(12) << "mismatches" << std::setw(12)
      << "mismatch%" << std::setw(12) << "orig avg" << std::setw(12)
      << "new avg" << "\n";
  for (const AppReport& a : report.per_app) {
    out << std::left << std::setw(20) << a.app_id << std::right
        << std::setw(10) << a.review_count << std::setw(12) << a.mismatch_count
        << std::setw(12) << a.mismatch_pct << std::setw(12) << a.original_mean
        << std::setw(12) << a.predicted_mean << "\n";
  }
  out << "\noverall: " << report.total_reviews << " reviews, "
      << report.total_mismatches << " mismatches ("
      << report.overall_mismatch_pct << "%), category accuracy "
      << report.accuracy << "\n";
  return out.str();
}

std::string confusion_to_csv(const corpus::MismatchMatrix& m) {
  std::ostringstream out;
  out << "pred\\orig,1,2,3,4,5\n";
  for (int p = 0; p < 5; ++p) {
    out << (p + 1);
    for (int o = 0; o < 5; ++o)
      out << ',' << m.counts[static_cast<std::size_t>(p)][static_cast<std::size_t>(o)];
    out << "\n";
  }
  return out.str();
}

std::string chart_data_csv(const EvalReport& report) {
  std::ostringstream out;
  out << "app,match_count,mismatch_count\n";
  for (const AppReport& a : report.per_app)
    out << a.app_id << ',' << (a.review_count - a.mismatch_count) << ','
        << a.mismatch_count << "\n";
  return out.str();
}

}  // namespace revmatch::eval
