#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "revmatch/errors.hpp"

namespace revmatch::corpus {

// A star rating in [1,5]. Construction validates; invalid values never exist.
class StarRating {
 public:
  explicit StarRating(int value) : value_(value) {
    if (value < 1 || value > 5)
      throw DataError("RatingOutOfRange: " + std::to_string(value));
  }
  int value() const { return value_; }
  bool operator==(const StarRating&) const = default;
  auto operator<=>(const StarRating&) const = default;

 private:
  int value_;
};

enum class RatingCategory { Bad, Neutral, Good };

// 5,4 -> Good; 3 -> Neutral; 1,2 -> Bad.
RatingCategory category_of(StarRating r);

// True iff the two ratings land in different categories. Symmetric.
bool is_mismatch(StarRating original, StarRating other);

struct Review {
  std::string app_id;
  std::string review_id;
  std::string text;
  std::optional<StarRating> rating;  // absent for unrated prediction inputs
};

struct AnnotatedReview {
  Review review;
  std::vector<StarRating> annotator_ratings;
};

// Immutable after load; insertion order is the canonical iteration order.
class Corpus {
 public:
  Corpus() = default;

  void add(Review r);

  const std::vector<Review>& reviews() const { return reviews_; }
  std::size_t size() const { return reviews_.size(); }
  bool empty() const { return reviews_.empty(); }

  // app_id -> review ids, in insertion order of first appearance.
  const std::map<std::string, std::vector<std::string>>& per_app() const {
    return per_app_;
  }

  const Review* find(const std::string& review_id) const;

 private:
  std::vector<Review> reviews_;
  std::map<std::string, std::vector<std::string>> per_app_;
  std::map<std::string, std::size_t> by_id_;
};

struct MismatchMatrix {
  // counts[other-1][original-1]; "other" is the annotated/predicted rating.
  std::array<std::array<long, 5>, 5> counts{};
  long total = 0;
};

enum class CorpusFormat { Jsonl, Csv };

struct LoadOptions {
  CorpusFormat format = CorpusFormat::Jsonl;
  bool allow_empty_text = false;  // strict mode rejects empty review text
};

// JSONL: one object per line, {"app","id","text","rating" (int|null)}.
// CSV: header app,id,text,rating with RFC-4180 quoting; empty rating = null.
Corpus load_reviews(const std::string& path, const LoadOptions& opts);

// Annotation file: JSONL {"id": string, "ratings": [int,...]} joined to the
// corpus by review id. All rows must carry the same annotator count.
std::vector<AnnotatedReview> load_annotations(const std::string& path,
                                              const Corpus& corpus);

// Majority rating if a unique top count >= 2 exists; otherwise the mean
// rounded half-away-from-zero, clamped to [1,5].
StarRating consolidate_annotations(const std::vector<StarRating>& ratings);

// Fleiss kappa over an item x category (5) count matrix. Every row must sum
// to the same annotator count A >= 2. The all-one-category case (expected
// agreement 1) is defined as kappa = 1.0 since observed agreement is perfect.
double fleiss_kappa(const std::vector<std::array<int, 5>>& items);

// Builds the rating-vs-rating count matrix and the number of pairs whose
// two ratings fall in different categories.
std::pair<MismatchMatrix, long> mismatch_matrix(
    const std::vector<std::pair<StarRating, StarRating>>& pairs);

int round_half_away_from_zero(double x);

}  // namespace revmatch::corpus
