#include "revmatch/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace revmatch::corpus {

using nlohmann::json;

RatingCategory category_of(StarRating r) {
  switch (r.value()) {
    case 1:
    case 2:
      return RatingCategory::Bad;
    case 3:
      return RatingCategory::Neutral;
    default:
      return RatingCategory::Good;
  }
}

bool is_mismatch(StarRating original, StarRating other) {
  return category_of(original) != category_of(other);
}

void Corpus::add(Review r) {
  if (by_id_.contains(r.review_id))
    throw DataError("DuplicateId: " + r.review_id);
  by_id_[r.review_id] = reviews_.size();
  per_app_[r.app_id].push_back(r.review_id);
  reviews_.push_back(std::move(r));
}

const Review* Corpus::find(const std::string& review_id) const {
  auto it = by_id_.find(review_id);
  if (it == by_id_.end()) return nullptr;
  return &reviews_[it->second];
}

namespace {

Review review_from_fields(const std::string& app, const std::string& id,
                          const std::string& text,
                          std::optional<int> rating, bool allow_empty,
                          std::size_t line_no) {
  Review r;
  r.app_id = app;
  r.review_id = id;
  r.text = text;
  if (rating) r.rating = StarRating(*rating);
  if (r.text.empty() && !allow_empty)
    throw DataError("EmptyText: " + id + " (line " +
                    std::to_string(line_no) + ")");
  return r;
}

Corpus load_jsonl(std::istream& in, const LoadOptions& opts) {
  Corpus c;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json obj = json::parse(line, nullptr, false);
    if (obj.is_discarded() || !obj.is_object() || !obj.contains("app") ||
        !obj.contains("id") || !obj.contains("text"))
      throw DataError("MalformedRecord: line " + std::to_string(line_no));
    std::optional<int> rating;
    if (obj.contains("rating") && !obj["rating"].is_null()) {
      if (!obj["rating"].is_number_integer())
        throw DataError("MalformedRecord: line " + std::to_string(line_no) +
                        " (rating not an integer)");
      rating = obj["rating"].get<int>();
    }
    try {
      c.add(review_from_fields(obj["app"].get<std::string>(),
                               obj["id"].get<std::string>(),
                               obj["text"].get<std::string>(), rating,
                               opts.allow_empty_text, line_no));
    } catch (const DataError& e) {
      throw DataError(std::string(e.what()) + " (line " +
                      std::to_string(line_no) + ")");
    }
  }
  return c;
}

// RFC-4180: fields may be quoted; quoted fields may contain commas,
// newlines, and doubled quotes.
std::vector<std::vector<std::string>> parse_csv(std::istream& in) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  char ch;
  auto end_field = [&] {
    row.push_back(field);
    field.clear();
    field_started = false;
  };
  auto end_row = [&] {
    end_field();
    rows.push_back(row);
    row.clear();
  };
  while (in.get(ch)) {
    if (in_quotes) {
      if (ch == '"') {
        if (in.peek() == '"') {
          in.get(ch);
          field += '"';
        } else {
          in_quotes = false;
        }
      } else {
        field += ch;
      }
    } else if (ch == '"' && field.empty() && !field_started) {
      in_quotes = true;
      field_started = true;
    } else if (ch == ',') {
      end_field();
    } else if (ch == '\n') {
      if (!field.empty() && field.back() == '\r') field.pop_back();
      end_row();
    } else {
      field += ch;
      field_started = true;
    }
  }
  if (in_quotes) throw DataError("MalformedRecord: unterminated quote");
  if (field_started || !row.empty()) end_row();
  return rows;
}

Corpus load_csv(std::istream& in, const LoadOptions& opts) {
  auto rows = parse_csv(in);
  if (rows.empty()) return Corpus{};
  const std::vector<std::string> expected = {"app", "id", "text", "rating"};
  if (rows[0] != expected)
    throw DataError("MalformedRecord: line 1 (bad CSV header)");
  Corpus c;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& row = rows[i];
    std::size_t line_no = i + 1;
    if (row.size() != 4)
      throw DataError("MalformedRecord: line " + std::to_string(line_no));
    std::optional<int> rating;
    if (!row[3].empty()) {
      try {
        std::size_t pos = 0;
        int v = std::stoi(row[3], &pos);
        if (pos != row[3].size()) throw std::invalid_argument("");
        rating = v;
      } catch (const std::exception&) {
        throw DataError("MalformedRecord: line " + std::to_string(line_no) +
                        " (rating not an integer)");
      }
    }
    try {
      c.add(review_from_fields(row[0], row[1], row[2], rating,
                               opts.allow_empty_text, line_no));
    } catch (const DataError& e) {
      throw DataError(std::string(e.what()) + " (line " +
                      std::to_string(line_no) + ")");
    }
  }
  return c;
}

}  // namespace

Corpus load_reviews(const std::string& path, const LoadOptions& opts) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("FileNotFound: " + path);
  return opts.format == CorpusFormat::Jsonl ? load_jsonl(in, opts)
                                            : load_csv(in, opts);
}

std::vector<AnnotatedReview> load_annotations(const std::string& path,
                                              const Corpus& corpus) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("FileNotFound: " + path);
  std::vector<AnnotatedReview> out;
  std::string line;
  std::size_t line_no = 0;
  std::size_t annotator_count = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json obj = json::parse(line, nullptr, false);
    if (obj.is_discarded() || !obj.is_object() || !obj.contains("id") ||
        !obj.contains("ratings") || !obj["ratings"].is_array())
      throw DataError("MalformedRecord: line " + std::to_string(line_no));
    const std::string id = obj["id"].get<std::string>();
    const Review* rev = corpus.find(id);
    if (!rev) throw DataError("UnknownReviewId: " + id);
    AnnotatedReview ar;
    ar.review = *rev;
    for (const auto& v : obj["ratings"]) {
      if (!v.is_number_integer())
        throw DataError("MalformedRecord: line " + std::to_string(line_no));
      ar.annotator_ratings.emplace_back(v.get<int>());
    }
    if (ar.annotator_ratings.size() < 2)
      throw DataError("InconsistentAnnotatorCount: need >= 2 annotators, line " +
                      std::to_string(line_no));
    if (annotator_count == 0) {
      annotator_count = ar.annotator_ratings.size();
    } else if (ar.annotator_ratings.size() != annotator_count) {
      throw DataError("InconsistentAnnotatorCount: line " +
                      std::to_string(line_no));
    }
    out.push_back(std::move(ar));
  }
  return out;
}

int round_half_away_from_zero(double x) {
  return static_cast<int>(x >= 0 ? std::floor(x + 0.5) : std::ceil(x - 0.5));
}

StarRating consolidate_annotations(const std::vector<StarRating>& ratings) {
  if (ratings.empty()) throw DataError("EmptyAnnotationList");
  std::array<int, 5> counts{};
  for (StarRating r : ratings) counts[r.value() - 1]++;
  int best = 0, best_count = 0;
  bool tie = false;
  for (int v = 0; v < 5; ++v) {
    if (counts[v] > best_count) {
      best = v + 1;
      best_count = counts[v];
      tie = false;
    } else if (counts[v] == best_count && counts[v] > 0) {
      tie = true;
    }
  }
  if (best_count >= 2 && !tie) return StarRating(best);
  double sum = 0;
  for (StarRating r : ratings) sum += r.value();
  int mean = round_half_away_from_zero(sum / ratings.size());
  return StarRating(std::clamp(mean, 1, 5));
}

double fleiss_kappa(const std::vector<std::array<int, 5>>& items) {
  if (items.empty()) throw DataError("NoItems");
  long a = 0;
  for (int v : items[0]) a += v;
  if (a < 2) throw DataError("InconsistentAnnotatorCount: need >= 2");
  const double n = static_cast<double>(items.size());
  std::array<double, 5> column_sums{};
  double p_bar = 0.0;
  for (const auto& row : items) {
    long row_sum = 0;
    double agree = 0.0;
    for (int j = 0; j < 5; ++j) {
      row_sum += row[j];
      agree += static_cast<double>(row[j]) * row[j];
      column_sums[j] += row[j];
    }
    if (row_sum != a)
      throw DataError("InconsistentAnnotatorCount: row sum differs");
    p_bar += (agree - a) / (static_cast<double>(a) * (a - 1));
  }
  p_bar /= n;
  double pe = 0.0;
  for (double s : column_sums) {
    double pj = s / (n * a);
    pe += pj * pj;
  }
  if (pe >= 1.0) return 1.0;  // single-category degenerate case
  return (p_bar - pe) / (1.0 - pe);
}

std::pair<MismatchMatrix, long> mismatch_matrix(
    const std::vector<std::pair<StarRating, StarRating>>& pairs) {
  MismatchMatrix m;
  long mismatches = 0;
  for (const auto& [original, other] : pairs) {
    m.counts[other.value() - 1][original.value() - 1]++;
    m.total++;
    if (is_mismatch(original, other)) mismatches++;
  }
  return {m, mismatches};
}

}  // namespace revmatch::corpus
