#pragma once

#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "revmatch/corpus.hpp"
#include "revmatch/textproc.hpp"

namespace revmatch::features {

struct FeatureVector {
  std::vector<double> values;
};

// Fixed dimension order of the handcrafted representation.
enum HandcraftedDim {
  kHasAllCapitalWords = 0,
  kHasNegativeCueWords,
  kHasQuestions,
  kHasExclamation,
  kHasPositiveCueWords,
  kReviewLength,
  kSentimentScore,
  kReadabilityScore,
  kHandcraftedDims
};

struct Lexicon {
  std::string name;
  std::unordered_set<std::string> entries;  // lowercase

  static Lexicon load(const std::string& path, std::string name);
  bool contains(const std::string& lower) const {
    return entries.contains(lower);
  }
};

// word -> integer score in {-2,...,+2}, tab-separated file.
struct SentimentLexicon {
  std::unordered_map<std::string, int> scores;

  static SentimentLexicon load(const std::string& path);
  int score(const std::string& lower) const {
    auto it = scores.find(lower);
    return it == scores.end() ? 0 : it->second;
  }
};

struct LexiconSet {
  Lexicon positive;
  Lexicon negative;
  SentimentLexicon sentiment;
};

// Loads the lexicons shipped under the resource directory.
LexiconSet default_lexicons();

// Percentile tables fitted on the training split only.
struct CorpusStats {
  std::vector<double> length_table;       // sorted word counts
  std::vector<double> readability_table;  // sorted Flesch-Kincaid scores
  bool fitted() const {
    return !length_table.empty() && !readability_table.empty();
  }
};

// Whitespace-delimited word count of the raw text (before any filtering).
int word_count(const std::string& raw_text);

// Flesch-Kincaid grade level:
//   0.39 * words/sentences + 11.8 * syllables/words - 15.59
// over the alphabetic tokens of the review.
double readability(const text::TokenizedReview& review);

// Fraction of table entries strictly below value plus half the ties
// (midrank convention). Monotone non-decreasing in value.
double percentile_scale(double value, const std::vector<double>& sorted_table);

CorpusStats fit_corpus_stats(const std::vector<const corpus::Review*>& reviews);
CorpusStats fit_corpus_stats(const corpus::Corpus& corpus);

// Per-sentence score s = 3 + clamp(sum of lexicon scores, -2, +2); the
// review score is the mean over sentences rounded half-away-from-zero.
corpus::StarRating sentiment_score(const text::TokenizedReview& review,
                                   const SentimentLexicon& lex);

// The eight-dimensional handcrafted representation. Binary dims are exactly
// 0/1; scaled dims lie in [0,1].
FeatureVector handcrafted_features(const text::TokenizedReview& review,
                                   const std::string& raw_text,
                                   const LexiconSet& lexicons,
                                   const CorpusStats& stats);

struct TfIdfModel {
  std::unordered_map<std::string, int> term_index;
  std::vector<std::string> terms;  // index -> term, first-seen order
  std::vector<int> df;
  int n_docs = 0;

  int dim() const { return static_cast<int>(terms.size()); }
  double idf(int term) const;
};

// tf(t,d) = count/|d|; idf(t) = ln((1+N)/(1+df(t))) + 1.
TfIdfModel fit_tfidf(const corpus::Corpus& corpus);
FeatureVector tfidf_transform(const TfIdfModel& model,
                              const text::TokenizedReview& review);

struct EmbeddingTable {
  std::unordered_map<std::string, std::vector<double>> vectors;
  int dim = 0;

  // Text format: "word v1 v2 ... vd" per line; d must be uniform.
  static EmbeddingTable load(const std::string& path);
};

// Arithmetic mean of the vectors of in-table normalized tokens; an
// all-out-of-table review yields the zero vector and sets *oov_warning.
FeatureVector embed_review_mean(const text::TokenizedReview& review,
                                const EmbeddingTable& table,
                                bool* oov_warning = nullptr);

}  // namespace revmatch::features
