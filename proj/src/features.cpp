#include "revmatch/features.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

namespace revmatch::features {

using text::Token;
using text::TokenizedReview;

Lexicon Lexicon::load(const std::string& path, std::string name) {
  std::ifstream in(path);
  if (!in) throw DataError("FileNotFound: " + path);
  Lexicon lex;
  lex.name = std::move(name);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::string lower;
    for (char c : line)
      lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    lex.entries.insert(lower);
  }
  if (lex.entries.empty()) throw DataError("EmptyLexicon: " + path);
  return lex;
}

SentimentLexicon SentimentLexicon::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("FileNotFound: " + path);
  SentimentLexicon lex;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw DataError("MalformedRecord: line " + std::to_string(line_no) +
                      " in " + path);
    int score = std::stoi(line.substr(tab + 1));
    if (score < -2 || score > 2)
      throw DataError("MalformedRecord: sentiment score out of range, line " +
                      std::to_string(line_no));
    lex.scores[line.substr(0, tab)] = score;
  }
  return lex;
}

LexiconSet default_lexicons() {
  const std::string& dir = text::resource_dir();
  return LexiconSet{
      Lexicon::load(dir + "/positive_words.txt", "positive"),
      Lexicon::load(dir + "/negative_words.txt", "negative"),
      SentimentLexicon::load(dir + "/sentiment_lexicon.tsv"),
  };
}

int word_count(const std::string& raw_text) {
  std::istringstream ss(raw_text);
  std::string w;
  int n = 0;
  while (ss >> w) ++n;
  return n;
}

double readability(const TokenizedReview& review) {
  long sentences = 0, words = 0, syllables = 0;
  for (const auto& sentence : review.sentences) {
    bool any = false;
    for (const Token& t : sentence) {
      if (!text::is_alphabetic(t.lower)) continue;
      any = true;
      ++words;
      syllables += text::count_syllables(t.lower);
    }
    if (any) ++sentences;
  }
  if (words == 0) throw DataError("NoWords");
  return 0.39 * static_cast<double>(words) / sentences +
         11.8 * static_cast<double>(syllables) / words - 15.59;
}

double percentile_scale(double value, const std::vector<double>& table) {
  if (table.empty()) throw DataError("EmptyTable");
  auto lo = std::lower_bound(table.begin(), table.end(), value);
  auto hi = std::upper_bound(table.begin(), table.end(), value);
  double below = static_cast<double>(lo - table.begin());
  double ties = static_cast<double>(hi - lo);
  return (below + 0.5 * ties) / static_cast<double>(table.size());
}

CorpusStats fit_corpus_stats(const std::vector<const corpus::Review*>& reviews) {
  CorpusStats stats;
  for (const corpus::Review* r : reviews) {
    stats.length_table.push_back(word_count(r->text));
    TokenizedReview tr = text::tokenize(r->text, r->review_id);
    double fk = 0.0;
    try {
      fk = readability(tr);
    } catch (const DataError&) {
      // no alphabetic tokens: contribute the bottom of the scale
      fk = -15.59;
    }
    stats.readability_table.push_back(fk);
  }
  std::sort(stats.length_table.begin(), stats.length_table.end());
  std::sort(stats.readability_table.begin(), stats.readability_table.end());
  return stats;
}

CorpusStats fit_corpus_stats(const corpus::Corpus& corpus) {
  std::vector<const corpus::Review*> ptrs;
  ptrs.reserve(corpus.size());
  for (const auto& r : corpus.reviews()) ptrs.push_back(&r);
  return fit_corpus_stats(ptrs);
}

corpus::StarRating sentiment_score(const TokenizedReview& review,
                                   const SentimentLexicon& lex) {
  if (review.sentences.empty()) throw DataError("EmptyReview");
  double sum = 0.0;
  for (const auto& sentence : review.sentences) {
    int raw = 0;
    for (const Token& t : sentence)
      raw += lex.score(text::squeeze_elongation(t.lower));
    int s = 3 + std::clamp(raw, -2, 2);
    sum += s;
  }
  int rounded = corpus::round_half_away_from_zero(
      sum / static_cast<double>(review.sentences.size()));
  return corpus::StarRating(std::clamp(rounded, 1, 5));
}

namespace {

const char* kInterrogatives[] = {"why", "when", "where", "what", "how", "who"};

bool is_all_caps_word(const std::string& surface) {
  if (surface.size() < 2) return false;
  bool any_alpha = false;
  for (char c : surface) {
    unsigned char u = static_cast<unsigned char>(c);
    if (!std::isalpha(u)) return false;
    any_alpha = true;
    if (!std::isupper(u)) return false;
  }
  return any_alpha;
}

}  // namespace

FeatureVector handcrafted_features(const TokenizedReview& review,
                                   const std::string& raw_text,
                                   const LexiconSet& lexicons,
                                   const CorpusStats& stats) {
  if (!stats.fitted()) throw DataError("UnfittedStats");
  FeatureVector fv;
  fv.values.assign(kHandcraftedDims, 0.0);

  for (const auto& sentence : review.sentences) {
    if (!sentence.empty()) {
      for (const char* q : kInterrogatives) {
        if (sentence.front().lower == q) fv.values[kHasQuestions] = 1.0;
      }
    }
    for (const Token& t : sentence) {
      if (is_all_caps_word(t.surface)) fv.values[kHasAllCapitalWords] = 1.0;
      if (t.surface == "?") fv.values[kHasQuestions] = 1.0;
      std::string norm = text::squeeze_elongation(t.lower);
      if (lexicons.negative.contains(norm))
        fv.values[kHasNegativeCueWords] = 1.0;
      if (lexicons.positive.contains(norm))
        fv.values[kHasPositiveCueWords] = 1.0;
    }
  }
  if (raw_text.find('!') != std::string::npos)
    fv.values[kHasExclamation] = 1.0;

  fv.values[kReviewLength] =
      percentile_scale(word_count(raw_text), stats.length_table);

  if (!review.sentences.empty()) {
    int s = sentiment_score(review, lexicons.sentiment).value();
    fv.values[kSentimentScore] = (s - 1) / 4.0;
  } else {
    fv.values[kSentimentScore] = 0.5;  // neutral default for empty text
  }

  double fk = -15.59;
  try {
    fk = readability(review);
  } catch (const DataError&) {
  }
  fv.values[kReadabilityScore] = percentile_scale(fk, stats.readability_table);
  return fv;
}

double TfIdfModel::idf(int term) const {
  return std::log((1.0 + n_docs) / (1.0 + df[static_cast<std::size_t>(term)])) +
         1.0;
}

namespace {

std::vector<std::string> doc_terms(const TokenizedReview& review) {
  text::NormalizeOptions opts{.remove_stopwords = true, .lowercase = true};
  std::vector<std::string> terms;
  for (const auto& sentence : review.sentences) {
    for (const Token& t : text::normalize(sentence, opts)) {
      if (std::any_of(t.lower.begin(), t.lower.end(), [](char c) {
            return std::isalnum(static_cast<unsigned char>(c));
          }))
        terms.push_back(t.lower);
    }
  }
  return terms;
}

}  // namespace

TfIdfModel fit_tfidf(const corpus::Corpus& corpus) {
  if (corpus.empty()) throw DataError("EmptyCorpus");
  TfIdfModel model;
  for (const auto& review : corpus.reviews()) {
    TokenizedReview tr = text::tokenize(review.text, review.review_id);
    std::unordered_set<std::string> seen;
    for (const std::string& term : doc_terms(tr)) {
      if (!seen.insert(term).second) continue;
      auto [it, inserted] =
          model.term_index.try_emplace(term, model.dim());
      if (inserted) {
        model.terms.push_back(term);
        model.df.push_back(0);
      }
      model.df[static_cast<std::size_t>(it->second)]++;
    }
    model.n_docs++;
  }
  return model;
}

FeatureVector tfidf_transform(const TfIdfModel& model,
                              const TokenizedReview& review) {
  FeatureVector fv;
  fv.values.assign(static_cast<std::size_t>(model.dim()), 0.0);
  std::vector<std::string> terms = doc_terms(review);
  if (terms.empty()) return fv;
  for (const std::string& term : terms) {
    auto it = model.term_index.find(term);
    if (it == model.term_index.end()) continue;  // unseen terms are ignored
    fv.values[static_cast<std::size_t>(it->second)] += 1.0;
  }
  const double inv_len = 1.0 / static_cast<double>(terms.size());
  for (int t = 0; t < model.dim(); ++t) {
    if (fv.values[static_cast<std::size_t>(t)] > 0)
      fv.values[static_cast<std::size_t>(t)] *= inv_len * model.idf(t);
  }
  return fv;
}

EmbeddingTable EmbeddingTable::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("FileNotFound: " + path);
  EmbeddingTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string word;
    ss >> word;
    std::vector<double> vec;
    double v;
    while (ss >> v) vec.push_back(v);
    if (vec.empty())
      throw DataError("MalformedRecord: line " + std::to_string(line_no) +
                      " in " + path);
    if (table.dim == 0)
      table.dim = static_cast<int>(vec.size());
    else if (static_cast<int>(vec.size()) != table.dim)
      throw DataError("DimensionMismatch: line " + std::to_string(line_no) +
                      " in " + path);
    table.vectors[word] = std::move(vec);
  }
  if (table.vectors.empty()) throw DataError("EmptyEmbeddingTable: " + path);
  return table;
}

FeatureVector embed_review_mean(const TokenizedReview& review,
                                const EmbeddingTable& table,
                                bool* oov_warning) {
  FeatureVector fv;
  fv.values.assign(static_cast<std::size_t>(table.dim), 0.0);
  text::NormalizeOptions opts{.remove_stopwords = true, .lowercase = true};
  int hits = 0;
  for (const auto& sentence : review.sentences) {
    for (const Token& t : text::normalize(sentence, opts)) {
      auto it = table.vectors.find(t.lower);
      if (it == table.vectors.end()) continue;
      for (int d = 0; d < table.dim; ++d)
        fv.values[static_cast<std::size_t>(d)] +=
            it->second[static_cast<std::size_t>(d)];
      ++hits;
    }
  }
  if (hits == 0) {
    if (oov_warning) *oov_warning = true;
    return fv;
  }
  if (oov_warning) *oov_warning = false;
  for (double& v : fv.values) v /= hits;
  return fv;
}

}  // namespace revmatch::features
