#pragma once

#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "revmatch/corpus.hpp"
#include "revmatch/errors.hpp"

namespace revmatch::text {

struct Token {
  std::string surface;
  std::string lower;  // case-folded surface
  int position = 0;   // 0-based index within the sentence
};

struct TokenizedReview {
  std::vector<std::vector<Token>> sentences;
  std::string review_id;
};

// Overrides the directory holding stopwords.txt / abbreviations.txt etc.
// Defaults to the compiled-in resources/ path.
void set_resource_dir(std::string dir);
const std::string& resource_dir();

const std::vector<std::string>& stopwords();
bool is_stopword(const std::string& lower);

// Sentence split on {. ! ?} followed by whitespace or end of text, with an
// abbreviation guard list; tokens split on whitespace and punctuation
// boundaries, punctuation retained as its own token.
TokenizedReview tokenize(std::string_view text, std::string_view review_id = "");

struct NormalizeOptions {
  bool remove_stopwords = false;
  bool lowercase = false;
};

// Returns a filtered/folded copy. Lowercasing also squeezes runs of >= 3
// identical letters down to 2 ("waaaaahoooo" -> "waahoo") to reduce the
// out-of-vocabulary rate on elongated words.
std::vector<Token> normalize(const std::vector<Token>& tokens,
                             const NormalizeOptions& opts);

std::string squeeze_elongation(std::string_view lower);

// Heuristic vowel-group count with a silent-e rule; always >= 1. Words with
// no letters count as 1 syllable (lenient mode).
int count_syllables(std::string_view word);

bool is_alphabetic(std::string_view word);

class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;

  Vocabulary();

  // Adds a word if absent; returns its id.
  int add(const std::string& word);

  // Returns the id, or kUnk for unknown words.
  int id(const std::string& word) const;
  bool contains(const std::string& word) const;
  const std::string& word(int id) const;
  int size() const { return static_cast<int>(words_.size()); }

 private:
  std::unordered_map<std::string, int> ids_;
  std::vector<std::string> words_;
};

// Normalized (stopword-removed, lowercased) tokens with count >= min_count
// get ids in first-seen order after PAD/UNK.
Vocabulary build_vocabulary(const corpus::Corpus& corpus, int min_count);

}  // namespace revmatch::text
