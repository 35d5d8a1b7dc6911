#include "revmatch/textproc.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <mutex>
#include <unordered_set>

namespace revmatch::text {

namespace {

std::string g_resource_dir = REVMATCH_RESOURCE_DIR;

std::vector<std::string> load_list(const std::string& filename) {
  std::ifstream in(resource_dir() + "/" + filename);
  if (!in) throw DataError("FileNotFound: " + resource_dir() + "/" + filename);
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty() && line[0] != '#') out.push_back(line);
  }
  return out;
}

const std::unordered_set<std::string>& stopword_set() {
  static const std::unordered_set<std::string> set = [] {
    auto words = load_list("stopwords.txt");
    return std::unordered_set<std::string>(words.begin(), words.end());
  }();
  return set;
}

const std::unordered_set<std::string>& abbreviation_set() {
  static const std::unordered_set<std::string> set = [] {
    auto words = load_list("abbreviations.txt");
    return std::unordered_set<std::string>(words.begin(), words.end());
  }();
  return set;
}

bool is_word_char(unsigned char c) {
  // Non-ASCII bytes stay inside word tokens so UTF-8 sequences survive.
  return std::isalnum(c) || c >= 0x80;
}

std::string to_lower_ascii(std::string_view s) {
  std::string out(s);
  for (char& c : out)
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool is_vowel(char c) {
  return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u';
}

}  // namespace

void set_resource_dir(std::string dir) { g_resource_dir = std::move(dir); }
const std::string& resource_dir() { return g_resource_dir; }

const std::vector<std::string>& stopwords() {
  static const std::vector<std::string> words = load_list("stopwords.txt");
  return words;
}

bool is_stopword(const std::string& lower) {
  return stopword_set().contains(lower);
}

TokenizedReview tokenize(std::string_view txt, std::string_view review_id) {
  TokenizedReview out;
  out.review_id = std::string(review_id);

  std::vector<Token> sentence;
  int position = 0;
  std::string last_word;  // most recent word token, for the abbreviation guard

  auto push_token = [&](std::string surface) {
    Token t;
    t.lower = to_lower_ascii(surface);
    t.surface = std::move(surface);
    t.position = position++;
    sentence.push_back(std::move(t));
  };
  auto end_sentence = [&] {
    if (!sentence.empty()) {
      out.sentences.push_back(std::move(sentence));
      sentence.clear();
      position = 0;
      last_word.clear();
    }
  };

  std::size_t i = 0;
  const std::size_t n = txt.size();
  while (i < n) {
    unsigned char c = static_cast<unsigned char>(txt[i]);
    if (std::isspace(c)) {
      ++i;
      continue;
    }
    if (is_word_char(c)) {
      std::size_t start = i;
      while (i < n) {
        unsigned char w = static_cast<unsigned char>(txt[i]);
        if (is_word_char(w)) {
          ++i;
        } else if (w == '\'' && i + 1 < n &&
                   is_word_char(static_cast<unsigned char>(txt[i + 1])) &&
                   i > start) {
          ++i;  // apostrophe inside a word ("it's", "don't")
        } else {
          break;
        }
      }
      last_word = to_lower_ascii(txt.substr(start, i - start));
      push_token(std::string(txt.substr(start, i - start)));
      continue;
    }
    // Punctuation: one token per mark.
    push_token(std::string(1, static_cast<char>(c)));
    bool terminator = (c == '!' || c == '?');
    if (c == '.') {
      // Guard list plus single-letter initials ("e.g.", "i.e.", "U.S.").
      terminator =
          !abbreviation_set().contains(last_word) && last_word.size() != 1;
    }
    ++i;
    if (terminator && (i >= n || std::isspace(static_cast<unsigned char>(txt[i]))))
      end_sentence();
  }
  end_sentence();
  return out;
}

std::string squeeze_elongation(std::string_view lower) {
  std::string out;
  out.reserve(lower.size());
  for (char c : lower) {
    std::size_t k = out.size();
    if (k >= 2 && out[k - 1] == c && out[k - 2] == c &&
        std::isalpha(static_cast<unsigned char>(c)))
      continue;
    out += c;
  }
  return out;
}

std::vector<Token> normalize(const std::vector<Token>& tokens,
                             const NormalizeOptions& opts) {
  std::vector<Token> out;
  out.reserve(tokens.size());
  for (const Token& t : tokens) {
    if (opts.remove_stopwords && is_stopword(t.lower)) continue;
    Token copy = t;
    if (opts.lowercase) {
      copy.surface = squeeze_elongation(t.lower);
      copy.lower = copy.surface;
    }
    copy.position = static_cast<int>(out.size());
    out.push_back(std::move(copy));
  }
  return out;
}

bool is_alphabetic(std::string_view word) {
  if (word.empty()) return false;
  return std::all_of(word.begin(), word.end(), [](char c) {
    return std::isalpha(static_cast<unsigned char>(c));
  });
}

int count_syllables(std::string_view word) {
  // Keep letters only; anything else is stripped before counting.
  std::string w;
  for (char c : word)
    if (std::isalpha(static_cast<unsigned char>(c)))
      w += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (w.empty()) return 1;

  // Vowel groups, where 'y' opens a group only after a consonant
  // ("annoying" -> a | oy | i -> 3).
  int groups = 0;
  bool prev_vowel = false;
  for (std::size_t i = 0; i < w.size(); ++i) {
    bool vowel = is_vowel(w[i]) || (w[i] == 'y' && !prev_vowel && i > 0);
    if (vowel && !prev_vowel) ++groups;
    prev_vowel = vowel;
  }
  // Silent trailing e ("freeze", "note"), but not "-le" ("little").
  if (w.size() >= 3 && w.back() == 'e' && !is_vowel(w[w.size() - 2]) &&
      w[w.size() - 2] != 'l' && groups > 1)
    --groups;
  return std::max(groups, 1);
}

Vocabulary::Vocabulary() {
  words_ = {"<pad>", "<unk>"};
  ids_ = {{"<pad>", kPad}, {"<unk>", kUnk}};
}

int Vocabulary::add(const std::string& word) {
  auto [it, inserted] = ids_.try_emplace(word, static_cast<int>(words_.size()));
  if (inserted) words_.push_back(word);
  return it->second;
}

int Vocabulary::id(const std::string& word) const {
  auto it = ids_.find(word);
  return it == ids_.end() ? kUnk : it->second;
}

bool Vocabulary::contains(const std::string& word) const {
  return ids_.contains(word);
}

const std::string& Vocabulary::word(int id) const {
  if (id < 0 || id >= static_cast<int>(words_.size()))
    throw DataError("IndexOutOfRange: vocabulary id " + std::to_string(id));
  return words_[static_cast<std::size_t>(id)];
}

Vocabulary build_vocabulary(const corpus::Corpus& corpus, int min_count) {
  if (corpus.empty()) throw DataError("EmptyCorpus");
  std::vector<std::string> order;
  std::unordered_map<std::string, int> counts;
  NormalizeOptions opts{.remove_stopwords = true, .lowercase = true};
  for (const auto& review : corpus.reviews()) {
    TokenizedReview tr = tokenize(review.text, review.review_id);
    for (const auto& sentence : tr.sentences) {
      for (const Token& t : normalize(sentence, opts)) {
        if (!is_alphabetic(t.lower) &&
            !std::any_of(t.lower.begin(), t.lower.end(), [](char c) {
              return std::isalnum(static_cast<unsigned char>(c));
            }))
          continue;  // bare punctuation never enters the vocabulary
        auto [it, inserted] = counts.try_emplace(t.lower, 0);
        if (inserted) order.push_back(t.lower);
        it->second++;
      }
    }
  }
  Vocabulary vocab;
  for (const std::string& w : order)
    if (counts[w] >= min_count) vocab.add(w);
  return vocab;
}

}  // namespace revmatch::text
