#include <doctest.h>

#include <string>
#include <vector>

#include "revmatch/corpus.hpp"
#include "revmatch/textproc.hpp"

using namespace revmatch;

namespace {

std::vector<std::string> surfaces(const std::vector<text::Token>& tokens) {
  std::vector<std::string> out;
  for (const auto& t : tokens) out.push_back(t.surface);
  return out;
}

corpus::Corpus tiny_corpus(const std::vector<std::string>& texts) {
  corpus::Corpus c;
  int i = 0;
  for (const auto& t : texts) {
    corpus::Review r;
    r.app_id = "a";
    r.review_id = "r" + std::to_string(++i);
    r.text = t;
    r.rating = corpus::StarRating(3);
    c.add(std::move(r));
  }
  return c;
}

}  // namespace

TEST_CASE("sentence splitting on terminators") {
  auto tr = text::tokenize("Awesome app! Love it.");
  REQUIRE(tr.sentences.size() == 2);
  CHECK(surfaces(tr.sentences[0]) ==
        std::vector<std::string>{"Awesome", "app", "!"});
  CHECK(surfaces(tr.sentences[1]) == std::vector<std::string>{"Love", "it", "."});
}

TEST_CASE("question sentence keeps its terminator token") {
  auto tr = text::tokenize("Why are there so many updates?");
  REQUIRE(tr.sentences.size() == 1);
  CHECK(tr.sentences[0].back().surface == "?");
  CHECK(tr.sentences[0].front().surface == "Why");
}

TEST_CASE("empty text yields zero sentences") {
  CHECK(text::tokenize("").sentences.empty());
  CHECK(text::tokenize("   \t\n ").sentences.empty());
}

TEST_CASE("abbreviations do not split sentences") {
  auto tr = text::tokenize("This app is great e.g. for email. Really.");
  CHECK(tr.sentences.size() == 2);
}

TEST_CASE("punctuation becomes its own token, apostrophes stay inside") {
  auto tr = text::tokenize("don't stop, ever");
  REQUIRE(tr.sentences.size() == 1);
  CHECK(surfaces(tr.sentences[0]) ==
        std::vector<std::string>{"don't", "stop", ",", "ever"});
}

TEST_CASE("token positions are contiguous from zero") {
  auto tr = text::tokenize("One two three. Four five!");
  for (const auto& sentence : tr.sentences)
    for (std::size_t i = 0; i < sentence.size(); ++i)
      CHECK(sentence[i].position == static_cast<int>(i));
}

TEST_CASE("tokenize is idempotent on rejoined token surfaces") {
  const std::string samples[] = {
      "Awesome app! Love it.", "Why are there so many updates?",
      "don't stop, ever", "Slow . . . and buggy"};
  for (const auto& sample : samples) {
    auto first = text::tokenize(sample);
    std::string rejoined;
    for (const auto& sentence : first.sentences)
      for (const auto& token : sentence) {
        if (!rejoined.empty()) rejoined += ' ';
        rejoined += token.surface;
      }
    auto second = text::tokenize(rejoined);
    std::vector<std::string> a, b;
    for (const auto& s : first.sentences)
      for (const auto& t : s) a.push_back(t.surface);
    for (const auto& s : second.sentences)
      for (const auto& t : s) b.push_back(t.surface);
    CHECK(a == b);
  }
}

TEST_CASE("normalize removes stopwords and lowercases") {
  auto tr = text::tokenize("The app crashes");
  text::NormalizeOptions opts;
  opts.remove_stopwords = true;
  auto filtered = text::normalize(tr.sentences[0], opts);
  CHECK(surfaces(filtered) == std::vector<std::string>{"app", "crashes"});

  auto upper = text::tokenize("GREAT");
  text::NormalizeOptions fold;
  fold.lowercase = true;
  auto lowered = text::normalize(upper.sentences[0], fold);
  REQUIRE(lowered.size() == 1);
  CHECK(lowered[0].lower == "great");

  CHECK(text::normalize({}, opts).empty());
}

TEST_CASE("lowercasing squeezes elongated words") {
  CHECK(text::squeeze_elongation("waaaaahoooo") == "waahoo");
  CHECK(text::squeeze_elongation("good") == "good");
  CHECK(text::squeeze_elongation("coool") == "cool");
  auto tr = text::tokenize("sooooo goooood");
  text::NormalizeOptions opts;
  opts.lowercase = true;
  auto norm = text::normalize(tr.sentences[0], opts);
  CHECK(norm[0].lower == "soo");
  CHECK(norm[1].lower == "good");
}

TEST_CASE("syllable counting examples") {
  CHECK(text::count_syllables("app") == 1);
  CHECK(text::count_syllables("annoying") == 3);
  CHECK(text::count_syllables("a") == 1);
  CHECK(text::count_syllables("update") == 2);    // silent e
  CHECK(text::count_syllables("beautiful") == 3);
  CHECK(text::count_syllables("123") == 1);       // lenient non-alphabetic
}

TEST_CASE("syllable count is always at least one") {
  const char* words[] = {"b", "rhythm", "strength", "e", "xyz", "queue"};
  for (const char* w : words) CHECK(text::count_syllables(w) >= 1);
}

TEST_CASE("vocabulary construction in first-seen order") {
  auto c = tiny_corpus({"good app", "good game"});
  text::Vocabulary v = text::build_vocabulary(c, 1);
  CHECK(v.id("good") == 2);
  CHECK(v.id("app") == 3);
  CHECK(v.id("game") == 4);
  CHECK(v.size() == 5);

  text::Vocabulary v2 = text::build_vocabulary(c, 2);
  CHECK(v2.id("good") == 2);
  CHECK(v2.id("app") == text::Vocabulary::kUnk);
  CHECK(v2.id("game") == text::Vocabulary::kUnk);
  CHECK(v2.size() == 3);
}

TEST_CASE("vocabulary rejects an empty corpus") {
  corpus::Corpus empty;
  CHECK_THROWS_WITH_AS(text::build_vocabulary(empty, 1),
                       doctest::Contains("EmptyCorpus"), DataError);
}

TEST_CASE("vocabulary round-trips words and ids") {
  auto c = tiny_corpus({"solid handy pleasant layout", "sync editor timeline"});
  text::Vocabulary v = text::build_vocabulary(c, 1);
  CHECK(v.word(text::Vocabulary::kPad) == "<pad>");
  CHECK(v.word(text::Vocabulary::kUnk) == "<unk>");
  for (int id = 2; id < v.size(); ++id) CHECK(v.id(v.word(id)) == id);
  CHECK(v.id("nonexistentword") == text::Vocabulary::kUnk);
}

TEST_CASE("stopword predicate uses the shipped list") {
  CHECK(text::is_stopword("the"));
  CHECK(text::is_stopword("and"));
  CHECK_FALSE(text::is_stopword("crash"));
  CHECK_FALSE(text::is_stopword("awesome"));
}
