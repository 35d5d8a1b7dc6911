#include "revmatch/synth.hpp"

#include <cctype>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "revmatch/rng.hpp"

namespace revmatch::synth {

namespace {

using Pool = std::vector<std::string>;

const Pool kApps = {"mailbird", "photosnap", "taskly", "mapgo", "chatwave"};

const Pool kNouns = {"interface", "update",        "layout", "sync",
                     "editor",    "timeline",      "search", "login",
                     "account",   "notifications"};

const Pool kFeatures = {"dark mode", "offline support", "a tablet layout",
                        "cloud backup", "more themes"};

// Class-agnostic filler sentences, shared by every star.
const Pool kFiller = {
    "been using it since last month",
    "installed it on my phone yesterday",
    "using the free version for now",
    "tried it on two devices",
};

// Two phrase pools per star: one built from the shipped cue-word lexicons,
// one from synonyms the lexicons do not know. {n} = noun, {f} = feature.
struct StarPools {
  Pool lex;
  Pool plain;
};

const std::array<StarPools, 5> kPools = {{
    // 1 star
    {{"terrible {n}, crashes constantly",
      "worst {n} ever, uninstalling",
      "hate this {n}, totally broken",
      "useless {n}, full of bugs"},
     {"atrocious {n}, removing it today",
      "utterly dreadful {n}",
      "abysmal {n} from start to finish",
      "unbearable {n}, do not bother"}},
    // 2 stars
    {{"buggy {n} with constant lag",
      "the {n} keeps freezing",
      "slow {n} and it hangs a lot",
      "too many errors in the {n}"},
     {"the {n} is clunky and sluggish",
      "glitchy {n} most days",
      "tedious {n} that feels flimsy",
      "why is the {n} so sluggish"}},
    // 3 stars
    {{"nice {n} but annoying ads",
      "decent {n} with some lag",
      "good {n} yet the ads get annoying",
      "ok {n}, a few bugs here and there"},
     {"{n} is mediocre at best",
      "pretty average {n} overall",
      "the {n} feels uneven, merely passable",
      "middling {n}, nothing special"}},
    // 4 stars
    {{"good {n} but wish it had {f}",
      "nice {n}, please add {f}",
      "works well, just wish for {f}",
      "really like the {n}, hoping for {f}"},
     {"solid {n}, wish it had {f}",
      "handy {n}, hope they add {f}",
      "pleasant {n}, just missing {f}",
      "dependable {n}, would welcome {f}"}},
    // 5 stars
    {{"awesome {n}, love it",
      "amazing {n}, works great",
      "excellent {n}, best I have tried",
      "perfect {n}, thanks"},
     {"flawless {n} through and through",
      "absolutely stellar {n}",
      "phenomenal {n} overall",
      "the {n} is magnificent, five stars"}},
}};

// probabilities per star (index = star - 1)
constexpr std::array<double, 5> kExclaimP = {0.4, 0.2, 0.1, 0.3, 0.5};
constexpr std::array<double, 5> kLexiconP = {0.3, 0.3, 0.5, 0.4, 0.3};
constexpr double kCapsP = 0.2;     // 1-star shouting
constexpr double kFillerP = 0.35;  // chance of a trailing filler sentence

const std::string& pick(Rng& rng, const Pool& pool) {
  return pool[static_cast<std::size_t>(
      rng.next_below(static_cast<std::uint64_t>(pool.size())))];
}

std::string expand(const std::string& tmpl, Rng& rng) {
  std::string out;
  for (std::size_t i = 0; i < tmpl.size(); ++i) {
    if (tmpl[i] == '{' && i + 2 < tmpl.size() && tmpl[i + 2] == '}') {
      out += (tmpl[i + 1] == 'n') ? pick(rng, kNouns) : pick(rng, kFeatures);
      i += 2;
    } else {
      out += tmpl[i];
    }
  }
  return out;
}

std::string finish_sentence(std::string s, int star, Rng& rng) {
  bool question = !s.empty() && s.rfind("why", 0) == 0;
  if (!s.empty()) s[0] = static_cast<char>(std::toupper(s[0]));
  if (star == 1 && rng.next_unit() < kCapsP) {
    // shout one word: uppercase the longest token
    std::size_t best = std::string::npos, best_len = 0, start = 0;
    for (std::size_t i = 0; i <= s.size(); ++i) {
      if (i == s.size() || s[i] == ' ') {
        std::size_t len = i - start;
        if (len > best_len) {
          best_len = len;
          best = start;
        }
        start = i + 1;
      }
    }
    for (std::size_t i = best; i < best + best_len; ++i)
      s[i] = static_cast<char>(std::toupper(s[i]));
  }
  if (question)
    s += '?';
  else if (rng.next_unit() < kExclaimP[static_cast<std::size_t>(star - 1)])
    s += '!';
  else
    s += '.';
  return s;
}

std::string make_text(int star, Rng& rng) {
  const StarPools& pools = kPools[static_cast<std::size_t>(star - 1)];
  bool use_lex = rng.next_unit() < kLexiconP[static_cast<std::size_t>(star - 1)];
  std::string text =
      finish_sentence(expand(pick(rng, use_lex ? pools.lex : pools.plain), rng),
                      star, rng);
  if (rng.next_unit() < kFillerP) {
    std::string filler = pick(rng, kFiller);
    filler[0] = static_cast<char>(std::toupper(filler[0]));
    text += ' ' + filler + '.';
  }
  return text;
}

}  // namespace

corpus::Corpus generate(const SynthSpec& spec) {
  if (spec.n < 0) throw UsageError("BadConfig: n must be non-negative");
  double total = 0.0;
  for (double w : spec.mix) {
    if (w < 0.0) throw UsageError("BadConfig: negative mix weight");
    total += w;
  }
  if (total <= 0.0) throw UsageError("BadConfig: mix weights sum to zero");

  std::vector<int> positive_stars;
  for (int s = 1; s <= 5; ++s)
    if (spec.mix[static_cast<std::size_t>(s - 1)] > 0.0)
      positive_stars.push_back(s);

  Rng rng(derive_seed(spec.seed, "synth"));
  corpus::Corpus out;
  for (int i = 0; i < spec.n; ++i) {
    int star;
    if (i < static_cast<int>(positive_stars.size())) {
      // guarantee each requested star appears at least once
      star = positive_stars[static_cast<std::size_t>(i)];
    } else {
      double u = rng.next_unit() * total;
      star = positive_stars.back();
      double acc = 0.0;
      for (int s : positive_stars) {
        acc += spec.mix[static_cast<std::size_t>(s - 1)];
        if (u < acc) {
          star = s;
          break;
        }
      }
    }
    corpus::Review review;
    review.app_id = pick(rng, kApps);
    std::ostringstream id;
    id << "s" << std::setfill('0') << std::setw(5) << (i + 1);
    review.review_id = id.str();
    review.text = make_text(star, rng);
    review.rating = corpus::StarRating(star);
    out.add(std::move(review));
  }
  return out;
}

void write_jsonl(const corpus::Corpus& corpus, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("FileNotFound: cannot open " + path);
  for (const auto& review : corpus.reviews()) {
    nlohmann::json line = {{"app", review.app_id},
                           {"id", review.review_id},
                           {"text", review.text}};
    if (review.rating)
      line["rating"] = review.rating->value();
    else
      line["rating"] = nullptr;
    out << line.dump() << "\n";
  }
  if (!out) throw DataError("WriteFailed: " + path);
}

}  // namespace revmatch::synth
