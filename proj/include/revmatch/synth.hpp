#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "revmatch/corpus.hpp"

namespace revmatch::synth {

// Template-driven generator of rated reviews with known ground truth.
// Sentences are assembled from per-star cue vocabularies; a fraction of
// them use the shipped lexicon words, the rest use synonyms the lexicons
// do not cover, so word-identity models retain an edge over the
// handcrafted features.
struct SynthSpec {
  int n = 100;
  std::uint64_t seed = 0;
  std::array<double, 5> mix{0.2, 0.2, 0.2, 0.2, 0.2};  // star 1..5 weights
};

corpus::Corpus generate(const SynthSpec& spec);

void write_jsonl(const corpus::Corpus& corpus, const std::string& path);

}  // namespace revmatch::synth
