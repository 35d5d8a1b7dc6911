#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "revmatch/classifiers.hpp"
#include "revmatch/corpus.hpp"
#include "revmatch/dcnn.hpp"
#include "revmatch/deptree.hpp"
#include "revmatch/features.hpp"

namespace revmatch::pipeline {

enum class Representation { Handcrafted, TfIdf, WordVec };

Representation representation_from_name(const std::string& name);
std::string representation_name(Representation r);

// Model kind tags: "dcnn" or "<representation>+<algorithm>", e.g.
// "handcrafted+nb", "tfidf+knn", "wordvec+tree".
struct ModelKind {
  bool is_dcnn = false;
  Representation repr = Representation::Handcrafted;
  classifiers::Algorithm algo = classifiers::Algorithm::NaiveBayes;
};

ModelKind parse_model_kind(const std::string& tag);

struct TrainSpec {
  std::string kind = "handcrafted+nb";
  classifiers::Config baseline;
  dcnn::Config net;                // seed lives here for the dcnn path
  std::string embeddings_path;     // required for wordvec representations
  int vocab_min_count = 1;
  std::uint64_t seed = 0;
};

// A trained model plus everything its representation needs at predict time.
// Baselines carry their fitted feature state inline; the dcnn carries its
// vocabulary and tensors.
struct TrainedModel {
  ModelKind kind;
  std::optional<classifiers::BaselineModel> baseline;
  features::CorpusStats stats;          // handcrafted
  features::TfIdfModel tfidf;           // tfidf
  features::EmbeddingTable embeddings;  // wordvec
  std::optional<dcnn::Model> net;
  dcnn::TrainHistory history;           // dcnn only
};

// Every review must carry a rating. Parses, when given, feed the dcnn's
// tree channels; baselines ignore them.
TrainedModel train(const corpus::Corpus& corpus, const TrainSpec& spec,
                   const deptree::ParseMap* parses = nullptr);

struct Prediction {
  std::string review_id;
  corpus::StarRating rating;
  std::array<double, 5> scores;  // dcnn: raw scores; baselines: one-hot
};

Prediction predict_one(const TrainedModel& model, const corpus::Review& review,
                       const deptree::ParseMap* parses = nullptr);

std::vector<Prediction> predict(const TrainedModel& model,
                                const corpus::Corpus& corpus,
                                const deptree::ParseMap* parses = nullptr);

// The feature vector a baseline model sees for one review. Exposed for
// cross-validation, which refits representation state per fold.
features::FeatureVector featurize(const TrainedModel& model,
                                  const corpus::Review& review);

// Baselines persist as JSON (classifier + fitted representation state);
// dcnn models persist as binary checkpoints. load() sniffs the format.
void save(const TrainedModel& model, const std::string& path);
TrainedModel load(const std::string& path);

}  // namespace revmatch::pipeline
