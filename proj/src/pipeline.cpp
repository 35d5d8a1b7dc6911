#include "revmatch/pipeline.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "revmatch/rng.hpp"
#include "revmatch/textproc.hpp"

namespace revmatch::pipeline {

using nlohmann::json;

Representation representation_from_name(const std::string& name) {
  if (name == "handcrafted") return Representation::Handcrafted;
  if (name == "tfidf") return Representation::TfIdf;
  if (name == "wordvec") return Representation::WordVec;
  throw UsageError("UnknownRepresentation: " + name);
}

std::string representation_name(Representation r) {
  switch (r) {
    case Representation::Handcrafted: return "handcrafted";
    case Representation::TfIdf: return "tfidf";
    case Representation::WordVec: return "wordvec";
  }
  throw UsageError("UnknownRepresentation");
}

ModelKind parse_model_kind(const std::string& tag) {
  ModelKind kind;
  if (tag == "dcnn") {
    kind.is_dcnn = true;
    return kind;
  }
  auto plus = tag.find('+');
  if (plus == std::string::npos)
    throw UsageError("UnknownModelKind: " + tag +
                     " (expected dcnn or <representation>+<algorithm>)");
  kind.repr = representation_from_name(tag.substr(0, plus));
  kind.algo = classifiers::algorithm_from_name(tag.substr(plus + 1));
  return kind;
}

namespace {

const features::LexiconSet& lexicons() {
  static const features::LexiconSet set = features::default_lexicons();
  return set;
}

features::FeatureVector featurize_with(
    Representation repr, const corpus::Review& review,
    const features::CorpusStats& stats, const features::TfIdfModel& tfidf,
    const features::EmbeddingTable& embeddings) {
  text::TokenizedReview tokens = text::tokenize(review.text, review.review_id);
  switch (repr) {
    case Representation::Handcrafted:
      return features::handcrafted_features(tokens, review.text, lexicons(),
                                            stats);
    case Representation::TfIdf:
      return features::tfidf_transform(tfidf, tokens);
    case Representation::WordVec:
      return features::embed_review_mean(tokens, embeddings);
  }
  throw UsageError("UnknownRepresentation");
}

void require_ratings(const corpus::Corpus& corpus) {
  for (const auto& review : corpus.reviews())
    if (!review.rating)
      throw DataError("MissingRating: " + review.review_id);
}

const std::vector<deptree::DependencyTree>* trees_for(
    const deptree::ParseMap* parses, const std::string& review_id) {
  if (!parses) return nullptr;
  auto it = parses->find(review_id);
  return it == parses->end() ? nullptr : &it->second;
}

}  // namespace

TrainedModel train(const corpus::Corpus& corpus, const TrainSpec& spec,
                   const deptree::ParseMap* parses) {
  if (corpus.empty()) throw DataError("EmptyDataset");
  require_ratings(corpus);

  TrainedModel model;
  model.kind = parse_model_kind(spec.kind);

  if (model.kind.is_dcnn) {
    dcnn::Config config = spec.net;
    config.seed = spec.seed;
    config.validate();
    text::Vocabulary vocab =
        text::build_vocabulary(corpus, spec.vocab_min_count);
    model.net = dcnn::init_model(config, std::move(vocab), spec.seed);
    std::vector<dcnn::ReviewInput> inputs;
    std::vector<int> labels;
    for (const auto& review : corpus.reviews()) {
      try {
        inputs.push_back(dcnn::prepare_input(
            model.net->vocab, review.text,
            trees_for(parses, review.review_id)));
      } catch (const DataError&) {
        continue;  // nothing left after preprocessing; skip for training
      }
      labels.push_back(review.rating->value());
    }
    if (inputs.empty())
      throw DataError("EmptyDataset: no review survives preprocessing");
    model.history = dcnn::train(*model.net, inputs, labels);
    return model;
  }

  switch (model.kind.repr) {
    case Representation::Handcrafted:
      model.stats = features::fit_corpus_stats(corpus);
      break;
    case Representation::TfIdf:
      model.tfidf = features::fit_tfidf(corpus);
      break;
    case Representation::WordVec:
      if (spec.embeddings_path.empty())
        throw UsageError("MissingEmbeddings: wordvec models need --embeddings");
      model.embeddings = features::EmbeddingTable::load(spec.embeddings_path);
      break;
  }

  classifiers::Dataset data;
  for (const auto& review : corpus.reviews()) {
    data.x.push_back(featurize(model, review));
    data.y.push_back(*review.rating);
  }
  model.baseline = classifiers::train(model.kind.algo, data, spec.baseline);
  return model;
}

features::FeatureVector featurize(const TrainedModel& model,
                                  const corpus::Review& review) {
  return featurize_with(model.kind.repr, review, model.stats, model.tfidf,
                        model.embeddings);
}

Prediction predict_one(const TrainedModel& model, const corpus::Review& review,
                       const deptree::ParseMap* parses) {
  if (model.kind.is_dcnn) {
    dcnn::ReviewInput input = dcnn::prepare_input(
        model.net->vocab, review.text, trees_for(parses, review.review_id));
    std::array<double, 5> probs = dcnn::predict_scores(*model.net, input);
    int best = 0;
    for (int c = 1; c < 5; ++c)
      if (probs[static_cast<std::size_t>(c)] >
          probs[static_cast<std::size_t>(best)])
        best = c;
    return Prediction{review.review_id, corpus::StarRating(best + 1), probs};
  }
  features::FeatureVector x = featurize(model, review);
  corpus::StarRating rating = model.baseline->predict(x);
  std::array<double, 5> scores{};
  scores[static_cast<std::size_t>(rating.value() - 1)] = 1.0;
  return Prediction{review.review_id, rating, scores};
}

std::vector<Prediction> predict(const TrainedModel& model,
                                const corpus::Corpus& corpus,
                                const deptree::ParseMap* parses) {
  std::vector<Prediction> out;
  out.reserve(corpus.size());
  for (const auto& review : corpus.reviews())
    out.push_back(predict_one(model, review, parses));
  return out;
}

namespace {

constexpr int kModelFormatVersion = 1;

json stats_to_json(const features::CorpusStats& stats) {
  return {{"length_table", stats.length_table},
          {"readability_table", stats.readability_table}};
}

features::CorpusStats stats_from_json(const json& doc) {
  features::CorpusStats stats;
  stats.length_table = doc.at("length_table").get<std::vector<double>>();
  stats.readability_table =
      doc.at("readability_table").get<std::vector<double>>();
  return stats;
}

json tfidf_to_json(const features::TfIdfModel& model) {
  return {{"terms", model.terms}, {"df", model.df}, {"n_docs", model.n_docs}};
}

features::TfIdfModel tfidf_from_json(const json& doc) {
  features::TfIdfModel model;
  model.terms = doc.at("terms").get<std::vector<std::string>>();
  model.df = doc.at("df").get<std::vector<int>>();
  model.n_docs = doc.at("n_docs").get<int>();
  if (model.df.size() != model.terms.size())
    throw DataError("CorruptFile: tfidf terms/df length mismatch");
  for (int i = 0; i < static_cast<int>(model.terms.size()); ++i)
    model.term_index[model.terms[static_cast<std::size_t>(i)]] = i;
  return model;
}

json embeddings_to_json(const features::EmbeddingTable& table) {
  json vectors = json::object();
  for (const auto& [word, vec] : table.vectors) vectors[word] = vec;
  return {{"dim", table.dim}, {"vectors", vectors}};
}

features::EmbeddingTable embeddings_from_json(const json& doc) {
  features::EmbeddingTable table;
  table.dim = doc.at("dim").get<int>();
  for (const auto& [word, vec] : doc.at("vectors").items()) {
    auto values = vec.get<std::vector<double>>();
    if (static_cast<int>(values.size()) != table.dim)
      throw DataError("CorruptFile: embedding dimension mismatch");
    table.vectors.emplace(word, std::move(values));
  }
  return table;
}

}  // namespace

void save(const TrainedModel& model, const std::string& path) {
  if (model.kind.is_dcnn) {
    dcnn::save_checkpoint(*model.net, path);
    return;
  }
  json doc;
  doc["format_version"] = kModelFormatVersion;
  doc["kind"] = "baseline";
  doc["representation"] = representation_name(model.kind.repr);
  switch (model.kind.repr) {
    case Representation::Handcrafted:
      doc["stats"] = stats_to_json(model.stats);
      break;
    case Representation::TfIdf:
      doc["tfidf"] = tfidf_to_json(model.tfidf);
      break;
    case Representation::WordVec:
      doc["embeddings"] = embeddings_to_json(model.embeddings);
      break;
  }
  doc["classifier"] = model.baseline->to_json();
  std::ofstream out(path);
  if (!out) throw DataError("FileNotFound: cannot open " + path);
  out << doc.dump(2) << "\n";
  if (!out) throw DataError("WriteFailed: " + path);
}

TrainedModel load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("FileNotFound: " + path);
  char magic[4] = {};
  in.read(magic, 4);
  in.close();
  if (std::string(magic, 4) == "RVMD") {
    TrainedModel model;
    model.kind.is_dcnn = true;
    model.net = dcnn::load_checkpoint(path);
    return model;
  }

  std::ifstream text_in(path);
  json doc;
  try {
    text_in >> doc;
  } catch (const json::exception& e) {
    throw DataError(std::string("CorruptFile: ") + e.what());
  }
  try {
    if (doc.at("format_version").get<int>() != kModelFormatVersion)
      throw DataError("VersionMismatch: unsupported model format");
    if (doc.at("kind").get<std::string>() != "baseline")
      throw DataError("CorruptFile: unknown model kind");
    TrainedModel model;
    model.kind.repr =
        representation_from_name(doc.at("representation").get<std::string>());
    switch (model.kind.repr) {
      case Representation::Handcrafted:
        model.stats = stats_from_json(doc.at("stats"));
        break;
      case Representation::TfIdf:
        model.tfidf = tfidf_from_json(doc.at("tfidf"));
        break;
      case Representation::WordVec:
        model.embeddings = embeddings_from_json(doc.at("embeddings"));
        break;
    }
    model.baseline = classifiers::BaselineModel::from_json(doc.at("classifier"));
    model.kind.algo = model.baseline->algorithm();
    return model;
  } catch (const json::exception& e) {
    throw DataError(std::string("CorruptFile: ") + e.what());
  }
}

}  // namespace revmatch::pipeline
