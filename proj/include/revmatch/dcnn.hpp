#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "revmatch/corpus.hpp"
#include "revmatch/deptree.hpp"
#include "revmatch/textproc.hpp"

namespace revmatch::dcnn {

inline constexpr int kClasses = 5;

struct Config {
  int embed_dim = 100;
  int filters = 100;  // per channel (N_a = N_s = N)
  int k_ancestor = 3;
  int k_sibling = 3;
  int k_seq = 3;
  double dropout = 0.5;
  double rho = 0.95;       // adadelta decay
  double epsilon = 1e-6;   // adadelta epsilon
  int epochs = 10;
  int batch_size = 1;
  std::uint64_t seed = 0;

  void validate() const;
  nlohmann::json to_json() const;
  static Config from_json(const nlohmann::json& j);
};

// All trainable tensors, flat row-major doubles. The same layout is reused
// for gradients and adadelta accumulators.
struct ParamSet {
  std::vector<double> embeddings;          // |V| x d
  std::vector<double> anc_w, anc_b;        // N x (k_a*d), N
  std::vector<double> sib_w, sib_b;
  std::vector<double> seq_w, seq_b;
  std::vector<double> fc_w, fc_b;          // 5 x 3N, 5

  template <class F>
  void for_each(F&& f) {
    f(embeddings);
    f(anc_w); f(anc_b);
    f(sib_w); f(sib_b);
    f(seq_w); f(seq_b);
    f(fc_w); f(fc_b);
  }
  template <class F>
  void for_each(F&& f) const {
    f(embeddings);
    f(anc_w); f(anc_b);
    f(sib_w); f(sib_b);
    f(seq_w); f(seq_b);
    f(fc_w); f(fc_b);
  }

  void zero();
  static ParamSet zeros_like(const ParamSet& other);
};

struct Model {
  Config config;
  text::Vocabulary vocab;
  ParamSet params;
};

// Uniform init in [-0.05, 0.05] from a seeded generator; the PAD embedding
// row is fixed to zero.
Model init_model(const Config& config, text::Vocabulary vocab,
                 std::uint64_t seed);

// One preprocessed sentence: vocabulary ids plus the dependency tree over
// the same tokens (fallback chain when no parse is available).
struct SentenceInput {
  std::vector<int> ids;
  deptree::DependencyTree tree;
};

struct ReviewInput {
  std::vector<SentenceInput> sentences;
  bool used_fallback = false;  // at least one sentence had no usable parse
};

// DCNN preprocessing: drop special-character tokens, lowercase, squeeze
// elongation, map to vocabulary ids (UNK for unseen). Throws
// EmptyAfterPreprocessing when nothing survives.
ReviewInput prepare_input(const text::Vocabulary& vocab,
                          const std::string& review_text,
                          const std::vector<deptree::DependencyTree>* trees);

enum class Channel { Ancestor, Sibling, Sequential };

// Window of vocabulary ids feeding one filter application.
using Windows = std::vector<std::vector<int>>;  // one window per position

Windows make_windows(const SentenceInput& sentence, Channel channel,
                     const Config& config);

// Per-filter, per-position activations tanh(w.x + b); row-major N x l.
std::vector<double> channel_feature_map(const std::vector<double>& filter_w,
                                        const std::vector<double>& filter_b,
                                        int n_filters, int window_k, int dim,
                                        const std::vector<double>& embeddings,
                                        const Windows& windows);

struct PoolSlot {
  int sentence = -1;
  int position = -1;
  double pre_activation = 0.0;
};

struct ForwardCache {
  std::vector<double> pooled;                 // 3N, before dropout
  std::vector<double> dropout_mask;           // 3N, train mode only
  std::array<std::vector<PoolSlot>, 3> argmax;  // per channel, per filter
  std::array<double, kClasses> scores{};
  std::array<double, kClasses> probs{};
};

// Max-over-tree pooling across all positions of all sentences, per filter.
// Train mode applies a seeded dropout mask to the pooled concatenation;
// evaluation mode instead scales it by (1 - dropout_rate).
std::array<double, kClasses> forward(const Model& model,
                                     const ReviewInput& input, bool train_mode,
                                     std::uint64_t dropout_seed,
                                     ForwardCache* cache = nullptr);

std::array<double, kClasses> softmax(const std::array<double, kClasses>& s);

// Cross-entropy loss and full backprop (train-mode forward). The PAD
// embedding row gradient is forced to zero.
double loss_and_grads(const Model& model, const ReviewInput& input, int label,
                      std::uint64_t dropout_seed, ParamSet& grads);

// E[g2] <- rho E[g2] + (1-rho) g2; dx = -RMS[dx]/RMS[g] * g;
// E[dx2] <- rho E[dx2] + (1-rho) dx2.
void adadelta_step(std::vector<double>& params, const std::vector<double>& grads,
                   std::vector<double>& accum_grad_sq,
                   std::vector<double>& accum_update_sq, double rho,
                   double epsilon);

struct TrainHistory {
  std::vector<double> epoch_loss;
  std::vector<double> epoch_accuracy;  // training category-accuracy
};

// label values are stars 1..5.
TrainHistory train(Model& model, const std::vector<ReviewInput>& inputs,
                   const std::vector<int>& labels);

corpus::StarRating predict_rating(const Model& model,
                                  const std::string& review_text,
                                  const std::vector<deptree::DependencyTree>*
                                      trees = nullptr);

std::array<double, kClasses> predict_scores(const Model& model,
                                            const ReviewInput& input);

// Checkpoint: magic, version, config JSON (canonical), vocabulary, parameter
// tensors as little-endian 32-bit floats, CRC32 trailer.
void save_checkpoint(const Model& model, const std::string& path);
Model load_checkpoint(const std::string& path);

}  // namespace revmatch::dcnn
