#include "revmatch/dcnn.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include <zlib.h>

#include "revmatch/rng.hpp"

namespace revmatch::dcnn {

using text::Token;
using text::Vocabulary;

void Config::validate() const {
  if (embed_dim < 1 || filters < 1 || k_ancestor < 1 || k_sibling < 1 ||
      k_seq < 1 || epochs < 0 || batch_size < 1)
    throw UsageError("BadConfig: all sizes must be positive");
  if (dropout < 0.0 || dropout >= 1.0)
    throw UsageError("BadConfig: dropout must be in [0,1)");
  if (rho < 0.0 || rho > 1.0 || epsilon <= 0.0)
    throw UsageError("BadConfig: bad adadelta parameters");
}

nlohmann::json Config::to_json() const {
  return {{"embed_dim", embed_dim}, {"filters", filters},
          {"k_ancestor", k_ancestor}, {"k_sibling", k_sibling},
          {"k_seq", k_seq}, {"dropout", dropout}, {"rho", rho},
          {"epsilon", epsilon}, {"epochs", epochs},
          {"batch_size", batch_size}, {"seed", seed}};
}

Config Config::from_json(const nlohmann::json& j) {
  Config c;
  c.embed_dim = j.value("embed_dim", c.embed_dim);
  c.filters = j.value("filters", c.filters);
  c.k_ancestor = j.value("k_ancestor", c.k_ancestor);
  c.k_sibling = j.value("k_sibling", c.k_sibling);
  c.k_seq = j.value("k_seq", c.k_seq);
  c.dropout = j.value("dropout", c.dropout);
  c.rho = j.value("rho", c.rho);
  c.epsilon = j.value("epsilon", c.epsilon);
  c.epochs = j.value("epochs", c.epochs);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.seed = j.value("seed", c.seed);
  c.validate();
  return c;
}

void ParamSet::zero() {
  for_each([](std::vector<double>& v) { std::fill(v.begin(), v.end(), 0.0); });
}

ParamSet ParamSet::zeros_like(const ParamSet& other) {
  ParamSet out = other;
  out.zero();
  return out;
}

Model init_model(const Config& config, Vocabulary vocab, std::uint64_t seed) {
  config.validate();
  Model m;
  m.config = config;
  m.vocab = std::move(vocab);
  const int v = m.vocab.size();
  const int d = config.embed_dim;
  const int n = config.filters;

  m.params.embeddings.resize(static_cast<std::size_t>(v) * d);
  m.params.anc_w.resize(static_cast<std::size_t>(n) * config.k_ancestor * d);
  m.params.anc_b.resize(static_cast<std::size_t>(n));
  m.params.sib_w.resize(static_cast<std::size_t>(n) * config.k_sibling * d);
  m.params.sib_b.resize(static_cast<std::size_t>(n));
  m.params.seq_w.resize(static_cast<std::size_t>(n) * config.k_seq * d);
  m.params.seq_b.resize(static_cast<std::size_t>(n));
  m.params.fc_w.resize(static_cast<std::size_t>(kClasses) * 3 * n);
  m.params.fc_b.resize(kClasses);

  Rng rng(derive_seed(seed, "init"));
  m.params.for_each([&](std::vector<double>& group) {
    for (double& x : group) x = rng.next_uniform(-0.05, 0.05);
  });
  // PAD embedding stays zero.
  for (int e = 0; e < d; ++e)
    m.params.embeddings[static_cast<std::size_t>(Vocabulary::kPad) * d + e] =
        0.0;
  return m;
}

ReviewInput prepare_input(const Vocabulary& vocab,
                          const std::string& review_text,
                          const std::vector<deptree::DependencyTree>* trees) {
  text::TokenizedReview tr = text::tokenize(review_text);
  ReviewInput input;
  std::size_t raw_sentence_index = 0;
  for (const auto& sentence : tr.sentences) {
    SentenceInput si;
    std::vector<std::string> forms;
    for (const Token& t : sentence) {
      // Special characters are removed; anything without an alphanumeric
      // byte is dropped before the network sees it.
      bool has_alnum = std::any_of(t.lower.begin(), t.lower.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c));
      });
      if (!has_alnum) continue;
      std::string norm = text::squeeze_elongation(t.lower);
      si.ids.push_back(vocab.id(norm));
      forms.push_back(norm);
    }
    if (!si.ids.empty()) {
      bool parsed = false;
      if (trees && raw_sentence_index < trees->size()) {
        const deptree::DependencyTree& t = (*trees)[raw_sentence_index];
        if (t.size() == static_cast<int>(si.ids.size())) {
          si.tree = t;
          parsed = true;
        }
      }
      if (!parsed) {
        si.tree = deptree::fallback_chain(forms);
        input.used_fallback = true;
      }
      input.sentences.push_back(std::move(si));
    }
    ++raw_sentence_index;
  }
  if (input.sentences.empty()) throw DataError("EmptyAfterPreprocessing");
  return input;
}

Windows make_windows(const SentenceInput& sentence, Channel channel,
                     const Config& config) {
  const int l = static_cast<int>(sentence.ids.size());
  Windows windows(static_cast<std::size_t>(l));
  switch (channel) {
    case Channel::Ancestor:
      for (int i = 0; i < l; ++i) {
        std::vector<int> idx =
            deptree::ancestor_window(sentence.tree, i, config.k_ancestor);
        for (int j : idx)
          windows[static_cast<std::size_t>(i)].push_back(
              sentence.ids[static_cast<std::size_t>(j)]);
      }
      break;
    case Channel::Sibling:
      for (int i = 0; i < l; ++i) {
        std::vector<int> idx =
            deptree::sibling_window(sentence.tree, i, config.k_sibling);
        for (int j : idx)
          windows[static_cast<std::size_t>(i)].push_back(
              sentence.ids[static_cast<std::size_t>(j)]);
      }
      break;
    case Channel::Sequential: {
      // Centered window with PAD beyond the sentence boundary.
      const int left = (config.k_seq - 1) / 2;
      for (int i = 0; i < l; ++i) {
        for (int off = 0; off < config.k_seq; ++off) {
          int j = i - left + off;
          windows[static_cast<std::size_t>(i)].push_back(
              (j < 0 || j >= l) ? Vocabulary::kPad
                                : sentence.ids[static_cast<std::size_t>(j)]);
        }
      }
      break;
    }
  }
  return windows;
}

std::vector<double> channel_feature_map(const std::vector<double>& filter_w,
                                        const std::vector<double>& filter_b,
                                        int n_filters, int window_k, int dim,
                                        const std::vector<double>& embeddings,
                                        const Windows& windows) {
  const int l = static_cast<int>(windows.size());
  std::vector<double> map(static_cast<std::size_t>(n_filters) * l);
  for (const auto& w : windows)
    if (static_cast<int>(w.size()) != window_k)
      throw DataError("DimensionMismatch: window size");
  for (int f = 0; f < n_filters; ++f) {
    const double* w = filter_w.data() +
                      static_cast<std::size_t>(f) * window_k * dim;
    for (int pos = 0; pos < l; ++pos) {
      double sum = filter_b[static_cast<std::size_t>(f)];
      const auto& window = windows[static_cast<std::size_t>(pos)];
      for (int j = 0; j < window_k; ++j) {
        const double* emb = embeddings.data() +
                            static_cast<std::size_t>(window[static_cast<std::size_t>(j)]) * dim;
        const double* wj = w + static_cast<std::size_t>(j) * dim;
        for (int e = 0; e < dim; ++e) sum += wj[e] * emb[e];
      }
      map[static_cast<std::size_t>(f) * l + pos] = std::tanh(sum);
    }
  }
  return map;
}

namespace {

struct ChannelSpec {
  Channel channel;
  const std::vector<double>* w;
  const std::vector<double>* b;
  int k;
};

std::array<ChannelSpec, 3> channel_specs(const Model& m) {
  return {ChannelSpec{Channel::Ancestor, &m.params.anc_w, &m.params.anc_b,
                      m.config.k_ancestor},
          ChannelSpec{Channel::Sibling, &m.params.sib_w, &m.params.sib_b,
                      m.config.k_sibling},
          ChannelSpec{Channel::Sequential, &m.params.seq_w, &m.params.seq_b,
                      m.config.k_seq}};
}

}  // namespace

std::array<double, kClasses> softmax(const std::array<double, kClasses>& s) {
  double mx = *std::max_element(s.begin(), s.end());
  std::array<double, kClasses> out;
  double sum = 0.0;
  for (int c = 0; c < kClasses; ++c) {
    out[static_cast<std::size_t>(c)] =
        std::exp(s[static_cast<std::size_t>(c)] - mx);
    sum += out[static_cast<std::size_t>(c)];
  }
  for (double& v : out) v /= sum;
  return out;
}

std::array<double, kClasses> forward(const Model& model,
                                     const ReviewInput& input, bool train_mode,
                                     std::uint64_t dropout_seed,
                                     ForwardCache* cache) {
  if (input.sentences.empty()) throw DataError("EmptyReview");
  const Config& cfg = model.config;
  const int n = cfg.filters;
  const int d = cfg.embed_dim;
  for (const auto& s : input.sentences)
    for (int id : s.ids)
      if (id < 0 || id >= model.vocab.size())
        throw DataError("VocabMismatch: id " + std::to_string(id));

  std::vector<double> pooled(static_cast<std::size_t>(3) * n,
                             -std::numeric_limits<double>::infinity());
  std::array<std::vector<PoolSlot>, 3> argmax;
  for (auto& v : argmax) v.resize(static_cast<std::size_t>(n));

  const auto specs = channel_specs(model);
  for (int ch = 0; ch < 3; ++ch) {
    const ChannelSpec& spec = specs[static_cast<std::size_t>(ch)];
    for (std::size_t s = 0; s < input.sentences.size(); ++s) {
      Windows windows = make_windows(input.sentences[s], spec.channel, cfg);
      const int l = static_cast<int>(windows.size());
      for (int f = 0; f < n; ++f) {
        const double* w =
            spec.w->data() + static_cast<std::size_t>(f) * spec.k * d;
        for (int pos = 0; pos < l; ++pos) {
          double pre = (*spec.b)[static_cast<std::size_t>(f)];
          const auto& window = windows[static_cast<std::size_t>(pos)];
          for (int j = 0; j < spec.k; ++j) {
            const double* emb =
                model.params.embeddings.data() +
                static_cast<std::size_t>(window[static_cast<std::size_t>(j)]) * d;
            const double* wj = w + static_cast<std::size_t>(j) * d;
            for (int e = 0; e < d; ++e) pre += wj[e] * emb[e];
          }
          double act = std::tanh(pre);
          std::size_t slot = static_cast<std::size_t>(ch) * n + f;
          // Strict > keeps the first-seen position on ties.
          if (act > pooled[slot]) {
            pooled[slot] = act;
            argmax[static_cast<std::size_t>(ch)][static_cast<std::size_t>(f)] =
                PoolSlot{static_cast<int>(s), pos, pre};
          }
        }
      }
    }
  }

  std::vector<double> used = pooled;
  std::vector<double> mask;
  if (train_mode) {
    mask.resize(used.size(), 1.0);
    if (cfg.dropout > 0.0) {
      Rng rng(dropout_seed);
      for (std::size_t i = 0; i < used.size(); ++i) {
        if (rng.next_unit() < cfg.dropout) mask[i] = 0.0;
        used[i] *= mask[i];
      }
    }
  } else {
    for (double& v : used) v *= (1.0 - cfg.dropout);
  }

  std::array<double, kClasses> scores;
  for (int c = 0; c < kClasses; ++c) {
    double s = model.params.fc_b[static_cast<std::size_t>(c)];
    const double* wc = model.params.fc_w.data() +
                       static_cast<std::size_t>(c) * 3 * n;
    for (std::size_t j = 0; j < used.size(); ++j) s += wc[j] * used[j];
    scores[static_cast<std::size_t>(c)] = s;
  }

  if (cache) {
    cache->pooled = std::move(pooled);
    cache->dropout_mask = std::move(mask);
    cache->argmax = std::move(argmax);
    cache->scores = scores;
    cache->probs = softmax(scores);
  }
  return scores;
}

double loss_and_grads(const Model& model, const ReviewInput& input, int label,
                      std::uint64_t dropout_seed, ParamSet& grads) {
  if (label < 1 || label > kClasses)
    throw DataError("RatingOutOfRange: " + std::to_string(label));
  const Config& cfg = model.config;
  const int n = cfg.filters;
  const int d = cfg.embed_dim;

  ForwardCache cache;
  forward(model, input, /*train_mode=*/true, dropout_seed, &cache);
  const std::array<double, kClasses>& probs = cache.probs;
  double loss = -std::log(std::max(probs[static_cast<std::size_t>(label - 1)],
                                   1e-300));

  grads.zero();

  std::array<double, kClasses> dscore = probs;
  dscore[static_cast<std::size_t>(label - 1)] -= 1.0;

  // Fully connected layer; input to it was the masked pooled vector.
  std::vector<double> used = cache.pooled;
  if (!cache.dropout_mask.empty())
    for (std::size_t j = 0; j < used.size(); ++j)
      used[j] *= cache.dropout_mask[j];

  std::vector<double> dpooled(used.size(), 0.0);
  for (int c = 0; c < kClasses; ++c) {
    double dc = dscore[static_cast<std::size_t>(c)];
    grads.fc_b[static_cast<std::size_t>(c)] = dc;
    double* gw = grads.fc_w.data() + static_cast<std::size_t>(c) * 3 * n;
    const double* wc = model.params.fc_w.data() +
                       static_cast<std::size_t>(c) * 3 * n;
    for (std::size_t j = 0; j < used.size(); ++j) {
      gw[j] = dc * used[j];
      dpooled[j] += dc * wc[j];
    }
  }
  if (!cache.dropout_mask.empty())
    for (std::size_t j = 0; j < dpooled.size(); ++j)
      dpooled[j] *= cache.dropout_mask[j];

  // Route each pooled gradient to the argmax position of its filter.
  const auto specs = channel_specs(model);
  std::array<std::vector<double>*, 3> gw_banks{&grads.anc_w, &grads.sib_w,
                                               &grads.seq_w};
  std::array<std::vector<double>*, 3> gb_banks{&grads.anc_b, &grads.sib_b,
                                               &grads.seq_b};
  for (int ch = 0; ch < 3; ++ch) {
    const ChannelSpec& spec = specs[static_cast<std::size_t>(ch)];
    for (int f = 0; f < n; ++f) {
      double dout =
          dpooled[static_cast<std::size_t>(ch) * n + static_cast<std::size_t>(f)];
      if (dout == 0.0) continue;
      const PoolSlot& slot =
          cache.argmax[static_cast<std::size_t>(ch)][static_cast<std::size_t>(f)];
      double act = std::tanh(slot.pre_activation);
      double dpre = dout * (1.0 - act * act);
      const SentenceInput& sentence =
          input.sentences[static_cast<std::size_t>(slot.sentence)];
      Windows windows = make_windows(sentence, spec.channel, cfg);
      const auto& window = windows[static_cast<std::size_t>(slot.position)];

      double* gw = gw_banks[static_cast<std::size_t>(ch)]->data() +
                   static_cast<std::size_t>(f) * spec.k * d;
      const double* w = spec.w->data() + static_cast<std::size_t>(f) * spec.k * d;
      (*gb_banks[static_cast<std::size_t>(ch)])[static_cast<std::size_t>(f)] +=
          dpre;
      for (int j = 0; j < spec.k; ++j) {
        std::size_t row =
            static_cast<std::size_t>(window[static_cast<std::size_t>(j)]) * d;
        const double* emb = model.params.embeddings.data() + row;
        double* gemb = grads.embeddings.data() + row;
        double* gwj = gw + static_cast<std::size_t>(j) * d;
        const double* wj = w + static_cast<std::size_t>(j) * d;
        for (int e = 0; e < d; ++e) {
          gwj[e] += dpre * emb[e];
          gemb[e] += dpre * wj[e];
        }
      }
    }
  }
  // PAD row never trains.
  for (int e = 0; e < d; ++e)
    grads.embeddings[static_cast<std::size_t>(Vocabulary::kPad) * d + e] = 0.0;
  return loss;
}

void adadelta_step(std::vector<double>& params, const std::vector<double>& grads,
                   std::vector<double>& accum_grad_sq,
                   std::vector<double>& accum_update_sq, double rho,
                   double epsilon) {
  if (params.size() != grads.size() || params.size() != accum_grad_sq.size() ||
      params.size() != accum_update_sq.size())
    throw DataError("ShapeMismatch: adadelta");
  for (std::size_t i = 0; i < params.size(); ++i) {
    double g = grads[i];
    accum_grad_sq[i] = rho * accum_grad_sq[i] + (1.0 - rho) * g * g;
    double update = -std::sqrt((accum_update_sq[i] + epsilon) /
                               (accum_grad_sq[i] + epsilon)) *
                    g;
    accum_update_sq[i] =
        rho * accum_update_sq[i] + (1.0 - rho) * update * update;
    params[i] += update;
  }
}

namespace {

void add_scaled(ParamSet& dst, const ParamSet& src, double scale) {
  auto axpy = [scale](std::vector<double>& d, const std::vector<double>& s) {
    for (std::size_t i = 0; i < d.size(); ++i) d[i] += scale * s[i];
  };
  axpy(dst.embeddings, src.embeddings);
  axpy(dst.anc_w, src.anc_w);
  axpy(dst.anc_b, src.anc_b);
  axpy(dst.sib_w, src.sib_w);
  axpy(dst.sib_b, src.sib_b);
  axpy(dst.seq_w, src.seq_w);
  axpy(dst.seq_b, src.seq_b);
  axpy(dst.fc_w, src.fc_w);
  axpy(dst.fc_b, src.fc_b);
}

corpus::RatingCategory category_of_star(int star) {
  return corpus::category_of(corpus::StarRating(star));
}

int argmax_star(const std::array<double, kClasses>& scores) {
  int best = 0;
  for (int c = 1; c < kClasses; ++c)
    if (scores[static_cast<std::size_t>(c)] >
        scores[static_cast<std::size_t>(best)])
      best = c;
  return best + 1;
}

}  // namespace

TrainHistory train(Model& model, const std::vector<ReviewInput>& inputs,
                   const std::vector<int>& labels) {
  if (inputs.empty()) throw DataError("EmptyDataset");
  if (inputs.size() != labels.size())
    throw DataError("ShapeMismatch: inputs vs labels");
  const Config& cfg = model.config;

  ParamSet accum_g = ParamSet::zeros_like(model.params);
  ParamSet accum_u = ParamSet::zeros_like(model.params);
  ParamSet grads = ParamSet::zeros_like(model.params);
  ParamSet batch_grads = ParamSet::zeros_like(model.params);

  TrainHistory history;
  std::vector<std::size_t> order(inputs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    Rng shuffle_rng(derive_seed(cfg.seed, "shuffle",
                                static_cast<std::uint64_t>(epoch)));
    std::iota(order.begin(), order.end(), std::size_t{0});
    shuffle_rng.shuffle(order);

    double loss_sum = 0.0;
    std::size_t step = 0;
    while (step < order.size()) {
      std::size_t batch_end =
          std::min(step + static_cast<std::size_t>(cfg.batch_size),
                   order.size());
      batch_grads.zero();
      for (std::size_t s = step; s < batch_end; ++s) {
        std::uint64_t dropout_seed = derive_seed(
            cfg.seed, "dropout",
            static_cast<std::uint64_t>(epoch) * 1000003ULL + s);
        loss_sum += loss_and_grads(model, inputs[order[s]], labels[order[s]],
                                   dropout_seed, grads);
        add_scaled(batch_grads, grads,
                   1.0 / static_cast<double>(batch_end - step));
      }
      adadelta_step(model.params.embeddings, batch_grads.embeddings,
                    accum_g.embeddings, accum_u.embeddings, cfg.rho,
                    cfg.epsilon);
      adadelta_step(model.params.anc_w, batch_grads.anc_w, accum_g.anc_w,
                    accum_u.anc_w, cfg.rho, cfg.epsilon);
      adadelta_step(model.params.anc_b, batch_grads.anc_b, accum_g.anc_b,
                    accum_u.anc_b, cfg.rho, cfg.epsilon);
      adadelta_step(model.params.sib_w, batch_grads.sib_w, accum_g.sib_w,
                    accum_u.sib_w, cfg.rho, cfg.epsilon);
      adadelta_step(model.params.sib_b, batch_grads.sib_b, accum_g.sib_b,
                    accum_u.sib_b, cfg.rho, cfg.epsilon);
      adadelta_step(model.params.seq_w, batch_grads.seq_w, accum_g.seq_w,
                    accum_u.seq_w, cfg.rho, cfg.epsilon);
      adadelta_step(model.params.seq_b, batch_grads.seq_b, accum_g.seq_b,
                    accum_u.seq_b, cfg.rho, cfg.epsilon);
      adadelta_step(model.params.fc_w, batch_grads.fc_w, accum_g.fc_w,
                    accum_u.fc_w, cfg.rho, cfg.epsilon);
      adadelta_step(model.params.fc_b, batch_grads.fc_b, accum_g.fc_b,
                    accum_u.fc_b, cfg.rho, cfg.epsilon);
      // PAD row stays pinned to zero even after state updates.
      for (int e = 0; e < cfg.embed_dim; ++e)
        model.params.embeddings[static_cast<std::size_t>(Vocabulary::kPad) *
                                    cfg.embed_dim +
                                e] = 0.0;
      step = batch_end;
    }

    long correct = 0;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      int star = argmax_star(predict_scores(model, inputs[i]));
      if (category_of_star(star) == category_of_star(labels[i])) ++correct;
    }
    history.epoch_loss.push_back(loss_sum /
                                 static_cast<double>(inputs.size()));
    history.epoch_accuracy.push_back(static_cast<double>(correct) /
                                     static_cast<double>(inputs.size()));
  }
  return history;
}

std::array<double, kClasses> predict_scores(const Model& model,
                                            const ReviewInput& input) {
  return forward(model, input, /*train_mode=*/false, 0);
}

corpus::StarRating predict_rating(const Model& model,
                                  const std::string& review_text,
                                  const std::vector<deptree::DependencyTree>*
                                      trees) {
  ReviewInput input = prepare_input(model.vocab, review_text, trees);
  return corpus::StarRating(argmax_star(predict_scores(model, input)));
}

namespace {

constexpr char kMagic[4] = {'R', 'V', 'M', 'D'};
constexpr std::uint32_t kFormatVersion = 1;

void put_u32(std::string& buf, std::uint32_t v) {
  for (int i = 0; i < 4; ++i)
    buf += static_cast<char>((v >> (8 * i)) & 0xff);
}

std::uint32_t get_u32(const std::string& buf, std::size_t& pos) {
  if (pos + 4 > buf.size()) throw DataError("CorruptFile: truncated");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i)
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(buf[pos + i]))
         << (8 * i);
  pos += 4;
  return v;
}

void put_f32(std::string& buf, float f) {
  std::uint32_t bits;
  std::memcpy(&bits, &f, 4);
  put_u32(buf, bits);
}

float get_f32(const std::string& buf, std::size_t& pos) {
  std::uint32_t bits = get_u32(buf, pos);
  float f;
  std::memcpy(&f, &bits, 4);
  return f;
}

}  // namespace

void save_checkpoint(const Model& model, const std::string& path) {
  std::string buf;
  buf.append(kMagic, 4);
  put_u32(buf, kFormatVersion);
  std::string config = model.config.to_json().dump();
  put_u32(buf, static_cast<std::uint32_t>(config.size()));
  buf += config;
  put_u32(buf, static_cast<std::uint32_t>(model.vocab.size()));
  for (int i = 0; i < model.vocab.size(); ++i) {
    const std::string& w = model.vocab.word(i);
    put_u32(buf, static_cast<std::uint32_t>(w.size()));
    buf += w;
  }
  model.params.for_each([&](const std::vector<double>& group) {
    put_u32(buf, static_cast<std::uint32_t>(group.size()));
    for (double x : group) put_f32(buf, static_cast<float>(x));
  });
  std::uint32_t crc = static_cast<std::uint32_t>(
      crc32(0L, reinterpret_cast<const Bytef*>(buf.data()),
            static_cast<uInt>(buf.size())));
  put_u32(buf, crc);

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("FileNotWritable: " + path);
  out.write(buf.data(), static_cast<long>(buf.size()));
}

Model load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("FileNotFound: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  std::string buf = ss.str();
  if (buf.size() < 12 || std::memcmp(buf.data(), kMagic, 4) != 0)
    throw DataError("CorruptFile: bad magic");
  std::string body = buf.substr(0, buf.size() - 4);
  std::size_t crc_pos = buf.size() - 4;
  std::uint32_t stored_crc = get_u32(buf, crc_pos);
  std::uint32_t actual_crc = static_cast<std::uint32_t>(
      crc32(0L, reinterpret_cast<const Bytef*>(body.data()),
            static_cast<uInt>(body.size())));
  if (stored_crc != actual_crc) throw DataError("CorruptFile: checksum");

  std::size_t pos = 4;
  std::uint32_t version = get_u32(buf, pos);
  if (version != kFormatVersion)
    throw DataError("VersionMismatch: checkpoint version " +
                    std::to_string(version));
  std::uint32_t config_len = get_u32(buf, pos);
  if (pos + config_len > body.size()) throw DataError("CorruptFile: truncated");
  Config config = Config::from_json(
      nlohmann::json::parse(buf.substr(pos, config_len)));
  pos += config_len;

  std::uint32_t vocab_size = get_u32(buf, pos);
  Vocabulary vocab;
  for (std::uint32_t i = 0; i < vocab_size; ++i) {
    std::uint32_t len = get_u32(buf, pos);
    if (pos + len > body.size()) throw DataError("CorruptFile: truncated");
    std::string word = buf.substr(pos, len);
    pos += len;
    if (i >= 2) vocab.add(word);  // PAD/UNK are implicit
  }

  Model m = init_model(config, std::move(vocab), config.seed);
  m.params.for_each([&](std::vector<double>& group) {
    std::uint32_t count = get_u32(buf, pos);
    if (count != group.size()) throw DataError("CorruptFile: tensor shape");
    for (std::uint32_t i = 0; i < count; ++i)
      group[i] = static_cast<double>(get_f32(buf, pos));
  });
  if (pos != body.size()) throw DataError("CorruptFile: trailing bytes");
  return m;
}

}  // namespace revmatch::dcnn
