#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "vulnlearn/embedding.hpp"

namespace vulnlearn {
namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// log(sigmoid(x)) without overflow for large |x|
double log_sigmoid(double x) {
  if (x >= 0.0) return -std::log1p(std::exp(-x));
  return x - std::log1p(std::exp(x));
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// counts^0.75 unigram table for negative sampling
std::vector<std::uint32_t> build_negative_table(const Vocabulary& vocab,
                                                std::size_t table_size) {
  std::vector<std::uint32_t> table(table_size);
  double total = 0.0;
  for (auto cf : vocab.corpus_freq)
    total += std::pow(static_cast<double>(cf), 0.75);
  std::size_t idx = 0;
  double cum = std::pow(static_cast<double>(vocab.corpus_freq[0]), 0.75) / total;
  for (std::size_t pos = 0; pos < table_size; ++pos) {
    table[pos] = static_cast<std::uint32_t>(idx);
    if (static_cast<double>(pos + 1) / static_cast<double>(table_size) > cum &&
        idx + 1 < vocab.size()) {
      ++idx;
      cum += std::pow(static_cast<double>(vocab.corpus_freq[idx]), 0.75) / total;
    }
  }
  return table;
}

struct TrainState {
  EmbeddingModel model;
  std::vector<std::vector<int>> sentences;      // vocab ids, OOV dropped
  std::vector<std::vector<std::uint32_t>> word_subwords;  // fastText only
  std::vector<std::vector<double>> out;         // context-side vectors
  std::vector<std::uint32_t> neg_table;
  std::mt19937_64 rng;
  std::int64_t total_positions = 0;
};

TrainState prepare(const std::vector<TokenStream>& corpus,
                   const SgnsParams& params, EmbeddingKind kind) {
  if (params.dim <= 0 || params.window <= 0)
    throw std::invalid_argument("sgns: dim and window must be positive");
  if (params.negatives < 0 || params.epochs <= 0)
    throw std::invalid_argument("sgns: negatives must be >= 0, epochs >= 1");

  TrainState st;
  st.model.kind = kind;
  st.model.dim = params.dim;
  st.model.params = params;
  st.model.vocab = build_vocab(corpus, params.min_count);
  const auto& vocab = st.model.vocab;
  if (vocab.size() == 0)
    throw std::invalid_argument(
        "sgns: corpus is empty after min_count filtering");

  for (const auto& stream : corpus) {
    std::vector<int> sent;
    sent.reserve(stream.tokens.size());
    for (const auto& t : stream.tokens) {
      int idx = vocab.lookup(t);
      if (idx >= 0) sent.push_back(idx);
    }
    st.total_positions += static_cast<std::int64_t>(sent.size());
    if (!sent.empty()) st.sentences.push_back(std::move(sent));
  }

  st.rng.seed(params.seed);
  std::uniform_real_distribution<double> init(-0.5 / params.dim,
                                              0.5 / params.dim);
  st.model.vectors.assign(vocab.size(), std::vector<double>(params.dim));
  for (auto& row : st.model.vectors)
    for (double& v : row) v = init(st.rng);
  if (kind == EmbeddingKind::FastText) {
    st.model.bucket_vectors.assign(static_cast<std::size_t>(params.buckets),
                                   std::vector<double>(params.dim));
    for (auto& row : st.model.bucket_vectors)
      for (double& v : row) v = init(st.rng);
    st.word_subwords.resize(vocab.size());
    for (std::size_t w = 0; w < vocab.size(); ++w)
      st.word_subwords[w] = subword_ids(vocab.tokens[w], params.ngram_min,
                                        params.ngram_max, params.buckets);
  }

  st.out.assign(vocab.size(), std::vector<double>(params.dim, 0.0));
  st.neg_table = build_negative_table(vocab, 1 << 20);
  return st;
}

void run_training(TrainState& st) {
  const SgnsParams& p = st.model.params;
  const bool subwords = st.model.kind == EmbeddingKind::FastText;

  std::vector<double> rep(p.dim), g_center, g_positive;
  std::vector<std::vector<double>> g_negatives;
  std::vector<const std::vector<double>*> neg_vecs;
  std::vector<int> neg_ids;

  const std::int64_t total_updates =
      std::max<std::int64_t>(1, st.total_positions * p.epochs);
  std::int64_t update = 0;

  for (int epoch = 0; epoch < p.epochs; ++epoch) {
    double epoch_loss = 0.0;
    std::int64_t epoch_pairs = 0;
    for (const auto& sent : st.sentences) {
      const int len = static_cast<int>(sent.size());
      for (int i = 0; i < len; ++i, ++update) {
        const double lr =
            p.lr_start - (p.lr_start - p.lr_end) *
                             (static_cast<double>(update) /
                              static_cast<double>(total_updates));
        const int target = sent[i];

        // Each surrounding word predicts the position's word, so the input
        // representation is rebuilt per pair from the current rows.
        for (int j = std::max(0, i - p.window);
             j <= std::min(len - 1, i + p.window); ++j) {
          if (j == i) continue;
          const int word = sent[j];

          int units = 1;
          rep.assign(st.model.vectors[word].begin(),
                     st.model.vectors[word].end());
          if (subwords) {
            for (std::uint32_t b : st.word_subwords[word]) {
              const auto& row = st.model.bucket_vectors[b];
              for (int d = 0; d < p.dim; ++d) rep[d] += row[d];
              ++units;
            }
            for (double& v : rep) v /= units;
          }

          neg_ids.clear();
          neg_vecs.clear();
          for (int k = 0; k < p.negatives; ++k) {
            const int neg = static_cast<int>(
                st.neg_table[st.rng() % st.neg_table.size()]);
            if (neg == target) continue;
            neg_ids.push_back(neg);
            neg_vecs.push_back(&st.out[neg]);
          }

          epoch_loss += sgns_pair_loss(rep, st.out[target], neg_vecs, g_center,
                                       g_positive, g_negatives);
          ++epoch_pairs;

          // SGD step; the mean spreads the input gradient over its units
          const double unit_scale = lr / static_cast<double>(units);
          auto& w_row = st.model.vectors[word];
          for (int d = 0; d < p.dim; ++d) w_row[d] -= unit_scale * g_center[d];
          if (subwords) {
            for (std::uint32_t b : st.word_subwords[word]) {
              auto& row = st.model.bucket_vectors[b];
              for (int d = 0; d < p.dim; ++d) row[d] -= unit_scale * g_center[d];
            }
          }
          auto& t_row = st.out[target];
          for (int d = 0; d < p.dim; ++d) t_row[d] -= lr * g_positive[d];
          for (std::size_t k = 0; k < neg_ids.size(); ++k) {
            auto& n_row = st.out[neg_ids[k]];
            for (int d = 0; d < p.dim; ++d) n_row[d] -= lr * g_negatives[k][d];
          }
        }
      }
    }
    st.model.epoch_losses.push_back(
        epoch_pairs > 0 ? epoch_loss / static_cast<double>(epoch_pairs) : 0.0);
  }
}

}  // namespace

double sgns_pair_loss(const std::vector<double>& center,
                      const std::vector<double>& positive,
                      const std::vector<const std::vector<double>*>& negatives,
                      std::vector<double>& g_center,
                      std::vector<double>& g_positive,
                      std::vector<std::vector<double>>& g_negatives) {
  const std::size_t dim = center.size();
  g_center.assign(dim, 0.0);
  g_positive.assign(dim, 0.0);
  g_negatives.assign(negatives.size(), std::vector<double>(dim, 0.0));

  const double z_pos = dot(center, positive);
  double loss = -log_sigmoid(z_pos);
  const double g_pos = sigmoid(z_pos) - 1.0;  // d loss / d z_pos
  for (std::size_t d = 0; d < dim; ++d) {
    g_center[d] += g_pos * positive[d];
    g_positive[d] = g_pos * center[d];
  }

  for (std::size_t k = 0; k < negatives.size(); ++k) {
    const auto& neg = *negatives[k];
    const double z = dot(center, neg);
    loss -= log_sigmoid(-z);
    const double g = sigmoid(z);  // d loss / d z
    for (std::size_t d = 0; d < dim; ++d) {
      g_center[d] += g * neg[d];
      g_negatives[k][d] = g * center[d];
    }
  }
  return loss;
}

EmbeddingModel train_word2vec(const std::vector<TokenStream>& corpus,
                              const SgnsParams& params) {
  TrainState st = prepare(corpus, params, EmbeddingKind::Word2Vec);
  run_training(st);
  return std::move(st.model);
}

EmbeddingModel train_fasttext(const std::vector<TokenStream>& corpus,
                              const SgnsParams& params) {
  TrainState st = prepare(corpus, params, EmbeddingKind::FastText);
  run_training(st);
  return std::move(st.model);
}

}  // namespace vulnlearn
