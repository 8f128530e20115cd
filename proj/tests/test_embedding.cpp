#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <unordered_map>

#include "vulnlearn/embedding.hpp"

using namespace vulnlearn;

namespace {

TokenStream stream_of(std::vector<std::string> tokens, std::string id = "f") {
  TokenStream s;
  s.file_id = std::move(id);
  s.tokens = std::move(tokens);
  s.strategy = TokenStrategy::Filtered;
  return s;
}

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  double ab = 0, aa = 0, bb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  return ab / std::sqrt(aa * bb);
}

// toy corpus where a and b always share contexts and z never does
std::vector<TokenStream> shared_context_corpus() {
  std::vector<TokenStream> corpus;
  for (int r = 0; r < 30; ++r) {
    corpus.push_back(stream_of({"a", "ctx", "ctx2"}));
    corpus.push_back(stream_of({"b", "ctx", "ctx2"}));
    corpus.push_back(stream_of({"z", "far", "far2"}));
  }
  return corpus;
}

// strongly-bonded pairs (p<i> always followed by q<i>) give the trainers a
// clear signal, so per-epoch mean loss settles monotonically
std::vector<TokenStream> patterned_corpus() {
  std::mt19937_64 rng(123);
  std::uniform_int_distribution<int> pick(0, 9);
  std::vector<TokenStream> corpus;
  for (int s = 0; s < 80; ++s) {
    TokenStream st;
    st.file_id = "s" + std::to_string(s);
    for (int w = 0; w < 5; ++w) {
      int i = pick(rng);
      st.tokens.push_back("p" + std::to_string(i));
      st.tokens.push_back("q" + std::to_string(i));
    }
    corpus.push_back(std::move(st));
  }
  return corpus;
}

SgnsParams toy_params(std::uint64_t seed) {
  SgnsParams p;
  p.dim = 16;
  p.window = 2;
  p.min_count = 1;
  p.negatives = 3;
  p.epochs = 10;
  p.seed = seed;
  return p;
}

}  // namespace

TEST_CASE("build_vocab applies the min_count threshold deterministically") {
  auto vocab2 = build_vocab({stream_of({"a", "b", "a"})}, 2);
  CHECK(vocab2.tokens == std::vector<std::string>{"a"});
  auto vocab1 = build_vocab({stream_of({"a", "b", "a"})}, 1);
  CHECK(vocab1.tokens == std::vector<std::string>{"a", "b"});
  CHECK(vocab1.corpus_freq == std::vector<std::int64_t>{2, 1});
  CHECK(vocab1.doc_freq == std::vector<std::int64_t>{1, 1});
  CHECK(vocab1.n_documents == 1);
  CHECK(build_vocab({}, 1).size() == 0);
  CHECK_THROWS_AS(build_vocab({}, 0), std::invalid_argument);
}

TEST_CASE("build_vocab matches a brute-force frequency oracle") {
  std::mt19937_64 rng(314);
  std::uniform_int_distribution<int> len(0, 30), tok(0, 20);
  std::vector<TokenStream> corpus;
  for (int i = 0; i < 50; ++i) {
    std::vector<std::string> tokens;
    int n = len(rng);
    for (int j = 0; j < n; ++j) tokens.push_back("t" + std::to_string(tok(rng)));
    corpus.push_back(stream_of(std::move(tokens)));
  }
  const int min_count = 3;
  auto vocab = build_vocab(corpus, min_count);

  std::unordered_map<std::string, std::int64_t> cf;
  std::unordered_map<std::string, std::int64_t> df;
  for (const auto& s : corpus) {
    std::unordered_map<std::string, int> seen;
    for (const auto& t : s.tokens) {
      ++cf[t];
      seen[t] = 1;
    }
    for (const auto& [t, _] : seen) ++df[t];
  }
  std::size_t expected = 0;
  for (const auto& [t, c] : cf)
    if (c >= min_count) ++expected;
  CHECK(vocab.size() == expected);
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    CHECK(vocab.corpus_freq[i] == cf[vocab.tokens[i]]);
    CHECK(vocab.doc_freq[i] == df[vocab.tokens[i]]);
    CHECK(vocab.corpus_freq[i] >= min_count);
    if (i > 0) CHECK(vocab.tokens[i - 1] < vocab.tokens[i]);  // lexicographic
  }
}

TEST_CASE("bow_vector counts in-vocabulary occurrences") {
  auto vocab = build_vocab({stream_of({"a", "b", "a"})}, 1);
  auto fv = bow_vector(stream_of({"a", "b", "a"}), vocab);
  CHECK(fv.values == std::vector<double>{2.0, 1.0});
  CHECK(bow_vector(stream_of({}), vocab).values == std::vector<double>{0.0, 0.0});
  auto with_oov = bow_vector(stream_of({"a", "zzz"}), vocab);
  CHECK(with_oov.values == std::vector<double>{1.0, 0.0});
}

TEST_CASE("bow_vector matches a dictionary-count oracle; L1 norm property") {
  std::mt19937_64 rng(2718);
  std::uniform_int_distribution<int> len(0, 60), tok(0, 25);
  std::vector<TokenStream> corpus;
  for (int i = 0; i < 20; ++i) {
    std::vector<std::string> tokens;
    int n = len(rng);
    for (int j = 0; j < n; ++j) tokens.push_back("w" + std::to_string(tok(rng)));
    corpus.push_back(stream_of(std::move(tokens)));
  }
  auto vocab = build_vocab(corpus, 2);
  for (const auto& s : corpus) {
    auto fv = bow_vector(s, vocab);
    std::unordered_map<std::string, double> counts;
    double in_vocab_tokens = 0;
    for (const auto& t : s.tokens) {
      ++counts[t];
      if (vocab.lookup(t) >= 0) ++in_vocab_tokens;
    }
    double l1 = 0;
    for (std::size_t i = 0; i < vocab.size(); ++i) {
      double expected = counts.count(vocab.tokens[i]) ? counts[vocab.tokens[i]] : 0;
      CHECK(fv.values[i] == expected);
      l1 += fv.values[i];
    }
    CHECK(l1 == in_vocab_tokens);
  }
}

TEST_CASE("tfidf_weight follows the smoothed idf formula") {
  std::vector<TokenStream> corpus;
  for (int i = 0; i < 10; ++i) corpus.push_back(stream_of({"every", "doc"}));
  corpus[0].tokens.push_back("rare");
  auto vocab = build_vocab(corpus, 1);

  // token in every document: idf = ln(11/11) + 1 = 1
  CHECK(tfidf_weight(vocab, 10, "every") == doctest::Approx(1.0).epsilon(1e-12));
  // df=1, n=10: idf = ln(11/2) + 1
  CHECK(tfidf_weight(vocab, 10, "rare") ==
        doctest::Approx(2.7047480922384253).epsilon(1e-12));
  for (const auto& t : vocab.tokens) CHECK(tfidf_weight(vocab, 10, t) > 0.0);
  CHECK_THROWS_AS(tfidf_weight(vocab, 10, "absent"), std::out_of_range);
}

TEST_CASE("sgns_pair_loss gradients match central finite differences") {
  std::mt19937_64 rng(77);
  std::normal_distribution<double> gauss(0.0, 0.5);
  const int dim = 8;
  std::vector<double> center(dim), positive(dim);
  std::vector<std::vector<double>> negatives(3, std::vector<double>(dim));
  for (auto& v : center) v = gauss(rng);
  for (auto& v : positive) v = gauss(rng);
  for (auto& n : negatives)
    for (auto& v : n) v = gauss(rng);

  std::vector<const std::vector<double>*> neg_ptrs;
  for (auto& n : negatives) neg_ptrs.push_back(&n);

  std::vector<double> g_center, g_positive;
  std::vector<std::vector<double>> g_negatives;
  sgns_pair_loss(center, positive, neg_ptrs, g_center, g_positive, g_negatives);

  auto loss_at = [&]() {
    std::vector<double> gc, gp;
    std::vector<std::vector<double>> gn;
    return sgns_pair_loss(center, positive, neg_ptrs, gc, gp, gn);
  };

  // all parameter slots: center, positive, each negative
  std::vector<std::pair<double*, double>> coords;
  for (int d = 0; d < dim; ++d) coords.push_back({&center[d], g_center[d]});
  for (int d = 0; d < dim; ++d) coords.push_back({&positive[d], g_positive[d]});
  for (std::size_t k = 0; k < negatives.size(); ++k)
    for (int d = 0; d < dim; ++d)
      coords.push_back({&negatives[k][d], g_negatives[k][d]});

  std::shuffle(coords.begin(), coords.end(), rng);
  const double eps = 1e-6;
  for (int i = 0; i < 10; ++i) {
    auto [slot, analytic] = coords[i];
    const double saved = *slot;
    *slot = saved + eps;
    const double up = loss_at();
    *slot = saved - eps;
    const double down = loss_at();
    *slot = saved;
    const double fd = (up - down) / (2 * eps);
    const double rel =
        std::abs(analytic - fd) / std::max({1e-8, std::abs(analytic), std::abs(fd)});
    CHECK(rel <= 1e-4);
  }
}

TEST_CASE("word2vec: shared contexts pull tokens together") {
  auto corpus = shared_context_corpus();
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto model = train_word2vec(corpus, toy_params(seed));
    auto a = *model.token_vector("a");
    auto b = *model.token_vector("b");
    auto z = *model.token_vector("z");
    CAPTURE(seed);
    CHECK(cosine(a, b) > cosine(a, z));
  }
}

TEST_CASE("word2vec degenerate and error cases") {
  auto model = train_word2vec({stream_of({"only"})}, toy_params(3));
  for (double v : *model.token_vector("only")) CHECK(std::isfinite(v));

  SgnsParams bad = toy_params(1);
  bad.dim = 0;
  CHECK_THROWS_AS(train_word2vec({stream_of({"a", "b"})}, bad),
                  std::invalid_argument);
  bad = toy_params(1);
  bad.window = 0;
  CHECK_THROWS_AS(train_word2vec({stream_of({"a", "b"})}, bad),
                  std::invalid_argument);
  // nothing survives min_count filtering
  SgnsParams high = toy_params(1);
  high.min_count = 10;
  CHECK_THROWS_AS(train_word2vec({stream_of({"a", "b"})}, high),
                  std::invalid_argument);
}

TEST_CASE("word2vec training is deterministic and loss does not increase") {
  auto corpus = patterned_corpus();
  SgnsParams p = toy_params(5);
  p.epochs = 5;
  auto m1 = train_word2vec(corpus, p);
  auto m2 = train_word2vec(corpus, p);
  REQUIRE(m1.vectors.size() == m2.vectors.size());
  for (std::size_t i = 0; i < m1.vectors.size(); ++i)
    CHECK(m1.vectors[i] == m2.vectors[i]);  // bitwise

  REQUIRE(m1.epoch_losses.size() == 5);
  for (std::size_t e = 1; e < m1.epoch_losses.size(); ++e)
    CHECK(m1.epoch_losses[e] <= m1.epoch_losses[e - 1]);
}

TEST_CASE("fasttext subword extraction") {
  // single-character token: own vector plus the full framed word only
  auto ids = subword_ids("a", 3, 6, 4096);
  REQUIRE(ids.size() == 1);
  CHECK(ids[0] == fnv1a64("<a>") % 4096);

  // "ab" framed as "<ab>": <ab, ab>, <ab>
  CHECK(subword_ids("ab", 3, 6, 4096).size() == 3);
  CHECK_THROWS_AS(subword_ids("ab", 4, 3, 4096), std::invalid_argument);
}

TEST_CASE("fasttext resolves unseen tokens through shared n-grams") {
  std::vector<TokenStream> corpus;
  for (int r = 0; r < 40; ++r) corpus.push_back(stream_of({"aaaaaa", "ctx", "ctx2"}));
  SgnsParams p = toy_params(9);
  p.epochs = 15;
  auto model = train_fasttext(corpus, p);

  auto known = model.token_vector("aaaaaa");
  auto unseen = model.token_vector("aaaaaaa");  // same n-gram support set
  REQUIRE(known);
  REQUIRE(unseen);
  CHECK(model.vocab.lookup("aaaaaaa") == -1);
  CHECK(cosine(*known, *unseen) > 0.9);
}

TEST_CASE("fasttext training is deterministic with non-increasing loss") {
  auto corpus = patterned_corpus();
  SgnsParams p = toy_params(5);
  p.epochs = 5;
  auto m1 = train_fasttext(corpus, p);
  auto m2 = train_fasttext(corpus, p);
  for (std::size_t i = 0; i < m1.vectors.size(); ++i)
    CHECK(m1.vectors[i] == m2.vectors[i]);
  for (std::size_t b = 0; b < m1.bucket_vectors.size(); ++b)
    CHECK(m1.bucket_vectors[b] == m2.bucket_vectors[b]);
  for (std::size_t e = 1; e < m1.epoch_losses.size(); ++e)
    CHECK(m1.epoch_losses[e] <= m1.epoch_losses[e - 1]);
}

TEST_CASE("compose_file_vector: singleton, symmetry and OOV conventions") {
  EmbeddingModel model;
  model.kind = EmbeddingKind::Word2Vec;
  model.dim = 2;
  model.vocab = build_vocab({stream_of({"a", "b"}), stream_of({"a", "b"})}, 1);
  model.vectors = {{1.0, 2.0}, {-1.0, -2.0}};

  auto single = compose_file_vector(stream_of({"a"}), model, model.vocab);
  CHECK(single.values[0] == doctest::Approx(1.0));
  CHECK(single.values[1] == doctest::Approx(2.0));

  // equal weights, vectors v and -v cancel
  auto zero = compose_file_vector(stream_of({"a", "b"}), model, model.vocab);
  CHECK(zero.values[0] == doctest::Approx(0.0));
  CHECK(zero.values[1] == doctest::Approx(0.0));

  auto oov = compose_file_vector(stream_of({"nope", "nada"}), model, model.vocab);
  CHECK(oov.values == std::vector<double>{0.0, 0.0});
  CHECK(compose_file_vector(stream_of({}), model, model.vocab).values ==
        std::vector<double>{0.0, 0.0});

  EmbeddingModel bow;
  bow.kind = EmbeddingKind::BagOfWords;
  CHECK_THROWS_AS(compose_file_vector(stream_of({"a"}), bow, model.vocab),
                  std::invalid_argument);
}

TEST_CASE("compose_file_vector matches a per-occurrence oracle and ignores order") {
  std::mt19937_64 rng(5150);
  std::uniform_int_distribution<int> len(1, 50), tok(0, 15);

  std::vector<TokenStream> corpus;
  for (int i = 0; i < 12; ++i) {
    std::vector<std::string> tokens;
    int n = len(rng);
    for (int j = 0; j < n; ++j) tokens.push_back("v" + std::to_string(tok(rng)));
    corpus.push_back(stream_of(std::move(tokens)));
  }
  SgnsParams p = toy_params(31);
  p.epochs = 2;
  auto model = train_word2vec(corpus, p);
  const auto& vocab = model.vocab;

  for (const auto& s : corpus) {
    auto fv = compose_file_vector(s, model, vocab);

    // oracle: walk occurrences one by one, weight = idf per occurrence
    std::vector<long double> sum(model.dim, 0.0L);
    long double wsum = 0.0L;
    for (const auto& t : s.tokens) {
      int idx = vocab.lookup(t);
      if (idx < 0) continue;
      long double w = tfidf_weight(vocab, vocab.n_documents, t);
      for (int d = 0; d < model.dim; ++d) sum[d] += w * model.vectors[idx][d];
      wsum += w;
    }
    for (int d = 0; d < model.dim; ++d) {
      double expected = wsum > 0 ? static_cast<double>(sum[d] / wsum) : 0.0;
      CHECK(fv.values[d] == doctest::Approx(expected).epsilon(1e-12));
    }

    // token order within the file must not matter
    TokenStream shuffled = s;
    std::shuffle(shuffled.tokens.begin(), shuffled.tokens.end(), rng);
    auto fv2 = compose_file_vector(shuffled, model, vocab);
    for (int d = 0; d < model.dim; ++d)
      CHECK(fv.values[d] == doctest::Approx(fv2.values[d]).epsilon(1e-12));
  }
}

TEST_CASE("embedding serialization round-trips exactly") {
  auto corpus = shared_context_corpus();
  SgnsParams p = toy_params(8);
  p.epochs = 2;
  p.buckets = 64;

  for (auto kind : {EmbeddingKind::Word2Vec, EmbeddingKind::FastText}) {
    auto model = kind == EmbeddingKind::Word2Vec ? train_word2vec(corpus, p)
                                                 : train_fasttext(corpus, p);
    std::ostringstream vec_out, vocab_out;
    save_embedding(model, vec_out);
    save_vocabulary(model.vocab, vocab_out);

    std::istringstream vocab_in(vocab_out.str());
    auto vocab = load_vocabulary(vocab_in);
    std::istringstream vec_in(vec_out.str());
    auto loaded = load_embedding(vec_in, vocab);

    CHECK(loaded.kind == model.kind);
    CHECK(loaded.dim == model.dim);
    REQUIRE(loaded.vectors.size() == model.vectors.size());
    for (std::size_t i = 0; i < model.vectors.size(); ++i)
      CHECK(loaded.vectors[i] == model.vectors[i]);  // bitwise via %.17g
    REQUIRE(loaded.bucket_vectors.size() == model.bucket_vectors.size());
    for (std::size_t b = 0; b < model.bucket_vectors.size(); ++b)
      CHECK(loaded.bucket_vectors[b] == model.bucket_vectors[b]);
    CHECK(loaded.vocab.doc_freq == model.vocab.doc_freq);
    CHECK(loaded.vocab.n_documents == model.vocab.n_documents);

    std::ostringstream second;
    save_embedding(loaded, second);
    CHECK(second.str() == vec_out.str());
  }
}
