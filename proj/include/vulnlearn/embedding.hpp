#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "vulnlearn/tokenizer.hpp"

namespace vulnlearn {

// Token inventory of a training corpus. Indices are dense and assigned in
// lexicographic token order so identical corpora always yield identical
// vocabularies.
struct Vocabulary {
  std::vector<std::string> tokens;             // index -> token
  std::unordered_map<std::string, int> index;  // token -> index
  std::vector<std::int64_t> doc_freq;          // documents containing token
  std::vector<std::int64_t> corpus_freq;       // total occurrences
  int min_count = 1;
  std::int64_t n_documents = 0;

  int lookup(std::string_view token) const;
  std::size_t size() const { return tokens.size(); }
};

Vocabulary build_vocab(const std::vector<TokenStream>& corpus, int min_count);

enum class EmbeddingKind { BagOfWords, Word2Vec, FastText };
enum class VectorSource { BOW, W2V, FT, Arch, Concat };

struct FileVector {
  std::string file_id;
  std::vector<double> values;
  VectorSource source = VectorSource::BOW;
  int label = -1;  // -1 = unlabeled
};

FileVector bow_vector(const TokenStream& stream, const Vocabulary& vocab);

struct SgnsParams {
  int dim = 300;
  int window = 5;
  int min_count = 2;
  int negatives = 5;
  int epochs = 5;
  std::uint64_t seed = 1;
  double lr_start = 0.025;
  double lr_end = 1e-4;
  // fastText subwords
  int ngram_min = 3;
  int ngram_max = 6;
  int buckets = 1 << 12;
};

struct EmbeddingModel {
  EmbeddingKind kind = EmbeddingKind::BagOfWords;
  int dim = 0;
  SgnsParams params;
  Vocabulary vocab;
  std::vector<std::vector<double>> vectors;         // per vocab index
  std::vector<std::vector<double>> bucket_vectors;  // fastText n-gram table
  std::vector<double> epoch_losses;                 // mean pair loss per epoch

  // Word2Vec: the token's trained vector, or nullopt when out of vocabulary.
  // FastText: mean of the token's own vector (if in vocabulary) and its
  // character n-gram vectors; resolvable for any non-empty token.
  std::optional<std::vector<double>> token_vector(std::string_view token) const;
};

EmbeddingModel train_word2vec(const std::vector<TokenStream>& corpus,
                              const SgnsParams& params = {});
EmbeddingModel train_fasttext(const std::vector<TokenStream>& corpus,
                              const SgnsParams& params = {});

// Smoothed inverse document frequency: ln((1 + n) / (1 + df)) + 1.
// The tf factor is applied at composition time. Throws std::out_of_range for
// tokens missing from the vocabulary.
double tfidf_weight(const Vocabulary& vocab, std::int64_t n_documents,
                    std::string_view token);

// tf-idf weighted mean of the stream's token vectors. Tokens missing from
// the vocabulary are skipped; a fully out-of-vocabulary stream gives the
// zero vector.
FileVector compose_file_vector(const TokenStream& stream,
                               const EmbeddingModel& model,
                               const Vocabulary& vocab);

// Skip-gram negative-sampling pair loss
//   L = -log s(c.p) - sum_j log s(-c.n_j)
// for one center representation c against a positive context vector p and
// sampled negative vectors n_j. Gradients of L are written to the g_*
// outputs (resized and zeroed here). The trainers step along these exact
// gradients, so a finite-difference check of this function covers training.
double sgns_pair_loss(const std::vector<double>& center,
                      const std::vector<double>& positive,
                      const std::vector<const std::vector<double>*>& negatives,
                      std::vector<double>& g_center,
                      std::vector<double>& g_positive,
                      std::vector<std::vector<double>>& g_negatives);

// Hashed character n-grams of the token framed as "<token>". Duplicates are
// kept; ids are bucket indices in [0, buckets).
std::vector<std::uint32_t> subword_ids(std::string_view token, int ngram_min,
                                       int ngram_max, int buckets);

std::uint64_t fnv1a64(std::string_view data);

// Text format: one header line "kind dim window min_count key=value..."
// followed by one "token<TAB>v1 v2 ... vd" line per vocabulary entry and,
// for fastText, a "%%ngrams min max buckets" section with the bucket table.
// Document frequencies live in the vocabulary file (save_vocabulary).
void save_embedding(const EmbeddingModel& model, std::ostream& out);
EmbeddingModel load_embedding(std::istream& in, const Vocabulary& vocab);

void save_vocabulary(const Vocabulary& vocab, std::ostream& out);
Vocabulary load_vocabulary(std::istream& in);

}  // namespace vulnlearn
