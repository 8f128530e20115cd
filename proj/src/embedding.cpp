#include "vulnlearn/embedding.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace vulnlearn {

int Vocabulary::lookup(std::string_view token) const {
  auto it = index.find(std::string(token));
  return it == index.end() ? -1 : it->second;
}

Vocabulary build_vocab(const std::vector<TokenStream>& corpus, int min_count) {
  if (min_count < 1)
    throw std::invalid_argument("build_vocab: min_count must be >= 1");

  std::map<std::string, std::pair<std::int64_t, std::int64_t>> counts;  // cf, df
  for (const auto& stream : corpus) {
    std::map<std::string, std::int64_t> local;
    for (const auto& t : stream.tokens) ++local[t];
    for (const auto& [t, c] : local) {
      auto& entry = counts[t];
      entry.first += c;
      entry.second += 1;
    }
  }

  Vocabulary vocab;
  vocab.min_count = min_count;
  vocab.n_documents = static_cast<std::int64_t>(corpus.size());
  for (const auto& [t, cnt] : counts) {
    if (cnt.first < min_count) continue;
    vocab.index.emplace(t, static_cast<int>(vocab.tokens.size()));
    vocab.tokens.push_back(t);
    vocab.corpus_freq.push_back(cnt.first);
    vocab.doc_freq.push_back(cnt.second);
  }
  return vocab;
}

FileVector bow_vector(const TokenStream& stream, const Vocabulary& vocab) {
  FileVector fv;
  fv.file_id = stream.file_id;
  fv.source = VectorSource::BOW;
  fv.values.assign(vocab.size(), 0.0);
  for (const auto& t : stream.tokens) {
    int idx = vocab.lookup(t);
    if (idx >= 0) fv.values[idx] += 1.0;
  }
  return fv;
}

double tfidf_weight(const Vocabulary& vocab, std::int64_t n_documents,
                    std::string_view token) {
  int idx = vocab.lookup(token);
  if (idx < 0)
    throw std::out_of_range("tfidf_weight: unknown token '" +
                            std::string(token) + "'");
  const double df = static_cast<double>(vocab.doc_freq[idx]);
  return std::log((1.0 + static_cast<double>(n_documents)) / (1.0 + df)) + 1.0;
}

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::vector<std::uint32_t> subword_ids(std::string_view token, int ngram_min,
                                       int ngram_max, int buckets) {
  if (ngram_min > ngram_max)
    throw std::invalid_argument("subword_ids: ngram_min > ngram_max");
  std::string framed = "<";
  framed += token;
  framed += ">";

  std::vector<std::uint32_t> ids;
  const std::size_t n = framed.size();
  for (std::size_t i = 0; i < n; ++i) {
    if ((framed[i] & 0xC0) == 0x80) continue;  // UTF-8 continuation byte
    std::string ngram;
    std::size_t j = i;
    for (int len = 1; j < n && len <= ngram_max; ++len) {
      ngram.push_back(framed[j++]);
      while (j < n && (framed[j] & 0xC0) == 0x80) ngram.push_back(framed[j++]);
      if (len >= ngram_min)
        ids.push_back(static_cast<std::uint32_t>(fnv1a64(ngram) %
                                                 static_cast<std::uint64_t>(buckets)));
    }
  }
  return ids;
}

std::optional<std::vector<double>> EmbeddingModel::token_vector(
    std::string_view token) const {
  if (kind == EmbeddingKind::BagOfWords) return std::nullopt;
  const int idx = vocab.lookup(token);
  if (kind == EmbeddingKind::Word2Vec) {
    if (idx < 0) return std::nullopt;
    return vectors[idx];
  }
  // FastText: mean of own vector and n-gram vectors.
  std::vector<double> sum(dim, 0.0);
  std::size_t units = 0;
  if (idx >= 0) {
    for (int d = 0; d < dim; ++d) sum[d] += vectors[idx][d];
    ++units;
  }
  for (std::uint32_t b :
       subword_ids(token, params.ngram_min, params.ngram_max, params.buckets)) {
    for (int d = 0; d < dim; ++d) sum[d] += bucket_vectors[b][d];
    ++units;
  }
  if (units == 0) return std::nullopt;
  for (double& v : sum) v /= static_cast<double>(units);
  return sum;
}

FileVector compose_file_vector(const TokenStream& stream,
                               const EmbeddingModel& model,
                               const Vocabulary& vocab) {
  if (model.kind == EmbeddingKind::BagOfWords)
    throw std::invalid_argument(
        "compose_file_vector: model must be Word2Vec or FastText");

  FileVector fv;
  fv.file_id = stream.file_id;
  fv.source = model.kind == EmbeddingKind::Word2Vec ? VectorSource::W2V
                                                    : VectorSource::FT;
  fv.values.assign(model.dim, 0.0);

  std::map<std::string, std::int64_t> tf;
  for (const auto& t : stream.tokens) ++tf[t];

  double weight_sum = 0.0;
  for (const auto& [token, count] : tf) {
    if (vocab.lookup(token) < 0) continue;
    auto vec = model.token_vector(token);
    if (!vec) continue;
    if (static_cast<int>(vec->size()) != model.dim)
      throw std::logic_error("compose_file_vector: dimension mismatch");
    const double w = static_cast<double>(count) *
                     tfidf_weight(vocab, vocab.n_documents, token);
    for (int d = 0; d < model.dim; ++d) fv.values[d] += w * (*vec)[d];
    weight_sum += w;
  }
  if (weight_sum > 0.0)
    for (double& v : fv.values) v /= weight_sum;
  else
    std::fill(fv.values.begin(), fv.values.end(), 0.0);
  return fv;
}

namespace {

const char* kind_name(EmbeddingKind kind) {
  switch (kind) {
    case EmbeddingKind::BagOfWords: return "bow";
    case EmbeddingKind::Word2Vec: return "word2vec";
    case EmbeddingKind::FastText: return "fasttext";
  }
  return "?";
}

EmbeddingKind kind_from_name(const std::string& name) {
  if (name == "bow") return EmbeddingKind::BagOfWords;
  if (name == "word2vec") return EmbeddingKind::Word2Vec;
  if (name == "fasttext") return EmbeddingKind::FastText;
  throw std::runtime_error("unknown embedding kind '" + name + "'");
}

void write_double(std::ostream& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out << buf;
}

void write_vector_line(std::ostream& out, const std::string& id,
                       const std::vector<double>& vec) {
  out << id << '\t';
  for (std::size_t d = 0; d < vec.size(); ++d) {
    if (d) out << ' ';
    write_double(out, vec[d]);
  }
  out << '\n';
}

std::vector<double> parse_vector(const std::string& text, int dim,
                                 const char* what) {
  std::istringstream in(text);
  std::vector<double> vec;
  vec.reserve(dim);
  double v;
  while (in >> v) vec.push_back(v);
  if (static_cast<int>(vec.size()) != dim)
    throw std::runtime_error(std::string("load_embedding: bad ") + what +
                             " vector length");
  return vec;
}

}  // namespace

void save_embedding(const EmbeddingModel& model, std::ostream& out) {
  out << kind_name(model.kind) << ' ' << model.dim << ' ' << model.params.window
      << ' ' << model.params.min_count << " format=1"
      << " negatives=" << model.params.negatives
      << " epochs=" << model.params.epochs << " seed=" << model.params.seed
      << " docs=" << model.vocab.n_documents << " vocab=" << model.vocab.size()
      << '\n';
  for (std::size_t i = 0; i < model.vectors.size(); ++i)
    write_vector_line(out, model.vocab.tokens[i], model.vectors[i]);
  if (model.kind == EmbeddingKind::FastText) {
    out << "%%ngrams " << model.params.ngram_min << ' ' << model.params.ngram_max
        << ' ' << model.params.buckets << '\n';
    for (std::size_t b = 0; b < model.bucket_vectors.size(); ++b)
      write_vector_line(out, std::to_string(b), model.bucket_vectors[b]);
  }
}

EmbeddingModel load_embedding(std::istream& in, const Vocabulary& vocab) {
  std::string header;
  if (!std::getline(in, header))
    throw std::runtime_error("load_embedding: missing header");
  std::istringstream hs(header);
  std::string kind_str;
  int dim, window, min_count;
  if (!(hs >> kind_str >> dim >> window >> min_count))
    throw std::runtime_error("load_embedding: malformed header");

  EmbeddingModel model;
  model.kind = kind_from_name(kind_str);
  model.dim = dim;
  model.params.dim = dim;
  model.params.window = window;
  model.params.min_count = min_count;
  std::size_t vocab_count = 0;
  std::string kv;
  while (hs >> kv) {
    auto eq = kv.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = kv.substr(0, eq);
    const std::string value = kv.substr(eq + 1);
    if (key == "negatives") model.params.negatives = std::stoi(value);
    else if (key == "epochs") model.params.epochs = std::stoi(value);
    else if (key == "seed") model.params.seed = std::stoull(value);
    else if (key == "vocab") vocab_count = std::stoull(value);
    // docs= is informational; the vocabulary file is authoritative.
  }
  if (vocab_count != vocab.size())
    throw std::runtime_error("load_embedding: vocabulary size mismatch");
  model.vocab = vocab;

  std::string line;
  const std::size_t vector_lines =
      model.kind == EmbeddingKind::BagOfWords ? 0 : vocab_count;
  for (std::size_t i = 0; i < vector_lines; ++i) {
    if (!std::getline(in, line))
      throw std::runtime_error("load_embedding: truncated vector section");
    auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw std::runtime_error("load_embedding: malformed vector line");
    if (line.substr(0, tab) != vocab.tokens[i])
      throw std::runtime_error("load_embedding: token order mismatch at '" +
                               line.substr(0, tab) + "'");
    model.vectors.push_back(parse_vector(line.substr(tab + 1), dim, "token"));
  }

  if (model.kind == EmbeddingKind::FastText) {
    if (!std::getline(in, line) || line.rfind("%%ngrams", 0) != 0)
      throw std::runtime_error("load_embedding: missing %%ngrams section");
    std::istringstream ns(line.substr(8));
    int buckets = 0;
    if (!(ns >> model.params.ngram_min >> model.params.ngram_max >> buckets))
      throw std::runtime_error("load_embedding: malformed %%ngrams header");
    model.params.buckets = buckets;
    for (int b = 0; b < buckets; ++b) {
      if (!std::getline(in, line))
        throw std::runtime_error("load_embedding: truncated bucket section");
      auto tab = line.find('\t');
      if (tab == std::string::npos || line.substr(0, tab) != std::to_string(b))
        throw std::runtime_error("load_embedding: malformed bucket line");
      model.bucket_vectors.push_back(
          parse_vector(line.substr(tab + 1), dim, "bucket"));
    }
  }
  return model;
}

void save_vocabulary(const Vocabulary& vocab, std::ostream& out) {
  nlohmann::json j;
  j["format"] = 1;
  j["min_count"] = vocab.min_count;
  j["documents"] = vocab.n_documents;
  auto& tokens = j["tokens"] = nlohmann::json::array();
  for (std::size_t i = 0; i < vocab.size(); ++i)
    tokens.push_back({vocab.tokens[i], vocab.doc_freq[i], vocab.corpus_freq[i]});
  out << j.dump() << '\n';
}

Vocabulary load_vocabulary(std::istream& in) {
  nlohmann::json j;
  in >> j;
  Vocabulary vocab;
  vocab.min_count = j.at("min_count").get<int>();
  vocab.n_documents = j.at("documents").get<std::int64_t>();
  for (const auto& entry : j.at("tokens")) {
    const auto token = entry.at(0).get<std::string>();
    vocab.index.emplace(token, static_cast<int>(vocab.tokens.size()));
    vocab.tokens.push_back(token);
    vocab.doc_freq.push_back(entry.at(1).get<std::int64_t>());
    vocab.corpus_freq.push_back(entry.at(2).get<std::int64_t>());
  }
  return vocab;
}

}  // namespace vulnlearn
