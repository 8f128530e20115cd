#include "vulnlearn/tokenizer.hpp"

#include <array>
#include <cctype>
#include <ostream>
#include <stdexcept>

namespace vulnlearn {
namespace {

constexpr std::string_view kSpecialSymbols = "{},.;:[])(+-=|&!?*^\\<>@\"'~#%";

const std::array<bool, 256>& symbol_table() {
  static const std::array<bool, 256> table = [] {
    std::array<bool, 256> t{};
    for (char c : kSpecialSymbols) t[static_cast<unsigned char>(c)] = true;
    return t;
  }();
  return table;
}

bool is_space(char c) {
  return std::isspace(static_cast<unsigned char>(c)) != 0;
}

// How comment text is rewritten by the single-pass scanner. Strip removes
// comments outright (the strip_comments contract); Separator replaces each
// comment with one space so adjacent tokens never fuse ("a/**/b" lexes as
// two tokens, as a compiler would see it).
enum class CommentMode { Keep, Strip, Separator };

// One pass over the source handling comment and literal context together.
// Line comments keep their terminating newline; literal bodies are blanked
// when blank_literals is set, with the quote characters themselves preserved.
std::string preprocess(std::string_view src, CommentMode comments,
                       bool blank_literals, bool* unterminated) {
  std::string out;
  out.reserve(src.size());
  enum class State { Code, LineComment, BlockComment, String, Char };
  State state = State::Code;
  bool escaped = false;
  const bool remove_comments = comments != CommentMode::Keep;

  std::size_t i = 0;
  const std::size_t n = src.size();
  while (i < n) {
    const char c = src[i];
    const char next = i + 1 < n ? src[i + 1] : '\0';
    switch (state) {
      case State::Code:
        if (remove_comments && c == '/' && next == '/') {
          state = State::LineComment;
          if (comments == CommentMode::Separator) out.push_back(' ');
          i += 2;
        } else if (remove_comments && c == '/' && next == '*') {
          state = State::BlockComment;
          if (comments == CommentMode::Separator) out.push_back(' ');
          i += 2;
        } else if (c == '"') {
          state = State::String;
          escaped = false;
          out.push_back(c);
          ++i;
        } else if (c == '\'') {
          state = State::Char;
          escaped = false;
          out.push_back(c);
          ++i;
        } else {
          out.push_back(c);
          ++i;
        }
        break;
      case State::LineComment:
        if (c == '\n') {
          state = State::Code;
          out.push_back(c);
        }
        ++i;
        break;
      case State::BlockComment:
        if (c == '*' && next == '/') {
          state = State::Code;
          i += 2;
        } else {
          ++i;
        }
        break;
      case State::String:
      case State::Char: {
        const char quote = state == State::String ? '"' : '\'';
        if (escaped) {
          out.push_back(blank_literals ? ' ' : c);
          escaped = false;
        } else if (c == '\\') {
          out.push_back(blank_literals ? ' ' : c);
          escaped = true;
        } else if (c == quote) {
          out.push_back(c);
          state = State::Code;
        } else if (c == '\n') {
          // Unterminated literal on this line; fall back to code context.
          out.push_back(c);
          state = State::Code;
        } else {
          out.push_back(blank_literals ? ' ' : c);
        }
        ++i;
        break;
      }
    }
  }
  if (unterminated) *unterminated = state == State::BlockComment;
  return out;
}

}  // namespace

bool is_special_symbol(char c) {
  return symbol_table()[static_cast<unsigned char>(c)];
}

std::string strip_comments(std::string_view source, bool* unterminated) {
  return preprocess(source, CommentMode::Strip, /*blank_literals=*/false,
                    unterminated);
}

std::string normalize_identifier(std::string_view token) {
  bool has_letter = false;
  for (char c : token) {
    if (std::isalpha(static_cast<unsigned char>(c))) {
      has_letter = true;
      break;
    }
  }
  if (!has_letter) return std::string(token);

  std::string out;
  out.reserve(token.size() + 4);
  for (std::size_t i = 0; i < token.size(); ++i) {
    const unsigned char c = static_cast<unsigned char>(token[i]);
    if (i > 0 && std::isupper(c) &&
        std::islower(static_cast<unsigned char>(token[i - 1]))) {
      out.push_back('_');
    }
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

TokenStream tokenize(std::string_view source, TokenStrategy strategy,
                     const TokenizerOptions& options, std::string file_id) {
  TokenStream stream;
  stream.file_id = std::move(file_id);
  stream.strategy = strategy;

  const bool filtered = strategy == TokenStrategy::Filtered;
  std::string text;
  if (filtered || options.drop_string_literal_text) {
    text = preprocess(source,
                      filtered ? CommentMode::Separator : CommentMode::Keep,
                      options.drop_string_literal_text, nullptr);
  } else {
    text.assign(source);
  }

  std::string word;
  auto flush_word = [&] {
    if (word.empty()) return;
    stream.tokens.push_back(options.normalize_identifiers
                                ? normalize_identifier(word)
                                : word);
    word.clear();
  };

  // Comment delimiters ("//", "/*", "*/") are token boundaries in both
  // strategies so words never fuse across them; Raw keeps them as tokens.
  const std::size_t n = text.size();
  std::size_t i = 0;
  while (i < n) {
    const char c = text[i];
    const char next = i + 1 < n ? text[i + 1] : '\0';
    if (is_space(c)) {
      flush_word();
      ++i;
    } else if ((c == '/' && (next == '/' || next == '*')) ||
               (c == '*' && next == '/')) {
      flush_word();
      if (!filtered) stream.tokens.push_back({c, next});
      i += 2;
    } else if (is_special_symbol(c)) {
      flush_word();
      if (!filtered) stream.tokens.emplace_back(1, c);
      ++i;
    } else {
      word.push_back(c);
      ++i;
    }
  }
  flush_word();
  return stream;
}

TokenStats corpus_stats(
    const std::vector<std::pair<TokenStream, int>>& labeled_streams) {
  TokenStats stats;
  for (const auto& [stream, label] : labeled_streams) {
    if (label != 0 && label != 1)
      throw std::invalid_argument("corpus_stats: label must be 0 or 1, got " +
                                  std::to_string(label));
    auto& vocab = label == 1 ? stats.vulnerable_vocab : stats.nonvulnerable_vocab;
    for (const auto& token : stream.tokens) {
      ++stats.histogram[token];
      ++stats.total_tokens;
      vocab.insert(token);
    }
  }
  for (const auto& token : stats.vulnerable_vocab) {
    if (stats.nonvulnerable_vocab.count(token)) stats.common.insert(token);
  }
  return stats;
}

namespace {

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string quoted = "\"";
  for (char c : field) {
    if (c == '"') quoted += "\"\"";
    else quoted.push_back(c);
  }
  quoted.push_back('"');
  return quoted;
}

}  // namespace

void write_token_stats_csv(const TokenStats& stats, std::ostream& out) {
  out << "token,count,in_vulnerable,in_nonvulnerable\n";
  for (const auto& [token, count] : stats.histogram) {
    out << csv_escape(token) << ',' << count << ','
        << (stats.vulnerable_vocab.count(token) ? 1 : 0) << ','
        << (stats.nonvulnerable_vocab.count(token) ? 1 : 0) << '\n';
  }
}

void write_histogram_csv(const TokenStats& stats, std::ostream& out) {
  std::map<std::uint64_t, std::uint64_t> buckets;
  for (const auto& [token, count] : stats.histogram) ++buckets[count];
  out << "occurrence_bucket,token_count\n";
  for (const auto& [bucket, tokens] : buckets)
    out << bucket << ',' << tokens << '\n';
}

}  // namespace vulnlearn
