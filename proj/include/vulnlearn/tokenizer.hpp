#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace vulnlearn {

enum class TokenStrategy { Raw, Filtered };

struct TokenizerOptions {
  // Split identifiers at lower->upper camelCase boundaries, lowercase the
  // pieces and rejoin with '_' ("StringBuilder" -> "string_builder").
  bool normalize_identifiers = true;
  // Blank out the contents of string/char literals before splitting.
  bool drop_string_literal_text = false;
};

struct TokenStream {
  std::string file_id;
  std::vector<std::string> tokens;
  TokenStrategy strategy = TokenStrategy::Raw;
};

// Corpus-level token statistics, split by the binary file label.
struct TokenStats {
  std::map<std::string, std::uint64_t> histogram;  // token -> occurrences
  std::set<std::string> vulnerable_vocab;
  std::set<std::string> nonvulnerable_vocab;
  std::set<std::string> common;  // intersection of the two vocabularies
  std::uint64_t total_tokens = 0;
};

// Single-character tokens dropped under the Filtered strategy.
// Note '/' is not a member: "//" survives as a word-like run in Raw streams.
bool is_special_symbol(char c);

// Removes // line comments and /* */ block comments while leaving string and
// char literal contents untouched. An unterminated block comment strips to
// end of input and sets *unterminated if provided.
std::string strip_comments(std::string_view source, bool* unterminated = nullptr);

std::string normalize_identifier(std::string_view token);

TokenStream tokenize(std::string_view source, TokenStrategy strategy,
                     const TokenizerOptions& options = {},
                     std::string file_id = {});

// labels must be 0 or 1; throws std::invalid_argument otherwise.
TokenStats corpus_stats(const std::vector<std::pair<TokenStream, int>>& labeled_streams);

// token,count,in_vulnerable,in_nonvulnerable (one row per distinct token)
void write_token_stats_csv(const TokenStats& stats, std::ostream& out);

// occurrence_bucket,token_count (how many distinct tokens occur k times)
void write_histogram_csv(const TokenStats& stats, std::ostream& out);

}  // namespace vulnlearn
