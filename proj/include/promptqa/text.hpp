#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace promptqa {

// A token with its character span in the original text. Surface case is kept;
// use lower() when a case-folded form is needed.
struct Token {
  std::string text;
  std::size_t begin = 0;  // inclusive char offset
  std::size_t end = 0;    // exclusive char offset
};

// Splits text into alphanumeric runs (apostrophes inside a word are kept, so
// "don't" stays one token). Everything else is a separator.
std::vector<Token> tokenize_spans(std::string_view text);

// Lowercased token strings only.
std::vector<std::string> tokenize_lower(std::string_view text);

std::string to_lower(std::string_view s);

bool is_all_caps(std::string_view token);
bool starts_upper(std::string_view token);

// Sentence spans delimited by . ! ? (offsets into the original text).
struct SentenceSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
};
std::vector<SentenceSpan> split_sentences(std::string_view text);

using WordSet = std::unordered_set<std::string>;

// One entry per line, '#' comments and blank lines skipped, lowercased.
WordSet load_word_set(const std::string& path);

// Whitespace token count, used for prompt/context length budgeting.
std::size_t count_tokens(std::string_view text);

}  // namespace promptqa
