#include "promptqa/text.hpp"

#include <cctype>
#include <fstream>
#include <stdexcept>

namespace promptqa {

namespace {

bool is_word_char(unsigned char c) { return std::isalnum(c) != 0; }

}  // namespace

std::vector<Token> tokenize_spans(std::string_view text) {
  std::vector<Token> out;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    if (!is_word_char(static_cast<unsigned char>(text[i]))) {
      ++i;
      continue;
    }
    std::size_t j = i + 1;
    while (j < n) {
      unsigned char c = static_cast<unsigned char>(text[j]);
      if (is_word_char(c)) {
        ++j;
      } else if (c == '\'' && j + 1 < n &&
                 is_word_char(static_cast<unsigned char>(text[j + 1]))) {
        j += 2;
      } else {
        break;
      }
    }
    out.push_back(Token{std::string(text.substr(i, j - i)), i, j});
    i = j;
  }
  return out;
}

std::vector<std::string> tokenize_lower(std::string_view text) {
  std::vector<std::string> out;
  for (const Token& t : tokenize_spans(text)) out.push_back(to_lower(t.text));
  return out;
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool is_all_caps(std::string_view token) {
  int letters = 0;
  for (char c : token) {
    if (std::isalpha(static_cast<unsigned char>(c))) {
      if (!std::isupper(static_cast<unsigned char>(c))) return false;
      ++letters;
    }
  }
  return letters >= 2;
}

bool starts_upper(std::string_view token) {
  return !token.empty() && std::isupper(static_cast<unsigned char>(token[0])) != 0;
}

std::vector<SentenceSpan> split_sentences(std::string_view text) {
  std::vector<SentenceSpan> out;
  std::size_t begin = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (c == '.' || c == '!' || c == '?') {
      out.push_back(SentenceSpan{begin, i + 1});
      begin = i + 1;
    }
  }
  if (begin < text.size()) out.push_back(SentenceSpan{begin, text.size()});
  return out;
}

WordSet load_word_set(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open word list: " + path);
  WordSet out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    out.insert(to_lower(line));
  }
  return out;
}

std::size_t count_tokens(std::string_view text) {
  std::size_t count = 0;
  bool in_tok = false;
  for (char c : text) {
    bool ws = std::isspace(static_cast<unsigned char>(c)) != 0;
    if (!ws && !in_tok) ++count;
    in_tok = !ws;
  }
  return count;
}

}  // namespace promptqa
