#include "promptqa/annotators.hpp"

#include <algorithm>
#include <fstream>
#include <regex>
#include <stdexcept>

#include "json.hpp"

using nlohmann::json;

namespace promptqa {

namespace {

bool starts_with_tokens(const std::vector<std::string>& toks,
                        std::initializer_list<const char*> prefix) {
  if (toks.size() < prefix.size()) return false;
  std::size_t i = 0;
  for (const char* p : prefix)
    if (toks[i++] != p) return false;
  return true;
}

}  // namespace

std::string to_string(QuestionType t) {
  switch (t) {
    case QuestionType::why: return "why";
    case QuestionType::why_useful: return "why_useful";
    case QuestionType::what_if: return "what_if";
    case QuestionType::what_prevented: return "what_prevented";
    case QuestionType::other: return "other";
  }
  return "other";
}

std::string display_name(QuestionType t) {
  switch (t) {
    case QuestionType::why: return "Why";
    case QuestionType::why_useful: return "Why useful";
    case QuestionType::what_if: return "What will happen if";
    case QuestionType::what_prevented: return "What will be prevented";
    case QuestionType::other: return "Other";
  }
  return "Other";
}

QuestionType classify_question_type(const std::string& question) {
  if (question.empty()) throw std::invalid_argument("empty question");
  std::vector<std::string> toks = tokenize_lower(question);
  if (toks.empty()) return QuestionType::other;
  if (toks[0] == "why") {
    if (std::find(toks.begin(), toks.end(), "useful") != toks.end())
      return QuestionType::why_useful;
    return QuestionType::why;
  }
  if (starts_with_tokens(toks, {"what", "will", "be", "prevented"}))
    return QuestionType::what_prevented;
  if (starts_with_tokens(toks, {"what", "will", "happen", "if"}) ||
      starts_with_tokens(toks, {"what", "would", "happen", "if"}) ||
      starts_with_tokens(toks, {"what", "happens", "if"}) ||
      starts_with_tokens(toks, {"what", "if"}))
    return QuestionType::what_if;
  return QuestionType::other;
}

std::string to_string(Polarity p) {
  switch (p) {
    case Polarity::positive: return "positive";
    case Polarity::negative: return "negative";
    case Polarity::neutral: return "neutral";
  }
  return "neutral";
}

SentimentLexicon load_sentiment_lexicon(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open sentiment lexicon: " + path);
  SentimentLexicon lex;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::size_t tab = line.find('\t');
    if (tab == std::string::npos) continue;
    lex[to_lower(line.substr(0, tab))] = std::stod(line.substr(tab + 1));
  }
  return lex;
}

namespace {

bool is_negator(const std::string& lower_tok) {
  static const WordSet negators{"not",  "no",      "never", "without",
                                "hardly", "neither", "nor",   "cannot"};
  if (negators.count(lower_tok)) return true;
  return lower_tok.size() > 3 && lower_tok.compare(lower_tok.size() - 3, 3, "n't") == 0;
}

}  // namespace

SentimentScore score_sentiment(const std::string& text,
                               const SentimentLexicon& lexicon, double tau) {
  if (lexicon.empty()) throw std::invalid_argument("empty sentiment lexicon");
  SentimentScore score;
  std::vector<std::string> toks = tokenize_lower(text);
  double sum = 0.0;
  for (std::size_t i = 0; i < toks.size(); ++i) {
    auto it = lexicon.find(toks[i]);
    if (it == lexicon.end()) continue;
    double v = it->second;
    for (std::size_t back = 1; back <= 2 && back <= i; ++back) {
      if (is_negator(toks[i - back])) {
        v = -v;
        break;
      }
    }
    score.word_scores.emplace_back(toks[i], v);
    sum += v;
  }
  if (!score.word_scores.empty()) {
    score.value = std::clamp(sum / score.word_scores.size(), -1.0, 1.0);
  }
  if (score.value > tau)
    score.polarity = Polarity::positive;
  else if (score.value < -tau)
    score.polarity = Polarity::negative;
  else
    score.polarity = Polarity::neutral;
  return score;
}

std::string to_string(EntityKind k) {
  switch (k) {
    case EntityKind::person: return "person";
    case EntityKind::organization: return "organization";
    case EntityKind::location: return "location";
    case EntityKind::country: return "country";
    case EntityKind::date: return "date";
    case EntityKind::other: return "other";
  }
  return "other";
}

Gazetteers load_gazetteers(const std::string& dir) {
  Gazetteers gaz;
  gaz.names[EntityKind::person] = load_word_set(dir + "/person_names.txt");
  gaz.names[EntityKind::organization] = load_word_set(dir + "/organizations.txt");
  gaz.names[EntityKind::location] = load_word_set(dir + "/locations.txt");
  gaz.names[EntityKind::country] = load_word_set(dir + "/countries.txt");
  gaz.temporal_words = load_word_set(dir + "/temporal_words.txt");
  gaz.date_regexes = {R"(^[0-9]{4}$)", R"(^[0-9]{1,2}(st|nd|rd|th)$)"};
  return gaz;
}

namespace {

// Function words that never open a capitalized-run mention even when they
// start a sentence.
const WordSet& skip_words() {
  static const WordSet words{
      "the", "a",    "an",   "why",   "what",  "how",  "when", "where", "who",
      "which", "this", "that", "these", "those", "if",  "will", "would", "be",
      "is",  "are",  "was",  "were",  "do",    "does", "did",  "in",    "on",
      "at",  "to",   "of",   "for",   "and",   "or",   "but",  "with",  "as",
      "by",  "it",   "its",  "we",    "our",   "they", "their", "he",   "she",
      "you", "i",    "there", "here"};
  return words;
}

bool matches_date(const std::string& lower_tok, const Gazetteers& gaz) {
  if (gaz.temporal_words.count(lower_tok)) return true;
  for (const auto& pat : gaz.date_regexes) {
    if (std::regex_match(lower_tok, std::regex(pat))) return true;
  }
  return false;
}

// Gazetteer lookup at token position i, longest phrase first. Kind priority
// on equal length: country > person > organization > location.
std::optional<std::pair<EntityKind, std::size_t>> gazetteer_match(
    const std::vector<Token>& toks, std::size_t i, const Gazetteers& gaz) {
  static const EntityKind order[] = {EntityKind::country, EntityKind::person,
                                     EntityKind::organization,
                                     EntityKind::location};
  const std::size_t max_len = std::min<std::size_t>(4, toks.size() - i);
  for (std::size_t len = max_len; len >= 1; --len) {
    std::string key;
    for (std::size_t j = 0; j < len; ++j) {
      if (j) key += ' ';
      key += to_lower(toks[i + j].text);
    }
    for (EntityKind kind : order) {
      auto it = gaz.names.find(kind);
      if (it != gaz.names.end() && it->second.count(key))
        return std::make_pair(kind, len);
    }
  }
  return std::nullopt;
}

bool cap_run_token(const Token& tok) {
  if (is_all_caps(tok.text)) return true;
  return starts_upper(tok.text) && !skip_words().count(to_lower(tok.text));
}

}  // namespace

std::vector<EntityMention> tag_entities(const std::string& text,
                                        const Gazetteers& gaz) {
  std::vector<EntityMention> out;
  std::vector<Token> toks = tokenize_spans(text);
  std::size_t i = 0;
  while (i < toks.size()) {
    if (auto m = gazetteer_match(toks, i, gaz)) {
      auto [kind, len] = *m;
      out.push_back(EntityMention{
          std::string(text.substr(toks[i].begin, toks[i + len - 1].end - toks[i].begin)),
          kind, toks[i].begin, toks[i + len - 1].end});
      i += len;
      continue;
    }
    std::string lower = to_lower(toks[i].text);
    if (matches_date(lower, gaz)) {
      out.push_back(EntityMention{toks[i].text, EntityKind::date, toks[i].begin,
                                  toks[i].end});
      ++i;
      continue;
    }
    if (cap_run_token(toks[i])) {
      std::size_t j = i + 1;
      while (j < toks.size() && cap_run_token(toks[j]) &&
             !gazetteer_match(toks, j, gaz) &&
             !matches_date(to_lower(toks[j].text), gaz)) {
        ++j;
      }
      out.push_back(EntityMention{
          std::string(text.substr(toks[i].begin, toks[j - 1].end - toks[i].begin)),
          EntityKind::other, toks[i].begin, toks[j - 1].end});
      i = j;
      continue;
    }
    ++i;
  }
  return out;
}

PhraseLexicons load_phrase_lexicons(const std::string& dir) {
  PhraseLexicons lex;
  lex.adjectives = load_word_set(dir + "/adjectives.txt");
  lex.nouns = load_word_set(dir + "/nouns.txt");
  lex.stopwords = load_word_set(dir + "/stopwords.txt");
  return lex;
}

namespace {

bool ends_with(const std::string& s, std::string_view suffix) {
  return s.size() > suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

bool noun_like(const std::string& lower, const PhraseLexicons& lex) {
  if (lex.nouns.count(lower)) return true;
  // plural back-off
  if (ends_with(lower, "ies") &&
      lex.nouns.count(lower.substr(0, lower.size() - 3) + "y"))
    return true;
  if (ends_with(lower, "es") && lex.nouns.count(lower.substr(0, lower.size() - 2)))
    return true;
  if (ends_with(lower, "s") && lex.nouns.count(lower.substr(0, lower.size() - 1)))
    return true;
  for (std::string_view suf :
       {"tion", "sion", "ment", "ness", "ity", "ism", "ship", "ence", "ance"}) {
    if (ends_with(lower, suf)) return true;
  }
  return false;
}

bool adjective_like(const std::string& lower, const PhraseLexicons& lex) {
  if (lex.adjectives.count(lower)) return true;
  if (noun_like(lower, lex)) return false;
  for (std::string_view suf : {"ive", "ous", "ful", "able", "ible", "ic", "ish", "ary"}) {
    if (ends_with(lower, suf)) return true;
  }
  return false;
}

}  // namespace

std::vector<Phrase> extract_phrases(const std::string& question,
                                    const PhraseLexicons& lex) {
  std::vector<Phrase> out;
  std::vector<Token> toks = tokenize_spans(question);
  std::size_t i = 0;
  while (i < toks.size()) {
    std::string lower = to_lower(toks[i].text);
    if (lex.stopwords.count(lower) ||
        (!adjective_like(lower, lex) && !noun_like(lower, lex))) {
      ++i;
      continue;
    }
    Phrase ph;
    std::size_t start = i;
    // adjective* ...
    while (i < toks.size()) {
      std::string l = to_lower(toks[i].text);
      if (lex.stopwords.count(l) || !adjective_like(l, lex) || noun_like(l, lex))
        break;
      ph.modifiers.push_back(toks[i].text);
      ++i;
    }
    // ... noun+
    std::size_t nouns = 0;
    while (i < toks.size()) {
      std::string l = to_lower(toks[i].text);
      if (lex.stopwords.count(l) || !noun_like(l, lex)) break;
      ph.head_noun = toks[i].text;
      ++nouns;
      ++i;
    }
    const std::size_t total = (i - start);
    if (nouns >= 1 && total >= 2) {
      ph.begin = toks[start].begin;
      ph.end = toks[i - 1].end;
      ph.text = question.substr(ph.begin, ph.end - ph.begin);
      out.push_back(std::move(ph));
    } else if (i == start) {
      ++i;  // lone adjective-noun ambiguity; move on
    }
  }
  return out;
}

std::map<std::string, AnnotationOverride> load_sidecar(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open sidecar file: " + path);
  std::map<std::string, AnnotationOverride> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json rec = json::parse(line);
    if (rec.contains("_meta")) continue;
    if (!rec.contains("id"))
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": sidecar record without id");
    AnnotationOverride ov;
    if (rec.contains("entities")) {
      std::vector<EntityMention> ents;
      for (const auto& e : rec["entities"]) {
        EntityMention m;
        m.text = e.value("text", "");
        std::string kind = e.value("kind", "other");
        if (kind == "person") m.kind = EntityKind::person;
        else if (kind == "organization") m.kind = EntityKind::organization;
        else if (kind == "location") m.kind = EntityKind::location;
        else if (kind == "country") m.kind = EntityKind::country;
        else if (kind == "date") m.kind = EntityKind::date;
        else m.kind = EntityKind::other;
        m.begin = e.value("begin", 0u);
        m.end = e.value("end", 0u);
        ents.push_back(std::move(m));
      }
      ov.entities = std::move(ents);
    }
    if (rec.contains("phrases")) {
      std::vector<Phrase> phrases;
      for (const auto& p : rec["phrases"]) {
        Phrase ph;
        ph.text = p.value("text", "");
        ph.head_noun = p.value("head_noun", "");
        if (p.contains("modifiers"))
          ph.modifiers = p["modifiers"].get<std::vector<std::string>>();
        phrases.push_back(std::move(ph));
      }
      ov.phrases = std::move(phrases);
    }
    if (rec.contains("sentiment")) {
      SentimentScore s;
      std::string pol = rec["sentiment"].value("polarity", "neutral");
      s.polarity = pol == "positive" ? Polarity::positive
                  : pol == "negative" ? Polarity::negative
                                      : Polarity::neutral;
      s.value = rec["sentiment"].value("value", 0.0);
      ov.sentiment = s;
    }
    if (rec.contains("question_type")) {
      std::string t = rec.value("question_type", "other");
      QuestionType qt = QuestionType::other;
      if (t == "why") qt = QuestionType::why;
      else if (t == "why_useful") qt = QuestionType::why_useful;
      else if (t == "what_if") qt = QuestionType::what_if;
      else if (t == "what_prevented") qt = QuestionType::what_prevented;
      ov.question_type = qt;
    }
    out[rec["id"].get<std::string>()] = std::move(ov);
  }
  return out;
}

}  // namespace promptqa
