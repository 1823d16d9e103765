#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "promptqa/text.hpp"

namespace promptqa {

enum class QuestionType { why, why_useful, what_if, what_prevented, other };

std::string to_string(QuestionType t);
// Human-readable form used inside question-type prompts ("Why useful" etc.).
std::string display_name(QuestionType t);

// Total, deterministic rule classifier over anchored question patterns.
// "why ... useful" wins over plain "why".
QuestionType classify_question_type(const std::string& question);

enum class Polarity { positive, negative, neutral };

std::string to_string(Polarity p);

struct SentimentScore {
  Polarity polarity = Polarity::neutral;
  double value = 0.0;  // clamped to [-1, 1]
  // lowercased token -> signed valence after negation handling, for every
  // lexicon hit in the text
  std::vector<std::pair<std::string, double>> word_scores;
};

using SentimentLexicon = std::map<std::string, double>;

// word<TAB>value, one entry per line.
SentimentLexicon load_sentiment_lexicon(const std::string& path);

// Mean of lexicon hits; a negator within 2 tokens before a hit flips its
// sign. Case-insensitive. `tau` is the neutral band half-width.
SentimentScore score_sentiment(const std::string& text,
                               const SentimentLexicon& lexicon,
                               double tau = 0.05);

enum class EntityKind { person, organization, location, country, date, other };

std::string to_string(EntityKind k);

struct EntityMention {
  std::string text;
  EntityKind kind = EntityKind::other;
  std::size_t begin = 0;
  std::size_t end = 0;
};

struct Gazetteers {
  std::map<EntityKind, WordSet> names;   // lowercased entries, possibly multiword
  WordSet temporal_words;                // "annual", "quarterly", ... -> date kind
  std::vector<std::string> date_regexes; // e.g. four-digit years, month-day forms
};

// Expects person_names.txt, organizations.txt, locations.txt, countries.txt,
// temporal_words.txt under `dir`.
Gazetteers load_gazetteers(const std::string& dir);

// Longest-match-wins, left-to-right, non-overlapping. Capitalized token runs
// outside every gazetteer get kind `other`.
std::vector<EntityMention> tag_entities(const std::string& text,
                                        const Gazetteers& gaz);

struct Phrase {
  std::string text;
  std::string head_noun;
  std::vector<std::string> modifiers;
  std::size_t begin = 0;
  std::size_t end = 0;
};

struct PhraseLexicons {
  WordSet adjectives;
  WordSet nouns;
  WordSet stopwords;
};

PhraseLexicons load_phrase_lexicons(const std::string& dir);

// Maximal contiguous adjective* noun+ runs of >= 2 tokens. POS membership is
// lexicon lookup plus suffix heuristics; single bare nouns are not phrases.
std::vector<Phrase> extract_phrases(const std::string& question,
                                    const PhraseLexicons& lex);

// Precomputed per-example annotations injected from a sidecar JSON-lines file
// (keyed by example id); any present field overrides the built-in annotator.
struct AnnotationOverride {
  std::optional<std::vector<EntityMention>> entities;
  std::optional<std::vector<Phrase>> phrases;
  std::optional<SentimentScore> sentiment;
  std::optional<QuestionType> question_type;
};

std::map<std::string, AnnotationOverride> load_sidecar(const std::string& path);

}  // namespace promptqa
