#pragma once

#include <map>
#include <string>
#include <vector>

#include "promptqa/annotators.hpp"
#include "promptqa/corpus_stats.hpp"
#include "promptqa/dataset.hpp"

namespace promptqa {

enum class TemplateFamily { question_type, sentiment, entity, phrase };

std::string to_string(TemplateFamily f);
TemplateFamily parse_family(const std::string& name);

enum class TemplateVariant { cloze, prefix };

// Slot syntax inside `pattern`: {name} inserts the value(s) double-quoted
// ("a", "b" for lists); {name|raw} inserts verbatim, joined with ", ".
struct Template {
  std::string name;
  TemplateFamily family = TemplateFamily::phrase;
  TemplateVariant variant = TemplateVariant::cloze;
  std::string pattern;
  std::size_t max_tokens = 64;
};

struct TemplateSet {
  std::map<std::string, Template> by_name;
  const Template& get(const std::string& name) const;
};

TemplateSet load_templates(const std::string& path);

struct RuleViolation {
  enum class Rule { domain_leak, malformed_sentence, too_long, missing_slot };
  Rule rule;
  std::string detail;
};

std::string to_string(RuleViolation::Rule r);

struct TemplateError : std::runtime_error {
  RuleViolation violation;
  TemplateError(RuleViolation v)
      : std::runtime_error(to_string(v.rule) + ": " + v.detail),
        violation(std::move(v)) {}
};

using SlotMap = std::map<std::string, std::vector<std::string>>;

// Exact substitution, no other rewriting. Throws TemplateError (missing_slot)
// when the pattern references a slot absent from the map.
std::string render_template(const Template& t, const SlotMap& slots);

// Checks the three shipped rules: no blocklisted domain term in the pattern,
// proper-sentence shape (starts uppercase/quote/slot, ends with sentence
// punctuation or a slot), and a rendered-length upper bound of max_tokens
// assuming at most `max_slot_tokens` tokens per slot value.
std::vector<RuleViolation> validate_template(const Template& t,
                                             const WordSet& blocklist,
                                             std::size_t max_slot_tokens = 8);

// Immutable resources shared by all prompt generators.
struct PromptResources {
  TemplateSet templates;
  const PmiTable* pmi = nullptr;  // required for the question_type family
  SentimentLexicon sentiment_lexicon;
  Gazetteers gazetteers;
  PhraseLexicons phrase_lexicons;
  std::map<std::string, AnnotationOverride> sidecar;

  std::size_t pmi_top_k = 50;
  std::size_t qtype_word_cap = 3;
  std::size_t sentiment_word_count = 1;
  std::size_t phrase_extra_words = 2;
  double sentiment_tau = 0.05;
};

struct PromptedExample {
  QaExample base;
  std::string prompt;
  TemplateFamily family = TemplateFamily::phrase;
  std::vector<std::string> prompt_words;
  bool fallback_used = false;  // phrase fallback fired for the requested family
};

PromptedExample gen_question_type_prompt(const QaExample& ex,
                                         const PromptResources& res);
PromptedExample gen_sentiment_prompt(const QaExample& ex,
                                     const PromptResources& res);
PromptedExample gen_entity_prompt(const QaExample& ex,
                                  const PromptResources& res);
PromptedExample gen_phrase_prompt(const QaExample& ex,
                                  const PromptResources& res);

// Exactly one prompt per example per requested family; the fallback chain
// terminates at the no-phrase wording, so this is total.
PromptedExample generate_prompt(const QaExample& ex, TemplateFamily family,
                                const PromptResources& res);

struct FlattenedRecord {
  QaExample base;
  std::string flattened_context;  // context + separator + (possibly cut) prompt
  std::string prompt;             // prompt actually appended
  TemplateFamily family = TemplateFamily::phrase;
  bool truncated = false;
};

// Appends the prompt after the context under a whitespace-token budget. The
// prompt is cut from its tail when over budget; the context and the answer
// offsets are never touched.
FlattenedRecord apply_prompt(const PromptedExample& pe,
                             std::size_t max_context_tokens,
                             bool include_marker = false);

}  // namespace promptqa
