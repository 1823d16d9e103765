#include "promptqa/prompts.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "json.hpp"

using nlohmann::json;

namespace promptqa {

std::string to_string(TemplateFamily f) {
  switch (f) {
    case TemplateFamily::question_type: return "question_type";
    case TemplateFamily::sentiment: return "sentiment";
    case TemplateFamily::entity: return "entity";
    case TemplateFamily::phrase: return "phrase";
  }
  return "phrase";
}

TemplateFamily parse_family(const std::string& name) {
  if (name == "question_type") return TemplateFamily::question_type;
  if (name == "sentiment") return TemplateFamily::sentiment;
  if (name == "entity") return TemplateFamily::entity;
  if (name == "phrase") return TemplateFamily::phrase;
  throw std::invalid_argument("unknown template family: " + name);
}

std::string to_string(RuleViolation::Rule r) {
  switch (r) {
    case RuleViolation::Rule::domain_leak: return "domain_leak";
    case RuleViolation::Rule::malformed_sentence: return "malformed_sentence";
    case RuleViolation::Rule::too_long: return "too_long";
    case RuleViolation::Rule::missing_slot: return "missing_slot";
  }
  return "missing_slot";
}

const Template& TemplateSet::get(const std::string& name) const {
  auto it = by_name.find(name);
  if (it == by_name.end())
    throw std::invalid_argument("no template named \"" + name + "\"");
  return it->second;
}

TemplateSet load_templates(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open template file: " + path);
  TemplateSet set;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json rec = json::parse(line);
    if (rec.contains("_meta")) continue;
    Template t;
    t.name = rec.value("name", "template" + std::to_string(lineno));
    t.family = parse_family(rec.value("family", "phrase"));
    t.variant = rec.value("variant", "cloze") == "prefix" ? TemplateVariant::prefix
                                                          : TemplateVariant::cloze;
    t.pattern = rec.value("pattern", "");
    t.max_tokens = rec.value("max_tokens", 64u);
    set.by_name[t.name] = std::move(t);
  }
  return set;
}

namespace {

struct SlotRef {
  std::string name;
  bool raw = false;
  std::size_t begin = 0;  // offset of '{'
  std::size_t end = 0;    // offset past '}'
};

std::vector<SlotRef> find_slots(const std::string& pattern) {
  std::vector<SlotRef> out;
  std::size_t i = 0;
  while ((i = pattern.find('{', i)) != std::string::npos) {
    std::size_t close = pattern.find('}', i);
    if (close == std::string::npos) break;
    SlotRef ref;
    ref.begin = i;
    ref.end = close + 1;
    std::string body = pattern.substr(i + 1, close - i - 1);
    std::size_t bar = body.find('|');
    if (bar != std::string::npos) {
      ref.raw = body.substr(bar + 1) == "raw";
      ref.name = body.substr(0, bar);
    } else {
      ref.name = body;
    }
    out.push_back(std::move(ref));
    i = close + 1;
  }
  return out;
}

std::string join_values(const std::vector<std::string>& values, bool raw) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ", ";
    if (raw)
      out += values[i];
    else
      out += "\"" + values[i] + "\"";
  }
  return out;
}

}  // namespace

std::string render_template(const Template& t, const SlotMap& slots) {
  std::string out;
  std::size_t pos = 0;
  for (const SlotRef& ref : find_slots(t.pattern)) {
    auto it = slots.find(ref.name);
    if (it == slots.end())
      throw TemplateError(RuleViolation{RuleViolation::Rule::missing_slot,
                                        "template \"" + t.name +
                                            "\" slot \"" + ref.name +
                                            "\" has no value"});
    out += t.pattern.substr(pos, ref.begin - pos);
    out += join_values(it->second, ref.raw);
    pos = ref.end;
  }
  out += t.pattern.substr(pos);
  return out;
}

std::vector<RuleViolation> validate_template(const Template& t,
                                             const WordSet& blocklist,
                                             std::size_t max_slot_tokens) {
  std::vector<RuleViolation> out;

  for (const auto& tok : tokenize_lower(t.pattern)) {
    if (blocklist.count(tok)) {
      out.push_back({RuleViolation::Rule::domain_leak,
                     "pattern contains blocklisted term \"" + tok + "\""});
    }
  }

  const std::vector<SlotRef> slots = find_slots(t.pattern);
  if (slots.empty()) {
    out.push_back({RuleViolation::Rule::missing_slot,
                   "pattern has no slots"});
  }
  if (t.pattern.empty()) {
    out.push_back({RuleViolation::Rule::malformed_sentence, "empty pattern"});
  } else {
    char first = t.pattern.front();
    bool ok_start = starts_upper(std::string_view(&first, 1)) || first == '"' ||
                    first == '{';
    char last = t.pattern.back();
    bool ok_end = last == '.' || last == '!' || last == '?' || last == '}' ||
                  last == '"';
    if (!ok_start || !ok_end) {
      out.push_back({RuleViolation::Rule::malformed_sentence,
                     "pattern must start uppercase and end with sentence "
                     "punctuation"});
    }
    for (char c : t.pattern) {
      if (c == '{' || c == '}') continue;
      if (static_cast<unsigned char>(c) < 0x20) {
        out.push_back({RuleViolation::Rule::malformed_sentence,
                       "pattern contains control characters"});
        break;
      }
    }
  }

  // Rendered upper bound: fixed tokens plus max_slot_tokens per slot.
  std::size_t upper = count_tokens(t.pattern) + slots.size() * max_slot_tokens;
  if (upper > t.max_tokens) {
    out.push_back({RuleViolation::Rule::too_long,
                   "rendered upper bound " + std::to_string(upper) +
                       " tokens exceeds max_tokens " +
                       std::to_string(t.max_tokens)});
  }
  return out;
}

namespace {

std::unordered_set<std::string> context_token_set(const QaExample& ex) {
  std::unordered_set<std::string> out;
  for (const auto& tok : tokenize_lower(ex.context)) out.insert(tok);
  return out;
}

QuestionType question_type_of(const QaExample& ex, const PromptResources& res) {
  auto it = res.sidecar.find(ex.id);
  if (it != res.sidecar.end() && it->second.question_type)
    return *it->second.question_type;
  return classify_question_type(ex.question);
}

std::vector<EntityMention> entities_of(const QaExample& ex,
                                       const PromptResources& res) {
  auto it = res.sidecar.find(ex.id);
  if (it != res.sidecar.end() && it->second.entities) return *it->second.entities;
  return tag_entities(ex.question, res.gazetteers);
}

std::vector<Phrase> phrases_of(const QaExample& ex, const PromptResources& res) {
  auto it = res.sidecar.find(ex.id);
  if (it != res.sidecar.end() && it->second.phrases) return *it->second.phrases;
  return extract_phrases(ex.question, res.phrase_lexicons);
}

PromptedExample finish(const QaExample& ex, TemplateFamily family,
                       std::string prompt, std::vector<std::string> words,
                       bool fallback) {
  PromptedExample pe;
  pe.base = ex;
  pe.family = family;
  pe.prompt = std::move(prompt);
  pe.prompt_words = std::move(words);
  pe.fallback_used = fallback;
  return pe;
}

}  // namespace

PromptedExample gen_phrase_prompt(const QaExample& ex,
                                  const PromptResources& res) {
  const std::vector<Phrase> phrases = phrases_of(ex, res);
  const std::unordered_set<std::string> ctx = context_token_set(ex);

  std::unordered_set<std::string> phrase_tokens;
  const Phrase* chosen = phrases.empty() ? nullptr : &phrases.front();
  if (chosen)
    for (const auto& t : tokenize_lower(chosen->text)) phrase_tokens.insert(t);

  // Extra attention words: non-stopword question tokens that also occur in
  // the context, in question order, excluding tokens of the chosen phrase.
  std::vector<std::string> words;
  std::unordered_set<std::string> seen;
  for (const auto& tok : tokenize_lower(ex.question)) {
    if (words.size() >= res.phrase_extra_words) break;
    if (res.phrase_lexicons.stopwords.count(tok) || phrase_tokens.count(tok) ||
        seen.count(tok) || !ctx.count(tok))
      continue;
    seen.insert(tok);
    words.push_back(tok);
  }

  std::string prompt;
  std::vector<std::string> prompt_words;
  if (chosen) {
    prompt_words.push_back(chosen->text);
    if (!words.empty()) {
      prompt = render_template(res.templates.get("phrase"),
                               {{"phrase", {chosen->text}}, {"words", words}});
      prompt_words.insert(prompt_words.end(), words.begin(), words.end());
    } else {
      prompt = render_template(res.templates.get("phrase_only"),
                               {{"phrase", {chosen->text}}});
    }
  } else if (!words.empty()) {
    prompt = render_template(res.templates.get("phrase_none"), {{"words", words}});
    prompt_words = words;
  } else {
    // Degenerate input: no phrase, no shared words. Empty quoted slots are
    // forbidden, so the words clause is dropped entirely. This terminal
    // wording is fixed rather than templated (templates must carry a slot).
    prompt = "There is no important phrase in this query.";
  }
  return finish(ex, TemplateFamily::phrase, std::move(prompt),
                std::move(prompt_words), false);
}

PromptedExample gen_question_type_prompt(const QaExample& ex,
                                         const PromptResources& res) {
  const QuestionType type = question_type_of(ex, res);
  if (type == QuestionType::other || res.pmi == nullptr) {
    PromptedExample pe = gen_phrase_prompt(ex, res);
    pe.fallback_used = true;
    return pe;
  }

  std::vector<std::string> ranked;
  try {
    ranked = top_k_words(*res.pmi, to_string(type), res.pmi_top_k);
  } catch (const std::invalid_argument&) {
    // type absent from the table: nothing to intersect
  }
  const std::unordered_set<std::string> ctx = context_token_set(ex);
  std::vector<std::string> words;
  for (const auto& w : ranked) {
    if (words.size() >= res.qtype_word_cap) break;
    if (ctx.count(w)) words.push_back(w);
  }
  if (words.empty()) {
    PromptedExample pe = gen_phrase_prompt(ex, res);
    pe.fallback_used = true;
    return pe;
  }
  std::string prompt =
      render_template(res.templates.get("question_type"),
                      {{"qtype", {display_name(type)}}, {"words", words}});
  return finish(ex, TemplateFamily::question_type, std::move(prompt),
                std::move(words), false);
}

PromptedExample gen_sentiment_prompt(const QaExample& ex,
                                     const PromptResources& res) {
  SentimentScore qscore;
  auto it = res.sidecar.find(ex.id);
  if (it != res.sidecar.end() && it->second.sentiment) {
    qscore = *it->second.sentiment;
  } else {
    qscore = score_sentiment(ex.question, res.sentiment_lexicon, res.sentiment_tau);
  }
  const SentimentScore cscore =
      score_sentiment(ex.context, res.sentiment_lexicon, res.sentiment_tau);

  // Candidate context words matching the question's polarity direction,
  // strongest first; a neutral question falls back to absolute valence.
  std::vector<std::pair<std::string, double>> cands = cscore.word_scores;
  if (qscore.polarity == Polarity::positive) {
    std::erase_if(cands, [](const auto& p) { return p.second <= 0; });
    std::stable_sort(cands.begin(), cands.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
  } else if (qscore.polarity == Polarity::negative) {
    std::erase_if(cands, [](const auto& p) { return p.second >= 0; });
    std::stable_sort(cands.begin(), cands.end(),
                     [](const auto& a, const auto& b) { return a.second < b.second; });
  } else {
    std::stable_sort(cands.begin(), cands.end(), [](const auto& a, const auto& b) {
      return std::abs(a.second) > std::abs(b.second);
    });
  }
  std::vector<std::string> words;
  std::unordered_set<std::string> seen;
  for (const auto& [w, v] : cands) {
    if (words.size() >= res.sentiment_word_count) break;
    if (seen.insert(w).second) words.push_back(w);
  }

  const std::string polarity = to_string(qscore.polarity);
  std::string prompt;
  if (words.empty()) {
    prompt = render_template(res.templates.get("sentiment_no_word"),
                             {{"polarity", {polarity}}});
  } else {
    prompt = render_template(res.templates.get("sentiment"),
                             {{"polarity", {polarity}}, {"words", words}});
  }
  return finish(ex, TemplateFamily::sentiment, std::move(prompt),
                std::move(words), false);
}

PromptedExample gen_entity_prompt(const QaExample& ex,
                                  const PromptResources& res) {
  const std::vector<EntityMention> entities = entities_of(ex, res);
  if (entities.empty()) {
    PromptedExample pe = gen_phrase_prompt(ex, res);
    pe.fallback_used = true;
    return pe;
  }
  std::string prompt;
  std::vector<std::string> words;
  for (const EntityMention& m : entities) {
    const std::string tmpl_name = "entity_" + to_string(m.kind);
    if (!prompt.empty()) prompt += " ";
    prompt += render_template(res.templates.get(tmpl_name), {{"entity", {m.text}}});
    words.push_back(m.text);
  }
  return finish(ex, TemplateFamily::entity, std::move(prompt), std::move(words),
                false);
}

PromptedExample generate_prompt(const QaExample& ex, TemplateFamily family,
                                const PromptResources& res) {
  switch (family) {
    case TemplateFamily::question_type: return gen_question_type_prompt(ex, res);
    case TemplateFamily::sentiment: return gen_sentiment_prompt(ex, res);
    case TemplateFamily::entity: return gen_entity_prompt(ex, res);
    case TemplateFamily::phrase: return gen_phrase_prompt(ex, res);
  }
  return gen_phrase_prompt(ex, res);
}

FlattenedRecord apply_prompt(const PromptedExample& pe,
                             std::size_t max_context_tokens,
                             bool include_marker) {
  FlattenedRecord rec;
  rec.base = pe.base;
  rec.family = pe.family;

  std::string prompt = include_marker ? "Prompt: " + pe.prompt : pe.prompt;
  const std::size_t context_tokens = count_tokens(pe.base.context);
  const std::size_t budget =
      max_context_tokens > context_tokens ? max_context_tokens - context_tokens : 0;

  std::vector<std::string> ptoks;
  {
    std::istringstream ss(prompt);
    std::string tok;
    while (ss >> tok) ptoks.push_back(tok);
  }
  if (ptoks.size() > budget) {
    rec.truncated = true;
    ptoks.resize(budget);
  }
  std::string kept;
  for (std::size_t i = 0; i < ptoks.size(); ++i) {
    if (i) kept += " ";
    kept += ptoks[i];
  }
  rec.prompt = kept;
  rec.flattened_context = pe.base.context;
  if (!kept.empty()) rec.flattened_context += " " + kept;
  return rec;
}

}  // namespace promptqa
