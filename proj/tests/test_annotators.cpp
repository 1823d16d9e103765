#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <fstream>

#include "promptqa/annotators.hpp"

using namespace promptqa;

namespace {

const std::string kData = PQA_DATA_DIR;
const std::string kFixtures = PQA_FIXTURE_DIR;

const SentimentLexicon& lexicon() {
  static SentimentLexicon lex =
      load_sentiment_lexicon(kData + "/sentiment_lexicon.tsv");
  return lex;
}

const Gazetteers& gazetteers() {
  static Gazetteers gaz = load_gazetteers(kData);
  return gaz;
}

const PhraseLexicons& phrase_lex() {
  static PhraseLexicons lex = load_phrase_lexicons(kData);
  return lex;
}

}  // namespace

TEST_CASE("question type classifier covers all anchored patterns") {
  CHECK(classify_question_type("Why margins improved?") == QuestionType::why);
  CHECK(classify_question_type("why is a strong brand useful?") ==
        QuestionType::why_useful);
  CHECK(classify_question_type("Why Terex has expanded its MP product line is useful?") ==
        QuestionType::why_useful);
  CHECK(classify_question_type("What will happen if demand falls?") ==
        QuestionType::what_if);
  CHECK(classify_question_type("What would happen if demand falls?") ==
        QuestionType::what_if);
  CHECK(classify_question_type("What happens if demand falls?") ==
        QuestionType::what_if);
  CHECK(classify_question_type("What if demand falls?") == QuestionType::what_if);
  CHECK(classify_question_type("What will be prevented if hedging works?") ==
        QuestionType::what_prevented);
  CHECK(classify_question_type("What is the capital of France?") ==
        QuestionType::other);
  CHECK(classify_question_type("How much did it cost?") == QuestionType::other);
  // "useful" only promotes why-questions
  CHECK(classify_question_type("What is useful here?") == QuestionType::other);
  CHECK_THROWS_AS(classify_question_type(""), std::invalid_argument);
}

TEST_CASE("question type names round-trip to display forms") {
  CHECK(to_string(QuestionType::what_if) == "what_if");
  CHECK(display_name(QuestionType::why) == "Why");
  CHECK(display_name(QuestionType::why_useful) == "Why useful");
  CHECK(display_name(QuestionType::what_if) == "What will happen if");
  CHECK(display_name(QuestionType::what_prevented) == "What will be prevented");
}

TEST_CASE("sentiment score is the mean of lexicon hits") {
  const auto& lex = lexicon();
  double good = lex.at("good");
  double bad = lex.at("bad");
  SentimentScore s = score_sentiment("good good bad day", lex);
  CHECK(s.word_scores.size() == 3);
  CHECK(s.value == doctest::Approx((2 * good + bad) / 3.0).epsilon(1e-12));
  CHECK(s.polarity == Polarity::positive);
}

TEST_CASE("negators within two tokens flip the sign") {
  const auto& lex = lexicon();
  SentimentScore plain = score_sentiment("growth was good", lex);
  SentimentScore negated = score_sentiment("growth was not good", lex);
  CHECK(plain.polarity == Polarity::positive);
  CHECK(negated.polarity == Polarity::negative);
  CHECK(negated.word_scores.back().second ==
        doctest::Approx(-plain.word_scores.back().second));

  // negator two tokens back still flips; three tokens back does not
  CHECK(score_sentiment("not very good", lex).polarity == Polarity::negative);
  CHECK(score_sentiment("not in the very good", lex).polarity ==
        Polarity::positive);
  // "n't" contractions negate
  CHECK(score_sentiment("isn't good", lex).polarity == Polarity::negative);
}

TEST_CASE("neutral band and edge cases") {
  const auto& lex = lexicon();
  SentimentScore none = score_sentiment("quarterly report text", lex);
  CHECK(none.polarity == Polarity::neutral);
  CHECK(none.value == 0.0);
  CHECK(none.word_scores.empty());

  // a huge tau absorbs everything into neutral
  CHECK(score_sentiment("good", lex, 1.0).polarity == Polarity::neutral);
  CHECK(score_sentiment("", lex).polarity == Polarity::neutral);
  CHECK_THROWS_AS(score_sentiment("text", SentimentLexicon{}),
                  std::invalid_argument);
}

TEST_CASE("sentiment values stay clamped to [-1, 1]") {
  SentimentLexicon big{{"huge", 5.0}, {"awful", -5.0}};
  CHECK(score_sentiment("huge huge", big).value == 1.0);
  CHECK(score_sentiment("awful", big).value == -1.0);
}

TEST_CASE("entity tagging: gazetteers, dates, capitalized runs") {
  auto ents = tag_entities("Why did Microsoft expand in Ireland in 1999?",
                           gazetteers());
  REQUIRE(ents.size() == 3);
  CHECK(ents[0].text == "Microsoft");
  CHECK(ents[0].kind == EntityKind::organization);
  CHECK(ents[1].text == "Ireland");
  CHECK(ents[1].kind == EntityKind::country);
  CHECK(ents[2].text == "1999");
  CHECK(ents[2].kind == EntityKind::date);
}

TEST_CASE("temporal words and all-caps tokens are tagged") {
  auto ents = tag_entities("Why sales and EPS compound annual growth rates increase?",
                           gazetteers());
  REQUIRE(ents.size() == 2);
  CHECK(ents[0].text == "EPS");
  CHECK(ents[0].kind == EntityKind::other);
  CHECK(ents[1].text == "annual");
  CHECK(ents[1].kind == EntityKind::date);
}

TEST_CASE("capitalized runs outside gazetteers become a single other mention") {
  auto ents = tag_entities("Why did Acme Rocket Corp fail?", gazetteers());
  REQUIRE(ents.size() == 1);
  CHECK(ents[0].kind == EntityKind::other);
  CHECK(ents[0].text == "Acme Rocket Corp");
}

TEST_CASE("mentions are non-overlapping, ordered, with exact offsets") {
  std::string q = "When will Chipotle open in Paris France?";
  auto ents = tag_entities(q, gazetteers());
  REQUIRE(!ents.empty());
  for (std::size_t i = 0; i < ents.size(); ++i) {
    CHECK(q.substr(ents[i].begin, ents[i].end - ents[i].begin) == ents[i].text);
    if (i) CHECK(ents[i].begin >= ents[i - 1].end);
  }
}

TEST_CASE("sentence-initial function words never open a mention") {
  auto ents = tag_entities("Why margins improved?", gazetteers());
  for (const auto& m : ents) CHECK(m.text != "Why");
}

TEST_CASE("ordinal day tokens match the date regexes") {
  auto ents = tag_entities("the deadline of the 3rd is close", gazetteers());
  REQUIRE(ents.size() == 1);
  CHECK(ents[0].text == "3rd");
  CHECK(ents[0].kind == EntityKind::date);
}

TEST_CASE("phrase extraction finds adjective-noun runs of two or more tokens") {
  auto phrases = extract_phrases(
      "What will happen if the restaurant industry adopts remote access?",
      phrase_lex());
  REQUIRE(phrases.size() == 2);
  CHECK(phrases[0].text == "restaurant industry");
  CHECK(phrases[0].head_noun == "industry");
  CHECK(phrases[1].text == "remote access");
  CHECK(phrases[1].modifiers == std::vector<std::string>{"remote"});
}

TEST_CASE("bare single nouns are not phrases") {
  auto phrases = extract_phrases("Why did growth stop?", phrase_lex());
  CHECK(phrases.empty());
}

TEST_CASE("plural backoff maps inflected nouns to lexicon entries") {
  auto phrases =
      extract_phrases("Why do hybrid environments matter?", phrase_lex());
  REQUIRE(phrases.size() == 1);
  CHECK(phrases[0].text == "hybrid environments");

  auto ies = extract_phrases("Why are economic industries cyclical?", phrase_lex());
  REQUIRE(ies.size() == 1);
  CHECK(ies[0].text == "economic industries");
}

TEST_CASE("phrase offsets index into the original question") {
  std::string q = "Why is sustained growth with remote access rare?";
  auto phrases = extract_phrases(q, phrase_lex());
  for (const auto& ph : phrases)
    CHECK(q.substr(ph.begin, ph.end - ph.begin) == ph.text);
}

TEST_CASE("sidecar overrides parse every annotation kind") {
  std::string path = kFixtures + "/tmp_sidecar.jsonl";
  {
    std::ofstream out(path);
    out << R"({"_meta": {}})" << "\n";
    out << R"({"id": "x1", "question_type": "what_if",)"
        << R"( "sentiment": {"polarity": "negative", "value": -0.4},)"
        << R"( "entities": [{"text": "Acme", "kind": "organization", "begin": 0, "end": 4}],)"
        << R"( "phrases": [{"text": "rapid growth", "head_noun": "growth", "modifiers": ["rapid"]}]})"
        << "\n";
  }
  auto sidecar = load_sidecar(path);
  REQUIRE(sidecar.count("x1") == 1);
  const AnnotationOverride& ov = sidecar.at("x1");
  REQUIRE(ov.question_type.has_value());
  CHECK(*ov.question_type == QuestionType::what_if);
  REQUIRE(ov.sentiment.has_value());
  CHECK(ov.sentiment->polarity == Polarity::negative);
  CHECK(ov.sentiment->value == -0.4);
  REQUIRE(ov.entities.has_value());
  CHECK(ov.entities->at(0).kind == EntityKind::organization);
  REQUIRE(ov.phrases.has_value());
  CHECK(ov.phrases->at(0).head_noun == "growth");
  std::remove(path.c_str());
}

TEST_CASE("sidecar records without an id are rejected") {
  std::string path = kFixtures + "/tmp_sidecar_bad.jsonl";
  {
    std::ofstream out(path);
    out << R"({"question_type": "why"})" << "\n";
  }
  CHECK_THROWS_AS(load_sidecar(path), std::runtime_error);
  std::remove(path.c_str());
}
