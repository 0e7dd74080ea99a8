#include "hlveval/io.hpp"

#include <gtest/gtest.h>

#include <string>

#include "test_oracles.hpp"

namespace hlveval {
namespace {

using testing::make_table;

QuestionSpec binary_question(const std::string& id) {
  return QuestionSpec{id, "", yes_no_domain(), "yes"};
}

// ---------------------------------------------------------------------------
// Annotations

TEST(ParseAnnotations, GroupsRowsByQuestion) {
  const std::string text =
      "item_id,question_id,annotator_id,label\n"
      "p1,qa,a1,yes\n"
      "p1,qa,a2,no\n"
      "p2,qa,a1,yes\n"
      "p1,qb,a1,no\n";
  AnnotationIngest ingest = parse_annotations(text);
  EXPECT_TRUE(ingest.diagnostics.empty());
  ASSERT_EQ(ingest.tables.size(), 2u);

  const AnnotationTable& qa = ingest.tables[0];
  EXPECT_EQ(qa.question(), "qa");
  EXPECT_EQ(qa.items(), (std::vector<std::string>{"p1", "p2"}));
  EXPECT_EQ(qa.annotators(), (std::vector<std::string>{"a1", "a2"}));
  EXPECT_EQ(qa.cell(0, 0), Cell{"yes"});
  EXPECT_EQ(qa.cell(0, 1), Cell{"no"});
  EXPECT_EQ(qa.cell(1, 0), Cell{"yes"});
  EXPECT_FALSE(qa.cell(1, 1).has_value());  // never annotated
}

TEST(ParseAnnotations, FullGridShape) {
  std::string text{kAnnotationHeader};
  text += "\n";
  for (int item = 1; item <= 300; ++item)
    for (int q = 1; q <= 5; ++q)
      for (int ann = 1; ann <= 5; ++ann)
        text += "p" + std::to_string(item) + ",q" + std::to_string(q) + ",a" +
                std::to_string(ann) + ",yes\n";

  AnnotationIngest ingest = parse_annotations(text);
  ASSERT_EQ(ingest.tables.size(), 5u);
  for (const auto& table : ingest.tables) {
    EXPECT_EQ(table.items().size(), 300u);
    EXPECT_EQ(table.annotators().size(), 5u);
  }
}

TEST(ParseAnnotations, WhitespaceIsTrimmedCaseIsKept) {
  const std::string text =
      "item_id,question_id,annotator_id,label\n"
      " p1 , qa , a1 ,  Yes \n";
  AnnotationIngest ingest = parse_annotations(text);
  EXPECT_EQ(ingest.tables[0].cell(0, 0), Cell{"Yes"});
  EXPECT_EQ(ingest.tables[0].items()[0], "p1");
}

TEST(ParseAnnotations, EmptyLabelIsExplicitMissing) {
  const std::string text =
      "item_id,question_id,annotator_id,label\n"
      "p1,qa,a1,\n"
      "p1,qa,a2,yes\n";
  AnnotationIngest ingest = parse_annotations(text);
  EXPECT_FALSE(ingest.tables[0].cell(0, 0).has_value());
  EXPECT_EQ(ingest.tables[0].cell(0, 1), Cell{"yes"});
}

TEST(ParseAnnotations, DuplicateRowWithSameLabelIsDeduplicated) {
  const std::string text =
      "item_id,question_id,annotator_id,label\n"
      "p1,qa,a1,yes\n"
      "p1,qa,a1,yes\n";
  AnnotationIngest ingest = parse_annotations(text);
  ASSERT_EQ(ingest.diagnostics.size(), 1u);
  EXPECT_EQ(ingest.diagnostics[0].line, 3u);
  EXPECT_EQ(ingest.tables[0].cell(0, 0), Cell{"yes"});
}

TEST(ParseAnnotations, ConflictingDuplicateThrows) {
  const std::string text =
      "item_id,question_id,annotator_id,label\n"
      "p1,qa,a1,yes\n"
      "p1,qa,a1,no\n";
  EXPECT_THROW(parse_annotations(text), DuplicateCell);
}

TEST(ParseAnnotations, EmptyFileThrows) {
  EXPECT_THROW(parse_annotations(""), ParseError);
  EXPECT_THROW(parse_annotations("item_id,question_id,annotator_id,label\n"), ParseError);
}

TEST(ParseAnnotations, StructuralProblemsCarryLineNumbers) {
  try {
    parse_annotations("item_id,question_id,annotator_id\np1,qa,a1\n");
    FAIL() << "bad header accepted";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line, 1u);
  }

  try {
    parse_annotations("item_id,question_id,annotator_id,label\np1,qa\n");
    FAIL() << "short row accepted";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line, 2u);
  }
}

// ---------------------------------------------------------------------------
// Predictions

std::vector<QuestionSpec> five_questions() {
  std::vector<QuestionSpec> questions;
  for (int i = 1; i <= 5; ++i) questions.push_back(binary_question("q" + std::to_string(i)));
  return questions;
}

TEST(ParsePredictions, BooleanAnswersPopulateEveryQuestion) {
  std::vector<QuestionSpec> questions = five_questions();
  const std::string text =
      R"({"item_id":"p1","run_id":"r1","q1":true,"q2":false,"q3":true,"q4":false,"q5":true})"
      "\n";
  PredictionIngest ingest = parse_predictions(text, questions);
  EXPECT_TRUE(ingest.diagnostics.empty());
  ASSERT_EQ(ingest.runsets.size(), 5u);
  EXPECT_EQ(ingest.runsets[0].cell(0, 0), Cell{"yes"});
  EXPECT_EQ(ingest.runsets[1].cell(0, 0), Cell{"no"});
  EXPECT_EQ(ingest.runsets[4].cell(0, 0), Cell{"yes"});
}

TEST(ParsePredictions, MissingFieldInvalidatesTheWholeRecord) {
  std::vector<QuestionSpec> questions = five_questions();
  const std::string text =
      R"({"item_id":"p1","run_id":"r1","q1":true,"q2":false,"q3":true,"q4":false})"
      "\n"
      R"({"item_id":"p1","run_id":"r2","q1":true,"q2":false,"q3":true,"q4":false,"q5":true})"
      "\n";
  PredictionIngest ingest = parse_predictions(text, questions);
  ASSERT_EQ(ingest.diagnostics.size(), 1u);
  for (const auto& runset : ingest.runsets) {
    EXPECT_FALSE(runset.cell(0, 0).has_value()) << runset.question();  // r1 invalid
    EXPECT_TRUE(runset.cell(0, 1).has_value());                       // r2 fine
  }
}

TEST(ParsePredictions, StringAnswersMustNameACategory) {
  std::vector<QuestionSpec> questions = {binary_question("q1")};
  PredictionIngest good = parse_predictions(
      R"({"item_id":"p1","run_id":"r1","q1":" yes "})" "\n", questions);
  EXPECT_TRUE(good.diagnostics.empty());
  EXPECT_EQ(good.runsets[0].cell(0, 0), Cell{"yes"});

  PredictionIngest bad = parse_predictions(
      R"({"item_id":"p1","run_id":"r1","q1":"maybe"})" "\n", questions);
  EXPECT_EQ(bad.diagnostics.size(), 1u);
  EXPECT_FALSE(bad.runsets[0].cell(0, 0).has_value());
}

TEST(ParsePredictions, MalformedLineIsSkippedOthersSurvive) {
  std::vector<QuestionSpec> questions = {binary_question("q1")};
  const std::string text =
      "this is not json\n"
      R"({"item_id":"p1","run_id":"r1","q1":true})" "\n";
  PredictionIngest ingest = parse_predictions(text, questions);
  ASSERT_EQ(ingest.diagnostics.size(), 1u);
  EXPECT_EQ(ingest.diagnostics[0].line, 1u);
  EXPECT_EQ(ingest.runsets[0].cell(0, 0), Cell{"yes"});
}

TEST(ParsePredictions, RunListIsSharedAcrossItems) {
  std::vector<QuestionSpec> questions = {binary_question("q1")};
  std::string text;
  for (int item = 1; item <= 10; ++item)
    for (int run = 1; run <= 5; ++run)
      text += R"({"item_id":"p)" + std::to_string(item) + R"(","run_id":"r)" +
              std::to_string(run) + R"(","q1":true})" + "\n";
  PredictionIngest ingest = parse_predictions(text, questions);
  EXPECT_EQ(ingest.runsets[0].runs().size(), 5u);
  EXPECT_EQ(ingest.runsets[0].items().size(), 10u);
}

TEST(ParsePredictions, ConflictingDuplicateGoesInvalid) {
  std::vector<QuestionSpec> questions = {binary_question("q1")};
  const std::string text =
      R"({"item_id":"p1","run_id":"r1","q1":true})" "\n"
      R"({"item_id":"p1","run_id":"r1","q1":false})" "\n";
  PredictionIngest ingest = parse_predictions(text, questions);
  EXPECT_EQ(ingest.diagnostics.size(), 1u);
  EXPECT_FALSE(ingest.runsets[0].cell(0, 0).has_value());
}

TEST(ParsePredictions, IdenticalDuplicateIsDeduplicated) {
  std::vector<QuestionSpec> questions = {binary_question("q1")};
  const std::string text =
      R"({"item_id":"p1","run_id":"r1","q1":true})" "\n"
      R"({"item_id":"p1","run_id":"r1","q1":true})" "\n";
  PredictionIngest ingest = parse_predictions(text, questions);
  EXPECT_EQ(ingest.diagnostics.size(), 1u);
  EXPECT_EQ(ingest.runsets[0].cell(0, 0), Cell{"yes"});
}

TEST(ParsePredictions, EmptyFileThrows) {
  std::vector<QuestionSpec> questions = {binary_question("q1")};
  EXPECT_THROW(parse_predictions("", questions), ParseError);
  EXPECT_THROW(parse_predictions("\n\n", questions), ParseError);
}

TEST(IngestFiles, MissingFileThrows) {
  EXPECT_THROW(ingest_annotations("/nonexistent/annotations.csv"), ParseError);
  std::vector<QuestionSpec> questions = {binary_question("q1")};
  EXPECT_THROW(ingest_predictions("/nonexistent/preds.jsonl", questions), ParseError);
}

// ---------------------------------------------------------------------------
// Config

TEST(Config, MinimalConfigGetsDefaults) {
  Config config = parse_config(R"({"questions":[{"id":"qa"}]})");
  EXPECT_DOUBLE_EQ(config.threshold, 0.667);
  EXPECT_EQ(config.expected_runs, 5);
  EXPECT_EQ(config.precision, 2);
  EXPECT_EQ(config.jsd_log_base, 2);
  ASSERT_EQ(config.questions.size(), 1u);
  EXPECT_EQ(config.questions[0].domain, yes_no_domain());
  EXPECT_EQ(config.questions[0].positive_category, "yes");
}

TEST(Config, RejectsBrokenConfigs) {
  EXPECT_THROW(parse_config("not json"), ParseError);
  EXPECT_THROW(parse_config("{}"), ParseError);
  EXPECT_THROW(parse_config(R"({"questions":[]})"), ParseError);
  EXPECT_THROW(parse_config(R"({"questions":[{"id":"a"},{"id":"a"}]})"), ParseError);
  EXPECT_THROW(parse_config(R"({"questions":[{"id":"item_id"}]})"), ParseError);
  EXPECT_THROW(parse_config(R"({"questions":[{"id":"q"}],"jsd_log_base":3})"), ParseError);
  EXPECT_THROW(parse_config(R"({"questions":[{"id":"q","positive":"maybe"}]})"), ParseError);
  EXPECT_THROW(parse_config(R"({"questions":[{"id":"q","categories":["yes"]}]})"), ParseError);
  EXPECT_THROW(parse_config(R"({"questions":[{"id":"q"}],"expected_runs":0})"), ParseError);
  EXPECT_THROW(parse_config(R"({"questions":[{"id":"q"}],"threshold":"high"})"), ParseError);
}

TEST(Config, ModelEntriesResolveByBasename) {
  Config config = parse_config(R"({
    "questions": [{"id":"qa"}],
    "models": [
      {"file": "alpha.jsonl", "name": "Alpha 4B", "family": "alpha"},
      {"file": "beta.jsonl"}
    ]})");
  ASSERT_EQ(config.models.size(), 2u);
  const ModelEntry* alpha = config.model_for("/tmp/runs/alpha.jsonl");
  ASSERT_NE(alpha, nullptr);
  EXPECT_EQ(alpha->name, "Alpha 4B");
  EXPECT_EQ(alpha->family, "alpha");

  const ModelEntry* beta = config.model_for("beta.jsonl");
  ASSERT_NE(beta, nullptr);
  EXPECT_EQ(beta->name, "beta");    // stem fallback
  EXPECT_EQ(beta->family, "beta");  // name fallback

  EXPECT_EQ(config.model_for("gamma.jsonl"), nullptr);
}

TEST(Config, SerializeParseRoundTrip) {
  Config config;
  config.threshold = 0.7;
  config.expected_runs = 3;
  config.precision = 4;
  config.questions = {binary_question("qa"), binary_question("qb")};
  config.questions[0].description = "first question";
  config.models = {{"preds.jsonl", "model-x", "family-x"}};

  Config back = parse_config(serialize_config(config));
  EXPECT_EQ(back, config);
}

}  // namespace
}  // namespace hlveval
