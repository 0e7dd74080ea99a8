#include "hlveval/synth.hpp"

#include <gtest/gtest.h>

#include "hlveval/agreement.hpp"
#include "hlveval/disagreement.hpp"
#include "hlveval/io.hpp"
#include "hlveval/reliability.hpp"
#include "test_oracles.hpp"

namespace hlveval {
namespace {

QuestionSpec binary_question(const std::string& id) {
  return QuestionSpec{id, "", yes_no_domain(), "yes"};
}

TEST(GeneratePanel, SameSeedSameBytes) {
  QuestionSpec q = binary_question("q");
  PanelSpec spec{40, 5, 0.6, 0.2, 1234};
  AnnotationTable first = generate_panel(spec, q);
  AnnotationTable second = generate_panel(spec, q);
  EXPECT_EQ(first, second);

  std::vector<AnnotationTable> lhs = {first}, rhs = {second};
  EXPECT_EQ(serialize_annotations(lhs), serialize_annotations(rhs));

  spec.seed = 1235;
  EXPECT_NE(generate_panel(spec, q), first);
}

TEST(GeneratePanel, RateOneIsUnanimousAlphaOne) {
  QuestionSpec q = binary_question("q");
  PanelSpec spec{30, 5, 1.0, 0.0, 7};
  AnnotationTable table = generate_panel(spec, q);
  EXPECT_EQ(krippendorff_alpha(table).alpha, 1.0);
}

TEST(GeneratePanel, FullMissingnessHasNothingToPair) {
  QuestionSpec q = binary_question("q");
  PanelSpec spec{10, 5, 0.5, 1.0, 7};
  AnnotationTable table = generate_panel(spec, q);
  EXPECT_THROW(krippendorff_alpha(table), NoPairableValues);
}

TEST(GeneratePanel, ChanceLevelPanelsLandNearAlphaZero) {
  QuestionSpec q = binary_question("q");
  PanelSpec spec{500, 5, 0.5, 0.0, 99};
  AnnotationTable table = generate_panel(spec, q);
  EXPECT_LT(std::abs(krippendorff_alpha(table).alpha), 0.1);
}

TEST(GeneratePanel, RejectsBadSpecs) {
  QuestionSpec q = binary_question("q");
  EXPECT_THROW(generate_panel(PanelSpec{0, 5, 0.5, 0.0, 1}, q), InvalidInput);
  EXPECT_THROW(generate_panel(PanelSpec{5, 5, 1.5, 0.0, 1}, q), InvalidInput);
  EXPECT_THROW(generate_panel(PanelSpec{5, 5, 0.5, -0.1, 1}, q), InvalidInput);
}

TEST(GenerateRuns, SameSeedSameBytes) {
  QuestionSpec q = binary_question("q");
  AnnotationTable panel = generate_panel(PanelSpec{25, 5, 0.7, 0.1, 3}, q);
  PredictionRunSet first = generate_runs(panel, q, 0.8, 17, 5);
  PredictionRunSet second = generate_runs(panel, q, 0.8, 17, 5);
  EXPECT_EQ(first, second);
}

TEST(GenerateRuns, FullFidelityMatchesTheMajorityExactly) {
  QuestionSpec q = binary_question("q");
  AnnotationTable panel = generate_panel(PanelSpec{40, 5, 0.5, 0.0, 21}, q);
  PredictionRunSet runs = generate_runs(panel, q, 1.0, 22, 5);

  AgreementMetrics metrics = evaluate_agreement(q, panel, runs);
  EXPECT_EQ(metrics.precision, 1.0);
  EXPECT_EQ(metrics.recall, 1.0);
  EXPECT_EQ(metrics.f1, 1.0);
}

TEST(GenerateRuns, FullFidelityOnUnanimousPanelsIsPerfectlyCalibrated) {
  QuestionSpec q = binary_question("q");
  AnnotationTable panel = generate_panel(PanelSpec{30, 5, 1.0, 0.0, 5}, q);
  PredictionRunSet runs = generate_runs(panel, q, 1.0, 6, 5);

  SoftLabelResult soft = soft_labels(q, panel, runs);
  EXPECT_EQ(brier_score(soft.pairs), 0.0);
  EXPECT_EQ(jensen_shannon(soft.pairs), 0.0);
}

TEST(GenerateRuns, ZeroFidelityOnUnanimousPanelsSaturatesBothMetrics) {
  QuestionSpec q = binary_question("q");
  AnnotationTable panel = generate_panel(PanelSpec{30, 5, 1.0, 0.0, 5}, q);
  PredictionRunSet runs = generate_runs(panel, q, 0.0, 6, 5);

  SoftLabelResult soft = soft_labels(q, panel, runs);
  EXPECT_EQ(brier_score(soft.pairs), 1.0);
  EXPECT_EQ(jensen_shannon(soft.pairs), 1.0);
}

TEST(GenerateRuns, ExpectedBrierShrinksWithFidelity) {
  // Sign test across seeds: higher fidelity should essentially always win.
  QuestionSpec q = binary_question("q");
  int wins = 0;
  const int seeds = 25;
  for (int seed = 1; seed <= seeds; ++seed) {
    AnnotationTable panel =
        generate_panel(PanelSpec{500, 5, 0.8, 0.0, static_cast<std::uint64_t>(seed)}, q);
    PredictionRunSet low = generate_runs(panel, q, 0.25, 1000 + seed, 5);
    PredictionRunSet high = generate_runs(panel, q, 0.75, 2000 + seed, 5);

    const double brier_low = brier_score(soft_labels(q, panel, low).pairs);
    const double brier_high = brier_score(soft_labels(q, panel, high).pairs);
    if (brier_high < brier_low) ++wins;
  }
  EXPECT_GE(wins, 20) << wins << "/" << seeds;
}

}  // namespace
}  // namespace hlveval
