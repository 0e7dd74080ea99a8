// Consensus evaluation for high-agreement questions: majority voting on
// both the human and model side, then precision / recall / F1 against the
// human pseudo-ground truth.

#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "hlveval/core.hpp"

namespace hlveval {

// Strict plurality winner of a vote multiset. No label means the top two
// categories are tied; for a binary domain that happens exactly when the
// counts are equal.
struct MajorityLabel {
  std::string item;
  std::optional<std::string> label;  // nullopt = TIE
  std::int64_t support = 0;          // votes for the winning category
  std::int64_t total = 0;            // non-missing votes

  bool tie() const { return !label.has_value(); }

  bool operator==(const MajorityLabel&) const = default;
};

// Throws EmptyVotes when there is nothing to vote with.
inline MajorityLabel majority_vote(std::span<const std::string> votes) {
  if (votes.empty()) throw EmptyVotes("no votes to aggregate");

  std::map<std::string, std::int64_t> counts;
  for (const auto& v : votes) counts[v] += 1;

  std::int64_t best = 0, second = 0;
  const std::string* winner = nullptr;
  for (const auto& [category, count] : counts) {
    if (count > best) {
      second = best;
      best = count;
      winner = &category;
    } else if (count > second) {
      second = count;
    }
  }

  MajorityLabel result;
  result.total = static_cast<std::int64_t>(votes.size());
  result.support = best;
  if (best != second) result.label = *winner;
  return result;
}

// ---------------------------------------------------------------------------
// Confusion counts and derived metrics

struct ConfusionCounts {
  std::int64_t tp = 0, fp = 0, fn = 0, tn = 0;

  std::int64_t total() const { return tp + fp + fn + tn; }

  bool operator==(const ConfusionCounts&) const = default;
};

// Zero-denominator convention is 0, not NaN, so aggregate tables stay usable.
inline double precision(const ConfusionCounts& c) {
  return c.tp + c.fp == 0 ? 0.0 : static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
}

inline double recall(const ConfusionCounts& c) {
  return c.tp + c.fn == 0 ? 0.0 : static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
}

inline double f1_score(const ConfusionCounts& c) {
  const double p = precision(c);
  const double r = recall(c);
  return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

struct AgreementMetrics {
  std::string question;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  ConfusionCounts counts;
  std::int64_t n_items = 0;          // evaluated (non-excluded) items
  std::vector<Exclusion> excluded;   // sorted by item id

  bool operator==(const AgreementMetrics&) const = default;
};

// Majority-vs-majority comparison over the items both sides cover. Items
// where either side has no votes or ends in a tie are excluded and logged;
// annotated items the model never saw are excluded as MISSING_PREDICTION.
// Whether the question belongs to the agreement subset is the caller's
// business; alpha is not rechecked here.
inline AgreementMetrics evaluate_agreement(const QuestionSpec& question,
                                           const AnnotationTable& human,
                                           const PredictionRunSet& model) {
  AgreementMetrics metrics;
  metrics.question = question.id;

  for (std::size_t i : detail::order_by_id(human.items())) {
    const std::string& item = human.items()[i];
    auto model_item = model.item_index(item);
    if (!model_item) {
      metrics.excluded.push_back({item, ExclusionReason::kMissingPrediction});
      continue;
    }

    std::vector<std::string> human_votes = human.votes(i);
    std::vector<std::string> model_votes = model.votes(*model_item);
    if (human_votes.empty() || model_votes.empty()) {
      metrics.excluded.push_back({item, ExclusionReason::kEmptyVotes});
      continue;
    }

    MajorityLabel human_majority = majority_vote(human_votes);
    MajorityLabel model_majority = majority_vote(model_votes);
    if (human_majority.tie() || model_majority.tie()) {
      metrics.excluded.push_back({item, ExclusionReason::kTie});
      continue;
    }

    const bool human_positive = *human_majority.label == question.positive_category;
    const bool model_positive = *model_majority.label == question.positive_category;
    if (human_positive && model_positive) metrics.counts.tp += 1;
    else if (!human_positive && model_positive) metrics.counts.fp += 1;
    else if (human_positive && !model_positive) metrics.counts.fn += 1;
    else metrics.counts.tn += 1;
  }

  metrics.n_items = metrics.counts.total();
  if (metrics.n_items == 0)
    throw NoEvaluableItems("every item was excluded for question '" + question.id + "'");

  metrics.precision = hlveval::precision(metrics.counts);
  metrics.recall = hlveval::recall(metrics.counts);
  metrics.f1 = f1_score(metrics.counts);
  return metrics;
}

}  // namespace hlveval
