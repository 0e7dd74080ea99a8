// Distribution-sensitive evaluation for low-agreement questions: per-item
// soft labels, then Brier score and Jensen-Shannon divergence averaged over
// items. Both metrics use the full human label distribution instead of a
// collapsed consensus label.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hlveval/core.hpp"

namespace hlveval {

struct DistributionMetrics {
  std::string question;
  double brier = 0.0;       // in [0, 1]
  double jsd = 0.0;         // in [0, 1], base-2 logarithm
  std::int64_t n_items = 0;

  bool operator==(const DistributionMetrics&) const = default;
};

struct SoftLabelResult {
  std::vector<SoftLabelPair> pairs;  // sorted by item id
  std::vector<Exclusion> excluded;

  bool operator==(const SoftLabelResult&) const = default;
};

// Positive-class fractions per item: p_human over non-missing annotations,
// p_model over valid runs. Items with nothing on either side are excluded
// and logged; annotated items with no prediction record are excluded as
// MISSING_PREDICTION. Throws NoEvaluableItems when nothing survives.
inline SoftLabelResult soft_labels(const QuestionSpec& question,
                                   const AnnotationTable& human,
                                   const PredictionRunSet& model) {
  SoftLabelResult result;

  for (std::size_t i : detail::order_by_id(human.items())) {
    const std::string& item = human.items()[i];
    auto model_item = model.item_index(item);
    if (!model_item) {
      result.excluded.push_back({item, ExclusionReason::kMissingPrediction});
      continue;
    }

    std::vector<std::string> human_votes = human.votes(i);
    std::vector<std::string> model_votes = model.votes(*model_item);
    if (human_votes.empty() || model_votes.empty()) {
      result.excluded.push_back({item, ExclusionReason::kEmptyVotes});
      continue;
    }

    auto positive_share = [&](const std::vector<std::string>& votes) {
      std::int64_t positive = 0;
      for (const auto& v : votes)
        if (v == question.positive_category) positive += 1;
      return static_cast<double>(positive) / static_cast<double>(votes.size());
    };

    SoftLabelPair pair;
    pair.item = item;
    pair.n_human = static_cast<std::int64_t>(human_votes.size());
    pair.n_runs = static_cast<std::int64_t>(model_votes.size());
    pair.p_human = positive_share(human_votes);
    pair.p_model = positive_share(model_votes);
    result.pairs.push_back(std::move(pair));
  }

  if (result.pairs.empty())
    throw NoEvaluableItems("every item was excluded for question '" + question.id + "'");
  return result;
}

namespace detail {

// Pairs restated in sorted item-id order so the mean below is bit-identical
// no matter how the caller ordered them.
inline std::vector<const SoftLabelPair*> canonical_order(std::span<const SoftLabelPair> pairs) {
  std::vector<const SoftLabelPair*> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) out.push_back(&p);
  std::stable_sort(out.begin(), out.end(),
                   [](const SoftLabelPair* a, const SoftLabelPair* b) { return a->item < b->item; });
  return out;
}

}  // namespace detail

// Mean squared soft-label error. Throws EmptyInput on an empty list.
inline double brier_score(std::span<const SoftLabelPair> pairs) {
  if (pairs.empty()) throw EmptyInput("Brier score over an empty item list");
  double sum = 0.0;
  for (const SoftLabelPair* p : detail::canonical_order(pairs)) {
    const double d = p->p_model - p->p_human;
    sum += d * d;
  }
  return sum / static_cast<double>(pairs.size());
}

// Jensen-Shannon divergence between the Bernoulli distributions (p, 1-p)
// and (q, 1-q): 0.5*KL(P||M) + 0.5*KL(Q||M) with M the midpoint, base-2
// logarithms, and the 0*log0 = 0 convention. M >= max(P,Q)/2 componentwise
// wherever P or Q is positive, so no smoothing is needed and the value
// lands in [0, 1].
inline double jsd_binary(double p_model, double p_human) {
  const double p[2] = {p_model, 1.0 - p_model};
  const double q[2] = {p_human, 1.0 - p_human};
  // The two KL halves are accumulated separately so that swapping the sides
  // swaps the sums and the result is identical down to the last bit.
  double kl_p = 0.0, kl_q = 0.0;
  for (int k = 0; k < 2; ++k) {
    const double m = 0.5 * (p[k] + q[k]);
    if (p[k] > 0.0) kl_p += p[k] * std::log2(p[k] / m);
    if (q[k] > 0.0) kl_q += q[k] * std::log2(q[k] / m);
  }
  return std::clamp(0.5 * kl_p + 0.5 * kl_q, 0.0, 1.0);
}

// Mean per-item Jensen-Shannon divergence. Throws EmptyInput on an empty list.
inline double jensen_shannon(std::span<const SoftLabelPair> pairs) {
  if (pairs.empty()) throw EmptyInput("JSD over an empty item list");
  double sum = 0.0;
  for (const SoftLabelPair* p : detail::canonical_order(pairs))
    sum += jsd_binary(p->p_model, p->p_human);
  return sum / static_cast<double>(pairs.size());
}

inline DistributionMetrics distribution_metrics(const std::string& question,
                                                std::span<const SoftLabelPair> pairs) {
  DistributionMetrics metrics;
  metrics.question = question;
  metrics.brier = brier_score(pairs);
  metrics.jsd = jensen_shannon(pairs);
  metrics.n_items = static_cast<std::int64_t>(pairs.size());
  return metrics;
}

}  // namespace hlveval
