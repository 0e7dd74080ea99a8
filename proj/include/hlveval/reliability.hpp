// Inter-annotator reliability: Krippendorff's alpha (nominal, tolerant of
// missing cells), Fleiss' kappa (complete data only), and the threshold
// split into agreement / disagreement subsets.

#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "hlveval/core.hpp"

namespace hlveval {

// Krippendorff's reliability cutoff: alpha >= threshold goes to the
// agreement subset, the comparison is inclusive on the agreement side.
inline constexpr double kDefaultAlphaThreshold = 0.667;

struct ReliabilityScore {
  std::string question;
  double alpha = 0.0;            // <= 1 always; negative means systematic disagreement
  std::int64_t n_pairable = 0;   // values living in units of size >= 2
  std::int64_t n_units = 0;      // items with >= 2 non-missing annotations

  bool operator==(const ReliabilityScore&) const = default;
};

// Symmetric category x category tally. Each unit of size m contributes its
// m*(m-1) ordered value pairs, each weighted 1/(m-1), so every value adds
// exactly 1 to its category's marginal and total() equals the number of
// pairable values.
class CoincidenceMatrix {
 public:
  explicit CoincidenceMatrix(LabelDomain domain)
      : domain_(std::move(domain)),
        counts_(domain_.size() * domain_.size(), 0.0),
        marginal_counts_(domain_.size(), 0) {}

  // Units are accumulated in sorted item-id order by the caller; the sums
  // here must not depend on input row order.
  void add_unit(std::span<const std::size_t> category_indices) {
    const std::size_t m = category_indices.size();
    if (m < 2) return;
    const double weight = 1.0 / static_cast<double>(m - 1);
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t b = 0; b < m; ++b) {
        if (a == b) continue;
        at(category_indices[a], category_indices[b]) += weight;
      }
    n_pairable_ += static_cast<std::int64_t>(m);
    n_units_ += 1;
    for (std::size_t a = 0; a < m; ++a) marginal_counts_[category_indices[a]] += 1;
  }

  double& at(std::size_t c, std::size_t k) { return counts_[c * domain_.size() + k]; }
  double at(std::size_t c, std::size_t k) const { return counts_[c * domain_.size() + k]; }

  const LabelDomain& domain() const { return domain_; }
  std::int64_t n_pairable() const { return n_pairable_; }
  std::int64_t n_units() const { return n_units_; }

  // Marginal of category c, an exact integer count of pairable values.
  std::int64_t marginal(std::size_t c) const { return marginal_counts_[c]; }

  // Observed disagreement: off-diagonal mass over total mass.
  double observed_disagreement() const {
    double off = 0.0;
    for (std::size_t c = 0; c < domain_.size(); ++c)
      for (std::size_t k = 0; k < domain_.size(); ++k)
        if (c != k) off += at(c, k);
    return off / static_cast<double>(n_pairable_);
  }

  // Expected disagreement under chance pairing of the pooled values:
  // sum_{c != k} n_c * n_k / (n * (n - 1)). Computed from the integer
  // marginals so that the all-identical case is exactly zero.
  double expected_disagreement() const {
    const double n = static_cast<double>(n_pairable_);
    double cross = 0.0;
    for (std::size_t c = 0; c < domain_.size(); ++c)
      for (std::size_t k = 0; k < domain_.size(); ++k)
        if (c != k)
          cross += static_cast<double>(marginal(c)) * static_cast<double>(marginal(k));
    return cross / (n * (n - 1.0));
  }

 private:
  LabelDomain domain_;
  std::vector<double> counts_;
  std::vector<std::int64_t> marginal_counts_;
  std::int64_t n_pairable_ = 0;
  std::int64_t n_units_ = 0;
};

namespace detail {

// Distinct observed categories, sorted, so alpha never depends on a
// declared domain (unobserved categories have zero marginals anyway).
inline std::vector<std::string> observed_categories(const AnnotationTable& table) {
  std::set<std::string> seen;
  for (std::size_t i = 0; i < table.items().size(); ++i)
    for (std::size_t a = 0; a < table.annotators().size(); ++a)
      if (table.cell(i, a)) seen.insert(*table.cell(i, a));
  return {seen.begin(), seen.end()};
}

}  // namespace detail

// alpha = 1 - D_o / D_e over the coincidence matrix; units with fewer than
// two usable values are skipped. When every pairable value is identical,
// D_e = 0 and alpha is 1 by convention (maximal agreement, nothing to pair
// against). Throws NoPairableValues when no unit has two usable values.
inline ReliabilityScore krippendorff_alpha(const AnnotationTable& table) {
  std::vector<std::string> categories = detail::observed_categories(table);
  // A one-category domain is degenerate; pad so LabelDomain stays valid.
  // The padded category never occurs, so it changes nothing.
  std::vector<std::string> padded = categories;
  for (int i = 0; padded.size() < 2; ++i) {
    std::string filler = std::string("\x01pad") + std::to_string(i);
    if (std::find(padded.begin(), padded.end(), filler) == padded.end())
      padded.push_back(std::move(filler));
  }
  LabelDomain domain(padded);

  CoincidenceMatrix matrix(domain);
  for (std::size_t i : detail::order_by_id(table.items())) {
    std::vector<std::size_t> unit;
    for (std::size_t a = 0; a < table.annotators().size(); ++a) {
      const Cell& c = table.cell(i, a);
      if (c) unit.push_back(*domain.index_of(*c));
    }
    matrix.add_unit(unit);
  }

  if (matrix.n_units() == 0)
    throw NoPairableValues("no item has two or more non-missing annotations for question '" +
                           table.question() + "'");

  ReliabilityScore score;
  score.question = table.question();
  score.n_pairable = matrix.n_pairable();
  score.n_units = matrix.n_units();

  const double expected = matrix.expected_disagreement();
  if (expected == 0.0) {
    score.alpha = 1.0;
    return score;
  }
  score.alpha = 1.0 - matrix.observed_disagreement() / expected;
  return score;
}

// Standard Fleiss' kappa over the item x category tally matrix. The
// complete-data precondition is the documented contrast with alpha: any
// MISSING cell raises IncompleteData. When the expected agreement is 1
// (every label identical) kappa is 1 by the same convention as alpha.
inline ReliabilityScore fleiss_kappa(const AnnotationTable& table) {
  const std::int64_t n_items = static_cast<std::int64_t>(table.items().size());
  const std::int64_t n_annotators = static_cast<std::int64_t>(table.annotators().size());
  if (n_items < 1 || n_annotators < 2)
    throw NoPairableValues("Fleiss' kappa needs at least 1 item and 2 annotators");

  for (std::size_t i = 0; i < table.items().size(); ++i)
    for (std::size_t a = 0; a < table.annotators().size(); ++a)
      if (!table.cell(i, a))
        throw IncompleteData("missing annotation for item '" + table.items()[i] +
                             "' annotator '" + table.annotators()[a] +
                             "'; Fleiss' kappa assumes complete data");

  std::vector<std::string> categories = detail::observed_categories(table);
  std::map<std::string, std::size_t> index;
  for (std::size_t c = 0; c < categories.size(); ++c) index[categories[c]] = c;

  // Tallies and both agreement terms in exact integer arithmetic.
  std::vector<std::int64_t> column_totals(categories.size(), 0);
  std::int64_t within_item_pairs = 0;  // sum_i sum_j n_ij * (n_ij - 1)
  for (std::size_t i = 0; i < table.items().size(); ++i) {
    std::vector<std::int64_t> tally(categories.size(), 0);
    for (std::size_t a = 0; a < table.annotators().size(); ++a)
      tally[index[*table.cell(i, a)]] += 1;
    for (std::size_t c = 0; c < categories.size(); ++c) {
      within_item_pairs += tally[c] * (tally[c] - 1);
      column_totals[c] += tally[c];
    }
  }

  const double total = static_cast<double>(n_items) * static_cast<double>(n_annotators);
  double expected = 0.0;
  for (std::int64_t t : column_totals) {
    const double p = static_cast<double>(t) / total;
    expected += p * p;
  }
  const double observed = static_cast<double>(within_item_pairs) /
                          (static_cast<double>(n_items) *
                           static_cast<double>(n_annotators) *
                           static_cast<double>(n_annotators - 1));

  ReliabilityScore score;
  score.question = table.question();
  score.n_pairable = n_items * n_annotators;
  score.n_units = n_items;

  // Degenerate marginals: all labels identical.
  const bool degenerate = std::any_of(column_totals.begin(), column_totals.end(),
                                      [&](std::int64_t t) {
                                        return t == n_items * n_annotators;
                                      });
  if (degenerate) {
    score.alpha = 1.0;
    return score;
  }
  score.alpha = (observed - expected) / (1.0 - expected);
  return score;
}

// ---------------------------------------------------------------------------
// Partition

struct Partition {
  double threshold = kDefaultAlphaThreshold;
  std::vector<ReliabilityScore> agreement;     // alpha >= threshold
  std::vector<ReliabilityScore> disagreement;  // alpha <  threshold

  bool operator==(const Partition&) const = default;
};

// Splits questions by reliability. Subsets preserve input order, are
// disjoint, and together cover every score exactly once.
inline Partition partition_questions(std::span<const ReliabilityScore> scores,
                                     double threshold = kDefaultAlphaThreshold) {
  Partition partition;
  partition.threshold = threshold;
  for (const auto& score : scores) {
    if (score.alpha >= threshold)
      partition.agreement.push_back(score);
    else
      partition.disagreement.push_back(score);
  }
  return partition;
}

}  // namespace hlveval
