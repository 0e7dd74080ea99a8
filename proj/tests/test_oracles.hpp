// Independent reference implementations used to pin expected values. These
// deliberately share no code with the library paths they check: alpha is a
// direct O(pairs) enumeration, kappa works straight off a tally matrix, and
// the divergence helpers spell out KL term by term.

#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "hlveval/core.hpp"

namespace hlveval::testing {

// Brute-force Krippendorff's alpha. Observed disagreement enumerates every
// ordered value pair inside each unit, weighted 1/(m-1); expected
// disagreement enumerates every ordered pair across the pooled values.
// Returns nullopt when no unit has two usable values.
inline std::optional<double> alpha_bruteforce(const AnnotationTable& table) {
  std::vector<std::vector<std::string>> units;
  for (std::size_t i = 0; i < table.items().size(); ++i) {
    std::vector<std::string> unit = table.votes(i);
    if (unit.size() >= 2) units.push_back(std::move(unit));
  }
  if (units.empty()) return std::nullopt;

  std::vector<std::string> pooled;
  double observed_sum = 0.0;
  for (const auto& unit : units) {
    const double weight = 1.0 / static_cast<double>(unit.size() - 1);
    for (std::size_t a = 0; a < unit.size(); ++a)
      for (std::size_t b = 0; b < unit.size(); ++b)
        if (a != b && unit[a] != unit[b]) observed_sum += weight;
    pooled.insert(pooled.end(), unit.begin(), unit.end());
  }

  const auto n = static_cast<double>(pooled.size());
  const double observed = observed_sum / n;

  std::int64_t disagreeing_pairs = 0;
  for (std::size_t a = 0; a < pooled.size(); ++a)
    for (std::size_t b = 0; b < pooled.size(); ++b)
      if (a != b && pooled[a] != pooled[b]) ++disagreeing_pairs;
  if (disagreeing_pairs == 0) return 1.0;  // every pooled value identical
  const double expected = static_cast<double>(disagreeing_pairs) / (n * (n - 1.0));

  return 1.0 - observed / expected;
}

// Fleiss' kappa straight from an item x category tally matrix.
inline double fleiss_from_tallies(const std::vector<std::vector<std::int64_t>>& tallies,
                                  std::int64_t n_annotators) {
  const auto n_items = static_cast<double>(tallies.size());
  const auto n = static_cast<double>(n_annotators);

  double mean_item_agreement = 0.0;
  for (const auto& tally : tallies) {
    double item_pairs = 0.0;
    for (std::int64_t count : tally)
      item_pairs += static_cast<double>(count) * static_cast<double>(count - 1);
    mean_item_agreement += item_pairs / (n * (n - 1.0));
  }
  mean_item_agreement /= n_items;

  double expected = 0.0;
  for (std::size_t c = 0; c < tallies.front().size(); ++c) {
    double column = 0.0;
    for (const auto& tally : tallies) column += static_cast<double>(tally[c]);
    const double share = column / (n_items * n);
    expected += share * share;
  }

  return (mean_item_agreement - expected) / (1.0 - expected);
}

inline double kl_base2(const std::vector<double>& p, const std::vector<double>& q) {
  double sum = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k)
    if (p[k] > 0.0) sum += p[k] * (std::log(p[k] / q[k]) / std::log(2.0));
  return sum;
}

inline double jsd_reference(double p_model, double p_human) {
  const std::vector<double> p = {p_model, 1.0 - p_model};
  const std::vector<double> q = {p_human, 1.0 - p_human};
  const std::vector<double> m = {0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])};
  return 0.5 * kl_base2(p, m) + 0.5 * kl_base2(q, m);
}

// ---------------------------------------------------------------------------
// Table construction helpers

// Cells row-major as strings, "" meaning MISSING/INVALID.
inline AnnotationTable make_table(const std::string& question,
                                  const std::vector<std::string>& items,
                                  const std::vector<std::string>& annotators,
                                  const std::vector<std::string>& cells) {
  std::vector<Cell> converted;
  converted.reserve(cells.size());
  for (const auto& c : cells) converted.push_back(c.empty() ? Cell{} : Cell{c});
  return AnnotationTable(question, items, annotators, std::move(converted));
}

inline PredictionRunSet make_runs(const std::string& question,
                                  const std::vector<std::string>& items,
                                  const std::vector<std::string>& runs,
                                  const std::vector<std::string>& cells) {
  std::vector<Cell> converted;
  converted.reserve(cells.size());
  for (const auto& c : cells) converted.push_back(c.empty() ? Cell{} : Cell{c});
  return PredictionRunSet(question, items, runs, std::move(converted));
}

inline std::vector<std::string> numbered(const std::string& prefix, std::size_t count) {
  std::vector<std::string> ids;
  for (std::size_t i = 1; i <= count; ++i) {
    std::string digits = std::to_string(i);
    ids.push_back(prefix + std::string(3 - std::min<std::size_t>(3, digits.size()), '0') +
                  digits);
  }
  return ids;
}

// Random binary table for property tests: up to max_items x max_annotators,
// cells yes/no uniform, then masked missing with the given probability.
inline AnnotationTable random_binary_table(std::mt19937& rng, std::size_t max_items,
                                           std::size_t max_annotators,
                                           double missing_rate) {
  const std::size_t n_items = 1 + rng() % max_items;
  const std::size_t n_annotators = 2 + rng() % (max_annotators - 1);
  std::vector<std::string> cells;
  cells.reserve(n_items * n_annotators);
  auto unit = [&] { return static_cast<double>(rng()) / 4294967296.0; };
  for (std::size_t i = 0; i < n_items * n_annotators; ++i) {
    if (unit() < missing_rate)
      cells.emplace_back();
    else
      cells.emplace_back(unit() < 0.5 ? "yes" : "no");
  }
  return make_table("q", numbered("item", n_items), numbered("ann", n_annotators), cells);
}

}  // namespace hlveval::testing
