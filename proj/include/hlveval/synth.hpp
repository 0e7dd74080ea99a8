// Synthetic annotator panels and model runs with controllable agreement.
// This exists to give the metric code inputs whose ground truth is known by
// construction; it makes no attempt to model real annotator behavior.

#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "hlveval/core.hpp"
#include "hlveval/agreement.hpp"

namespace hlveval {

struct PanelSpec {
  std::int64_t n_items = 0;
  std::int64_t n_annotators = 0;
  double positive_rate = 0.5;   // each cell positive with this probability
  double missing_rate = 0.0;    // each cell masked MISSING with this probability
  std::uint64_t seed = 0;
};

namespace detail {

// Uniform double in [0, 1) from the top 53 bits. std::mt19937_64 is fully
// specified, the std distributions are not, so outputs stay byte-identical
// across standard libraries.
inline double unit_draw(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline std::string padded_id(const char* prefix, std::int64_t value, int width) {
  std::string digits = std::to_string(value);
  std::string out = prefix;
  for (int i = static_cast<int>(digits.size()); i < width; ++i) out += '0';
  return out + digits;
}

}  // namespace detail

// Every cell is drawn independently: positive with spec.positive_rate, then
// masked MISSING with spec.missing_rate. Cells are visited item-major in id
// order with two draws each, so the same seed always yields the same table.
// Binary domains only.
inline AnnotationTable generate_panel(const PanelSpec& spec, const QuestionSpec& question) {
  if (spec.n_items < 1 || spec.n_annotators < 1)
    throw InvalidInput("panel needs at least one item and one annotator");
  if (spec.positive_rate < 0.0 || spec.positive_rate > 1.0 ||
      spec.missing_rate < 0.0 || spec.missing_rate > 1.0)
    throw InvalidInput("panel rates must lie in [0, 1]");
  if (question.domain.size() != 2)
    throw InvalidInput("panel generation supports binary domains only");
  question.validate();

  const std::string& positive = question.positive_category;
  std::string negative;
  for (const auto& c : question.domain.categories())
    if (c != positive) negative = c;

  std::vector<std::string> items, annotators;
  for (std::int64_t i = 1; i <= spec.n_items; ++i)
    items.push_back(detail::padded_id("item", i, 6));
  for (std::int64_t a = 1; a <= spec.n_annotators; ++a)
    annotators.push_back(detail::padded_id("ann", a, 3));

  std::mt19937_64 rng(spec.seed);
  std::vector<Cell> cells;
  cells.reserve(items.size() * annotators.size());
  for (std::size_t i = 0; i < items.size(); ++i)
    for (std::size_t a = 0; a < annotators.size(); ++a) {
      const bool is_positive = detail::unit_draw(rng) < spec.positive_rate;
      const bool is_missing = detail::unit_draw(rng) < spec.missing_rate;
      if (is_missing)
        cells.emplace_back(std::nullopt);
      else
        cells.emplace_back(is_positive ? positive : negative);
    }

  return AnnotationTable(question.id, std::move(items), std::move(annotators), std::move(cells));
}

// Each run cell copies the item's human-majority label with probability
// `fidelity` and flips it otherwise, which pins the model's soft label to a
// known distance from the human one. Items whose human votes are empty or
// tied get a seeded coin flip as their reference label. Binary domains only.
inline PredictionRunSet generate_runs(const AnnotationTable& table,
                                      const QuestionSpec& question, double fidelity,
                                      std::uint64_t seed, std::int64_t n_runs = 5) {
  if (fidelity < 0.0 || fidelity > 1.0)
    throw InvalidInput("fidelity must lie in [0, 1]");
  if (n_runs < 1) throw InvalidInput("need at least one run");
  if (question.domain.size() != 2)
    throw InvalidInput("run generation supports binary domains only");
  question.validate();

  const std::string& positive = question.positive_category;
  std::string negative;
  for (const auto& c : question.domain.categories())
    if (c != positive) negative = c;
  auto flip = [&](const std::string& c) { return c == positive ? negative : positive; };

  std::vector<std::string> runs;
  for (std::int64_t r = 1; r <= n_runs; ++r)
    runs.push_back(detail::padded_id("run", r, 2));

  std::mt19937_64 rng(seed);
  std::vector<Cell> cells;
  cells.reserve(table.items().size() * runs.size());
  for (std::size_t i = 0; i < table.items().size(); ++i) {
    std::vector<std::string> votes = table.votes(i);
    std::string reference;
    if (votes.empty()) {
      reference = detail::unit_draw(rng) < 0.5 ? positive : negative;
    } else {
      MajorityLabel majority = majority_vote(votes);
      reference = majority.tie()
                      ? (detail::unit_draw(rng) < 0.5 ? positive : negative)
                      : *majority.label;
    }
    for (std::size_t r = 0; r < runs.size(); ++r) {
      const bool copy = detail::unit_draw(rng) < fidelity;
      cells.emplace_back(copy ? reference : flip(reference));
    }
  }

  return PredictionRunSet(table.question(), table.items(), std::move(runs), std::move(cells));
}

}  // namespace hlveval
