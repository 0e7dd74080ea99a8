// Core domain types: label domains, question specs, annotation and
// prediction grids, and the bundle validation pass that decides which
// questions can be evaluated at all.

#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace hlveval {

// ---------------------------------------------------------------------------
// Errors

struct InvalidInput : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Reliability is undefined: no item carries two or more usable values.
struct NoPairableValues : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Fleiss' kappa requires every annotator to label every item.
struct IncompleteData : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EmptyVotes : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NoEvaluableItems : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EmptyInput : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParseError : std::runtime_error {
  ParseError(const std::string& message, std::size_t line_number = 0)
      : std::runtime_error(line_number == 0
                               ? message
                               : message + " (line " +
                                     std::to_string(line_number) + ")"),
        line(line_number) {}
  std::size_t line;
};

// Same (item, annotator, question) seen twice with conflicting labels.
struct DuplicateCell : ParseError {
  using ParseError::ParseError;
};

// ---------------------------------------------------------------------------
// Small helpers shared by ingestion and the domain types.

inline std::string trim(std::string_view s) {
  const auto* ws = " \t\r\n";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return std::string(s.substr(b, e - b + 1));
}

namespace detail {

// Indices of `ids` in lexicographic id order. Evaluation loops walk items in
// this order so that floating-point accumulation does not depend on the
// order rows appeared in the input file.
inline std::vector<std::size_t> order_by_id(const std::vector<std::string>& ids) {
  std::vector<std::size_t> order(ids.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return ids[a] < ids[b]; });
  return order;
}

inline bool has_duplicates(const std::vector<std::string>& ids) {
  std::set<std::string_view> seen;
  for (const auto& id : ids) {
    if (!seen.insert(id).second) return true;
  }
  return false;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Label domain

// Ordered set of nominal categories. Order is fixed at construction and is
// the iteration order everywhere a deterministic sweep over categories is
// needed.
class LabelDomain {
 public:
  LabelDomain() = default;

  explicit LabelDomain(std::vector<std::string> categories)
      : categories_(std::move(categories)) {
    if (categories_.size() < 2)
      throw InvalidInput("label domain needs at least 2 categories");
    if (detail::has_duplicates(categories_))
      throw InvalidInput("label domain categories must be distinct");
  }

  const std::vector<std::string>& categories() const { return categories_; }
  std::size_t size() const { return categories_.size(); }

  bool contains(std::string_view category) const {
    return std::find(categories_.begin(), categories_.end(), category) !=
           categories_.end();
  }

  std::optional<std::size_t> index_of(std::string_view category) const {
    auto it = std::find(categories_.begin(), categories_.end(), category);
    if (it == categories_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - categories_.begin());
  }

  bool operator==(const LabelDomain&) const = default;

 private:
  std::vector<std::string> categories_;
};

inline LabelDomain yes_no_domain() { return LabelDomain({"yes", "no"}); }

// ---------------------------------------------------------------------------
// Question spec

struct QuestionSpec {
  std::string id;
  std::string description;
  LabelDomain domain;
  std::string positive_category;  // the "positive" class for P/R/F1

  void validate() const {
    if (id.empty()) throw InvalidInput("question id must be non-empty");
    if (!domain.contains(positive_category))
      throw InvalidInput("positive category '" + positive_category +
                         "' is not in the domain of question '" + id + "'");
  }

  bool operator==(const QuestionSpec&) const = default;
};

// ---------------------------------------------------------------------------
// Cells and grids

// A cell value, or an excluded marker. In an AnnotationTable the empty state
// means MISSING (the annotator never labeled the item); in a
// PredictionRunSet it means INVALID (the run produced no usable answer).
// Both are excluded from every count; the owning structure carries the
// provenance.
using Cell = std::optional<std::string>;

// items x annotators grid of nominal labels for one question.
class AnnotationTable {
 public:
  AnnotationTable() = default;

  AnnotationTable(std::string question_id, std::vector<std::string> items,
                  std::vector<std::string> annotators, std::vector<Cell> cells)
      : question_(std::move(question_id)),
        items_(std::move(items)),
        annotators_(std::move(annotators)),
        cells_(std::move(cells)) {
    if (cells_.size() != items_.size() * annotators_.size())
      throw InvalidInput("annotation cell count does not match items x annotators");
  }

  const std::string& question() const { return question_; }
  const std::vector<std::string>& items() const { return items_; }
  const std::vector<std::string>& annotators() const { return annotators_; }

  const Cell& cell(std::size_t item, std::size_t annotator) const {
    return cells_[item * annotators_.size() + annotator];
  }

  std::optional<std::size_t> item_index(std::string_view id) const {
    for (std::size_t i = 0; i < items_.size(); ++i)
      if (items_[i] == id) return i;
    return std::nullopt;
  }

  // Non-missing categories for one item, in annotator order.
  std::vector<std::string> votes(std::size_t item) const {
    std::vector<std::string> out;
    for (std::size_t a = 0; a < annotators_.size(); ++a)
      if (cell(item, a)) out.push_back(*cell(item, a));
    return out;
  }

  bool operator==(const AnnotationTable&) const = default;

 private:
  std::string question_;
  std::vector<std::string> items_;
  std::vector<std::string> annotators_;
  std::vector<Cell> cells_;  // item-major
};

// items x runs grid of model outputs for one question, before aggregation.
class PredictionRunSet {
 public:
  PredictionRunSet() = default;

  PredictionRunSet(std::string question_id, std::vector<std::string> items,
                   std::vector<std::string> runs, std::vector<Cell> cells)
      : question_(std::move(question_id)),
        items_(std::move(items)),
        runs_(std::move(runs)),
        cells_(std::move(cells)) {
    if (runs_.empty()) throw InvalidInput("prediction run set needs at least one run");
    if (cells_.size() != items_.size() * runs_.size())
      throw InvalidInput("prediction cell count does not match items x runs");
  }

  const std::string& question() const { return question_; }
  const std::vector<std::string>& items() const { return items_; }
  const std::vector<std::string>& runs() const { return runs_; }

  const Cell& cell(std::size_t item, std::size_t run) const {
    return cells_[item * runs_.size() + run];
  }

  std::optional<std::size_t> item_index(std::string_view id) const {
    for (std::size_t i = 0; i < items_.size(); ++i)
      if (items_[i] == id) return i;
    return std::nullopt;
  }

  // Valid categories for one item, in run order.
  std::vector<std::string> votes(std::size_t item) const {
    std::vector<std::string> out;
    for (std::size_t r = 0; r < runs_.size(); ++r)
      if (cell(item, r)) out.push_back(*cell(item, r));
    return out;
  }

  bool operator==(const PredictionRunSet&) const = default;

 private:
  std::string question_;
  std::vector<std::string> items_;
  std::vector<std::string> runs_;
  std::vector<Cell> cells_;  // item-major
};

// ---------------------------------------------------------------------------
// Soft labels

// Per-item pair of positive-class fractions: human side over non-missing
// annotations, model side over valid runs.
struct SoftLabelPair {
  std::string item;
  double p_human = 0.0;
  double p_model = 0.0;
  std::int64_t n_human = 0;
  std::int64_t n_runs = 0;

  bool operator==(const SoftLabelPair&) const = default;
};

// ---------------------------------------------------------------------------
// Exclusions

enum class ExclusionReason { kTie, kEmptyVotes, kMissingPrediction, kUnknownCategory };

inline std::string_view to_string(ExclusionReason reason) {
  switch (reason) {
    case ExclusionReason::kTie: return "TIE";
    case ExclusionReason::kEmptyVotes: return "EMPTY_VOTES";
    case ExclusionReason::kMissingPrediction: return "MISSING_PREDICTION";
    case ExclusionReason::kUnknownCategory: return "UNKNOWN_CATEGORY";
  }
  return "UNKNOWN_CATEGORY";
}

inline std::optional<ExclusionReason> exclusion_reason_from(std::string_view s) {
  if (s == "TIE") return ExclusionReason::kTie;
  if (s == "EMPTY_VOTES") return ExclusionReason::kEmptyVotes;
  if (s == "MISSING_PREDICTION") return ExclusionReason::kMissingPrediction;
  if (s == "UNKNOWN_CATEGORY") return ExclusionReason::kUnknownCategory;
  return std::nullopt;
}

struct Exclusion {
  std::string item;
  ExclusionReason reason;

  bool operator==(const Exclusion&) const = default;
};

// ---------------------------------------------------------------------------
// Bundle validation

// Everything validate_bundle has to say about one question. `problems` holds
// conditions that make the question non-evaluable (unknown categories,
// duplicate ids, absent tables); the item-id mismatch lists are informational
// as long as the intersection stays non-empty.
struct QuestionDiagnostics {
  std::string question;
  bool evaluable = false;
  std::vector<std::string> common_items;               // sorted
  std::vector<std::string> missing_prediction_items;   // annotated, never predicted
  std::vector<std::string> missing_annotation_items;   // predicted, never annotated
  std::vector<std::string> unknown_category_items;     // items with out-of-domain labels
  std::vector<std::string> problems;

  bool operator==(const QuestionDiagnostics&) const = default;
};

struct ValidationReport {
  std::vector<QuestionDiagnostics> questions;

  bool evaluable() const {
    return std::any_of(questions.begin(), questions.end(),
                       [](const QuestionDiagnostics& q) { return q.evaluable; });
  }

  std::size_t diagnostic_count() const {
    std::size_t n = 0;
    for (const auto& q : questions)
      n += q.missing_prediction_items.size() + q.missing_annotation_items.size() +
           q.unknown_category_items.size() + q.problems.size();
    return n;
  }

  const QuestionDiagnostics* find(std::string_view question) const {
    for (const auto& q : questions)
      if (q.question == question) return &q;
    return nullptr;
  }
};

namespace detail {

inline std::vector<std::string> sorted_ids(const std::vector<std::string>& ids) {
  std::vector<std::string> out = ids;
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace detail

// Cross-checks one model's prediction tables against the annotation tables
// under the declared question specs. Pure and side-effect free: every
// problem is reported, none is thrown. A question is evaluable iff it has
// both tables, no structural problems, no out-of-domain labels, and a
// non-empty item intersection.
inline ValidationReport validate_bundle(std::span<const AnnotationTable> annotations,
                                        std::span<const PredictionRunSet> predictions,
                                        std::span<const QuestionSpec> questions) {
  ValidationReport report;

  auto find_table = [&](std::string_view id) -> const AnnotationTable* {
    for (const auto& t : annotations)
      if (t.question() == id) return &t;
    return nullptr;
  };
  auto find_runs = [&](std::string_view id) -> const PredictionRunSet* {
    for (const auto& p : predictions)
      if (p.question() == id) return &p;
    return nullptr;
  };

  for (const auto& spec : questions) {
    QuestionDiagnostics diag;
    diag.question = spec.id;

    const AnnotationTable* table = find_table(spec.id);
    const PredictionRunSet* runs = find_runs(spec.id);
    if (table == nullptr) diag.problems.push_back("no annotation table");
    if (runs == nullptr) diag.problems.push_back("no prediction table");

    std::set<std::string> unknown_items;
    if (table != nullptr) {
      if (detail::has_duplicates(table->items()))
        diag.problems.push_back("duplicate item ids in annotations");
      if (detail::has_duplicates(table->annotators()))
        diag.problems.push_back("duplicate annotator ids");
      for (std::size_t i = 0; i < table->items().size(); ++i)
        for (std::size_t a = 0; a < table->annotators().size(); ++a) {
          const Cell& c = table->cell(i, a);
          if (c && !spec.domain.contains(*c)) {
            unknown_items.insert(table->items()[i]);
            diag.problems.push_back("unknown category '" + *c + "' for item '" +
                                    table->items()[i] + "' annotator '" +
                                    table->annotators()[a] + "'");
          }
        }
    }
    if (runs != nullptr) {
      if (detail::has_duplicates(runs->items()))
        diag.problems.push_back("duplicate item ids in predictions");
      if (detail::has_duplicates(runs->runs()))
        diag.problems.push_back("duplicate run ids");
      for (std::size_t i = 0; i < runs->items().size(); ++i)
        for (std::size_t r = 0; r < runs->runs().size(); ++r) {
          const Cell& c = runs->cell(i, r);
          if (c && !spec.domain.contains(*c)) {
            unknown_items.insert(runs->items()[i]);
            diag.problems.push_back("unknown category '" + *c + "' for item '" +
                                    runs->items()[i] + "' run '" +
                                    runs->runs()[r] + "'");
          }
        }
    }
    diag.unknown_category_items.assign(unknown_items.begin(), unknown_items.end());

    if (table != nullptr && runs != nullptr) {
      std::vector<std::string> ann = detail::sorted_ids(table->items());
      std::vector<std::string> pred = detail::sorted_ids(runs->items());
      std::set_intersection(ann.begin(), ann.end(), pred.begin(), pred.end(),
                            std::back_inserter(diag.common_items));
      std::set_difference(ann.begin(), ann.end(), pred.begin(), pred.end(),
                          std::back_inserter(diag.missing_prediction_items));
      std::set_difference(pred.begin(), pred.end(), ann.begin(), ann.end(),
                          std::back_inserter(diag.missing_annotation_items));
      if (diag.common_items.empty())
        diag.problems.push_back("no items common to annotations and predictions");
    }

    diag.evaluable = diag.problems.empty();
    report.questions.push_back(std::move(diag));
  }

  // Tables for questions nobody declared are reported, never evaluated.
  std::set<std::string> declared;
  for (const auto& spec : questions) declared.insert(spec.id);
  std::set<std::string> undeclared;
  for (const auto& t : annotations)
    if (!declared.count(t.question())) undeclared.insert(t.question());
  for (const auto& p : predictions)
    if (!declared.count(p.question())) undeclared.insert(p.question());
  for (const auto& id : undeclared) {
    QuestionDiagnostics diag;
    diag.question = id;
    diag.evaluable = false;
    diag.problems.push_back("question not declared in the question set");
    report.questions.push_back(std::move(diag));
  }

  return report;
}

}  // namespace hlveval
