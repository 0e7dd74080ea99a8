// Report assembly and emission: runs the full protocol (reliability ->
// partition -> per-subset metrics) over ingested tables and renders the
// result either as an aligned text table or as canonical JSON that parses
// back losslessly.

#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "hlveval/agreement.hpp"
#include "hlveval/core.hpp"
#include "hlveval/disagreement.hpp"
#include "hlveval/io.hpp"
#include "hlveval/reliability.hpp"

namespace hlveval {

struct PartitionEntry {
  std::string question;
  double alpha = 0.0;
  std::int64_t n_pairable = 0;
  std::int64_t n_units = 0;
  bool agreement = false;

  bool operator==(const PartitionEntry&) const = default;
};

struct AgreementRow {
  std::string model;
  std::string family;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  ConfusionCounts counts;
  std::int64_t n_items = 0;

  bool operator==(const AgreementRow&) const = default;
};

struct DisagreementRow {
  std::string model;
  std::string family;
  double brier = 0.0;
  double jsd = 0.0;
  std::int64_t n_items = 0;

  bool operator==(const DisagreementRow&) const = default;
};

struct QuestionAgreement {
  std::string question;
  std::vector<AgreementRow> rows;

  bool operator==(const QuestionAgreement&) const = default;
};

struct QuestionDisagreement {
  std::string question;
  std::vector<DisagreementRow> rows;

  bool operator==(const QuestionDisagreement&) const = default;
};

// model is empty for exclusions decided on the annotation side alone.
struct ExclusionEntry {
  std::string question;
  std::string item;
  std::string model;
  ExclusionReason reason = ExclusionReason::kEmptyVotes;

  bool operator==(const ExclusionEntry&) const = default;
};

struct ReportError {
  std::string question;
  std::string model;  // empty when the whole question is affected
  std::string message;

  bool operator==(const ReportError&) const = default;
};

struct ReportConfigEcho {
  double threshold = kDefaultAlphaThreshold;
  int expected_runs = 5;
  int jsd_log_base = 2;
  int precision = 2;

  bool operator==(const ReportConfigEcho&) const = default;
};

struct EvaluationReport {
  ReportConfigEcho config;
  std::vector<PartitionEntry> partition;          // descending alpha
  std::vector<QuestionAgreement> agreement;       // partition order
  std::vector<QuestionDisagreement> disagreement; // partition order
  std::vector<ExclusionEntry> exclusions;         // sorted
  std::vector<ReportError> errors;                // sorted

  bool has_metric_rows() const {
    for (const auto& q : agreement)
      if (!q.rows.empty()) return true;
    for (const auto& q : disagreement)
      if (!q.rows.empty()) return true;
    return false;
  }

  bool operator==(const EvaluationReport&) const = default;
};

// One model's predictions, one run set per question.
struct ModelPredictions {
  std::string name;
  std::string family;
  std::vector<PredictionRunSet> runsets;
};

// ---------------------------------------------------------------------------
// Protocol

namespace detail {

inline const AnnotationTable* find_table(std::span<const AnnotationTable> tables,
                                         std::string_view question) {
  for (const auto& t : tables)
    if (t.question() == question) return &t;
  return nullptr;
}

inline const PredictionRunSet* find_runs(std::span<const PredictionRunSet> runsets,
                                         std::string_view question) {
  for (const auto& r : runsets)
    if (r.question() == question) return &r;
  return nullptr;
}

inline std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? "; " : "") + parts[i];
  return out;
}

}  // namespace detail

// Computes alpha per question over all annotated items, partitions at the
// threshold, then evaluates every model on each partitioned question with
// the metric family its subset calls for. Per-question failures become
// report entries, never a global failure. Deterministic for identical
// inputs regardless of input row order.
inline EvaluationReport run_protocol(std::span<const AnnotationTable> annotations,
                                     std::span<const ModelPredictions> models,
                                     const Config& config) {
  EvaluationReport report;
  report.config.threshold = config.threshold;
  report.config.expected_runs = config.expected_runs;
  report.config.jsd_log_base = config.jsd_log_base;
  report.config.precision = config.precision;

  // Reliability per question, annotation side only.
  std::vector<ReliabilityScore> scores;
  for (const auto& spec : config.questions) {
    const AnnotationTable* table = detail::find_table(annotations, spec.id);
    if (table == nullptr) {
      report.errors.push_back({spec.id, "", "no annotation table"});
      continue;
    }

    std::set<std::string> unknown_items;
    for (std::size_t i = 0; i < table->items().size(); ++i)
      for (std::size_t a = 0; a < table->annotators().size(); ++a) {
        const Cell& c = table->cell(i, a);
        if (c && !spec.domain.contains(*c)) unknown_items.insert(table->items()[i]);
      }
    if (!unknown_items.empty()) {
      for (const auto& item : unknown_items)
        report.exclusions.push_back({spec.id, item, "", ExclusionReason::kUnknownCategory});
      report.errors.push_back(
          {spec.id, "", "annotation labels outside the declared domain"});
      continue;
    }

    try {
      scores.push_back(krippendorff_alpha(*table));
    } catch (const NoPairableValues& e) {
      report.errors.push_back({spec.id, "", e.what()});
    }
  }

  // Annotated questions nobody declared are surfaced, never silently dropped.
  for (const auto& table : annotations) {
    const bool declared =
        std::any_of(config.questions.begin(), config.questions.end(),
                    [&](const QuestionSpec& q) { return q.id == table.question(); });
    if (!declared)
      report.errors.push_back(
          {table.question(), "", "question not declared in the question set"});
  }

  Partition partition = partition_questions(scores, config.threshold);

  // Partition entries, best-agreed first (ties broken by question id).
  for (const auto& s : partition.agreement)
    report.partition.push_back({s.question, s.alpha, s.n_pairable, s.n_units, true});
  for (const auto& s : partition.disagreement)
    report.partition.push_back({s.question, s.alpha, s.n_pairable, s.n_units, false});
  std::sort(report.partition.begin(), report.partition.end(),
            [](const PartitionEntry& a, const PartitionEntry& b) {
              if (a.alpha != b.alpha) return a.alpha > b.alpha;
              return a.question < b.question;
            });

  for (const auto& entry : report.partition) {
    if (entry.agreement)
      report.agreement.push_back({entry.question, {}});
    else
      report.disagreement.push_back({entry.question, {}});
  }

  auto spec_of = [&](const std::string& id) -> const QuestionSpec& {
    for (const auto& q : config.questions)
      if (q.id == id) return q;
    throw InvalidInput("unknown question '" + id + "'");
  };

  for (const auto& model : models) {
    ValidationReport validation =
        validate_bundle(annotations, model.runsets, config.questions);

    for (const auto& entry : report.partition) {
      const QuestionDiagnostics* diag = validation.find(entry.question);
      if (diag == nullptr || !diag->evaluable) {
        report.errors.push_back(
            {entry.question, model.name,
             diag == nullptr ? "not validated" : detail::join(diag->problems)});
        continue;
      }

      const QuestionSpec& spec = spec_of(entry.question);
      const AnnotationTable* table = detail::find_table(annotations, entry.question);
      const PredictionRunSet* runs = detail::find_runs(model.runsets, entry.question);

      try {
        if (entry.agreement) {
          AgreementMetrics metrics = evaluate_agreement(spec, *table, *runs);
          for (auto& q : report.agreement)
            if (q.question == entry.question)
              q.rows.push_back({model.name, model.family, metrics.precision,
                                metrics.recall, metrics.f1, metrics.counts,
                                metrics.n_items});
          for (const auto& ex : metrics.excluded)
            report.exclusions.push_back({entry.question, ex.item, model.name, ex.reason});
        } else {
          SoftLabelResult soft = soft_labels(spec, *table, *runs);
          DistributionMetrics metrics = distribution_metrics(entry.question, soft.pairs);
          for (auto& q : report.disagreement)
            if (q.question == entry.question)
              q.rows.push_back({model.name, model.family, metrics.brier, metrics.jsd,
                                metrics.n_items});
          for (const auto& ex : soft.excluded)
            report.exclusions.push_back({entry.question, ex.item, model.name, ex.reason});
        }
      } catch (const NoEvaluableItems& e) {
        report.errors.push_back({entry.question, model.name, e.what()});
      }
    }
  }

  auto exclusion_key = [](const ExclusionEntry& e) {
    return std::tie(e.question, e.item, e.model, e.reason);
  };
  std::sort(report.exclusions.begin(), report.exclusions.end(),
            [&](const ExclusionEntry& a, const ExclusionEntry& b) {
              return exclusion_key(a) < exclusion_key(b);
            });
  report.exclusions.erase(
      std::unique(report.exclusions.begin(), report.exclusions.end()),
      report.exclusions.end());

  std::sort(report.errors.begin(), report.errors.end(),
            [](const ReportError& a, const ReportError& b) {
              return std::tie(a.question, a.model, a.message) <
                     std::tie(b.question, b.model, b.message);
            });

  return report;
}

// ---------------------------------------------------------------------------
// Machine format: canonical JSON, full precision, lossless round trip

inline std::string emit_report_machine(const EvaluationReport& report) {
  nlohmann::json doc;

  doc["config"] = {{"threshold", report.config.threshold},
                   {"expected_runs", report.config.expected_runs},
                   {"jsd_log_base", report.config.jsd_log_base},
                   {"precision", report.config.precision}};

  doc["partition"] = nlohmann::json::array();
  for (const auto& p : report.partition)
    doc["partition"].push_back({{"question", p.question},
                                {"alpha", p.alpha},
                                {"n_pairable", p.n_pairable},
                                {"n_units", p.n_units},
                                {"subset", p.agreement ? "agree" : "disagree"}});

  doc["agreement"] = nlohmann::json::array();
  for (const auto& q : report.agreement) {
    nlohmann::json block;
    block["question"] = q.question;
    block["models"] = nlohmann::json::array();
    for (const auto& r : q.rows)
      block["models"].push_back({{"model", r.model},
                                 {"family", r.family},
                                 {"precision", r.precision},
                                 {"recall", r.recall},
                                 {"f1", r.f1},
                                 {"tp", r.counts.tp},
                                 {"fp", r.counts.fp},
                                 {"fn", r.counts.fn},
                                 {"tn", r.counts.tn},
                                 {"n_items", r.n_items}});
    doc["agreement"].push_back(block);
  }

  doc["disagreement"] = nlohmann::json::array();
  for (const auto& q : report.disagreement) {
    nlohmann::json block;
    block["question"] = q.question;
    block["models"] = nlohmann::json::array();
    for (const auto& r : q.rows)
      block["models"].push_back({{"model", r.model},
                                 {"family", r.family},
                                 {"brier", r.brier},
                                 {"jsd", r.jsd},
                                 {"n_items", r.n_items}});
    doc["disagreement"].push_back(block);
  }

  doc["exclusions"] = nlohmann::json::array();
  for (const auto& e : report.exclusions)
    doc["exclusions"].push_back({{"question", e.question},
                                 {"item", e.item},
                                 {"model", e.model},
                                 {"reason", std::string(to_string(e.reason))}});

  doc["errors"] = nlohmann::json::array();
  for (const auto& e : report.errors)
    doc["errors"].push_back(
        {{"question", e.question}, {"model", e.model}, {"message", e.message}});

  return doc.dump(2) + "\n";
}

namespace detail {
EvaluationReport parse_report_checked(const nlohmann::json& doc);
}

inline EvaluationReport parse_report(std::string_view text) {
  nlohmann::json doc = nlohmann::json::parse(text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object())
    throw ParseError("report is not a JSON object");
  try {
    return detail::parse_report_checked(doc);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed report: ") + e.what());
  }
}

inline EvaluationReport detail::parse_report_checked(const nlohmann::json& doc) {
  EvaluationReport report;
  const auto& config = doc.at("config");
  report.config.threshold = config.at("threshold").get<double>();
  report.config.expected_runs = config.at("expected_runs").get<int>();
  report.config.jsd_log_base = config.at("jsd_log_base").get<int>();
  report.config.precision = config.at("precision").get<int>();

  for (const auto& p : doc.at("partition")) {
    PartitionEntry entry;
    entry.question = p.at("question").get<std::string>();
    entry.alpha = p.at("alpha").get<double>();
    entry.n_pairable = p.at("n_pairable").get<std::int64_t>();
    entry.n_units = p.at("n_units").get<std::int64_t>();
    const std::string subset = p.at("subset").get<std::string>();
    if (subset != "agree" && subset != "disagree")
      throw ParseError("unknown subset '" + subset + "'");
    entry.agreement = subset == "agree";
    report.partition.push_back(std::move(entry));
  }

  for (const auto& q : doc.at("agreement")) {
    QuestionAgreement block;
    block.question = q.at("question").get<std::string>();
    for (const auto& m : q.at("models")) {
      AgreementRow row;
      row.model = m.at("model").get<std::string>();
      row.family = m.at("family").get<std::string>();
      row.precision = m.at("precision").get<double>();
      row.recall = m.at("recall").get<double>();
      row.f1 = m.at("f1").get<double>();
      row.counts.tp = m.at("tp").get<std::int64_t>();
      row.counts.fp = m.at("fp").get<std::int64_t>();
      row.counts.fn = m.at("fn").get<std::int64_t>();
      row.counts.tn = m.at("tn").get<std::int64_t>();
      row.n_items = m.at("n_items").get<std::int64_t>();
      block.rows.push_back(std::move(row));
    }
    report.agreement.push_back(std::move(block));
  }

  for (const auto& q : doc.at("disagreement")) {
    QuestionDisagreement block;
    block.question = q.at("question").get<std::string>();
    for (const auto& m : q.at("models")) {
      DisagreementRow row;
      row.model = m.at("model").get<std::string>();
      row.family = m.at("family").get<std::string>();
      row.brier = m.at("brier").get<double>();
      row.jsd = m.at("jsd").get<double>();
      row.n_items = m.at("n_items").get<std::int64_t>();
      block.rows.push_back(std::move(row));
    }
    report.disagreement.push_back(std::move(block));
  }

  for (const auto& e : doc.at("exclusions")) {
    ExclusionEntry entry;
    entry.question = e.at("question").get<std::string>();
    entry.item = e.at("item").get<std::string>();
    entry.model = e.at("model").get<std::string>();
    auto reason = exclusion_reason_from(e.at("reason").get<std::string>());
    if (!reason)
      throw ParseError("unknown exclusion reason '" +
                       e.at("reason").get<std::string>() + "'");
    entry.reason = *reason;
    report.exclusions.push_back(std::move(entry));
  }

  for (const auto& e : doc.at("errors")) {
    ReportError entry;
    entry.question = e.at("question").get<std::string>();
    entry.model = e.at("model").get<std::string>();
    entry.message = e.at("message").get<std::string>();
    report.errors.push_back(std::move(entry));
  }

  return report;
}

// ---------------------------------------------------------------------------
// Human-readable format

namespace detail {

inline std::string fixed(double value, int precision) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.*f", precision, value);
  return buffer;
}

// Simple aligned table: text columns left-aligned, numeric ones right-aligned.
inline std::string render_table(const std::vector<std::string>& headers,
                                const std::vector<std::vector<std::string>>& rows,
                                const std::vector<bool>& right_align) {
  std::vector<std::size_t> widths(headers.size());
  for (std::size_t c = 0; c < headers.size(); ++c) widths[c] = headers[c].size();
  for (const auto& row : rows)
    for (std::size_t c = 0; c < row.size(); ++c)
      widths[c] = std::max(widths[c], row[c].size());

  auto render_row = [&](const std::vector<std::string>& row) {
    std::string line;
    for (std::size_t c = 0; c < row.size(); ++c) {
      std::string cell = row[c];
      if (right_align[c])
        cell.insert(cell.begin(), widths[c] - cell.size(), ' ');
      else
        cell.append(widths[c] - cell.size(), ' ');
      line += cell;
      if (c + 1 < row.size()) line += "  ";
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    return line + "\n";
  };

  std::string out = render_row(headers);
  for (const auto& row : rows) out += render_row(row);
  return out;
}

// Appends '*' to the best value per family per column; first row wins ties.
// `larger_is_better` selects the direction per metric column.
template <typename Row>
void mark_best_in_family(std::vector<std::vector<std::string>>& cells,
                         const std::vector<Row>& rows,
                         const std::vector<double Row::*>& metrics,
                         std::size_t first_metric_column, bool larger_is_better) {
  for (std::size_t m = 0; m < metrics.size(); ++m) {
    std::map<std::string, std::size_t> best;
    for (std::size_t r = 0; r < rows.size(); ++r) {
      auto [it, fresh] = best.try_emplace(rows[r].family, r);
      if (fresh) continue;
      const double current = rows[it->second].*metrics[m];
      const double candidate = rows[r].*metrics[m];
      if (larger_is_better ? candidate > current : candidate < current)
        it->second = r;
    }
    for (const auto& [family, r] : best) cells[r][first_metric_column + m] += "*";
  }
}

}  // namespace detail

// Mirrors the benchmark tables: one block per question, one row per model,
// the best value within each model family starred per metric column.
inline std::string emit_report_table(const EvaluationReport& report) {
  const int precision = report.config.precision;
  std::string out;

  out += "hlveval report\n";
  out += "==============\n";
  out += "config: threshold=" + detail::fixed(report.config.threshold, 3) +
         "  expected_runs=" + std::to_string(report.config.expected_runs) +
         "  jsd_log_base=" + std::to_string(report.config.jsd_log_base) +
         "  precision=" + std::to_string(report.config.precision) + "\n\n";

  out += "partition (alpha >= threshold -> agreement subset)\n";
  out += "--------------------------------------------------\n";
  if (report.partition.empty()) {
    out += "(no questions)\n";
  } else {
    std::vector<std::vector<std::string>> rows;
    for (const auto& p : report.partition)
      rows.push_back({p.question, detail::fixed(p.alpha, precision),
                      std::to_string(p.n_pairable), std::to_string(p.n_units),
                      p.agreement ? "agree" : "disagree"});
    out += detail::render_table({"question", "alpha", "n_pairable", "n_units", "subset"},
                                rows, {false, true, true, true, false});
  }
  out += "\n";

  out += "agreement subset: precision / recall / F1 vs human majority (higher is better)\n";
  out += "------------------------------------------------------------------------------\n";
  if (report.agreement.empty()) {
    out += "(no questions)\n";
  } else {
    for (const auto& q : report.agreement) {
      out += "question: " + q.question + "\n";
      if (q.rows.empty()) {
        out += "(no models evaluated)\n";
        continue;
      }
      std::vector<std::vector<std::string>> rows;
      for (const auto& r : q.rows)
        rows.push_back({r.model, r.family, detail::fixed(r.precision, precision),
                        detail::fixed(r.recall, precision),
                        detail::fixed(r.f1, precision), std::to_string(r.n_items)});
      detail::mark_best_in_family<AgreementRow>(
          rows, q.rows,
          {&AgreementRow::precision, &AgreementRow::recall, &AgreementRow::f1}, 2,
          /*larger_is_better=*/true);
      out += detail::render_table({"model", "family", "precision", "recall", "f1", "n_items"},
                                  rows, {false, false, true, true, true, true});
    }
  }
  out += "(* best value within model family)\n\n";

  out += "disagreement subset: Brier / JSD on soft labels (lower is better)\n";
  out += "-----------------------------------------------------------------\n";
  if (report.disagreement.empty()) {
    out += "(no questions)\n";
  } else {
    for (const auto& q : report.disagreement) {
      out += "question: " + q.question + "\n";
      if (q.rows.empty()) {
        out += "(no models evaluated)\n";
        continue;
      }
      std::vector<std::vector<std::string>> rows;
      for (const auto& r : q.rows)
        rows.push_back({r.model, r.family, detail::fixed(r.brier, precision),
                        detail::fixed(r.jsd, precision), std::to_string(r.n_items)});
      detail::mark_best_in_family<DisagreementRow>(
          rows, q.rows, {&DisagreementRow::brier, &DisagreementRow::jsd}, 2,
          /*larger_is_better=*/false);
      out += detail::render_table({"model", "family", "brier", "jsd", "n_items"}, rows,
                                  {false, false, true, true, true});
    }
  }
  out += "(* best value within model family)\n\n";

  out += "exclusions\n";
  out += "----------\n";
  if (report.exclusions.empty()) {
    out += "(none)\n";
  } else {
    std::vector<std::vector<std::string>> rows;
    for (const auto& e : report.exclusions)
      rows.push_back({e.question, e.item, e.model.empty() ? "-" : e.model,
                      std::string(to_string(e.reason))});
    out += detail::render_table({"question", "item", "model", "reason"}, rows,
                                {false, false, false, false});
  }
  out += "\n";

  out += "errors\n";
  out += "------\n";
  if (report.errors.empty()) {
    out += "(none)\n";
  } else {
    std::vector<std::vector<std::string>> rows;
    for (const auto& e : report.errors)
      rows.push_back({e.question, e.model.empty() ? "-" : e.model, e.message});
    out += detail::render_table({"question", "model", "message"}, rows,
                                {false, false, false});
  }

  return out;
}

enum class ReportFormat { kTable, kMachine };

inline std::string emit_report(const EvaluationReport& report, ReportFormat format) {
  return format == ReportFormat::kMachine ? emit_report_machine(report)
                                          : emit_report_table(report);
}

}  // namespace hlveval
