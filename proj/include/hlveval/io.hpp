// File formats: annotation CSV, prediction JSONL (one record per item and
// run, one boolean-like answer per question), and the evaluation config.
// Parsers report recoverable problems as diagnostics and keep going; only
// container-level damage throws.

#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "hlveval/core.hpp"

namespace hlveval {

struct Diagnostic {
  std::size_t line = 0;
  std::string message;

  bool operator==(const Diagnostic&) const = default;
};

// ---------------------------------------------------------------------------
// Plain file helpers

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

inline void write_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write '" + path.string() + "'");
  out << content;
}

namespace detail {

inline std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) {
      lines.push_back(text.substr(start));
      break;
    }
    lines.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  return lines;
}

inline std::vector<std::string> split_csv_row(std::string_view line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(trim(line.substr(start)));
      break;
    }
    fields.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return fields;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Annotations: delimited text, one row per (item, question, annotator)

inline constexpr std::string_view kAnnotationHeader = "item_id,question_id,annotator_id,label";

struct AnnotationIngest {
  std::vector<AnnotationTable> tables;  // one per question, first-appearance order
  std::vector<Diagnostic> diagnostics;
};

// An empty label field is an explicit MISSING cell; a row that never
// appears is an implicit one. Repeats of the same (item, question,
// annotator) are dropped with a diagnostic when the label agrees and raise
// DuplicateCell when it does not. Category ids are trimmed, never case-folded.
inline AnnotationIngest parse_annotations(std::string_view text) {
  AnnotationIngest result;

  struct QuestionAccumulator {
    std::vector<std::string> items;
    std::map<std::string, std::size_t> item_index;
    std::vector<std::string> annotators;
    std::map<std::string, std::size_t> annotator_index;
    std::map<std::pair<std::size_t, std::size_t>, Cell> cells;
  };
  std::vector<std::string> question_order;
  std::map<std::string, QuestionAccumulator> questions;

  std::vector<std::string_view> lines = detail::split_lines(text);
  bool header_seen = false;
  std::size_t records = 0;

  for (std::size_t li = 0; li < lines.size(); ++li) {
    const std::size_t line_number = li + 1;
    std::string_view raw = lines[li];
    if (trim(raw).empty()) continue;

    std::vector<std::string> fields = detail::split_csv_row(raw);
    if (!header_seen) {
      std::string joined;
      for (std::size_t f = 0; f < fields.size(); ++f)
        joined += (f ? "," : "") + fields[f];
      if (joined != kAnnotationHeader)
        throw ParseError("expected header '" + std::string(kAnnotationHeader) + "'",
                         line_number);
      header_seen = true;
      continue;
    }

    if (fields.size() != 4)
      throw ParseError("expected 4 fields, got " + std::to_string(fields.size()),
                       line_number);
    const std::string& item = fields[0];
    const std::string& question = fields[1];
    const std::string& annotator = fields[2];
    const std::string& label = fields[3];
    if (item.empty() || question.empty() || annotator.empty())
      throw ParseError("item_id, question_id and annotator_id must be non-empty",
                       line_number);

    auto [it, inserted] = questions.try_emplace(question);
    if (inserted) question_order.push_back(question);
    QuestionAccumulator& acc = it->second;

    auto intern = [](std::vector<std::string>& ids, std::map<std::string, std::size_t>& index,
                     const std::string& id) {
      auto [pos, fresh] = index.try_emplace(id, ids.size());
      if (fresh) ids.push_back(id);
      return pos->second;
    };
    const std::size_t item_idx = intern(acc.items, acc.item_index, item);
    const std::size_t ann_idx = intern(acc.annotators, acc.annotator_index, annotator);

    Cell value = label.empty() ? Cell{} : Cell{label};
    auto [cell_it, fresh_cell] = acc.cells.try_emplace({item_idx, ann_idx}, value);
    if (!fresh_cell) {
      if (cell_it->second == value) {
        result.diagnostics.push_back(
            {line_number, "duplicate row for (" + item + ", " + question + ", " +
                              annotator + ") ignored"});
      } else {
        throw DuplicateCell("conflicting labels for (" + item + ", " + question +
                                ", " + annotator + ")",
                            line_number);
      }
    }
    ++records;
  }

  if (records == 0) throw ParseError("no records");

  for (const auto& qid : question_order) {
    QuestionAccumulator& acc = questions[qid];
    std::vector<Cell> grid(acc.items.size() * acc.annotators.size());
    for (const auto& [key, value] : acc.cells)
      grid[key.first * acc.annotators.size() + key.second] = value;
    result.tables.emplace_back(qid, std::move(acc.items), std::move(acc.annotators),
                               std::move(grid));
  }
  return result;
}

inline AnnotationIngest ingest_annotations(const std::filesystem::path& path) {
  return parse_annotations(read_file(path));
}

// Full-grid serialization: every cell gets a row, MISSING as an empty label,
// so re-ingesting reproduces the table cell for cell including all-missing
// annotator columns.
inline std::string serialize_annotations(std::span<const AnnotationTable> tables) {
  std::string out{kAnnotationHeader};
  out += '\n';
  for (const auto& table : tables)
    for (std::size_t i = 0; i < table.items().size(); ++i)
      for (std::size_t a = 0; a < table.annotators().size(); ++a) {
        const Cell& cell = table.cell(i, a);
        out += table.items()[i];
        out += ',';
        out += table.question();
        out += ',';
        out += table.annotators()[a];
        out += ',';
        if (cell) out += *cell;
        out += '\n';
      }
  return out;
}

// ---------------------------------------------------------------------------
// Predictions: JSON lines, one record per (item, run)

struct PredictionIngest {
  std::vector<PredictionRunSet> runsets;  // one per question, spec order
  std::vector<Diagnostic> diagnostics;
};

// Records answer all declared questions in a single object, mirroring a
// one-shot structured-output inference. Schema failures are all-or-nothing:
// a record missing one answer (or carrying a malformed one) leaves every
// question INVALID for that (item, run). Booleans map onto the positive /
// remaining category of a binary domain; strings must name a category.
inline PredictionIngest parse_predictions(std::string_view text,
                                          std::span<const QuestionSpec> questions) {
  PredictionIngest result;
  if (questions.empty()) throw InvalidInput("no questions declared");

  std::vector<std::string> items;
  std::map<std::string, std::size_t> item_index;
  std::vector<std::string> runs;
  std::map<std::string, std::size_t> run_index;
  // (item, run) -> one cell per question; empty vector marks the all-INVALID record
  std::map<std::pair<std::size_t, std::size_t>, std::vector<Cell>> records;

  auto intern = [](std::vector<std::string>& ids, std::map<std::string, std::size_t>& index,
                   const std::string& id) {
    auto [pos, fresh] = index.try_emplace(id, ids.size());
    if (fresh) ids.push_back(id);
    return pos->second;
  };

  std::size_t record_count = 0;
  std::vector<std::string_view> lines = detail::split_lines(text);
  for (std::size_t li = 0; li < lines.size(); ++li) {
    const std::size_t line_number = li + 1;
    if (trim(lines[li]).empty()) continue;

    nlohmann::json record = nlohmann::json::parse(lines[li], nullptr, false);
    if (record.is_discarded() || !record.is_object()) {
      result.diagnostics.push_back({line_number, "malformed record skipped"});
      continue;
    }
    ++record_count;

    auto id_field = [&](const char* key) -> std::string {
      if (!record.contains(key) || !record[key].is_string()) return {};
      return trim(record[key].get<std::string>());
    };
    const std::string item = id_field("item_id");
    const std::string run = id_field("run_id");
    if (item.empty() || run.empty()) {
      result.diagnostics.push_back(
          {line_number, "record without item_id/run_id skipped"});
      continue;
    }

    // All-or-nothing schema check across the declared questions.
    std::vector<Cell> answers;
    std::string problem;
    for (const auto& spec : questions) {
      if (!record.contains(spec.id)) {
        problem = "missing answer for '" + spec.id + "'";
        break;
      }
      const nlohmann::json& value = record[spec.id];
      if (value.is_boolean()) {
        if (spec.domain.size() != 2) {
          problem = "boolean answer for non-binary question '" + spec.id + "'";
          break;
        }
        if (value.get<bool>()) {
          answers.emplace_back(spec.positive_category);
        } else {
          for (const auto& c : spec.domain.categories())
            if (c != spec.positive_category) {
              answers.emplace_back(c);
              break;
            }
        }
      } else if (value.is_string()) {
        std::string category = trim(value.get<std::string>());
        if (!spec.domain.contains(category)) {
          problem = "answer '" + category + "' is not in the domain of '" + spec.id + "'";
          break;
        }
        answers.emplace_back(std::move(category));
      } else {
        problem = "answer for '" + spec.id + "' is neither boolean nor string";
        break;
      }
    }

    const std::size_t item_idx = intern(items, item_index, item);
    const std::size_t run_idx = intern(runs, run_index, run);

    if (!problem.empty()) {
      records[{item_idx, run_idx}] = {};
      result.diagnostics.push_back(
          {line_number, problem + "; all answers for (" + item + ", " + run +
                            ") marked invalid"});
      continue;
    }

    auto [it, fresh] = records.try_emplace({item_idx, run_idx}, answers);
    if (!fresh) {
      if (it->second == answers) {
        result.diagnostics.push_back(
            {line_number, "duplicate record for (" + item + ", " + run + ") ignored"});
      } else {
        it->second = {};
        result.diagnostics.push_back(
            {line_number, "conflicting records for (" + item + ", " + run +
                              "); all answers marked invalid"});
      }
    }
  }

  if (record_count == 0) throw ParseError("no records");

  // Materialize one grid per question. Absent records stay INVALID.
  for (std::size_t q = 0; q < questions.size(); ++q) {
    std::vector<Cell> grid(items.size() * runs.size());
    for (const auto& [key, answers] : records)
      if (!answers.empty()) grid[key.first * runs.size() + key.second] = answers[q];
    result.runsets.emplace_back(questions[q].id, items, runs, std::move(grid));
  }
  return result;
}

inline PredictionIngest ingest_predictions(const std::filesystem::path& path,
                                           std::span<const QuestionSpec> questions) {
  return parse_predictions(read_file(path), questions);
}

// One JSON line per (item, run), answers as category strings. Question cells
// are emitted only for valid answers; a record whose answers are all INVALID
// keeps just its ids. All run sets must share the same item and run lists.
inline std::string serialize_predictions(std::span<const PredictionRunSet> runsets) {
  if (runsets.empty()) return {};
  const PredictionRunSet& first = runsets.front();
  for (const auto& rs : runsets)
    if (rs.items() != first.items() || rs.runs() != first.runs())
      throw InvalidInput("prediction run sets disagree on items or runs");

  std::string out;
  for (std::size_t i = 0; i < first.items().size(); ++i)
    for (std::size_t r = 0; r < first.runs().size(); ++r) {
      nlohmann::json record;
      record["item_id"] = first.items()[i];
      record["run_id"] = first.runs()[r];
      for (const auto& rs : runsets)
        if (rs.cell(i, r)) record[rs.question()] = *rs.cell(i, r);
      out += record.dump();
      out += '\n';
    }
  return out;
}

// ---------------------------------------------------------------------------
// Config

struct ModelEntry {
  std::string file;    // matched against the basename of a predictions path
  std::string name;
  std::string family;

  bool operator==(const ModelEntry&) const = default;
};

struct Config {
  double threshold = 0.667;
  int expected_runs = 5;
  int precision = 2;       // decimals in human-readable output
  int jsd_log_base = 2;    // fixed; echoed into reports
  std::vector<QuestionSpec> questions;
  std::vector<ModelEntry> models;

  const ModelEntry* model_for(const std::filesystem::path& predictions_path) const {
    const std::string base = predictions_path.filename().string();
    for (const auto& m : models)
      if (m.file == base || m.file == predictions_path.string()) return &m;
    return nullptr;
  }

  bool operator==(const Config&) const = default;
};

namespace detail {
Config parse_config_checked(const nlohmann::json& doc);
}

inline Config parse_config(std::string_view text) {
  nlohmann::json doc = nlohmann::json::parse(text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object())
    throw ParseError("config is not a JSON object");
  try {
    return detail::parse_config_checked(doc);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed config: ") + e.what());
  }
}

inline Config detail::parse_config_checked(const nlohmann::json& doc) {
  Config config;
  config.threshold = doc.value("threshold", config.threshold);
  config.expected_runs = doc.value("expected_runs", config.expected_runs);
  config.precision = doc.value("precision", config.precision);
  config.jsd_log_base = doc.value("jsd_log_base", config.jsd_log_base);

  if (!(config.threshold == config.threshold))  // NaN
    throw ParseError("threshold must be a number");
  if (config.expected_runs < 1) throw ParseError("expected_runs must be >= 1");
  if (config.precision < 0 || config.precision > 17)
    throw ParseError("precision must lie in [0, 17]");
  if (config.jsd_log_base != 2)
    throw ParseError("jsd_log_base is fixed at 2");

  if (!doc.contains("questions") || !doc["questions"].is_array() ||
      doc["questions"].empty())
    throw ParseError("config needs a non-empty 'questions' array");

  std::set<std::string> seen;
  for (const auto& q : doc["questions"]) {
    if (!q.is_object() || !q.contains("id") || !q["id"].is_string())
      throw ParseError("every question needs a string 'id'");
    QuestionSpec spec;
    spec.id = trim(q["id"].get<std::string>());
    spec.description = q.value("description", std::string{});
    std::vector<std::string> categories = {"yes", "no"};
    if (q.contains("categories")) {
      if (!q["categories"].is_array())
        throw ParseError("'categories' must be an array for question '" + spec.id + "'");
      categories.clear();
      for (const auto& c : q["categories"]) {
        if (!c.is_string())
          throw ParseError("categories must be strings for question '" + spec.id + "'");
        categories.push_back(trim(c.get<std::string>()));
      }
    }
    try {
      spec.domain = LabelDomain(categories);
      spec.positive_category = trim(q.value("positive", std::string{"yes"}));
      spec.validate();
    } catch (const InvalidInput& e) {
      throw ParseError(std::string("question '") + spec.id + "': " + e.what());
    }
    if (spec.id == "item_id" || spec.id == "run_id")
      throw ParseError("question id '" + spec.id + "' collides with a record field");
    if (!seen.insert(spec.id).second)
      throw ParseError("duplicate question id '" + spec.id + "'");
    config.questions.push_back(std::move(spec));
  }

  if (doc.contains("models")) {
    if (!doc["models"].is_array()) throw ParseError("'models' must be an array");
    for (const auto& m : doc["models"]) {
      if (!m.is_object() || !m.contains("file") || !m["file"].is_string())
        throw ParseError("every model entry needs a string 'file'");
      ModelEntry entry;
      entry.file = trim(m["file"].get<std::string>());
      if (entry.file.empty()) throw ParseError("model 'file' must be non-empty");
      entry.name = trim(m.value("name", std::string{}));
      if (entry.name.empty())
        entry.name = std::filesystem::path(entry.file).stem().string();
      entry.family = trim(m.value("family", std::string{}));
      if (entry.family.empty()) entry.family = entry.name;
      config.models.push_back(std::move(entry));
    }
  }
  return config;
}

inline Config load_config(const std::filesystem::path& path) {
  return parse_config(read_file(path));
}

inline std::string serialize_config(const Config& config) {
  nlohmann::json doc;
  doc["threshold"] = config.threshold;
  doc["expected_runs"] = config.expected_runs;
  doc["precision"] = config.precision;
  doc["jsd_log_base"] = config.jsd_log_base;
  doc["questions"] = nlohmann::json::array();
  for (const auto& q : config.questions) {
    nlohmann::json spec;
    spec["id"] = q.id;
    if (!q.description.empty()) spec["description"] = q.description;
    spec["categories"] = q.domain.categories();
    spec["positive"] = q.positive_category;
    doc["questions"].push_back(spec);
  }
  doc["models"] = nlohmann::json::array();
  for (const auto& m : config.models) {
    nlohmann::json entry;
    entry["file"] = m.file;
    entry["name"] = m.name;
    entry["family"] = m.family;
    doc["models"].push_back(entry);
  }
  return doc.dump(2) + "\n";
}

}  // namespace hlveval
