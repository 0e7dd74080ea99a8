// hlveval command line: reliability, partition, evaluate, report, frames,
// synth. Exit codes: 0 success, 1 parse/config error, 2 non-evaluable bundle.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hlveval/core.hpp"
#include "hlveval/frame_plan.hpp"
#include "hlveval/io.hpp"
#include "hlveval/reliability.hpp"
#include "hlveval/report.hpp"
#include "hlveval/synth.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitParseError = 1;
constexpr int kExitNotEvaluable = 2;

void print_diagnostics(const std::string& file, const std::vector<hlveval::Diagnostic>& diagnostics) {
  for (const auto& d : diagnostics)
    std::cerr << file << ":" << d.line << ": " << d.message << "\n";
}

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty())
    std::cout << text;
  else
    hlveval::write_file(out_path, text);
}

// Scores sorted by descending alpha, the order the partition table uses.
std::vector<hlveval::ReliabilityScore> scores_by_alpha(
    const std::vector<hlveval::AnnotationTable>& tables, std::ostream& warnings) {
  std::vector<hlveval::ReliabilityScore> scores;
  for (const auto& table : tables) {
    try {
      scores.push_back(hlveval::krippendorff_alpha(table));
    } catch (const hlveval::NoPairableValues& e) {
      warnings << "warning: " << e.what() << "\n";
    }
  }
  std::sort(scores.begin(), scores.end(),
            [](const hlveval::ReliabilityScore& a, const hlveval::ReliabilityScore& b) {
              if (a.alpha != b.alpha) return a.alpha > b.alpha;
              return a.question < b.question;
            });
  return scores;
}

int run_reliability(const std::string& annotations_path, int precision) {
  hlveval::AnnotationIngest ingest = hlveval::ingest_annotations(annotations_path);
  print_diagnostics(annotations_path, ingest.diagnostics);

  std::vector<hlveval::ReliabilityScore> scores = scores_by_alpha(ingest.tables, std::cerr);
  std::vector<std::vector<std::string>> rows;
  for (const auto& s : scores)
    rows.push_back({s.question, hlveval::detail::fixed(s.alpha, precision),
                    std::to_string(s.n_pairable), std::to_string(s.n_units)});
  std::cout << hlveval::detail::render_table({"question", "alpha", "n_pairable", "n_units"},
                                             rows, {false, true, true, true});
  return kExitOk;
}

int run_partition(const std::string& annotations_path, double threshold, int precision) {
  hlveval::AnnotationIngest ingest = hlveval::ingest_annotations(annotations_path);
  print_diagnostics(annotations_path, ingest.diagnostics);

  std::vector<hlveval::ReliabilityScore> scores = scores_by_alpha(ingest.tables, std::cerr);
  hlveval::Partition partition = hlveval::partition_questions(scores, threshold);

  std::vector<std::vector<std::string>> rows;
  for (const auto& s : partition.agreement)
    rows.push_back({s.question, hlveval::detail::fixed(s.alpha, precision), "agree"});
  for (const auto& s : partition.disagreement)
    rows.push_back({s.question, hlveval::detail::fixed(s.alpha, precision), "disagree"});
  std::cout << hlveval::detail::render_table({"question", "alpha", "subset"}, rows,
                                             {false, true, false});
  return kExitOk;
}

int run_evaluate(const std::string& annotations_path,
                 const std::vector<std::string>& prediction_paths,
                 const std::string& config_path, const std::string& out_path,
                 const std::string& format) {
  hlveval::Config config = hlveval::load_config(config_path);

  hlveval::AnnotationIngest annotations = hlveval::ingest_annotations(annotations_path);
  print_diagnostics(annotations_path, annotations.diagnostics);

  std::vector<hlveval::ModelPredictions> models;
  for (const auto& path : prediction_paths) {
    hlveval::PredictionIngest ingest =
        hlveval::ingest_predictions(path, config.questions);
    print_diagnostics(path, ingest.diagnostics);

    hlveval::ModelPredictions model;
    if (const hlveval::ModelEntry* entry = config.model_for(path)) {
      model.name = entry->name;
      model.family = entry->family;
    } else {
      model.name = std::filesystem::path(path).stem().string();
      model.family = model.name;
    }
    if (!ingest.runsets.empty() &&
        ingest.runsets.front().runs().size() !=
            static_cast<std::size_t>(config.expected_runs))
      std::cerr << "warning: " << path << " has " << ingest.runsets.front().runs().size()
                << " runs, config expects " << config.expected_runs << "\n";
    model.runsets = std::move(ingest.runsets);
    models.push_back(std::move(model));
  }

  hlveval::EvaluationReport report =
      hlveval::run_protocol(annotations.tables, models, config);
  emit(hlveval::emit_report(report, format == "table"
                                        ? hlveval::ReportFormat::kTable
                                        : hlveval::ReportFormat::kMachine),
       out_path);

  if (!report.has_metric_rows()) {
    std::cerr << "error: nothing evaluable in this bundle\n";
    return kExitNotEvaluable;
  }
  return kExitOk;
}

int run_report(const std::string& report_path, const std::string& format,
               const std::string& out_path) {
  hlveval::EvaluationReport report =
      hlveval::parse_report(hlveval::read_file(report_path));
  emit(hlveval::emit_report(report, format == "machine"
                                        ? hlveval::ReportFormat::kMachine
                                        : hlveval::ReportFormat::kTable),
       out_path);
  return kExitOk;
}

int run_frames(std::int64_t total, double fps, std::int64_t max_frames) {
  hlveval::FrameSamplingPlan plan = hlveval::plan_frames(total, fps, max_frames);
  for (std::int64_t index : plan.indices) std::cout << index << "\n";
  return kExitOk;
}

struct SynthOptions {
  std::int64_t items = 300;
  std::int64_t annotators = 5;
  std::int64_t runs = 5;
  double rate = 0.5;
  double missing = 0.0;
  double fidelity = 1.0;
  std::uint64_t seed = 1;
  std::vector<std::string> questions = {"q1"};
  std::string out_annotations;
  std::string out_predictions;
  std::string out_config;
};

int run_synth(const SynthOptions& options) {
  std::mt19937_64 master(options.seed);

  std::vector<hlveval::QuestionSpec> specs;
  for (const auto& id : options.questions) {
    hlveval::QuestionSpec spec{id, "", hlveval::yes_no_domain(), "yes"};
    spec.validate();
    specs.push_back(std::move(spec));
  }

  std::vector<hlveval::AnnotationTable> tables;
  std::vector<hlveval::PredictionRunSet> runsets;
  for (const auto& spec : specs) {
    hlveval::PanelSpec panel{options.items, options.annotators, options.rate,
                             options.missing, master()};
    tables.push_back(hlveval::generate_panel(panel, spec));
    runsets.push_back(hlveval::generate_runs(tables.back(), spec, options.fidelity,
                                             master(), options.runs));
  }

  hlveval::write_file(options.out_annotations, hlveval::serialize_annotations(tables));
  hlveval::write_file(options.out_predictions, hlveval::serialize_predictions(runsets));

  if (!options.out_config.empty()) {
    hlveval::Config config;
    config.expected_runs = static_cast<int>(options.runs);
    config.questions = specs;
    config.models.push_back(
        {std::filesystem::path(options.out_predictions).filename().string(),
         "synth-model", "synth"});
    hlveval::write_file(options.out_config, hlveval::serialize_config(config));
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Disagreement-aware evaluation of classifier outputs against "
               "non-aggregated human annotations"};
  app.require_subcommand(1);

  // reliability
  std::string rel_annotations;
  int rel_precision = 2;
  CLI::App* reliability = app.add_subcommand(
      "reliability", "Print Krippendorff's alpha per question");
  reliability->add_option("annotations", rel_annotations, "annotation CSV")->required();
  reliability->add_option("--precision", rel_precision, "decimals in output");

  // partition
  std::string part_annotations;
  double part_threshold = hlveval::kDefaultAlphaThreshold;
  int part_precision = 2;
  CLI::App* partition = app.add_subcommand(
      "partition", "Split questions into agreement/disagreement subsets");
  partition->add_option("annotations", part_annotations, "annotation CSV")->required();
  partition->add_option("--threshold", part_threshold, "alpha threshold (default 0.667)");
  partition->add_option("--precision", part_precision, "decimals in output");

  // evaluate
  std::string eval_annotations, eval_config, eval_out;
  std::string eval_format = "machine";
  std::vector<std::string> eval_predictions;
  CLI::App* evaluate = app.add_subcommand(
      "evaluate", "Run the full protocol and emit an evaluation report");
  evaluate->add_option("annotations", eval_annotations, "annotation CSV")->required();
  evaluate->add_option("predictions", eval_predictions, "prediction JSONL, one file per model")
      ->required();
  evaluate->add_option("--config", eval_config, "config JSON")->required();
  evaluate->add_option("--out", eval_out, "write the report here instead of stdout");
  evaluate->add_option("--format", eval_format, "report format")
      ->check(CLI::IsMember({"table", "machine"}));

  // report
  std::string report_path, report_out;
  std::string report_format = "table";
  CLI::App* report = app.add_subcommand(
      "report", "Re-render a machine-readable report");
  report->add_option("report", report_path, "report JSON")->required();
  report->add_option("--format", report_format, "output format")
      ->check(CLI::IsMember({"table", "machine"}));
  report->add_option("--out", report_out, "write here instead of stdout");

  // frames
  std::int64_t frames_total = 0, frames_max = 0;
  double frames_fps = 0.0;
  CLI::App* frames = app.add_subcommand(
      "frames", "Plan adaptive frame sampling indices, one per line");
  frames->add_option("--total", frames_total, "total frame count")->required();
  frames->add_option("--fps", frames_fps, "frames per second")->required();
  frames->add_option("--max", frames_max, "frame budget")->required();

  // synth
  SynthOptions synth_options;
  CLI::App* synth = app.add_subcommand(
      "synth", "Generate synthetic annotations and predictions");
  synth->add_option("--items", synth_options.items, "number of items");
  synth->add_option("--annotators", synth_options.annotators, "panel size");
  synth->add_option("--runs", synth_options.runs, "model runs per item");
  synth->add_option("--rate", synth_options.rate, "per-cell positive rate");
  synth->add_option("--missing", synth_options.missing, "per-cell missing rate");
  synth->add_option("--fidelity", synth_options.fidelity,
                    "probability a run copies the human majority");
  synth->add_option("--seed", synth_options.seed, "RNG seed");
  synth->add_option("--questions", synth_options.questions, "question ids")
      ->delimiter(',');
  synth->add_option("--out-annotations", synth_options.out_annotations, "annotation CSV path")
      ->required();
  synth->add_option("--out-predictions", synth_options.out_predictions, "prediction JSONL path")
      ->required();
  synth->add_option("--out-config", synth_options.out_config, "matching config JSON path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitParseError;
  }

  try {
    if (reliability->parsed()) return run_reliability(rel_annotations, rel_precision);
    if (partition->parsed()) return run_partition(part_annotations, part_threshold, part_precision);
    if (evaluate->parsed())
      return run_evaluate(eval_annotations, eval_predictions, eval_config, eval_out,
                          eval_format);
    if (report->parsed()) return run_report(report_path, report_format, report_out);
    if (frames->parsed()) return run_frames(frames_total, frames_fps, frames_max);
    if (synth->parsed()) return run_synth(synth_options);
  } catch (const hlveval::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParseError;
  } catch (const hlveval::InvalidInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParseError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParseError;
  }
  return kExitOk;
}
