// attrcons: subject-level consolidation of per-image facial attribute
// predictions. Subcommands compute the inconsistency measure over groups,
// rank images by quality, fuse per-image predictions into one attribute
// vector per subject, and audit/correct annotation labels.

#include <cstdlib>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "attrcons/consolidate.hpp"
#include "attrcons/inconsistency.hpp"
#include "attrcons/io.hpp"
#include "attrcons/quality.hpp"
#include "attrcons/report.hpp"
#include "attrcons/synth.hpp"

namespace {

using namespace attrcons;

enum class LogLevel { error = 0, warn = 1, info = 2, debug = 3 };

LogLevel log_threshold() {
  const char* env = std::getenv("ATTRCONS_LOG");
  if (env == nullptr) {
    return LogLevel::warn;
  }
  const std::string level(env);
  if (level == "error") return LogLevel::error;
  if (level == "warn") return LogLevel::warn;
  if (level == "info") return LogLevel::info;
  if (level == "debug") return LogLevel::debug;
  return LogLevel::warn;
}

void log(LogLevel level, const std::string& message) {
  static const LogLevel threshold = log_threshold();
  if (level > threshold) {
    return;
  }
  static const char* names[] = {"error", "warn", "info", "debug"};
  std::cerr << "attrcons [" << names[static_cast<int>(level)] << "] " << message << '\n';
}

struct Options {
  std::string predictions;
  std::string annotations;
  std::string consolidated;
  std::string schema;
  std::string images;
  std::string weights;
  std::string config;
  std::string strategy = "confidence";
  int top_k = 1;
  std::size_t min_group_size = 1;
  std::uint64_t seed = 1;
  bool seed_given = false;
  int jobs = 0;
  std::string out;
  std::string format = "csv";
  bool dry_run = false;
  bool force = false;
};

AttributeSchema schema_or_default(const Options& opt) {
  return opt.schema.empty() ? celeba_schema() : load_schema_file(opt.schema);
}

QualityWeights weights_or_default(const Options& opt) {
  return opt.weights.empty() ? QualityWeights{} : load_weights_file(opt.weights);
}

// File output is atomic; stdout when no --out was given.
void emit(const Options& opt, const std::string& content) {
  if (opt.out.empty()) {
    std::cout << content;
  } else {
    write_file_atomic(opt.out, content, opt.force);
    log(LogLevel::info, "wrote " + opt.out);
  }
}

std::filesystem::path sibling_output(const std::filesystem::path& out,
                                     const std::string& suffix) {
  std::filesystem::path p = out;
  p.replace_extension();
  p += suffix;
  return p;
}

int run_im_like(const Options& opt, bool labels_mode) {
  const AttributeSchema schema = schema_or_default(opt);
  const std::string& input = labels_mode ? opt.annotations : opt.predictions;
  const Dataset dataset = labels_mode ? load_annotations_file(input, schema)
                                      : load_predictions_file(input, schema);
  log(LogLevel::info, "loaded " + std::to_string(dataset.total_records()) + " records in " +
                          std::to_string(dataset.groups.size()) + " groups");
  const ImOptions im_options{opt.min_group_size, opt.jobs};
  const ImReport report =
      labels_mode ? audit_labels(dataset, im_options) : dataset_im(dataset, im_options);
  std::ostringstream buf;
  if (opt.format == "json") {
    write_im_json(buf, report, {input, report_timestamp()});
  } else {
    write_im_csv(buf, report);
  }
  emit(opt, buf.str());
  return 0;
}

int run_quality(const Options& opt) {
  const AttributeSchema schema = schema_or_default(opt);
  const Dataset dataset = load_predictions_file(opt.predictions, schema);
  ScoreOptions score_options;
  if (!opt.images.empty()) {
    score_options.images_root = opt.images;
  }
  score_options.jobs = opt.jobs;
  const auto results = score_dataset(dataset, weights_or_default(opt), score_options);
  for (const auto& group : results) {
    for (const auto& error : group.errors) {
      log(LogLevel::warn, "skipped image '" + error.image_id + "': " + error.message);
    }
  }
  std::ostringstream buf;
  if (opt.format == "json") {
    write_quality_json(buf, results, {opt.predictions, report_timestamp()});
  } else {
    write_quality_csv(buf, results);
  }
  emit(opt, buf.str());
  return 0;
}

int run_consolidate(const Options& opt) {
  const AttributeSchema schema = schema_or_default(opt);
  Dataset dataset = load_predictions_file(opt.predictions, schema);
  ConsolidationConfig config;
  config.strategy = strategy_from_string(opt.strategy);
  config.top_k = opt.top_k;
  config.weights = weights_or_default(opt);
  if (config.strategy == Strategy::quality) {
    ScoreOptions score_options;
    if (!opt.images.empty()) {
      score_options.images_root = opt.images;
    }
    score_options.jobs = opt.jobs;
    attach_scores(dataset, score_dataset(dataset, config.weights, score_options));
  }
  const auto consolidated = consolidate_dataset(dataset, config, opt.jobs);

  std::ostringstream buf;
  if (opt.format == "json") {
    write_consolidated_json(buf, consolidated, schema, {opt.predictions, report_timestamp()});
  } else {
    write_consolidated_csv(buf, consolidated, schema);
  }
  emit(opt, buf.str());
  if (!opt.out.empty()) {
    std::ostringstream prov;
    write_provenance_json(prov, consolidated, schema);
    const auto sidecar = sibling_output(opt.out, ".provenance.json");
    write_file_atomic(sidecar, prov.str(), opt.force);
    log(LogLevel::info, "wrote " + sidecar.string());
  }
  return 0;
}

int run_correct(const Options& opt) {
  const AttributeSchema schema = schema_or_default(opt);
  const Dataset annotations = load_annotations_file(opt.annotations, schema);
  std::vector<SubjectAttributes> consolidated;
  if (!opt.consolidated.empty()) {
    consolidated = load_consolidated_csv_file(opt.consolidated, schema);
  } else {
    // Fall back to a full-group majority over the annotations themselves.
    ConsolidationConfig config;
    config.strategy = Strategy::confidence;
    config.top_k = std::numeric_limits<int>::max();
    consolidated = consolidate_dataset(annotations, config, opt.jobs);
    log(LogLevel::info, "no --consolidated file; using full-group majority vote");
  }
  const CorrectionResult result = correct_labels(annotations, consolidated, schema);
  log(LogLevel::info, std::to_string(result.changes.size()) + " label changes");

  std::ostringstream changes;
  write_changes_csv(changes, result.changes);
  if (opt.dry_run) {
    emit(opt, changes.str());
    return 0;
  }
  if (opt.out.empty()) {
    throw ConfigError("correct requires --out (or use --dry-run)");
  }
  std::ostringstream corrected;
  write_annotations_csv(corrected, result.corrected);
  write_file_atomic(opt.out, corrected.str(), opt.force);
  const auto changes_path = sibling_output(opt.out, ".changes.csv");
  write_file_atomic(changes_path, changes.str(), opt.force);
  log(LogLevel::info, "wrote " + opt.out + " and " + changes_path.string());
  return 0;
}

int run_synth(const Options& opt) {
  synth::ExperimentConfig config;
  if (!opt.config.empty()) {
    config = synth::load_experiment_config_file(opt.config);
  }
  if (opt.seed_given) {
    config.seeds = {opt.seed};
  }
  config.jobs = opt.jobs;
  if (!opt.images.empty()) {
    config.images_dir = opt.images;
  }
  const synth::ExperimentReport report = synth::run_experiment(config);
  std::ostringstream buf;
  write_experiment_csv(buf, report);
  emit(opt, buf.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Subject-level facial attribute consolidation toolkit"};
  app.require_subcommand(1);
  Options opt;

  const auto add_common = [&](CLI::App* sub, bool with_format = true) {
    sub->add_option("--schema", opt.schema, "Attribute schema JSON (default: CelebA 40)");
    sub->add_option("--jobs", opt.jobs, "Worker threads (0 = all cores)")
        ->check(CLI::NonNegativeNumber);
    sub->add_option("--out", opt.out, "Output file (stdout when omitted)");
    sub->add_flag("--force", opt.force, "Overwrite existing output files");
    if (with_format) {
      sub->add_option("--format", opt.format, "Output format")
          ->check(CLI::IsMember({"csv", "json"}));
    }
  };

  CLI::App* im = app.add_subcommand("im", "Inconsistency measure over prediction groups");
  im->add_option("--predictions", opt.predictions, "Prediction CSV or JSONL")->required();
  im->add_option("--min-group-size", opt.min_group_size,
                 "Drop groups smaller than this from the report")
      ->check(CLI::PositiveNumber);
  add_common(im);

  CLI::App* audit = app.add_subcommand("audit", "Inconsistency measure over annotation labels");
  audit->add_option("--annotations", opt.annotations, "Annotation CSV")->required();
  audit->add_option("--min-group-size", opt.min_group_size,
                    "Drop groups smaller than this from the report")
      ->check(CLI::PositiveNumber);
  add_common(audit);

  CLI::App* quality = app.add_subcommand("quality", "Score and rank image quality per group");
  quality->add_option("--predictions", opt.predictions, "Prediction CSV or JSONL")->required();
  quality->add_option("--images", opt.images, "Directory with PGM images");
  quality->add_option("--weights", opt.weights, "Feature weights JSON");
  add_common(quality);

  CLI::App* consolidate =
      app.add_subcommand("consolidate", "Fuse per-image predictions per subject");
  consolidate->add_option("--predictions", opt.predictions, "Prediction CSV or JSONL")
      ->required();
  consolidate->add_option("--strategy", opt.strategy, "Ranking criterion")
      ->check(CLI::IsMember({"confidence", "quality"}));
  consolidate->add_option("--top-k", opt.top_k, "Images fused per attribute (default 1)")
      ->check(CLI::PositiveNumber);
  consolidate->add_option("--weights", opt.weights, "Feature weights JSON");
  consolidate->add_option("--images", opt.images, "Directory with PGM images");
  add_common(consolidate);

  CLI::App* correct = app.add_subcommand("correct", "Rewrite inconsistent stable labels");
  correct->add_option("--annotations", opt.annotations, "Annotation CSV")->required();
  correct->add_option("--consolidated", opt.consolidated,
                      "Consolidated subject attributes CSV (default: full-group majority)");
  correct->add_flag("--dry-run", opt.dry_run, "Emit the change-log only");
  add_common(correct, false);

  CLI::App* synth_cmd = app.add_subcommand("synth", "Synthetic recovery experiment");
  synth_cmd->add_option("--config", opt.config, "Experiment config JSON");
  CLI::Option* seed_option =
      synth_cmd->add_option("--seed", opt.seed, "Override config seeds with one seed");
  synth_cmd->add_option("--images", opt.images, "Dump generated PGM fixtures here");
  add_common(synth_cmd, false);

  try {
    app.parse(argc, argv);
    opt.seed_given = seed_option->count() > 0;
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*im) return run_im_like(opt, false);
    if (*audit) return run_im_like(opt, true);
    if (*quality) return run_quality(opt);
    if (*consolidate) return run_consolidate(opt);
    if (*correct) return run_correct(opt);
    if (*synth_cmd) return run_synth(opt);
  } catch (const Error& e) {
    log(LogLevel::error, e.what());
    return 2;
  } catch (const std::exception& e) {
    log(LogLevel::error, e.what());
    return 2;
  }
  return 0;
}
