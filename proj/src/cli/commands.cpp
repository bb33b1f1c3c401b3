#include <cstdlib>
#include <filesystem>
#include <functional>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/logger.h>
#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include "pairhold/aap.hpp"
#include "pairhold/baselines.hpp"
#include "pairhold/classifier.hpp"
#include "pairhold/cli.hpp"
#include "pairhold/detections_io.hpp"
#include "pairhold/errors.hpp"
#include "pairhold/eval.hpp"
#include "pairhold/json_format.hpp"
#include "pairhold/pairing.hpp"
#include "pairhold/synthetic.hpp"

namespace pairhold::cli {

namespace {

namespace fs = std::filesystem;

// Raised when a command finished but its inputs failed validation.
class ValidationFailure : public Error {
 public:
  using Error::Error;
};

struct Context {
  std::ostream& out;
  std::shared_ptr<spdlog::logger> log;

  // Writes to `path`, or to stdout when no path was given.
  void emit(const std::string& path, const std::string& text) const {
    if (path.empty()) {
      out << text;
    } else {
      write_text_file(path, text);
      log->info("wrote {}", path);
    }
  }
};

std::shared_ptr<spdlog::logger> make_logger(std::ostream& err) {
  auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err, true);
  auto logger = std::make_shared<spdlog::logger>("pairhold", sink);
  logger->set_pattern("[%l] %v");
  auto level = spdlog::level::warn;
  if (const char* env = std::getenv("PAIRHOLD_LOG"); env != nullptr && *env != '\0') {
    level = spdlog::level::from_str(env);
  }
  logger->set_level(level);
  return logger;
}

std::string issue_json(const LoadIssue& issue) {
  return "{\"line\":" + std::to_string(issue.line) +
         ",\"image_id\":" + json::quote(issue.image_id) +
         ",\"field\":" + json::quote(issue.violation.field_path) +
         ",\"kind\":" + json::quote(to_string(issue.violation.kind)) +
         ",\"severity\":" + json::quote(to_string(issue.violation.severity)) +
         ",\"message\":" + json::quote(issue.violation.message) + "}";
}

// Loads a dataset for processing; any error-severity issue aborts the command.
std::vector<ImageRecord> load_checked(const Context& ctx, const std::string& path) {
  Dataset dataset = load_dataset(path);
  for (const auto& issue : dataset.issues) {
    if (issue.violation.severity == Severity::kWarning) {
      ctx.log->warn("{}:{}: {}: {}", path, issue.line, issue.violation.field_path,
                    issue.violation.message);
    } else {
      ctx.log->error("{}:{}: {}: {}", path, issue.line, issue.violation.field_path,
                     issue.violation.message);
    }
  }
  if (dataset.has_errors()) {
    throw ValidationFailure(path + " failed validation; run `pairhold validate` for details");
  }
  ctx.log->info("loaded {} records from {}", dataset.records.size(), path);
  return std::move(dataset.records);
}

std::string predictions_text(const std::vector<PairPrediction>& preds) {
  std::string text;
  for (const auto& p : preds) text += format_prediction(p) + "\n";
  return text;
}

std::string optional_json(const std::optional<double>& v) {
  return v ? json::fixed6(*v) : "null";
}

// ---------------------------------------------------------------------------

struct ValidateOptions {
  std::string dataset;
  std::string out;
};

void cmd_validate(const Context& ctx, const ValidateOptions& o) {
  const Dataset dataset = load_dataset(o.dataset);
  std::string text;
  std::size_t errors = 0;
  for (const auto& issue : dataset.issues) {
    text += issue_json(issue) + "\n";
    if (issue.violation.severity == Severity::kError) ++errors;
  }
  ctx.emit(o.out, text);
  ctx.log->info("{} valid records, {} errors, {} warnings", dataset.records.size(), errors,
                dataset.issues.size() - errors);
  if (errors > 0) {
    throw ValidationFailure(std::to_string(errors) + " validation error(s) in " + o.dataset);
  }
}

struct PairOptions {
  std::string dataset;
  std::string out;
  double target = 600.0;
  double margin = 0.0;
};

void cmd_pair(const Context& ctx, const PairOptions& o) {
  const auto records = load_checked(ctx, o.dataset);
  std::string text;
  std::size_t total = 0;
  for (const auto& record : records) {
    text += "{\"image_id\":" + json::quote(record.image_id) + ",\"pairs\":[";
    const auto pairs = enumerate_pairs(record);
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      const auto& p = pairs[i];
      const auto crop = crop_spec(p, record.width, record.height, o.target, o.margin);
      if (i > 0) text += ",";
      text += "{\"human_index\":" + std::to_string(p.human_index) +
              ",\"firearm_index\":" + std::to_string(p.firearm_index) +
              ",\"firearm_class\":" + json::quote(to_string(p.firearm_class)) +
              ",\"human_bbox\":" + json::box(p.human_bbox) +
              ",\"firearm_bbox\":" + json::box(p.firearm_bbox) +
              ",\"paired_bbox\":" + json::box(p.paired_bbox) + ",\"crop\":" + json::box(crop.crop) +
              ",\"crop_width\":" + std::to_string(crop.width) +
              ",\"crop_height\":" + std::to_string(crop.height) +
              ",\"scale\":" + json::fixed6(crop.scale) + "}";
    }
    text += "]}\n";
    total += pairs.size();
  }
  ctx.emit(o.out, text);
  ctx.log->info("{} candidate pairs over {} images", total, records.size());
}

struct BaselineOptions {
  std::string dataset;
  std::string strategy;
  std::string out;
  std::string flags_out;
  std::string accuracy_out;
  HifbConfig hifb;
  BcfdConfig bcfd;
  std::string overlap_metric = "enclosure";
  double min_overlap = 0.5;
};

void cmd_baseline(const Context& ctx, const BaselineOptions& o) {
  OhfbConfig ohfb;
  const auto metric = parse_overlap_metric(o.overlap_metric);
  if (!metric) throw ConfigError("--overlap-metric must be iou or enclosure");
  ohfb.overlap_metric = *metric;
  ohfb.min_overlap = o.min_overlap;
  if (o.strategy == "hifb") o.hifb.validate();
  if (o.strategy == "bcfd") o.bcfd.validate();
  if (o.strategy == "ohfb") ohfb.validate();

  const auto records = load_checked(ctx, o.dataset);
  std::vector<PairPrediction> preds;
  std::string flags_text;
  FirearmFlags flags;
  for (const auto& record : records) {
    std::vector<FirearmDecision> decisions;
    if (o.strategy == "hifb") {
      decisions = hifb_decide(record, o.hifb);
    } else if (o.strategy == "bcfd") {
      decisions = bcfd_decide(record, o.bcfd);
    } else {
      decisions = ohfb_decide(record, ohfb);
    }
    auto record_preds = decisions_to_predictions(record, decisions);
    preds.insert(preds.end(), record_preds.begin(), record_preds.end());
    for (const auto& d : decisions) {
      flags_text += "{\"image_id\":" + json::quote(record.image_id) +
                    ",\"firearm_index\":" + std::to_string(d.firearm_index) +
                    ",\"firearm_class\":" +
                    json::quote(to_string(record.firearms[d.firearm_index].cls)) +
                    ",\"carried\":" + (d.carried ? "1" : "0") + ",\"human_index\":" +
                    (d.human_index ? std::to_string(*d.human_index) : "null") +
                    ",\"score\":" + json::fixed6(d.score) + "}\n";
    }
    append_firearm_flags(record, decisions, flags);
  }
  ctx.emit(o.out, predictions_text(preds));
  if (!o.flags_out.empty()) ctx.emit(o.flags_out, flags_text);

  const auto acc = classification_accuracy(flags.predicted, flags.truth, flags.classes);
  ctx.log->info("{} accuracy over {} annotated firearms: gun {} rifle {} overall {}", o.strategy,
                flags.truth.size(), optional_json(acc.gun), optional_json(acc.rifle),
                optional_json(acc.overall));
  if (!o.accuracy_out.empty()) {
    ctx.emit(o.accuracy_out, "{\"strategy\":" + json::quote(o.strategy) +
                                 ",\"firearms\":" + std::to_string(flags.truth.size()) +
                                 ",\"gun\":" + optional_json(acc.gun) +
                                 ",\"rifle\":" + optional_json(acc.rifle) +
                                 ",\"overall\":" + optional_json(acc.overall) + "}\n");
  }
}

struct TrainOptions {
  std::string dataset;
  std::string out;
  std::string log_out;
  std::string test_out;
  TrainConfig train;
  double split = 0.8;
  bool no_shuffle = false;
};

void cmd_train(const Context& ctx, const TrainOptions& o) {
  TrainConfig cfg = o.train;
  cfg.shuffle = !o.no_shuffle;
  cfg.validate();
  if (!(o.split > 0.0 && o.split <= 1.0)) throw ConfigError("--split must lie in (0, 1]");

  const auto records = load_checked(ctx, o.dataset);
  const auto split = split_dataset(records, o.split, cfg.seed);
  std::vector<LabeledSample> samples;
  for (const auto& record : split.train) {
    auto s = labeled_samples(record);
    samples.insert(samples.end(), std::make_move_iterator(s.begin()),
                   std::make_move_iterator(s.end()));
  }
  ctx.log->info("training on {} pairs from {} images ({} held out)", samples.size(),
                split.train.size(), split.test.size());
  const TrainResult result = train(samples, cfg);

  std::string log_text;
  for (std::size_t e = 0; e < result.epoch_losses.size(); ++e) {
    log_text += "epoch " + std::to_string(e) + " loss " + json::fixed6(result.epoch_losses[e]) + "\n";
  }
  save_model(result.model, o.out);
  ctx.log->info("wrote {}", o.out);
  ctx.emit(o.log_out, log_text);
  if (!o.test_out.empty()) save_dataset(split.test, o.test_out);
}

struct PredictOptions {
  std::string dataset;
  std::string model;
  std::string scores;
  std::string out;
  double threshold = 0.5;
};

void cmd_predict(const Context& ctx, const PredictOptions& o) {
  if (!(o.threshold >= 0.0 && o.threshold <= 1.0)) {
    throw ConfigError("--threshold must lie in [0, 1]");
  }
  std::unique_ptr<PairScorer> scorer;
  if (!o.model.empty()) {
    scorer = std::make_unique<ModelScorer>(load_model(o.model));
  } else {
    scorer = std::make_unique<ExternalScorer>(load_predictions(o.scores));
  }
  const auto records = load_checked(ctx, o.dataset);
  std::vector<PairPrediction> preds;
  for (const auto& record : records) {
    auto p = hfpd_predict(record, *scorer, o.threshold);
    preds.insert(preds.end(), p.begin(), p.end());
  }
  ctx.emit(o.out, predictions_text(preds));
  ctx.log->info("{} pair predictions at threshold {}", preds.size(), o.threshold);
}

struct EvalOptions {
  std::string predictions;
  std::string dataset;
  std::string out;
  std::string method = "predictions";
  std::string backbone = "-";
  double iou = 0.5;
  bool strict = true;
};

void cmd_eval(const Context& ctx, const EvalOptions& o) {
  if (!(o.iou > 0.0 && o.iou <= 1.0)) throw ConfigError("--iou must lie in (0, 1]");
  const auto preds = load_predictions(o.predictions);
  const auto records = load_checked(ctx, o.dataset);
  const auto report = evaluate(preds, index_ground_truth(records), o.iou,
                               o.strict ? EvalMode::kStrict : EvalMode::kLenient);
  if (!o.out.empty()) ctx.emit(o.out, format_report_json(report) + "\n");
  const ApTableRow row{o.method, o.backbone, &report};
  ctx.out << format_ap_table(std::span<const ApTableRow>(&row, 1));
}

struct OverlayOptions {
  std::string dataset;
  std::string predictions;
  std::string out_dir;
};

void cmd_overlay(const Context& ctx, const OverlayOptions& o) {
  const auto records = load_checked(ctx, o.dataset);
  const auto preds = load_predictions(o.predictions);
  std::error_code ec;
  fs::create_directories(o.out_dir, ec);
  if (ec) throw IoError("cannot create directory " + o.out_dir + ": " + ec.message());
  for (const auto& record : records) {
    std::vector<PairPrediction> mine;
    for (const auto& p : preds) {
      if (p.image_id == record.image_id) mine.push_back(p);
    }
    write_text_file(fs::path(o.out_dir) / overlay_file_name(record.image_id),
                    render_overlay_svg(record, mine));
  }
  ctx.log->info("wrote {} overlays to {}", records.size(), o.out_dir);
}

struct PoolOptions {
  std::string input;
  std::string out;
  std::size_t height = 7;
  std::size_t width = 7;
};

void cmd_pool(const Context& ctx, const PoolOptions& o) {
  if (o.height < 1 || o.width < 1) throw ConfigError("pooled size must be at least 1x1");
  const FeatureGrid grid = load_feature_grid(o.input);
  save_feature_grid(adaptive_avg_pool(grid, o.height, o.width), o.out);
  ctx.log->info("pooled {}x{}x{} to {}x{}", grid.height(), grid.width(), grid.channels(), o.height,
                o.width);
}

struct SynthOptions {
  SyntheticConfig cfg;
  std::string out;
};

void cmd_synth(const Context& ctx, const SynthOptions& o) {
  std::string text;
  for (const auto& r : generate_synthetic(o.cfg)) text += format_record(r) + "\n";
  ctx.emit(o.out, text);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  const Context ctx{out, make_logger(err)};

  CLI::App app{"Human-firearm pair association, baselines and AP_hold evaluation", "pairhold"};
  app.require_subcommand(1);
  std::function<void()> action;

  ValidateOptions validate;
  auto* sub = app.add_subcommand("validate", "Check a dataset file against the record schema");
  sub->add_option("dataset", validate.dataset, "Dataset (JSON lines)")->required();
  sub->add_option("--out", validate.out, "Violation report path (default stdout)");
  sub->callback([&] { action = [&] { cmd_validate(ctx, validate); }; });

  PairOptions pair;
  sub = app.add_subcommand("pair", "Dump every human x firearm candidate pair");
  sub->add_option("dataset", pair.dataset)->required();
  sub->add_option("--out", pair.out);
  sub->add_option("--target", pair.target, "Long side of the resized pair crop")
      ->check(CLI::PositiveNumber);
  sub->add_option("--margin", pair.margin, "Context margin around the paired box (pixels)")
      ->check(CLI::NonNegativeNumber);
  sub->callback([&] { action = [&] { cmd_pair(ctx, pair); }; });

  BaselineOptions baseline;
  sub = app.add_subcommand("baseline", "Run a rule-based carrier baseline");
  sub->add_option("dataset", baseline.dataset)->required();
  sub->add_option("--strategy", baseline.strategy)
      ->required()
      ->check(CLI::IsMember({"hifb", "bcfd", "ohfb"}));
  sub->add_option("--out", baseline.out, "Prediction file (default stdout)");
  sub->add_option("--flags-out", baseline.flags_out, "Per-firearm carried flags");
  sub->add_option("--accuracy-out", baseline.accuracy_out, "Classification accuracy summary");
  sub->add_option("--alpha", baseline.hifb.alpha, "HiFB keypoint confidence threshold");
  sub->add_option("--min-keypoints", baseline.hifb.min_keypoints, "HiFB keypoint count");
  sub->add_option("--beta", baseline.bcfd.beta, "BCFD hand keypoints inside the firearm box");
  sub->add_option("--overlap-metric", baseline.overlap_metric)
      ->check(CLI::IsMember({"iou", "enclosure"}));
  sub->add_option("--min-overlap", baseline.min_overlap);
  sub->callback([&] { action = [&] { cmd_baseline(ctx, baseline); }; });

  TrainOptions train_opts;
  sub = app.add_subcommand("train", "Train the geometric pair classifier");
  sub->add_option("dataset", train_opts.dataset)->required();
  sub->add_option("--out", train_opts.out, "Model file")->required();
  sub->add_option("--seed", train_opts.train.seed)->required();
  sub->add_option("--lr", train_opts.train.learning_rate);
  sub->add_option("--momentum", train_opts.train.momentum);
  sub->add_option("--epochs", train_opts.train.epochs);
  sub->add_option("--batch-size", train_opts.train.batch_size);
  sub->add_option("--split", train_opts.split, "Share of images used for training");
  sub->add_flag("--no-shuffle", train_opts.no_shuffle);
  sub->add_option("--log", train_opts.log_out, "Per-epoch loss log (default stdout)");
  sub->add_option("--test-out", train_opts.test_out, "Write the held-out images here");
  sub->callback([&] { action = [&] { cmd_train(ctx, train_opts); }; });

  PredictOptions predict;
  sub = app.add_subcommand("predict", "Score all candidate pairs and keep the carried ones");
  sub->add_option("dataset", predict.dataset)->required();
  auto* model_opt = sub->add_option("--model", predict.model, "Model file");
  auto* scores_opt = sub->add_option("--scores", predict.scores, "External pair scores");
  model_opt->excludes(scores_opt);
  sub->add_option("--threshold", predict.threshold);
  sub->add_option("--out", predict.out);
  sub->callback([&] {
    if (predict.model.empty() && predict.scores.empty()) {
      throw CLI::ValidationError("predict", "one of --model or --scores is required");
    }
    action = [&] { cmd_predict(ctx, predict); };
  });

  EvalOptions eval_opts;
  sub = app.add_subcommand("eval", "Compute AP_Ghold / AP_Rhold / AP_hold");
  sub->add_option("predictions", eval_opts.predictions)->required();
  sub->add_option("dataset", eval_opts.dataset)->required();
  sub->add_option("--out", eval_opts.out, "Report document path");
  sub->add_option("--iou", eval_opts.iou);
  sub->add_option("--method", eval_opts.method, "Row label in the table");
  sub->add_option("--backbone", eval_opts.backbone, "Backbone label in the table");
  sub->add_flag("--strict,!--lenient", eval_opts.strict,
                "Unknown image ids are errors (--lenient: false positives)");
  sub->callback([&] { action = [&] { cmd_eval(ctx, eval_opts); }; });

  OverlayOptions overlay;
  sub = app.add_subcommand("overlay", "Draw detections and positive pairs as SVG");
  sub->add_option("dataset", overlay.dataset)->required();
  sub->add_option("predictions", overlay.predictions)->required();
  sub->add_option("--out", overlay.out_dir, "Output directory")->required();
  sub->callback([&] { action = [&] { cmd_overlay(ctx, overlay); }; });

  PoolOptions pool;
  sub = app.add_subcommand("pool", "Adaptive-average-pool a binary feature grid");
  sub->add_option("input", pool.input)->required();
  sub->add_option("--out", pool.out)->required();
  sub->add_option("--height", pool.height);
  sub->add_option("--width", pool.width);
  sub->callback([&] { action = [&] { cmd_pool(ctx, pool); }; });

  SynthOptions synth;
  sub = app.add_subcommand("synth", "Generate a seeded synthetic dataset");
  sub->add_option("--images", synth.cfg.images);
  sub->add_option("--seed", synth.cfg.seed)->required();
  sub->add_option("--out", synth.out);
  sub->callback([&] { action = [&] { cmd_synth(ctx, synth); }; });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigFailure;
  }

  try {
    action();
    return kOk;
  } catch (const ValidationFailure& e) {
    ctx.log->error("{}", e.what());
    return kValidationFailure;
  } catch (const IoError& e) {
    ctx.log->error("{}", e.what());
    return kIoFailure;
  } catch (const ConfigError& e) {
    ctx.log->error("{}", e.what());
    return kConfigFailure;
  } catch (const NumericError& e) {
    ctx.log->error("{}", e.what());
    return kNumericDivergence;
  } catch (const std::exception& e) {
    // Format, geometry, scorer and input errors all mean the inputs are bad.
    ctx.log->error("{}", e.what());
    return kValidationFailure;
  }
}

}  // namespace pairhold::cli
