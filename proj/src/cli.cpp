/*
 * Copyright 2026 The TGS Agent Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#include "tgs/cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>

#include "tgs/benchkit.hpp"
#include "tgs/mask_codec.hpp"
#include "tgs/metrics.hpp"
#include "tgs/pipeline.hpp"
#include "tgs/refchain.hpp"
#include "tgs/toolbus.hpp"

namespace tgs {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

enum class LogLevel { Error, Warn, Info, Debug };

class Logger {
 public:
  Logger(std::ostream& sink, LogLevel level) : sink_(sink), level_(level) {}

  void error(const std::string& m) const { emit(LogLevel::Error, "error", m); }
  void warn(const std::string& m) const { emit(LogLevel::Warn, "warn", m); }
  void info(const std::string& m) const { emit(LogLevel::Info, "info", m); }
  void debug(const std::string& m) const { emit(LogLevel::Debug, "debug", m); }

 private:
  void emit(LogLevel at, const char* tag, const std::string& m) const {
    if (at <= level_) sink_ << "[" << tag << "] " << m << '\n';
  }

  std::ostream& sink_;
  LogLevel level_;
};

LogLevel log_level_from_string(const std::string& s) {
  if (s == "error") return LogLevel::Error;
  if (s == "warn") return LogLevel::Warn;
  if (s == "info") return LogLevel::Info;
  return LogLevel::Debug;
}

// Raised for flag combinations CLI11 cannot express.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CommonOptions {
  std::string config;
  std::string output_dir;
  std::string log_level = "info";
  bool json = false;
  bool strict = false;
};

struct Options {
  CommonOptions common;
  std::string manifest;
  std::string pred_dir;
  std::string review_file;
  std::string prompt_file;
  std::string chains;
  std::string traces;
  std::optional<double> tau_bbox;
  std::optional<double> tau_text;
  std::string prompt_type;
  std::optional<int> tolerance;
  std::string averaging = "sample";
  bool verbose = false;
};

struct Context {
  const Options& opt;
  std::ostream& out;
  const Logger& log;
};

std::string frame_name(std::size_t index, const char* ext) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%05zu.%s", index, ext);
  return buf;
}

fs::path require_output_dir(const Options& opt, const char* command) {
  if (opt.common.output_dir.empty()) {
    throw UsageError(std::string(command) + " requires --output-dir");
  }
  return opt.common.output_dir;
}

ManifestLoad load_manifest_logged(const Context& ctx) {
  ManifestLoad load = load_manifest(ctx.opt.manifest, ManifestLoadOptions{ctx.opt.common.strict});
  for (const auto& w : load.warnings) ctx.log.warn(w);
  ctx.log.debug("loaded manifest '" + load.manifest.name + "' with " +
                std::to_string(load.manifest.entries.size()) + " entries");
  return load;
}

PipelineConfig load_config(const Options& opt) {
  PipelineConfig cfg = opt.common.config.empty()
                           ? pipeline_config_from_json(json::object(), fs::current_path())
                           : load_pipeline_config(opt.common.config);
  if (opt.tau_bbox) cfg.tau_bbox = *opt.tau_bbox;
  if (opt.tau_text) cfg.tau_text = *opt.tau_text;
  if (!opt.prompt_type.empty()) cfg.prompt_type = prompt_type_from_string(opt.prompt_type);
  cfg.validate();
  return cfg;
}

// ---------------------------------------------------------------------------

int cmd_run(const Context& ctx) {
  const fs::path out_dir = require_output_dir(ctx.opt, "run");
  const PipelineConfig cfg = load_config(ctx.opt);
  const ManifestLoad load = load_manifest_logged(ctx);
  const auto samples = load_samples(load.manifest);

  ctx.log.info("running " + std::to_string(samples.size()) + " samples with " +
               std::to_string(cfg.workers) + " worker(s)");
  const BatchResult batch = run_batch(samples, cfg);

  std::string traces;
  bool transport_failure = false;
  bool configuration_failure = false;
  for (const auto& r : batch.results) {
    for (std::size_t i = 0; i < r.masks.size(); ++i) {
      write_mask_file(out_dir / "masks" / r.uid / frame_name(i, "pgm"), r.masks[i]);
    }
    traces += trace_to_json(r).dump() + "\n";
    if (r.error_kind) {
      const ToolError probe(r.failed_stage.value_or(Capability::Think), *r.error_kind, "");
      (probe.is_transport() ? transport_failure : configuration_failure) = true;
      ctx.log.warn(r.uid + ": " + std::string(to_string(r.status)) + " (" +
                   std::string(to_string(*r.error_kind)) + ")");
    } else if (r.status != SampleStatus::Ok) {
      ctx.log.warn(r.uid + ": " + std::string(to_string(r.status)));
    }
  }
  write_file(out_dir / "traces.jsonl", traces);
  const json summary = summary_to_json(batch.summary);
  write_file(out_dir / "summary.json", summary.dump(2) + "\n");

  if (ctx.opt.common.json) {
    ctx.out << summary.dump() << '\n';
  } else {
    ctx.out << "samples: " << batch.summary.total << '\n';
    for (const auto s : {SampleStatus::Ok, SampleStatus::ThinkFailed, SampleStatus::ParseFailed,
                         SampleStatus::ToolError}) {
      ctx.out << "  " << to_string(s) << ": " << batch.summary.count(s) << '\n';
    }
    ctx.out << "output: " << out_dir.string() << '\n';
  }
  if (transport_failure) return kExitTransport;
  if (configuration_failure) return kExitDomain;
  return kExitOk;
}

// ---------------------------------------------------------------------------

FrameMask read_prediction(const fs::path& dir, std::size_t index) {
  const fs::path pgm = dir / frame_name(index, "pgm");
  if (fs::exists(pgm)) return read_mask_file(pgm);
  const fs::path rle = dir / frame_name(index, "json");
  if (fs::exists(rle)) return read_mask_file(rle);
  throw std::invalid_argument("missing prediction " + pgm.string());
}

std::vector<CategoryPair> category_pairs(const fs::path& traces_path,
                                         const BenchmarkManifest& manifest) {
  std::map<std::string, const ManifestEntry*> by_uid;
  for (const auto& e : manifest.entries) by_uid[e.uid] = &e;
  std::vector<CategoryPair> pairs;
  std::istringstream in(read_file(traces_path));
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const json t = json::parse(line, nullptr, false);
    if (!t.is_object() || !t.contains("uid") || !t["uid"].is_string()) {
      throw std::invalid_argument(traces_path.string() + ":" + std::to_string(line_no) +
                                  ": not a trace object");
    }
    auto it = by_uid.find(t["uid"].get<std::string>());
    if (it == by_uid.end() || !it->second->gt_category) continue;
    const auto& parsed = t.value("parsed", json());
    if (!parsed.is_object() || parsed.value("null_object", false)) continue;
    const auto s = parsed.value("s_object", json());
    if (!s.is_string()) continue;
    pairs.push_back({it->second->split, s.get<std::string>(), *it->second->gt_category});
  }
  return pairs;
}

json tally_json(const std::map<std::string, CategoryTally>& tallies) {
  json j = json::object();
  for (const auto& [split, t] : tallies) {
    j[split] = {{"exact", t.exact},
                {"normalized", t.normalized},
                {"miss", t.miss},
                {"exact_rate", t.exact_rate()},
                {"match_rate", t.match_rate()}};
  }
  return j;
}

int cmd_eval(const Context& ctx) {
  if (ctx.opt.pred_dir.empty()) throw UsageError("eval requires --pred-dir");
  const ManifestLoad load = load_manifest_logged(ctx);
  const auto& manifest = load.manifest;

  std::vector<EvalSample> samples;
  for (const auto& e : manifest.entries) {
    EvalSample s;
    s.uid = e.uid;
    s.split = e.split;
    const fs::path dir = fs::path(ctx.opt.pred_dir) / e.uid;
    for (std::size_t i = 0; i < e.frames.size(); ++i) s.pred.push_back(read_prediction(dir, i));
    if (e.gt_mask_paths) {
      s.gt.emplace();
      for (const auto& p : *e.gt_mask_paths) s.gt->push_back(read_mask_file(manifest.root / p));
    }
    samples.push_back(std::move(s));
  }

  EvalOptions options;
  options.tolerance_px = ctx.opt.tolerance;
  if (ctx.opt.averaging == "pooled") options.averaging = Averaging::PooledFrames;
  const EvalReport report = aggregate(samples, options);

  json doc = report_to_json(report);
  std::optional<std::map<std::string, CategoryTally>> tallies;
  if (!ctx.opt.traces.empty()) {
    const auto pairs = category_pairs(ctx.opt.traces, manifest);
    tallies = tally_categories(pairs);
    doc["category_match"] = tally_json(*tallies);
  }

  std::string table = report_to_table(report, ctx.opt.verbose);
  if (tallies) {
    std::ostringstream t;
    t << "\ncategory match (s_object vs gt category)\n";
    for (const auto& [split, tally] : *tallies) {
      char line[160];
      std::snprintf(line, sizeof line, "  %-7s exact %5.1f%%  exact+normalized %5.1f%%  (n=%zu)\n",
                    split.c_str(), 100.0 * tally.exact_rate(), 100.0 * tally.match_rate(),
                    tally.total());
      t << line;
    }
    table += t.str();
  }

  if (!ctx.opt.common.output_dir.empty()) {
    const fs::path out_dir = ctx.opt.common.output_dir;
    write_file(out_dir / "eval.json", doc.dump(2) + "\n");
    write_file(out_dir / "per_sample.csv", report_to_csv(report));
    write_file(out_dir / "eval.txt", table);
  }
  if (ctx.opt.common.json) {
    ctx.out << doc.dump(2) << '\n';
  } else {
    ctx.out << table;
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------

int cmd_stats(const Context& ctx) {
  const ManifestLoad load = load_manifest_logged(ctx);
  const ReferenceStats stats = reference_stats(load.manifest);
  const json doc = stats_to_json(stats);
  if (!ctx.opt.common.output_dir.empty()) {
    const fs::path out_dir = ctx.opt.common.output_dir;
    write_file(out_dir / "stats.json", doc.dump(2) + "\n");
    write_file(out_dir / "stats.csv", stats_to_csv(stats));
  }
  if (ctx.opt.common.json) {
    ctx.out << doc.dump(2) << '\n';
    return kExitOk;
  }
  char avg[64];
  std::snprintf(avg, sizeof avg, "%.2f", stats.avg_words);
  ctx.out << "references: " << stats.references << '\n'
          << "avg_words: " << avg << '\n'
          << "word histogram:\n";
  for (const auto& [n, c] : stats.word_histogram) ctx.out << "  " << n << ": " << c << '\n';
  std::vector<std::pair<std::size_t, std::string>> top;
  for (const auto& [w, c] : stats.vocabulary) top.emplace_back(c, w);
  std::stable_sort(top.begin(), top.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  ctx.out << "most frequent words:\n";
  for (std::size_t i = 0; i < top.size() && i < 10; ++i) {
    ctx.out << "  " << top[i].second << ": " << top[i].first << '\n';
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------

int cmd_transform(const Context& ctx) {
  const fs::path out_dir = require_output_dir(ctx.opt, "transform");
  const PipelineConfig cfg = load_config(ctx.opt);
  if (!cfg.tools.generate) {
    throw ToolError(Capability::Generate, ToolErrorKind::Configuration,
                    "no text-generation backend configured (backends.generate or TGS_GENERATE_URL)");
  }
  const PromptTemplate prompt = ctx.opt.prompt_file.empty()
                                    ? default_transform_template()
                                    : PromptTemplate::from_file(ctx.opt.prompt_file);
  const ManifestLoad load = load_manifest_logged(ctx);
  const auto records = transform_manifest(load.manifest, *cfg.tools.generate, prompt, cfg.workers);

  write_file(out_dir / "review_queue.jsonl", export_review_queue(records));
  const ReviewCounts counts = count_reviews(records);
  std::size_t flagged = 0;
  bool transport = false;
  for (const auto& r : records) {
    if (!r.flags.empty()) ++flagged;
    if (r.review.kind == ReviewKind::Rejected && r.review.text == "transport") transport = true;
    for (const auto& f : r.flags) ctx.log.info(r.uid + ": flag " + f);
    if (r.review.kind == ReviewKind::Rejected) ctx.log.warn(r.uid + ": rejected (" + r.review.text + ")");
  }
  const json summary{{"entries", load.manifest.entries.size()},
                     {"records", records.size()},
                     {"pending", counts.pending},
                     {"accepted", counts.accepted},
                     {"revised", counts.revised},
                     {"rejected", counts.rejected},
                     {"flagged", flagged},
                     {"review_file", (out_dir / "review_queue.jsonl").string()}};
  write_file(out_dir / "transform_summary.json", summary.dump(2) + "\n");
  if (ctx.opt.common.json) {
    ctx.out << summary.dump() << '\n';
  } else {
    ctx.out << "records: " << records.size() << " (pending " << counts.pending << ", rejected "
            << counts.rejected << ", flagged " << flagged << ")\n"
            << "review file: " << (out_dir / "review_queue.jsonl").string() << '\n';
  }
  return transport ? kExitTransport : kExitOk;
}

int cmd_finalize(const Context& ctx) {
  if (ctx.opt.review_file.empty()) throw UsageError("finalize requires --review-file");
  const ManifestLoad load = load_manifest_logged(ctx);
  const auto records = import_review_decisions(read_file(ctx.opt.review_file), load.manifest);

  std::set<std::string> reviewed;
  for (const auto& r : records) reviewed.insert(r.uid);
  for (const auto& e : load.manifest.entries) {
    if (!reviewed.count(e.uid)) ctx.log.warn(e.uid + ": no row in the review file");
  }

  BenchmarkManifest final_manifest = finalize_manifest(load.manifest, records);
  const fs::path out_dir = ctx.opt.common.output_dir.empty()
                               ? fs::path(ctx.opt.manifest).parent_path()
                               : fs::path(ctx.opt.common.output_dir);
  rebase_manifest(final_manifest, out_dir);
  const fs::path out_path =
      out_dir / (fs::path(ctx.opt.manifest).stem().string() + ".final.json");
  save_manifest(final_manifest, out_path);

  const ReviewCounts counts = count_reviews(records);
  const json summary{{"rows", records.size()},
                     {"accepted", counts.accepted},
                     {"revised", counts.revised},
                     {"rejected", counts.rejected},
                     {"pending", counts.pending},
                     {"finalized_entries", final_manifest.entries.size()},
                     {"manifest", out_path.string()}};
  if (ctx.opt.common.json) {
    ctx.out << summary.dump() << '\n';
  } else {
    ctx.out << "rows: " << records.size() << " (accepted " << counts.accepted << ", revised "
            << counts.revised << ", rejected " << counts.rejected << ", pending " << counts.pending
            << ")\n"
            << "finalized entries: " << final_manifest.entries.size() << '\n'
            << "manifest: " << out_path.string() << '\n';
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct Finding {
  std::string subject;
  std::string code;
  std::string severity;
  std::string message;
};

struct ChainItem {
  std::string uid;
  std::string text;
  std::optional<std::string> reference;
};

std::vector<ChainItem> read_chain_corpus(const fs::path& path) {
  const std::string text = read_file(path);
  std::vector<ChainItem> items;
  if (path.extension() != ".jsonl") {
    items.push_back({path.stem().string(), text, std::nullopt});
    return items;
  }
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const json row = json::parse(line, nullptr, false);
    const std::string where = path.string() + ":" + std::to_string(line_no);
    if (!row.is_object() || !row.contains("chain") || !row["chain"].is_string()) {
      throw std::invalid_argument(where + ": expected an object with a string \"chain\"");
    }
    ChainItem item;
    item.uid = row.value("uid", "line-" + std::to_string(line_no));
    item.text = row["chain"].get<std::string>();
    if (row.contains("reference") && row["reference"].is_string()) {
      item.reference = row["reference"].get<std::string>();
    }
    items.push_back(std::move(item));
  }
  return items;
}

int report_findings(const Context& ctx, std::size_t checked, const std::vector<Finding>& findings) {
  std::size_t errors = 0;
  for (const auto& f : findings) errors += f.severity == "error" ? 1 : 0;
  if (ctx.opt.common.json) {
    json list = json::array();
    for (const auto& f : findings) {
      list.push_back({{"subject", f.subject}, {"code", f.code}, {"severity", f.severity},
                      {"message", f.message}});
    }
    ctx.out << json{{"checked", checked}, {"errors", errors}, {"findings", list}}.dump(2) << '\n';
  } else {
    for (const auto& f : findings) {
      ctx.out << f.severity << ": " << f.subject << ": " << f.code << ": " << f.message << '\n';
    }
    ctx.out << "checked " << checked << ", " << errors << " violation(s)\n";
  }
  return errors ? kExitDomain : kExitOk;
}

int validate_chains(const Context& ctx) {
  const auto items = read_chain_corpus(ctx.opt.chains);
  std::vector<Finding> findings;
  for (const auto& item : items) {
    ChainFields fields;
    try {
      fields = parse_chain_fields(item.text, ParseMode::Strict);
    } catch (const ChainParseError& e) {
      findings.push_back({item.uid, std::string(to_string(e.kind())), "error",
                          std::string(e.what()) + " [bytes " + std::to_string(e.begin()) + "-" +
                              std::to_string(e.end()) + ")"});
      continue;
    }
    ValidationPolicy policy;
    policy.expected_reference = item.reference;
    for (const auto& v : validate_chain(fields, policy)) {
      findings.push_back({item.uid, std::string(to_string(v.code)),
                          v.severity == Severity::Hard ? "error" : "warning", v.message});
    }
  }
  return report_findings(ctx, items.size(), findings);
}

int validate_manifest(const Context& ctx) {
  std::vector<Finding> findings;
  std::size_t checked = 0;
  try {
    const ManifestLoad load = load_manifest(ctx.opt.manifest, ManifestLoadOptions{ctx.opt.common.strict});
    for (const auto& w : load.warnings) findings.push_back({ctx.opt.manifest, "path", "warning", w});
    for (const auto& e : load.manifest.entries) {
      ++checked;
      try {
        (void)load_sample(load.manifest, e);
      } catch (const std::exception& ex) {
        findings.push_back({e.uid, "sample", "error", ex.what()});
      }
    }
  } catch (const ManifestError& e) {
    findings.push_back({ctx.opt.manifest, "schema", "error", e.what()});
  }
  return report_findings(ctx, checked, findings);
}

int cmd_validate(const Context& ctx) {
  const bool chains = !ctx.opt.chains.empty();
  const bool manifest = !ctx.opt.manifest.empty();
  if (chains == manifest) throw UsageError("validate needs exactly one of --chains or --manifest");
  return chains ? validate_chains(ctx) : validate_manifest(ctx);
}

void add_common(CLI::App* sub, Options& opt) {
  sub->add_option("--config", opt.common.config, "Pipeline/backend configuration (JSON)");
  sub->add_option("--output-dir", opt.common.output_dir, "Directory for written artifacts");
  sub->add_option("--log-level", opt.common.log_level, "Log verbosity")
      ->check(CLI::IsMember({"error", "warn", "info", "debug"}));
  sub->add_flag("--json", opt.common.json, "Machine-readable output");
  sub->add_flag("--strict", opt.common.strict, "Treat dangling manifest paths as errors");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options opt;
  CLI::App app{"Think-ground-segment referring segmentation toolkit", "tgs"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run the think/ground/segment pipeline over a manifest");
  add_common(run, opt);
  run->add_option("--manifest", opt.manifest, "Benchmark manifest")->required();
  run->add_option("--tau-bbox", opt.tau_bbox, "Box confidence threshold");
  run->add_option("--tau-text", opt.tau_text, "Text confidence threshold");
  run->add_option("--prompt-type", opt.prompt_type, "Grounding query source")
      ->check(CLI::IsMember({"f", "s", "ref"}));

  auto* eval = app.add_subcommand("eval", "Score predicted masks against manifest ground truth");
  add_common(eval, opt);
  eval->add_option("--manifest", opt.manifest, "Benchmark manifest")->required();
  eval->add_option("--pred-dir", opt.pred_dir, "Directory of <uid>/NNNNN.pgm predictions");
  eval->add_option("--traces", opt.traces, "traces.jsonl for the category-match table");
  eval->add_option("--boundary-tolerance", opt.tolerance, "Boundary match tolerance in pixels");
  eval->add_option("--averaging", opt.averaging, "Primary averaging convention")
      ->check(CLI::IsMember({"sample", "pooled"}));
  eval->add_flag("--verbose", opt.verbose, "Also show the alternate averaging");

  auto* stats = app.add_subcommand("stats", "Reference length and vocabulary statistics");
  add_common(stats, opt);
  stats->add_option("--manifest", opt.manifest, "Benchmark manifest")->required();

  auto* transform = app.add_subcommand("transform", "Generate harder references and a review queue");
  add_common(transform, opt);
  transform->add_option("--manifest", opt.manifest, "Source manifest")->required();
  transform->add_option("--prompt-file", opt.prompt_file, "Transformation prompt template");

  auto* finalize = app.add_subcommand("finalize", "Apply review decisions and write the new manifest");
  add_common(finalize, opt);
  finalize->add_option("--manifest", opt.manifest, "Source manifest")->required();
  finalize->add_option("--review-file", opt.review_file, "Edited review queue (JSON lines)");

  auto* validate = app.add_subcommand("validate", "Strictly validate a chain corpus or a manifest");
  add_common(validate, opt);
  validate->add_option("--chains", opt.chains, "Chain file (.jsonl rows or a single chain)");
  validate->add_option("--manifest", opt.manifest, "Benchmark manifest");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  }

  const Logger log(err, log_level_from_string(opt.common.log_level));
  const Context ctx{opt, out, log};
  try {
    if (run->parsed()) return cmd_run(ctx);
    if (eval->parsed()) return cmd_eval(ctx);
    if (stats->parsed()) return cmd_stats(ctx);
    if (transform->parsed()) return cmd_transform(ctx);
    if (finalize->parsed()) return cmd_finalize(ctx);
    if (validate->parsed()) return cmd_validate(ctx);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ToolError& e) {
    log.error(e.what());
    return e.is_transport() ? kExitTransport : kExitDomain;
  } catch (const std::exception& e) {
    log.error(e.what());
    return kExitDomain;
  }
  return kExitUsage;
}

}  // namespace tgs
