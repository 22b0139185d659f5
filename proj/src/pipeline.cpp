/*
 * Copyright 2026 The TGS Agent Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#include "tgs/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <thread>

#include "tgs/mask_codec.hpp"

namespace tgs {
namespace {

using Clock = std::chrono::steady_clock;

std::chrono::microseconds since(Clock::time_point start) {
  return std::chrono::duration_cast<std::chrono::microseconds>(Clock::now() - start);
}

double selection_key(const GroundedBox& b, BoxSelection selection) {
  return selection == BoxSelection::HighestProduct ? b.box_score() * b.text_score()
                                                   : b.box_score();
}

// True when `a` should be preferred over `b`.
bool preferred(const GroundedBox& a, const GroundedBox& b, BoxSelection selection) {
  const double ka = selection_key(a, selection);
  const double kb = selection_key(b, selection);
  if (ka != kb) return ka > kb;
  const auto ca = std::make_tuple(a.x1(), a.y1(), a.x2(), a.y2());
  const auto cb = std::make_tuple(b.x1(), b.y1(), b.x2(), b.y2());
  if (ca != cb) return ca < cb;
  if (a.box_score() != b.box_score()) return a.box_score() > b.box_score();
  return a.text_score() > b.text_score();
}

std::vector<FrameMask> background_masks(const ReferenceSample& sample) {
  return std::vector<FrameMask>(sample.frames().size(),
                                all_background(sample.width(), sample.height()));
}

}  // namespace

void PipelineConfig::validate() const {
  auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!unit(tau_bbox)) throw std::invalid_argument("tau_bbox must lie in [0, 1]");
  if (!unit(tau_text)) throw std::invalid_argument("tau_text must lie in [0, 1]");
  if (workers < 1) throw std::invalid_argument("workers must be at least 1");
}

PipelineConfig pipeline_config_from_json(const nlohmann::json& j,
                                         const std::filesystem::path& base_dir) {
  PipelineConfig cfg;
  cfg.tau_bbox = j.value("tau_bbox", cfg.tau_bbox);
  cfg.tau_text = j.value("tau_text", cfg.tau_text);
  if (j.contains("prompt_type")) {
    cfg.prompt_type = prompt_type_from_string(j.at("prompt_type").get<std::string>());
  }
  if (j.contains("box_selection")) {
    const auto s = j.at("box_selection").get<std::string>();
    if (s == "box_score") {
      cfg.box_selection = BoxSelection::HighestBoxScore;
    } else if (s == "product") {
      cfg.box_selection = BoxSelection::HighestProduct;
    } else {
      throw std::invalid_argument("unknown box_selection '" + s + "'");
    }
  }
  cfg.workers = j.value("workers", cfg.workers);
  if (j.contains("prompt_template")) {
    std::filesystem::path p = j.at("prompt_template").get<std::string>();
    if (p.is_relative()) p = base_dir / p;
    cfg.prompt_template = PromptTemplate::from_file(p.string());
  }
  cfg.tools = make_toolset(j.value("backends", nlohmann::json::object()), base_dir);
  cfg.validate();
  return cfg;
}

PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument("config '" + path.string() + "': " + e.what());
  }
  return pipeline_config_from_json(j, path.parent_path());
}

std::vector<GroundedBox> filter_candidates(std::span<const GroundedBox> candidates,
                                           const PipelineConfig& cfg) {
  std::vector<GroundedBox> out;
  for (const auto& c : candidates) {
    if (c.box_score() >= cfg.tau_bbox && c.text_score() >= cfg.tau_text) out.push_back(c);
  }
  return out;
}

std::optional<GroundedBox> filter_and_select(std::span<const GroundedBox> candidates,
                                             const PipelineConfig& cfg) {
  std::optional<GroundedBox> best;
  for (const auto& c : filter_candidates(candidates, cfg)) {
    if (!best || preferred(c, *best, cfg.box_selection)) best = c;
  }
  return best;
}

std::optional<std::string> select_prompt_text(const ReasoningChain& chain, PromptType type,
                                              const std::string& reference) {
  if (chain.is_null()) return std::nullopt;
  switch (type) {
    case PromptType::FObject:
      return chain.f_object();
    case PromptType::SObject:
      return chain.s_object();
    case PromptType::RawReference:
      return reference;
  }
  return std::nullopt;
}

std::string_view to_string(SampleStatus status) {
  switch (status) {
    case SampleStatus::Ok:
      return "ok";
    case SampleStatus::ThinkFailed:
      return "think_failed";
    case SampleStatus::ParseFailed:
      return "parse_failed";
    case SampleStatus::ToolError:
      return "tool_error";
  }
  return "unknown";
}

bool same_outcome(const SampleResult& a, const SampleResult& b) {
  const auto& ta = a.trace;
  const auto& tb = b.trace;
  const bool parsed_equal = (!ta.parsed && !tb.parsed) ||
                            (ta.parsed && tb.parsed && *ta.parsed == *tb.parsed);
  return a.uid == b.uid && a.masks == b.masks && a.status == b.status &&
         a.failed_stage == b.failed_stage && a.error_kind == b.error_kind &&
         a.lenient_extraction == b.lenient_extraction && parsed_equal &&
         ta.uid == tb.uid && ta.reasoning == tb.reasoning && ta.prompt_used == tb.prompt_used &&
         ta.query == tb.query && ta.boxes == tb.boxes &&
         ta.candidate_counts == tb.candidate_counts && ta.parse_flags == tb.parse_flags &&
         ta.error == tb.error && ta.tool_ids == tb.tool_ids;
}

SampleResult run_sample(const ReferenceSample& sample, const PipelineConfig& cfg) {
  SampleResult result;
  result.uid = sample.uid();
  result.trace.uid = sample.uid();
  result.trace.prompt_used = cfg.prompt_type;
  result.trace.boxes.assign(sample.frames().size(), std::nullopt);
  result.trace.candidate_counts.assign(sample.frames().size(), 0);
  result.masks = background_masks(sample);

  auto fail = [&](SampleStatus status, const ToolError& e) {
    result.status = status;
    result.failed_stage = e.capability();
    result.error_kind = e.kind();
    result.trace.error = e.what();
    result.trace.boxes.assign(sample.frames().size(), std::nullopt);
    result.masks = background_masks(sample);
    return result;
  };
  auto missing = [](Capability c) {
    return ToolError(c, ToolErrorKind::Configuration, "no backend bound");
  };

  // Think
  if (!cfg.tools.think) return fail(SampleStatus::ThinkFailed, missing(Capability::Think));
  result.trace.tool_ids["think"] = cfg.tools.think->id();
  auto t0 = Clock::now();
  try {
    ThinkRequest request{sample.uid(), render_user_prompt(cfg.prompt_template, sample.reference()),
                         sample.frames(), sample.audio()};
    result.trace.reasoning = invoke_think(*cfg.tools.think, request).raw_text;
  } catch (const ToolError& e) {
    result.trace.timings.think = since(t0);
    return fail(SampleStatus::ThinkFailed, e);
  }
  result.trace.timings.think = since(t0);

  // Parse: strict first, lenient extraction on failure.
  std::optional<ReasoningChain> chain;
  try {
    chain = parse_chain(result.trace.reasoning, ParseMode::Strict);
  } catch (const ChainParseError& strict_error) {
    result.trace.parse_flags.push_back("strict:" + std::string(to_string(strict_error.kind())));
    try {
      auto parsed = parse_chain_with_flags(result.trace.reasoning, ParseMode::Lenient);
      for (auto& f : parsed.flags) result.trace.parse_flags.push_back(std::move(f));
      chain = std::move(parsed.chain);
      result.lenient_extraction = true;
    } catch (const ChainParseError& e) {
      result.status = SampleStatus::ParseFailed;
      result.trace.error = e.what();
      return result;
    }
  }
  result.trace.parsed = std::make_shared<const ReasoningChain>(*chain);

  const auto query = select_prompt_text(*chain, cfg.prompt_type, sample.reference());
  if (!query) return result;  // absent object: every frame stays background
  result.trace.query = *query;

  // Ground and Segment, frame by frame.
  if (!cfg.tools.ground) return fail(SampleStatus::ToolError, missing(Capability::Ground));
  if (!cfg.tools.segment) return fail(SampleStatus::ToolError, missing(Capability::Segment));
  result.trace.tool_ids["ground"] = cfg.tools.ground->id();
  result.trace.tool_ids["segment"] = cfg.tools.segment->id();
  for (std::size_t i = 0; i < sample.frames().size(); ++i) {
    const auto& frame = sample.frames()[i];
    std::optional<GroundedBox> box;
    t0 = Clock::now();
    try {
      const auto response = invoke_ground(*cfg.tools.ground, GroundRequest{frame, *query});
      result.trace.candidate_counts[i] = response.candidates.size();
      box = filter_and_select(response.candidates, cfg);
    } catch (const ToolError& e) {
      result.trace.timings.ground += since(t0);
      return fail(SampleStatus::ToolError, e);
    }
    result.trace.timings.ground += since(t0);
    if (!box) continue;
    result.trace.boxes[i] = box;

    t0 = Clock::now();
    try {
      result.masks[i] =
          invoke_segment(*cfg.tools.segment, SegmentRequest{frame, coords_of(*box)}).mask;
    } catch (const ToolError& e) {
      result.trace.timings.segment += since(t0);
      return fail(SampleStatus::ToolError, e);
    }
    result.trace.timings.segment += since(t0);
  }
  return result;
}

BatchResult run_batch(std::span<const ReferenceSample> samples, const PipelineConfig& cfg) {
  cfg.validate();
  BatchResult batch;
  batch.results.resize(samples.size());
  std::vector<std::optional<SampleResult>> slots(samples.size());

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < samples.size(); i = next++) {
      slots[i] = run_sample(samples[i], cfg);
    }
  };
  const auto n = std::min<std::size_t>(static_cast<std::size_t>(cfg.workers), samples.size());
  if (n <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(n);
    for (std::size_t k = 0; k < n; ++k) pool.emplace_back(worker);
  }

  batch.summary.total = samples.size();
  for (std::size_t i = 0; i < samples.size(); ++i) {
    batch.results[i] = std::move(*slots[i]);
    ++batch.summary.counts[batch.results[i].status];
  }
  return batch;
}

nlohmann::ordered_json trace_to_json(const SampleResult& result) {
  const auto& t = result.trace;
  nlohmann::ordered_json j;
  j["uid"] = result.uid;
  j["status"] = std::string(to_string(result.status));
  if (result.failed_stage) j["failed_stage"] = std::string(to_string(*result.failed_stage));
  if (result.error_kind) j["error_kind"] = std::string(to_string(*result.error_kind));
  if (!t.error.empty()) j["error"] = t.error;
  j["prompt_used"] = std::string(to_string(t.prompt_used));
  j["reasoning"] = t.reasoning;
  if (t.parsed) {
    nlohmann::ordered_json p;
    p["think"] = t.parsed->think() ? nlohmann::ordered_json(*t.parsed->think())
                                   : nlohmann::ordered_json(nullptr);
    if (const auto& st = t.parsed->structured_think()) {
      p["structured"] = {{"reference_echo", st->reference_echo},
                         {"video_analysis", st->video_analysis},
                         {"audio_analysis", st->audio_analysis},
                         {"modality_analysis", st->modality_analysis}};
    }
    p["f_object"] = t.parsed->f_object();
    p["s_object"] = t.parsed->s_object();
    p["null_object"] = t.parsed->is_null();
    j["parsed"] = p;
  } else {
    j["parsed"] = nullptr;
  }
  j["lenient_extraction"] = result.lenient_extraction;
  j["parse_flags"] = t.parse_flags;
  j["query"] = t.query;
  auto boxes = nlohmann::ordered_json::array();
  for (const auto& b : t.boxes) {
    if (!b) {
      boxes.push_back(nullptr);
      continue;
    }
    nlohmann::ordered_json bj;
    bj["x1"] = b->x1();
    bj["y1"] = b->y1();
    bj["x2"] = b->x2();
    bj["y2"] = b->y2();
    bj["box_score"] = b->box_score();
    bj["text_score"] = b->text_score();
    boxes.push_back(bj);
  }
  j["boxes"] = boxes;
  j["candidate_counts"] = t.candidate_counts;
  nlohmann::ordered_json timings;
  timings["think_ms"] = t.timings.think.count() / 1000.0;
  timings["ground_ms"] = t.timings.ground.count() / 1000.0;
  timings["segment_ms"] = t.timings.segment.count() / 1000.0;
  j["timings"] = timings;
  j["tool_ids"] = t.tool_ids;
  return j;
}

nlohmann::json summary_to_json(const BatchSummary& summary) {
  nlohmann::json counts = nlohmann::json::object();
  for (auto s : {SampleStatus::Ok, SampleStatus::ThinkFailed, SampleStatus::ParseFailed,
                 SampleStatus::ToolError}) {
    counts[std::string(to_string(s))] = summary.count(s);
  }
  return {{"total", summary.total}, {"counts", counts}};
}

}  // namespace tgs
