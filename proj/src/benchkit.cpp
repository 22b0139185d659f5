/*
 * Copyright 2026 The TGS Agent Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#include "tgs/benchkit.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstdio>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "tgs/mask_codec.hpp"

namespace tgs {
namespace {

using nlohmann::json;

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string lowercase(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

// JSON pointer token escaping.
std::string ptr(std::string_view base, std::string_view token) {
  std::string out(base);
  out += '/';
  for (char c : token) {
    if (c == '~') {
      out += "~0";
    } else if (c == '/') {
      out += "~1";
    } else {
      out += c;
    }
  }
  return out;
}

std::string ptr(std::string_view base, std::size_t index) {
  return std::string(base) + "/" + std::to_string(index);
}

// Typed field access that reports the failing location.
class Reader {
 public:
  Reader(const json& object, std::string pointer) : obj_(object), ptr_(std::move(pointer)) {
    if (!obj_.is_object()) throw ManifestError(ptr_, "expected an object");
  }

  const std::string& pointer() const { return ptr_; }

  std::string string(const char* key) const {
    const auto& v = required(key);
    if (!v.is_string()) throw ManifestError(ptr(ptr_, key), "expected a string");
    return v.get<std::string>();
  }

  std::optional<std::string> opt_string(const char* key) const {
    if (!present(key)) return std::nullopt;
    return string(key);
  }

  std::vector<std::string> strings(const char* key) const {
    const auto& v = required(key);
    if (!v.is_array()) throw ManifestError(ptr(ptr_, key), "expected an array of strings");
    std::vector<std::string> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_string()) throw ManifestError(ptr(ptr(ptr_, key), i), "expected a string");
      out.push_back(v[i].get<std::string>());
    }
    return out;
  }

  std::optional<std::vector<std::string>> opt_strings(const char* key) const {
    if (!present(key)) return std::nullopt;
    return strings(key);
  }

  const json& required(const char* key) const {
    auto it = obj_.find(key);
    if (it == obj_.end()) throw ManifestError(ptr(ptr_, key), "required field is missing");
    return *it;
  }

  bool present(const char* key) const {
    auto it = obj_.find(key);
    return it != obj_.end() && !it->is_null();
  }

  void reject_unknown(std::initializer_list<std::string_view> known) const {
    for (const auto& [key, value] : obj_.items()) {
      if (std::find(known.begin(), known.end(), key) == known.end()) {
        throw ManifestError(ptr(ptr_, key), "unknown field '" + key + "'");
      }
    }
  }

 private:
  const json& obj_;
  std::string ptr_;
};

void check_path(const std::string& rel, const std::string& pointer,
                const std::filesystem::path& root, const ManifestLoadOptions& options,
                std::vector<std::string>& warnings) {
  if (rel.empty()) throw ManifestError(pointer, "path is empty");
  const std::filesystem::path p(rel);
  if (p.is_absolute()) throw ManifestError(pointer, "path '" + rel + "' must be relative");
  const auto normal = p.lexically_normal();
  if (!normal.empty() && *normal.begin() == "..") {
    throw ManifestError(pointer, "path '" + rel + "' escapes the manifest root");
  }
  if (!std::filesystem::exists(root / p)) {
    const std::string message = "path '" + rel + "' does not exist";
    if (options.strict) throw ManifestError(pointer, message);
    warnings.push_back(pointer + ": " + message);
  }
}

ManifestEntry parse_entry(const json& j, const std::string& pointer) {
  Reader r(j, pointer);
  r.reject_unknown({"uid", "split", "reference", "frames", "audio", "gt_mask_paths",
                    "gt_category", "provenance", "source"});
  ManifestEntry e;
  e.uid = r.string("uid");
  if (e.uid.empty()) throw ManifestError(ptr(pointer, "uid"), "uid is empty");
  try {
    e.split = split_from_string(r.string("split"));
  } catch (const std::invalid_argument&) {
    throw ManifestError(ptr(pointer, "split"), "split must be one of seen, unseen, null");
  }
  e.reference = r.string("reference");
  if (trim(e.reference).empty()) throw ManifestError(ptr(pointer, "reference"), "reference is empty");
  e.frames = r.strings("frames");
  if (e.frames.empty()) throw ManifestError(ptr(pointer, "frames"), "at least one frame is required");
  e.audio = r.opt_string("audio");
  e.gt_mask_paths = r.opt_strings("gt_mask_paths");
  if (e.gt_mask_paths && e.gt_mask_paths->size() != e.frames.size()) {
    throw ManifestError(ptr(pointer, "gt_mask_paths"),
                        "expected " + std::to_string(e.frames.size()) + " masks (one per frame), got " +
                            std::to_string(e.gt_mask_paths->size()));
  }
  if (e.split != Split::Null && !e.gt_mask_paths) {
    throw ManifestError(ptr(pointer, "gt_mask_paths"), "required for seen and unseen entries");
  }
  e.gt_category = r.opt_string("gt_category");
  if (r.present("provenance")) {
    try {
      e.provenance = provenance_from_string(r.string("provenance"));
    } catch (const std::invalid_argument&) {
      throw ManifestError(ptr(pointer, "provenance"),
                          "provenance must be one of original, transformed, human_revised");
    }
  }
  if (r.present("source")) {
    Reader s(r.required("source"), ptr(pointer, "source"));
    s.reject_unknown({"uid", "reference"});
    e.source = SourceRef{s.string("uid"), s.string("reference")};
  }
  if (e.provenance != Provenance::Original && !e.source) {
    throw ManifestError(ptr(pointer, "source"),
                        "transformed entries must reference their source entry");
  }
  return e;
}

}  // namespace

std::string_view to_string(Provenance provenance) {
  switch (provenance) {
    case Provenance::Original:
      return "original";
    case Provenance::Transformed:
      return "transformed";
    case Provenance::HumanRevised:
      return "human_revised";
  }
  return "original";
}

Provenance provenance_from_string(std::string_view text) {
  if (text == "original") return Provenance::Original;
  if (text == "transformed") return Provenance::Transformed;
  if (text == "human_revised") return Provenance::HumanRevised;
  throw std::invalid_argument("unknown provenance '" + std::string(text) + "'");
}

std::size_t BenchmarkManifest::count(Split split) const {
  return static_cast<std::size_t>(std::count_if(
      entries.begin(), entries.end(), [&](const ManifestEntry& e) { return e.split == split; }));
}

ManifestError::ManifestError(std::string pointer, const std::string& message)
    : std::runtime_error("manifest " + (pointer.empty() ? std::string("/") : pointer) + ": " + message),
      pointer_(std::move(pointer)) {}

ManifestLoad manifest_from_json(const json& doc, const std::filesystem::path& manifest_dir,
                                const ManifestLoadOptions& options) {
  ManifestLoad out;
  Reader r(doc, "");
  r.reject_unknown({"name", "version", "root", "entries"});
  out.manifest.name = r.string("name");
  out.manifest.version = r.string("version");
  out.manifest.declared_root = r.opt_string("root");
  std::filesystem::path root = manifest_dir;
  if (out.manifest.declared_root) {
    if (out.manifest.declared_root->empty()) throw ManifestError("/root", "root is empty");
    root = manifest_dir / *out.manifest.declared_root;
    if (!std::filesystem::is_directory(root)) {
      const std::string message = "root '" + *out.manifest.declared_root + "' is not a directory";
      if (options.strict) throw ManifestError("/root", message);
      out.warnings.push_back("/root: " + message);
    }
  }
  out.manifest.root = root;
  const auto& entries = r.required("entries");
  if (!entries.is_array()) throw ManifestError("/entries", "expected an array");
  std::set<std::string> seen;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const std::string pointer = ptr("/entries", i);
    ManifestEntry e = parse_entry(entries[i], pointer);
    if (!seen.insert(e.uid).second) {
      throw ManifestError(ptr(pointer, "uid"), "duplicate uid '" + e.uid + "'");
    }
    for (std::size_t k = 0; k < e.frames.size(); ++k) {
      check_path(e.frames[k], ptr(ptr(pointer, "frames"), k), root, options, out.warnings);
    }
    if (e.audio) check_path(*e.audio, ptr(pointer, "audio"), root, options, out.warnings);
    if (e.gt_mask_paths) {
      for (std::size_t k = 0; k < e.gt_mask_paths->size(); ++k) {
        check_path((*e.gt_mask_paths)[k], ptr(ptr(pointer, "gt_mask_paths"), k), root, options,
                   out.warnings);
      }
    }
    out.manifest.entries.push_back(std::move(e));
  }
  return out;
}

ManifestLoad load_manifest(const std::filesystem::path& path, const ManifestLoadOptions& options) {
  const std::string text = read_file(path);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ManifestError("", std::string("invalid JSON: ") + e.what());
  }
  return manifest_from_json(doc, path.parent_path(), options);
}

json manifest_to_json(const BenchmarkManifest& manifest) {
  json entries = json::array();
  for (const auto& e : manifest.entries) {
    json j{{"uid", e.uid},
           {"split", std::string(to_string(e.split))},
           {"reference", e.reference},
           {"frames", e.frames},
           {"provenance", std::string(to_string(e.provenance))}};
    if (e.audio) j["audio"] = *e.audio;
    if (e.gt_mask_paths) j["gt_mask_paths"] = *e.gt_mask_paths;
    if (e.gt_category) j["gt_category"] = *e.gt_category;
    if (e.source) j["source"] = {{"uid", e.source->uid}, {"reference", e.source->reference}};
    entries.push_back(std::move(j));
  }
  json doc{{"name", manifest.name}, {"version", manifest.version}, {"entries", std::move(entries)}};
  if (manifest.declared_root) doc["root"] = *manifest.declared_root;
  return doc;
}

void rebase_manifest(BenchmarkManifest& manifest, const std::filesystem::path& manifest_dir) {
  namespace fs = std::filesystem;
  const auto target = fs::weakly_canonical(fs::absolute(manifest.root));
  const auto here = fs::weakly_canonical(fs::absolute(manifest_dir));
  auto rel = target.lexically_relative(here);
  if (rel.empty()) rel = target;
  const std::string text = rel.generic_string();
  if (text == ".") {
    manifest.declared_root.reset();
  } else {
    manifest.declared_root = text;
  }
  manifest.root = manifest_dir / rel;
}

std::string serialize_manifest(const BenchmarkManifest& manifest) {
  return manifest_to_json(manifest).dump(2) + "\n";
}

void save_manifest(const BenchmarkManifest& manifest, const std::filesystem::path& path) {
  write_file(path, serialize_manifest(manifest));
}

ReferenceSample load_sample(const BenchmarkManifest& manifest, const ManifestEntry& entry) {
  std::vector<FrameRef> frames;
  for (std::size_t i = 0; i < entry.frames.size(); ++i) {
    char id[32];
    std::snprintf(id, sizeof id, "%05zu", i);
    frames.push_back(FrameRef::from_file(entry.uid + "/" + id, manifest.root / entry.frames[i]));
  }
  std::optional<std::vector<FrameMask>> gt;
  if (entry.gt_mask_paths) {
    gt.emplace();
    for (const auto& p : *entry.gt_mask_paths) gt->push_back(read_mask_file(manifest.root / p));
  }
  return ReferenceSample(entry.uid, std::move(frames), entry.audio, entry.reference, entry.split,
                         std::move(gt), entry.gt_category);
}

std::vector<ReferenceSample> load_samples(const BenchmarkManifest& manifest) {
  std::vector<ReferenceSample> out;
  out.reserve(manifest.entries.size());
  for (const auto& e : manifest.entries) {
    try {
      out.push_back(load_sample(manifest, e));
    } catch (const ManifestError&) {
      throw;
    } catch (const std::exception& ex) {
      throw std::invalid_argument("entry '" + e.uid + "': " + ex.what());
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

std::string_view to_string(ReviewKind kind) {
  switch (kind) {
    case ReviewKind::Pending:
      return "pending";
    case ReviewKind::Accepted:
      return "accepted";
    case ReviewKind::Revised:
      return "revised";
    case ReviewKind::Rejected:
      return "rejected";
  }
  return "pending";
}

std::string TransformRecord::final_reference() const {
  switch (review.kind) {
    case ReviewKind::Accepted:
      return generated_reference;
    case ReviewKind::Revised:
      return review.text;
    default:
      return {};
  }
}

PromptTemplate default_transform_template() {
  static const std::string text =
      "You help build a benchmark of hard audio-visual referring expressions.\n"
      "Sample {{uid}} contains a target object named \"{{target_object_name}}\".\n"
      "{{mask_mention}}\n"
      "You also receive the video frames and the audio track of the sample.\n"
      "\n"
      "Write one new referring expression for this exact target object. It must\n"
      "- single out the target unambiguously, using both what is seen and what is heard;\n"
      "- require reasoning to resolve: world knowledge, comparison with other objects,\n"
      "  the object's role or function, or cause and effect over time;\n"
      "- avoid plain attributes such as colour, shape, size, a dominant sound or a simple action;\n"
      "- be between 5 and 15 words long.\n"
      "\n"
      "Reply with a JSON object of the form {\"complex_ref\": \"...\"} and nothing else.\n";
  return PromptTemplate("transform_default", text);
}

std::string extract_generated_reference(std::string_view reply, std::string_view uid) {
  const auto open = reply.find('{');
  const auto close = reply.rfind('}');
  if (open != std::string_view::npos && close != std::string_view::npos && close > open) {
    const json j = json::parse(reply.substr(open, close - open + 1), nullptr, false);
    if (j.is_object()) {
      auto pick = [](const json& o) -> std::optional<std::string> {
        auto it = o.find("complex_ref");
        if (it != o.end() && it->is_string()) return it->get<std::string>();
        return std::nullopt;
      };
      if (auto s = pick(j)) return std::string(trim(*s));
      if (!uid.empty()) {
        auto it = j.find(std::string(uid));
        if (it != j.end() && it->is_object()) {
          if (auto s = pick(*it)) return std::string(trim(*s));
        }
      }
    }
  }
  std::string_view text = trim(reply);
  if (text.size() >= 2) {
    const char a = text.front();
    const char b = text.back();
    if ((a == '"' && b == '"') || (a == '\'' && b == '\'')) text = trim(text.substr(1, text.size() - 2));
  }
  return std::string(text);
}

TransformRecord transform_reference(const ManifestEntry& entry, const GenerateBackend& backend,
                                    const PromptTemplate& prompt) {
  for (const char* name : {"uid", "target_object_name"}) {
    if (!prompt.has_placeholder(name)) {
      throw TemplateError("transform template '" + prompt.id() + "' lacks {{" + name + "}}");
    }
  }
  TransformRecord rec;
  rec.uid = entry.uid;
  rec.original_reference = entry.reference;
  if (!entry.gt_category || trim(*entry.gt_category).empty()) {
    rec.review = ReviewStatus::rejected("missing-target");
    return rec;
  }
  rec.target_object_name = *entry.gt_category;

  std::map<std::string, std::string> bindings{{"uid", entry.uid},
                                              {"target_object_name", rec.target_object_name}};
  if (prompt.has_placeholder("mask_mention")) {
    std::string mention;
    if (entry.gt_mask_paths) {
      mention = "The target is marked by the pixel masks:";
      for (const auto& p : *entry.gt_mask_paths) mention += " " + p;
      mention += ".";
    } else {
      mention = "No pixel mask is available; the target may be absent from the frames.";
    }
    bindings["mask_mention"] = std::move(mention);
  }

  std::string reply;
  try {
    reply = invoke_generate(backend, GenerateRequest{entry.uid, prompt.render(bindings)}).text;
  } catch (const ToolError& e) {
    rec.review = ReviewStatus::rejected("transport");
    rec.flags.push_back("transport:" + std::string(to_string(e.kind())));
    return rec;
  }

  rec.generated_reference = extract_generated_reference(reply, entry.uid);
  rec.word_count = word_count(rec.generated_reference);
  if (rec.word_count == 0) {
    rec.review = ReviewStatus::rejected("empty-generation");
    return rec;
  }
  if (rec.word_count < kMinGeneratedWords || rec.word_count > kMaxGeneratedWords) {
    rec.flags.push_back("word-band");
  }
  auto folded = [](std::string_view s) {
    std::string out;
    for (const auto& w : words(s)) out += lowercase(w) + ' ';
    return out;
  };
  if (folded(rec.generated_reference) == folded(rec.original_reference)) {
    rec.review = ReviewStatus::rejected("unchanged");
  }
  return rec;
}

std::vector<TransformRecord> transform_manifest(const BenchmarkManifest& manifest,
                                                const GenerateBackend& backend,
                                                const PromptTemplate& prompt, int workers) {
  const auto& entries = manifest.entries;
  std::vector<std::optional<TransformRecord>> slots(entries.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (std::size_t i = next++; i < entries.size(); i = next++) {
      try {
        slots[i] = transform_reference(entries[i], backend, prompt);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const std::size_t n = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(workers, 1)), 1,
                                                 std::max<std::size_t>(entries.size(), 1));
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 1; t < n; ++t) pool.emplace_back(work);
    work();
  }
  if (failure) std::rethrow_exception(failure);
  std::vector<TransformRecord> out;
  out.reserve(slots.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

ReviewCounts count_reviews(std::span<const TransformRecord> records) {
  ReviewCounts c;
  for (const auto& r : records) {
    switch (r.review.kind) {
      case ReviewKind::Pending:
        ++c.pending;
        break;
      case ReviewKind::Accepted:
        ++c.accepted;
        break;
      case ReviewKind::Revised:
        ++c.revised;
        break;
      case ReviewKind::Rejected:
        ++c.rejected;
        break;
    }
  }
  return c;
}

json transform_record_to_json(const TransformRecord& r) {
  json j{{"uid", r.uid},
         {"target_object_name", r.target_object_name},
         {"original_reference", r.original_reference},
         {"generated_reference", r.generated_reference},
         {"word_count", r.word_count},
         {"flags", r.flags},
         {"decision", nullptr},
         {"revised_text", nullptr},
         {"reason", nullptr}};
  switch (r.review.kind) {
    case ReviewKind::Pending:
      break;
    case ReviewKind::Accepted:
      j["decision"] = "accept";
      break;
    case ReviewKind::Revised:
      j["decision"] = "revise";
      j["revised_text"] = r.review.text;
      break;
    case ReviewKind::Rejected:
      j["decision"] = "reject";
      j["reason"] = r.review.text;
      break;
  }
  return j;
}

std::string export_review_queue(std::span<const TransformRecord> records) {
  std::string out;
  for (const auto& r : records) out += transform_record_to_json(r).dump() + "\n";
  return out;
}

ReviewError::ReviewError(std::size_t line, const std::string& message)
    : std::runtime_error(line ? "review line " + std::to_string(line) + ": " + message : message),
      line_(line) {}

std::vector<TransformRecord> import_review_decisions(std::string_view review_jsonl,
                                                     const BenchmarkManifest& source) {
  std::set<std::string> known;
  for (const auto& e : source.entries) known.insert(e.uid);
  std::set<std::string> imported;
  std::vector<TransformRecord> out;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= review_jsonl.size()) {
    auto end = review_jsonl.find('\n', pos);
    if (end == std::string_view::npos) end = review_jsonl.size();
    const auto line = trim(review_jsonl.substr(pos, end - pos));
    ++line_no;
    pos = end + 1;
    if (line.empty()) continue;

    const json row = json::parse(line, nullptr, false);
    if (!row.is_object()) throw ReviewError(line_no, "not a JSON object");
    auto str = [&](const char* key, bool required) -> std::string {
      auto it = row.find(key);
      if (it == row.end() || it->is_null()) {
        if (required) throw ReviewError(line_no, std::string("missing field '") + key + "'");
        return {};
      }
      if (!it->is_string()) throw ReviewError(line_no, std::string("field '") + key + "' must be a string");
      return it->get<std::string>();
    };

    TransformRecord r;
    r.uid = str("uid", true);
    if (!known.count(r.uid)) throw ReviewError(line_no, "decision for unknown uid '" + r.uid + "'");
    if (!imported.insert(r.uid).second) throw ReviewError(line_no, "duplicate row for uid '" + r.uid + "'");
    r.target_object_name = str("target_object_name", false);
    r.original_reference = str("original_reference", true);
    r.generated_reference = str("generated_reference", false);
    r.word_count = word_count(r.generated_reference);
    if (auto it = row.find("flags"); it != row.end() && it->is_array()) {
      for (const auto& f : *it) {
        if (f.is_string()) r.flags.push_back(f.get<std::string>());
      }
    }

    const std::string decision = str("decision", false);
    if (decision.empty()) {
      r.review = ReviewStatus::pending();
    } else if (decision == "accept") {
      if (trim(r.generated_reference).empty()) {
        throw ReviewError(line_no, "cannot accept '" + r.uid + "': generated reference is empty");
      }
      r.review = ReviewStatus::accepted();
    } else if (decision == "revise") {
      const std::string text(trim(str("revised_text", false)));
      if (text.empty()) throw ReviewError(line_no, "revise decision for '" + r.uid + "' has empty text");
      r.review = ReviewStatus::revised(text);
    } else if (decision == "reject") {
      std::string reason = str("reason", false);
      r.review = ReviewStatus::rejected(reason.empty() ? "reviewer" : reason);
    } else {
      throw ReviewError(line_no, "unknown decision '" + decision + "' (accept|revise|reject|null)");
    }
    out.push_back(std::move(r));
  }
  return out;
}

BenchmarkManifest finalize_manifest(const BenchmarkManifest& source,
                                    std::span<const TransformRecord> records) {
  std::map<std::string, const ManifestEntry*> by_uid;
  for (const auto& e : source.entries) by_uid[e.uid] = &e;

  BenchmarkManifest out;
  out.name = source.name + "-transformed";
  out.version = source.version;
  out.declared_root = source.declared_root;
  out.root = source.root;
  for (const auto& r : records) {
    if (r.review.kind != ReviewKind::Accepted && r.review.kind != ReviewKind::Revised) continue;
    auto it = by_uid.find(r.uid);
    if (it == by_uid.end()) throw ReviewError(0, "record for unknown uid '" + r.uid + "'");
    const ManifestEntry& src = *it->second;
    ManifestEntry e = src;
    e.reference = r.final_reference();
    e.provenance =
        r.review.kind == ReviewKind::Accepted ? Provenance::Transformed : Provenance::HumanRevised;
    e.source = SourceRef{src.uid, src.reference};
    out.entries.push_back(std::move(e));
  }
  return out;
}

// ---------------------------------------------------------------------------

ReferenceStats reference_stats(std::span<const std::string> references) {
  ReferenceStats s;
  for (const auto& ref : references) {
    const auto ws = words(ref);
    ++s.references;
    s.total_words += ws.size();
    ++s.word_histogram[ws.size()];
    for (const auto& w : ws) ++s.vocabulary[lowercase(w)];
  }
  s.avg_words = s.references ? static_cast<double>(s.total_words) / static_cast<double>(s.references) : 0.0;
  return s;
}

ReferenceStats reference_stats(const BenchmarkManifest& manifest) {
  std::vector<std::string> refs;
  refs.reserve(manifest.entries.size());
  for (const auto& e : manifest.entries) refs.push_back(e.reference);
  return reference_stats(refs);
}

json stats_to_json(const ReferenceStats& stats) {
  json hist = json::object();
  for (const auto& [k, v] : stats.word_histogram) hist[std::to_string(k)] = v;
  return {{"references", stats.references},
          {"total_words", stats.total_words},
          {"avg_words", stats.avg_words},
          {"word_histogram", std::move(hist)},
          {"vocabulary", stats.vocabulary}};
}

std::string stats_to_csv(const ReferenceStats& stats) {
  std::ostringstream out;
  out << "section,key,count\n";
  for (const auto& [k, v] : stats.word_histogram) out << "histogram," << k << ',' << v << '\n';
  for (const auto& [w, v] : stats.vocabulary) {
    // Tokens have ASCII punctuation stripped, so no CSV quoting is needed.
    out << "vocabulary," << w << ',' << v << '\n';
  }
  return out.str();
}

}  // namespace tgs
