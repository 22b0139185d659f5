/*
 * Copyright 2026 The TGS Agent Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#include <doctest.h>

#include <random>

#include "support.hpp"
#include "tgs/benchkit.hpp"
#include "tgs/mask_codec.hpp"

using namespace tgs;
using namespace tgs::testing;
using nlohmann::json;

namespace {

json minimal_doc() {
  return json::parse(R"({
    "name": "tiny", "version": "1",
    "entries": [
      {"uid": "a", "split": "null", "reference": "the cat", "frames": ["f/a0.pgm"],
       "provenance": "original"}
    ]
  })");
}

std::string manifest_error_pointer(const json& doc, const ManifestLoadOptions& opts = {}) {
  try {
    manifest_from_json(doc, fixture_dir() / "eval", opts);
  } catch (const ManifestError& e) {
    return e.pointer();
  }
  return "<no error>";
}

ManifestEntry entry(const std::string& uid, const std::optional<std::string>& category,
                    const std::string& reference = "the violin on the left") {
  ManifestEntry e;
  e.uid = uid;
  e.split = Split::Seen;
  e.reference = reference;
  e.frames = {"frames/" + uid + "/00000.pgm"};
  e.gt_mask_paths = std::vector<std::string>{"gt/" + uid + "/00000.pgm"};
  e.gt_category = category;
  return e;
}

ScriptedMock generator(std::map<std::string, std::string> replies) {
  ScriptedMockSpec spec;
  spec.generate = std::move(replies);
  spec.generate_failures["down"] = {ToolErrorKind::BackendUnavailable, "offline"};
  return ScriptedMock(std::move(spec));
}

BenchmarkManifest mock_manifest() { return load_manifest(fixture_dir() / "mock" / "manifest.json").manifest; }

std::string set_decision(const std::string& row_text, const json& decision, const char* extra_key = nullptr,
                         const std::string& extra = {}) {
  json row = json::parse(row_text);
  row["decision"] = decision;
  if (extra_key) row[extra_key] = extra;
  return row.dump();
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto end = text.find('\n', pos);
    out.push_back(text.substr(pos, end - pos));
    pos = end + 1;
  }
  return out;
}

}  // namespace

TEST_CASE("the evaluation fixture manifest loads with per-split counts") {
  const auto load = load_manifest(fixture_dir() / "eval" / "manifest.json", {.strict = true});
  const auto& m = load.manifest;
  CHECK(load.warnings.empty());
  CHECK(m.entries.size() == 6);
  CHECK(m.count(Split::Seen) == 2);
  CHECK(m.count(Split::Unseen) == 2);
  CHECK(m.count(Split::Null) == 2);
  CHECK(m.root == fixture_dir() / "eval");

  const auto samples = load_samples(m);
  REQUIRE(samples.size() == 6);
  CHECK(samples[0].frames()[1].id == "s1/00001");
  CHECK(samples[0].gt_masks()->size() == 2);
  CHECK(samples[0].gt_category() == std::optional<std::string>("guitar"));
  CHECK(samples[0].width() == 8);
}

TEST_CASE("manifest schema errors carry JSON pointers") {
  auto doc = minimal_doc();
  CHECK(manifest_error_pointer(doc) == "<no error>");

  auto dup = doc;
  dup["entries"].push_back(dup["entries"][0]);
  try {
    manifest_from_json(dup, fixture_dir());
    FAIL("duplicate uid accepted");
  } catch (const ManifestError& e) {
    CHECK(e.pointer() == "/entries/1/uid");
    CHECK(std::string(e.what()).find("duplicate uid 'a'") != std::string::npos);
  }

  auto unknown = doc;
  unknown["entries"][0]["colour"] = "red";
  CHECK(manifest_error_pointer(unknown).rfind("/entries/0", 0) == 0);

  auto bad_split = doc;
  bad_split["entries"][0]["split"] = "train";
  CHECK(manifest_error_pointer(bad_split) == "/entries/0/split");

  auto seen_without_gt = doc;
  seen_without_gt["entries"][0]["split"] = "seen";
  CHECK(manifest_error_pointer(seen_without_gt).rfind("/entries/0", 0) == 0);

  auto gt_count = doc;
  gt_count["entries"][0]["split"] = "seen";
  gt_count["entries"][0]["gt_mask_paths"] = json::array({"g/1.pgm", "g/2.pgm"});
  CHECK(manifest_error_pointer(gt_count).rfind("/entries/0/gt_mask_paths", 0) == 0);

  auto transformed_without_source = doc;
  transformed_without_source["entries"][0]["provenance"] = "transformed";
  CHECK(manifest_error_pointer(transformed_without_source).rfind("/entries/0", 0) == 0);

  auto escaping = doc;
  escaping["entries"][0]["frames"] = json::array({"../outside.pgm"});
  CHECK(manifest_error_pointer(escaping).rfind("/entries/0/frames", 0) == 0);
  auto absolute = doc;
  absolute["entries"][0]["frames"] = json::array({"/tmp/x.pgm"});
  CHECK(manifest_error_pointer(absolute).rfind("/entries/0/frames", 0) == 0);

  auto no_name = doc;
  no_name.erase("name");
  CHECK(manifest_error_pointer(no_name) != "<no error>");
}

TEST_CASE("dangling paths warn by default and fail in strict mode") {
  const auto doc = minimal_doc();  // f/a0.pgm does not exist under eval/
  const auto load = manifest_from_json(doc, fixture_dir() / "eval");
  REQUIRE(load.warnings.size() == 1);
  CHECK(load.warnings[0].find("/entries/0/frames/0") != std::string::npos);
  CHECK(manifest_error_pointer(doc, {.strict = true}) == "/entries/0/frames/0");
}

TEST_CASE("manifests round-trip byte-identically") {
  const auto path = fixture_dir() / "eval" / "manifest.json";
  const auto m = load_manifest(path).manifest;
  const auto text = serialize_manifest(m);
  CHECK(text == read_file(path));
  CHECK(text.back() == '\n');
  const auto again = manifest_from_json(json::parse(text), path.parent_path()).manifest;
  CHECK(again.entries == m.entries);
  CHECK(serialize_manifest(again) == text);
}

TEST_CASE("rebasing keeps entry paths pointing at the same files") {
  TempDir dir;
  auto m = load_manifest(fixture_dir() / "eval" / "manifest.json").manifest;
  rebase_manifest(m, dir.path() / "out");
  save_manifest(m, dir.path() / "out" / "copy.json");
  const auto reloaded = load_manifest(dir.path() / "out" / "copy.json", {.strict = true});
  CHECK(reloaded.warnings.empty());
  CHECK(std::filesystem::equivalent(reloaded.manifest.root, fixture_dir() / "eval"));
  CHECK(reloaded.manifest.declared_root.has_value());
  CHECK(load_samples(reloaded.manifest).size() == 6);
}

TEST_CASE("reference statistics count words and vocabulary") {
  const std::vector<std::string> refs{"a b c", "a b c d e"};
  const auto s = reference_stats(refs);
  CHECK(s.avg_words == 4.0);
  CHECK(s.total_words == 8);
  CHECK(s.word_histogram.at(3) == 1);
  CHECK(s.vocabulary.at("a") == 2);

  CHECK(reference_stats(std::span<const std::string>{}).avg_words == 0.0);

  const auto fixture = reference_stats(load_manifest(fixture_dir() / "eval" / "manifest.json").manifest);
  CHECK(fixture.references == 6);
  CHECK(fixture.total_words == 34);
  CHECK(fixture.avg_words == 34.0 / 6.0);

  const std::vector<std::string> cased{"The Dog, barking!", "the dog"};
  const auto c = reference_stats(cased);
  CHECK(c.vocabulary.at("the") == 2);
  CHECK(c.vocabulary.at("dog") == 2);
  CHECK(c.vocabulary.count("dog,") == 0);

  const auto j = stats_to_json(s);
  CHECK(j.at("word_histogram").at("5") == 1);
  const auto csv = stats_to_csv(s);
  CHECK(csv.rfind("section,key,count\nhistogram,3,1\nhistogram,5,1\n", 0) == 0);
}

TEST_CASE("property: statistics are invariant under reference permutation") {
  std::mt19937_64 rng(61);
  for (int i = 0; i < 200; ++i) {
    std::vector<std::string> refs;
    const int n = 1 + static_cast<int>(rng() % 12);
    for (int k = 0; k < n; ++k) refs.push_back(random_phrase(rng, 1, 15));
    const auto base = stats_to_json(reference_stats(refs)).dump();
    std::shuffle(refs.begin(), refs.end(), rng);
    REQUIRE(stats_to_json(reference_stats(refs)).dump() == base);
  }
}

TEST_CASE("generated references are extracted from JSON, fences or plain text") {
  CHECK(extract_generated_reference(R"({"complex_ref": "the one on the left"})") == "the one on the left");
  CHECK(extract_generated_reference("```json\n{\"complex_ref\": \"x y\"}\n```") == "x y");
  CHECK(extract_generated_reference(R"({"u1": {"complex_ref": "keyed"}})", "u1") == "keyed");
  CHECK(extract_generated_reference("  \"quoted text\"  ") == "quoted text");
  CHECK(extract_generated_reference("plain reply") == "plain reply");
}

TEST_CASE("transformation outcomes: pending, unchanged, word band, transport, missing target") {
  const auto tmpl = default_transform_template();
  const auto gen = generator({
      {"ok", R"({"complex_ref": "The handheld device creating localized heat and continuous ambient noise."})"},
      {"same", "The Violin on the left."},
      {"long", "one two three four five six seven eight nine ten eleven twelve thirteen fourteen "
               "fifteen sixteen seventeen eighteen nineteen twenty twentyone twentytwo twentythree "
               "twentyfour twentyfive"},
      {"blank", "   "},
  });

  const auto ok = transform_reference(entry("ok", "violin"), gen, tmpl);
  CHECK(ok.review.kind == ReviewKind::Pending);
  CHECK(ok.word_count == 10);
  CHECK(ok.flags.empty());
  CHECK(ok.target_object_name == "violin");
  CHECK(ok.final_reference().empty());

  const auto same = transform_reference(entry("same", "violin"), gen, tmpl);
  CHECK(same.review == ReviewStatus::rejected("unchanged"));

  const auto longer = transform_reference(entry("long", "violin"), gen, tmpl);
  CHECK(longer.review.kind == ReviewKind::Pending);
  CHECK(longer.word_count == 25);
  CHECK(longer.flags == std::vector<std::string>{"word-band"});

  const auto down = transform_reference(entry("down", "violin"), gen, tmpl);
  CHECK(down.review == ReviewStatus::rejected("transport"));
  CHECK(down.flags == std::vector<std::string>{"transport:backend_unavailable"});

  CHECK(transform_reference(entry("blank", "violin"), gen, tmpl).review ==
        ReviewStatus::rejected("empty-generation"));
  CHECK(transform_reference(entry("ok", std::nullopt), gen, tmpl).review ==
        ReviewStatus::rejected("missing-target"));

  CHECK_THROWS_AS(transform_reference(entry("ok", "violin"), gen, PromptTemplate("t", "{{uid}} only")),
                  TemplateError);
}

TEST_CASE("transforming a manifest keeps order for any worker count") {
  const auto m = mock_manifest();
  const ScriptedMock mock(ScriptedMockSpec::from_file(fixture_dir() / "mock" / "mock_spec.json"));
  const auto one = transform_manifest(m, mock, default_transform_template(), 1);
  const auto four = transform_manifest(m, mock, default_transform_template(), 4);
  CHECK(one == four);
  REQUIRE(one.size() == 3);
  CHECK(one[0].uid == "g1");
  CHECK(one[0].review.kind == ReviewKind::Pending);
  CHECK(one[1].review == ReviewStatus::rejected("missing-target"));
  CHECK(one[2].generated_reference == "The instrument whose melody answers the partner on the right");
  const auto counts = count_reviews(one);
  CHECK(counts.pending == 2);
  CHECK(counts.rejected == 1);
  CHECK(counts.total() == 3);
}

TEST_CASE("review queue: export, decide, import and finalize") {
  const auto m = mock_manifest();
  const ScriptedMock mock(ScriptedMockSpec::from_file(fixture_dir() / "mock" / "mock_spec.json"));
  const auto records = transform_manifest(m, mock, default_transform_template());
  const auto rows = lines_of(export_review_queue(records));
  REQUIRE(rows.size() == 3);
  CHECK(json::parse(rows[0]).at("decision").is_null());
  CHECK(json::parse(rows[1]).at("decision") == "reject");

  SUBCASE("accept one, revise one") {
    const std::string edited = set_decision(rows[0], "accept") + "\n" + rows[1] + "\n" +
                               set_decision(rows[2], "revise", "revised_text", "  the violin answering its partner  ") +
                               "\n";
    const auto decided = import_review_decisions(edited, m);
    const auto counts = count_reviews(decided);
    CHECK(counts.accepted == 1);
    CHECK(counts.revised == 1);
    CHECK(counts.rejected == 1);

    const auto final_m = finalize_manifest(m, decided);
    CHECK(final_m.name == m.name + "-transformed");
    CHECK(final_m.entries.size() == counts.accepted + counts.revised);
    const auto& g1 = final_m.entries[0];
    CHECK(g1.provenance == Provenance::Transformed);
    CHECK(g1.reference == records[0].generated_reference);
    CHECK(g1.source == SourceRef{"g1", m.entries[0].reference});
    const auto& g3 = final_m.entries[1];
    CHECK(g3.provenance == Provenance::HumanRevised);
    CHECK(g3.reference == "the violin answering its partner");
    for (const auto& e : final_m.entries) {
      const auto& src = *std::find_if(m.entries.begin(), m.entries.end(),
                                      [&](const ManifestEntry& s) { return s.uid == e.uid; });
      CHECK(e.split == src.split);
      CHECK(e.gt_mask_paths == src.gt_mask_paths);
      CHECK(e.frames == src.frames);
    }
    // The finalized manifest is itself schema-valid.
    const auto reparsed = manifest_from_json(manifest_to_json(final_m), m.root, {.strict = true});
    CHECK(reparsed.manifest.entries == final_m.entries);
  }

  SUBCASE("one rejection leaves the other two") {
    const std::string edited = set_decision(rows[0], "reject", "reason", "too vague") + "\n" +
                               set_decision(rows[2], "accept") + "\n";
    const auto decided = import_review_decisions(edited, m);
    CHECK(decided[0].review == ReviewStatus::rejected("too vague"));
    CHECK(finalize_manifest(m, decided).entries.size() == 1);
  }

  SUBCASE("malformed review files name the offending line") {
    auto line_of = [&](const std::string& text) -> std::size_t {
      try {
        import_review_decisions(text, m);
      } catch (const ReviewError& e) {
        return e.line();
      }
      return 0;
    };
    CHECK(line_of(rows[0] + "\n" + rows[0] + "\n") == 2);
    CHECK(line_of(set_decision(rows[0], "maybe")) == 1);
    CHECK(line_of(set_decision(rows[0], "revise", "revised_text", "  ")) == 1);
    CHECK(line_of("\n" + set_decision(rows[1], "accept")) == 2);  // empty generation
    json stranger = json::parse(rows[0]);
    stranger["uid"] = "zz";
    CHECK(line_of(stranger.dump()) == 1);
    CHECK(line_of("[1,2]") == 1);
  }
}

TEST_CASE("property: finalize conserves entries for random review decisions") {
  std::mt19937_64 rng(67);
  BenchmarkManifest m;
  m.name = "rand";
  m.version = "1";
  std::map<std::string, std::string> replies;
  for (int i = 0; i < 12; ++i) {
    auto e = entry("e" + std::to_string(i), "violin", random_phrase(rng, 3, 8));
    e.split = i % 3 == 0 ? Split::Seen : Split::Unseen;
    m.entries.push_back(e);
    replies[e.uid] = "the instrument " + random_phrase(rng, 4, 9);
  }
  const auto gen = generator(replies);
  const auto records = transform_manifest(m, gen, default_transform_template(), 3);
  for (int trial = 0; trial < 100; ++trial) {
    std::string edited;
    for (const auto& row : lines_of(export_review_queue(records))) {
      switch (rng() % 4) {
        case 0:
          edited += set_decision(row, "accept");
          break;
        case 1:
          edited += set_decision(row, "revise", "revised_text", random_phrase(rng, 5, 10));
          break;
        case 2:
          edited += set_decision(row, "reject", "reason", "no");
          break;
        default:
          edited += row;
      }
      edited += "\n";
    }
    const auto decided = import_review_decisions(edited, m);
    const auto counts = count_reviews(decided);
    REQUIRE(counts.total() == m.entries.size());
    const auto final_m = finalize_manifest(m, decided);
    REQUIRE(final_m.entries.size() == counts.accepted + counts.revised);
    for (const auto& e : final_m.entries) {
      REQUIRE(e.source);
      const auto& src = *std::find_if(m.entries.begin(), m.entries.end(),
                                      [&](const ManifestEntry& s) { return s.uid == e.uid; });
      REQUIRE(e.split == src.split);
      REQUIRE(e.gt_mask_paths == src.gt_mask_paths);
    }
  }
}
