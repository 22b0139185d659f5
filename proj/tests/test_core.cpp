/*
 * Copyright 2026 The TGS Agent Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#include <doctest.h>

#include <random>

#include "support.hpp"
#include "tgs/core_types.hpp"
#include "tgs/mask_codec.hpp"

using namespace tgs;
using tgs::testing::TempDir;

TEST_CASE("split names round-trip and reject unknown values") {
  for (auto s : {Split::Seen, Split::Unseen, Split::Null}) {
    CHECK(split_from_string(to_string(s)) == s);
  }
  CHECK_THROWS_AS(split_from_string("train"), std::invalid_argument);
}

TEST_CASE("prompt types accept short and long spellings") {
  CHECK(prompt_type_from_string("f") == PromptType::FObject);
  CHECK(prompt_type_from_string("f_object") == PromptType::FObject);
  CHECK(prompt_type_from_string("s") == PromptType::SObject);
  CHECK(prompt_type_from_string("ref") == PromptType::RawReference);
  CHECK_THROWS_AS(prompt_type_from_string("x"), std::invalid_argument);
}

TEST_CASE("frame masks validate their shape") {
  CHECK_THROWS_AS(FrameMask(0, 3, {}), std::invalid_argument);
  CHECK_THROWS_AS(FrameMask(2, 2, std::vector<bool>(3)), std::invalid_argument);
  const FrameMask m = box_mask(4, 3, 1, 1, 3, 2);
  CHECK(mask_area(m) == 2);
  CHECK(m.at(1, 1));
  CHECK(m.at(2, 1));
  CHECK_FALSE(m.at(3, 1));
  CHECK(mask_area(all_background(5, 5)) == 0);
  CHECK(mask_area(box_mask(4, 4, -2, -2, 10, 10)) == 16);  // clipped to the frame
}

TEST_CASE("grounded boxes reject invalid geometry and scores") {
  const auto b = GroundedBox::make(1, 2, 5, 7, 0.5, 0.3, 8, 8);
  CHECK(b.area() == 20);
  CHECK_THROWS_AS(GroundedBox::make(3, 0, 3, 4, 0.5, 0.5, 8, 8), std::invalid_argument);
  CHECK_THROWS_AS(GroundedBox::make(0, 0, 9, 4, 0.5, 0.5, 8, 8), std::invalid_argument);
  CHECK_THROWS_AS(GroundedBox::make(-1, 0, 2, 4, 0.5, 0.5, 8, 8), std::invalid_argument);
  CHECK_THROWS_AS(GroundedBox::make(0, 0, 2, 4, 1.5, 0.5, 8, 8), std::invalid_argument);
  CHECK_THROWS_AS(GroundedBox::make(0, 0, 2, 4, 0.5, -0.1, 8, 8), std::invalid_argument);
}

TEST_CASE("reference samples enforce their invariants") {
  std::vector<FrameRef> frames{FrameRef::in_memory("a/0", 4, 4), FrameRef::in_memory("a/1", 4, 4)};
  CHECK_NOTHROW(ReferenceSample("a", frames, std::nullopt, "the dog", Split::Seen));
  CHECK_THROWS_AS(ReferenceSample("a", {}, std::nullopt, "the dog", Split::Seen), std::invalid_argument);
  CHECK_THROWS_AS(ReferenceSample("a", frames, std::nullopt, "", Split::Seen), std::invalid_argument);
  std::vector<FrameRef> mixed{FrameRef::in_memory("a/0", 4, 4), FrameRef::in_memory("a/1", 5, 4)};
  CHECK_THROWS_AS(ReferenceSample("a", mixed, std::nullopt, "x", Split::Seen), std::invalid_argument);
  std::vector<FrameMask> one{all_background(4, 4)};
  CHECK_THROWS_AS(ReferenceSample("a", frames, std::nullopt, "x", Split::Seen, one),
                  std::invalid_argument);
  std::vector<FrameMask> fg{box_mask(4, 4, 0, 0, 1, 1), all_background(4, 4)};
  CHECK_THROWS_AS(ReferenceSample("a", frames, std::nullopt, "x", Split::Null, fg),
                  std::invalid_argument);
  std::vector<FrameMask> wrong{all_background(4, 4), all_background(3, 4)};
  CHECK_THROWS_AS(ReferenceSample("a", frames, std::nullopt, "x", Split::Seen, wrong),
                  std::invalid_argument);
}

TEST_CASE("all-background 3x3 mask encodes as a single background run") {
  const auto m = all_background(3, 3);
  CHECK(mask_runs(m) == std::vector<std::size_t>{9});
  CHECK(encode_mask(m, MaskFormat::RleJson) == R"({"w":3,"h":3,"runs":[9]})");
}

TEST_CASE("foreground-first masks start with a zero-length background run") {
  const auto m = box_mask(2, 2, 0, 0, 2, 1);
  CHECK(mask_runs(m) == std::vector<std::size_t>{0, 2, 2});
}

TEST_CASE("RLE decoding rejects inconsistent payloads") {
  CHECK_THROWS_AS(decode_mask(R"({"w":2,"h":2,"runs":[1,1]})", MaskFormat::RleJson), CodecError);
  CHECK_THROWS_AS(decode_mask(R"({"w":2,"h":2,"runs":[3,2]})", MaskFormat::RleJson), CodecError);
  CHECK_THROWS_AS(decode_mask(R"({"w":0,"h":2,"runs":[]})", MaskFormat::RleJson), CodecError);
  CHECK_THROWS_AS(decode_mask(R"({"w":2,"h":2})", MaskFormat::RleJson), CodecError);
  CHECK_THROWS_AS(decode_mask("not json", MaskFormat::RleJson), CodecError);
  try {
    decode_mask(R"({"w":2,"h":2,"runs":[1,1,-1]})", MaskFormat::RleJson);
    FAIL("expected a codec error");
  } catch (const CodecError& e) {
    CHECK(e.format() == MaskFormat::RleJson);
    CHECK(e.position() == 2);
  }
}

TEST_CASE("PGM decoding handles comments and rejects truncation") {
  const std::string with_comment = std::string("P5\n# made by hand\n2 1\n255\n") + '\xff' + '\x00';
  const auto m = decode_mask(with_comment, MaskFormat::Pgm);
  CHECK(m.width() == 2);
  CHECK(m.at(0, 0));
  CHECK_FALSE(m.at(1, 0));
  CHECK_THROWS_AS(decode_mask("P5\n2 2\n255\n\x01", MaskFormat::Pgm), CodecError);
  CHECK_THROWS_AS(decode_mask("P2\n1 1\n255\n0", MaskFormat::Pgm), CodecError);
  CHECK_THROWS_AS(decode_mask(std::string("P5\n1 1\n255\n") + '\0' + "x", MaskFormat::Pgm),
                  CodecError);
}

TEST_CASE("mask files pick the codec from the extension") {
  TempDir dir;
  const FrameMask m = box_mask(5, 4, 1, 1, 4, 3);
  write_mask_file(dir.path() / "a" / "m.pgm", m);
  write_mask_file(dir.path() / "m.json", m);
  CHECK(read_mask_file(dir.path() / "a" / "m.pgm") == m);
  CHECK(read_mask_file(dir.path() / "m.json") == m);
  CHECK(read_file(dir.path() / "m.json").front() == '{');
}

TEST_CASE("frame refs read dimensions from PGM headers") {
  TempDir dir;
  Raster r{3, 2, {0, 1, 2, 3, 4, 5}};
  write_file(dir.path() / "f.pgm", encode_pgm(r));
  const auto f = FrameRef::from_file("x/0", dir.path() / "f.pgm");
  CHECK(f.width == 3);
  CHECK(f.height == 2);
  CHECK(f.path.has_value());
}

TEST_CASE("property: both mask codecs round-trip random masks") {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> dim(1, 40);
  std::uniform_real_distribution<double> density(0.0, 1.0);
  for (int i = 0; i < 500; ++i) {
    const auto m = testing::random_mask(rng, dim(rng), dim(rng), density(rng));
    for (auto format : {MaskFormat::Pgm, MaskFormat::RleJson}) {
      REQUIRE(decode_mask(encode_mask(m, format), format) == m);
    }
    const auto runs = mask_runs(m);
    std::size_t total = 0;
    for (auto r : runs) total += r;
    REQUIRE(total == m.size());
    for (std::size_t k = 1; k < runs.size(); ++k) REQUIRE(runs[k] > 0);
    REQUIRE(mask_from_runs(m.width(), m.height(), runs) == m);
  }
}
