/*
 * Copyright 2026 The TGS Agent Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#include <doctest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "support.hpp"
#include "tgs/benchkit.hpp"
#include "tgs/mask_codec.hpp"
#include "tgs/metrics.hpp"

using namespace tgs;
using namespace tgs::testing;

namespace {

constexpr double kEps = 1e-12;

FrameMask full(int w, int h) { return box_mask(w, h, 0, 0, w, h); }

/// The shipped evaluation fixture: gt from the manifest, predictions from
/// pred/<uid>/NNNNN.pgm.
std::vector<EvalSample> eval_fixture() {
  const auto dir = fixture_dir() / "eval";
  const auto manifest = load_manifest(dir / "manifest.json").manifest;
  std::vector<EvalSample> out;
  for (const auto& sample : load_samples(manifest)) {
    EvalSample e{sample.uid(), sample.split(), {}, sample.gt_masks()};
    for (std::size_t i = 0; i < sample.frames().size(); ++i) {
      char name[16];
      std::snprintf(name, sizeof name, "%05zu.pgm", i);
      e.pred.push_back(read_mask_file(dir / "pred" / sample.uid() / name));
    }
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace

TEST_CASE("jaccard handles empty unions and shape mismatches") {
  CHECK(jaccard(all_background(4, 4), all_background(4, 4)) == 1.0);
  CHECK(jaccard(full(4, 4), all_background(4, 4)) == 0.0);
  CHECK(jaccard(box_mask(4, 4, 0, 0, 2, 4), box_mask(4, 4, 0, 0, 4, 4)) == 0.5);
  CHECK_THROWS_AS(jaccard(all_background(4, 4), all_background(4, 3)), std::invalid_argument);
}

TEST_CASE("property: jaccard equals the pixel-set oracle exactly") {
  std::mt19937_64 rng(41);
  std::uniform_int_distribution<int> dim(1, 32);
  std::uniform_real_distribution<double> density(0.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    const int w = dim(rng), h = dim(rng);
    const auto a = random_mask(rng, w, h, density(rng));
    const auto b = i % 2 ? random_mask(rng, w, h, density(rng)) : random_blob_mask(rng, w, h);
    REQUIRE(jaccard(a, b) == oracle_jaccard(a, b));
    REQUIRE(jaccard(a, b) == jaccard(b, a));
  }
}

TEST_CASE("boundary maps mark foreground pixels touching background or the frame edge") {
  const auto m = box_mask(5, 5, 1, 1, 4, 4);
  const auto b = boundary_map(m);
  CHECK(mask_area(b) == 8);
  CHECK_FALSE(b.at(2, 2));
  CHECK(mask_area(boundary_map(full(3, 3))) == 8);
  CHECK(mask_area(boundary_map(full(1, 1))) == 1);
  std::mt19937_64 rng(43);
  for (int i = 0; i < 300; ++i) {
    const auto r = random_mask(rng, 1 + static_cast<int>(rng() % 16), 1 + static_cast<int>(rng() % 16), 0.5);
    REQUIRE(pixel_set(boundary_map(r)) == oracle_boundary(r));
  }
}

TEST_CASE("property: boundary F matches the exhaustive oracle at several tolerances") {
  std::mt19937_64 rng(47);
  std::uniform_int_distribution<int> dim(1, 16);
  std::uniform_real_distribution<double> density(0.0, 1.0);
  for (int i = 0; i < 1500; ++i) {
    const int w = dim(rng), h = dim(rng);
    const auto a = i % 3 ? random_blob_mask(rng, w, h) : random_mask(rng, w, h, density(rng));
    const auto b = i % 2 ? random_blob_mask(rng, w, h) : random_mask(rng, w, h, density(rng));
    const int tol = i % 4;
    REQUIRE(boundary_f(a, b, tol) == doctest::Approx(oracle_boundary_f(a, b, tol)).epsilon(kEps));
  }
}

TEST_CASE("boundary F edge cases") {
  CHECK(boundary_f(all_background(4, 4), all_background(4, 4), 0) == 1.0);
  CHECK(boundary_f(full(4, 4), all_background(4, 4), 1) == 0.0);
  CHECK(boundary_f(full(4, 4), full(4, 4), 0) == 1.0);
  CHECK_THROWS_AS(boundary_f(full(4, 4), full(4, 4), -1), std::invalid_argument);
  // Disjoint far-apart blocks share no boundary pixels within one pixel.
  CHECK(boundary_f(box_mask(10, 10, 0, 0, 2, 2), box_mask(10, 10, 7, 7, 9, 9), 1) == 0.0);
}

TEST_CASE("default tolerance scales with the diagonal and never drops below one pixel") {
  CHECK(default_boundary_tolerance(8, 8) == 1);
  CHECK(default_boundary_tolerance(640, 480) == 6);    // diagonal 800
  CHECK(default_boundary_tolerance(1920, 1080) == 18);  // diagonal ~2202.9
}

TEST_CASE("null S is the foreground fraction") {
  CHECK(null_s(all_background(7, 5)) == 0.0);
  CHECK(null_s(full(7, 5)) == 1.0);
  CHECK(null_s(box_mask(4, 4, 0, 0, 2, 2)) == 0.25);
  std::mt19937_64 rng(53);
  for (int i = 0; i < 200; ++i) {
    const auto m = random_mask(rng, 9, 9, 0.5);
    auto bits = std::vector<bool>(m.size());
    for (std::size_t k = 0; k < m.size(); ++k) bits[k] = m[k];
    bits[rng() % bits.size()] = true;  // adding foreground never lowers S
    REQUIRE(null_s(FrameMask(9, 9, bits)) >= null_s(m));
  }
}

TEST_CASE("evaluation fixture reproduces the hand-computed grid") {
  const auto report = aggregate(eval_fixture(), {1, Averaging::PerFrameThenSample});
  const auto& seen = report.per_split.at("seen");
  const auto& unseen = report.per_split.at("unseen");
  const auto& mix = report.per_split.at("mix");
  CHECK(seen.j == doctest::Approx(7.0 / 12.0).epsilon(kEps));
  CHECK(seen.f == doctest::Approx(0.65).epsilon(kEps));
  CHECK(unseen.j == doctest::Approx(0.8).epsilon(kEps));
  CHECK(unseen.f == doctest::Approx(1.0).epsilon(kEps));
  CHECK(mix.j == doctest::Approx((1.0 + 1.0 / 6.0 + 1.0 + 0.6) / 4.0).epsilon(kEps));
  CHECK(mix.f == doctest::Approx(0.825).epsilon(kEps));
  CHECK(seen.samples == 2);
  CHECK(mix.samples == 4);
  for (const auto& [name, s] : report.per_split) CHECK(s.jf == (s.j + s.f) / 2.0);
  REQUIRE(report.null_s);
  CHECK(*report.null_s == doctest::Approx(0.0625).epsilon(kEps));
  CHECK(report.null_samples == 2);
  CHECK(report.per_split.count("null") == 0);

  // Pooled frames weight every frame equally; with two frames per sample the
  // fixture gives the same means.
  const auto& alt = report.alternate_per_split.at("mix");
  CHECK(alt.j == doctest::Approx(mix.j).epsilon(kEps));
  REQUIRE(report.alternate_null_s);
  CHECK(*report.alternate_null_s == doctest::Approx(0.0625).epsilon(kEps));
}

TEST_CASE("pooled averaging differs from per-sample averaging on uneven frame counts") {
  std::vector<EvalSample> samples;
  samples.push_back({"a", Split::Seen, {full(2, 2)}, std::vector<FrameMask>{full(2, 2)}});
  samples.push_back({"b", Split::Seen,
                     {all_background(2, 2), all_background(2, 2), all_background(2, 2)},
                     std::vector<FrameMask>(3, full(2, 2))});
  const auto per_sample = aggregate(samples, {1, Averaging::PerFrameThenSample});
  const auto pooled = aggregate(samples, {1, Averaging::PooledFrames});
  CHECK(per_sample.per_split.at("seen").j == 0.5);
  CHECK(pooled.per_split.at("seen").j == 0.25);
  CHECK(pooled.alternate_per_split.at("seen").j == 0.5);
  CHECK(report_to_json(pooled).at("averaging") == "pooled_frames");
}

TEST_CASE("aggregation rejects inconsistent samples") {
  std::vector<EvalSample> no_gt{{"a", Split::Seen, {full(2, 2)}, std::nullopt}};
  CHECK_THROWS_AS(aggregate(no_gt), std::invalid_argument);
  std::vector<EvalSample> count{{"a", Split::Seen, {full(2, 2)}, std::vector<FrameMask>(2, full(2, 2))}};
  CHECK_THROWS_AS(aggregate(count), std::invalid_argument);
  std::vector<EvalSample> empty{{"a", Split::Null, {}, std::nullopt}};
  CHECK_THROWS_AS(aggregate(empty), std::invalid_argument);
  const auto nothing = aggregate({});
  CHECK(nothing.per_split.empty());
  CHECK_FALSE(nothing.null_s);
}

TEST_CASE("property: aggregation is invariant under sample permutation") {
  auto samples = eval_fixture();
  const auto base = report_to_json(aggregate(samples, {1, Averaging::PerFrameThenSample})).dump();
  std::mt19937_64 rng(59);
  for (int i = 0; i < 50; ++i) {
    std::shuffle(samples.begin(), samples.end(), rng);
    REQUIRE(report_to_json(aggregate(samples, {1, Averaging::PerFrameThenSample})).dump() == base);
  }
}

TEST_CASE("reports render as JSON, CSV and a fixed-width table") {
  const auto report = aggregate(eval_fixture(), {1, Averaging::PerFrameThenSample});
  const auto j = report_to_json(report);
  CHECK(j.at("averaging") == "per_sample");
  CHECK(j.at("per_split").at("unseen").at("J") == 0.8);
  CHECK(j.at("null").at("samples") == 2);
  CHECK(j.at("per_sample").size() == 6);
  CHECK(j.at("per_sample").at(0).at("uid") == "n1");

  const auto csv = report_to_csv(report);
  std::istringstream lines(csv);
  std::string header, first;
  std::getline(lines, header);
  std::getline(lines, first);
  CHECK(header == "uid,split,frames,J,F,JF,S");
  CHECK(first == "n1,null,2,,,,0");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 7);

  const auto table = report_to_table(report);
  CHECK(table.find("Seen (S)") != std::string::npos);
  CHECK(table.find(" 58.3") != std::string::npos);  // seen J x100
  CHECK(table.find("0.062") != std::string::npos);   // null S, three decimals
}

TEST_CASE("category matching: exact, normalized and miss") {
  CHECK(match_category("Guitar", "guitar") == CategoryMatch::Exact);
  CHECK(match_category("  dog ", "dog") == CategoryMatch::Exact);
  CHECK(match_category("guitars", "guitar") == CategoryMatch::NormalizedMatch);
  CHECK(match_category("acoustic-guitar", "acoustic guitar") == CategoryMatch::NormalizedMatch);
  CHECK(match_category("bass", "bas") == CategoryMatch::Miss);
  CHECK(match_category("violin", "cello") == CategoryMatch::Miss);
  CHECK(normalize_category("Wind_Chimes") == "wind chime");
  CHECK(normalize_category("bus") == "bus");

  const std::vector<CategoryPair> pairs{{Split::Seen, "guitar", "guitar"},
                                        {Split::Unseen, "violins", "violin"},
                                        {Split::Unseen, "drum", "piano"},
                                        {Split::Null, "cat", "dog"}};
  const auto t = tally_categories(pairs);
  CHECK(t.at("seen").exact == 1);
  CHECK(t.at("unseen").normalized == 1);
  CHECK(t.at("unseen").miss == 1);
  CHECK(t.at("mix").total() == 3);
  CHECK(t.at("mix").match_rate() == doctest::Approx(2.0 / 3.0));
  CHECK(t.at("null").miss == 1);
  CHECK(CategoryTally{}.exact_rate() == 0.0);
}
