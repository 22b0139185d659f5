/*
 * Copyright 2026 The TGS Agent Authors
 * SPDX-License-Identifier: Apache-2.0
 */
// Shared test helpers: random generators, temporary directories and
// brute-force reference implementations used as oracles. The oracles are
// written independently of the library code (pixel sets and exhaustive
// searches) so that agreement is meaningful.
#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "tgs/core_types.hpp"
#include "tgs/pipeline.hpp"
#include "tgs/refchain.hpp"

namespace tgs::testing {

inline std::filesystem::path fixture_dir() { return TGS_FIXTURE_DIR; }

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("tgs-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline FrameMask random_mask(std::mt19937_64& rng, int w, int h, double density) {
  std::bernoulli_distribution fg(density);
  std::vector<bool> bits(static_cast<std::size_t>(w) * h);
  for (std::size_t i = 0; i < bits.size(); ++i) bits[i] = fg(rng);
  return FrameMask(w, h, std::move(bits));
}

/// Blobby masks: a few random rectangles, which give long boundaries that
/// exercise the tolerance window better than salt-and-pepper noise.
inline FrameMask random_blob_mask(std::mt19937_64& rng, int w, int h) {
  std::uniform_int_distribution<int> n_rects(0, 3);
  std::vector<bool> bits(static_cast<std::size_t>(w) * h, false);
  const int n = n_rects(rng);
  for (int r = 0; r < n; ++r) {
    std::uniform_int_distribution<int> xs(0, w - 1), ys(0, h - 1);
    int x1 = xs(rng), x2 = xs(rng), y1 = ys(rng), y2 = ys(rng);
    if (x1 > x2) std::swap(x1, x2);
    if (y1 > y2) std::swap(y1, y2);
    for (int y = y1; y <= y2; ++y) {
      for (int x = x1; x <= x2; ++x) bits[static_cast<std::size_t>(y) * w + x] = true;
    }
  }
  return FrameMask(w, h, std::move(bits));
}

using PixelSet = std::set<std::pair<int, int>>;

inline PixelSet pixel_set(const FrameMask& m) {
  PixelSet out;
  for (int y = 0; y < m.height(); ++y) {
    for (int x = 0; x < m.width(); ++x) {
      if (m.at(x, y)) out.insert({x, y});
    }
  }
  return out;
}

inline double oracle_jaccard(const FrameMask& pred, const FrameMask& gt) {
  const PixelSet a = pixel_set(pred);
  const PixelSet b = pixel_set(gt);
  PixelSet inter;
  PixelSet uni = a;
  for (const auto& p : b) {
    if (a.count(p)) inter.insert(p);
    uni.insert(p);
  }
  if (uni.empty()) return 1.0;
  return static_cast<double>(inter.size()) / static_cast<double>(uni.size());
}

/// Foreground pixels whose 4-neighbourhood leaves the foreground set.
inline PixelSet oracle_boundary(const FrameMask& m) {
  const PixelSet fg = pixel_set(m);
  PixelSet out;
  for (const auto& [x, y] : fg) {
    const std::pair<int, int> nbrs[] = {{x - 1, y}, {x + 1, y}, {x, y - 1}, {x, y + 1}};
    for (const auto& n : nbrs) {
      if (!fg.count(n)) {  // out-of-frame neighbours are never in the set
        out.insert({x, y});
        break;
      }
    }
  }
  return out;
}

inline double oracle_boundary_f(const FrameMask& pred, const FrameMask& gt, int tol) {
  const PixelSet pb = oracle_boundary(pred);
  const PixelSet gb = oracle_boundary(gt);
  if (pb.empty() && gb.empty()) return 1.0;
  if (pb.empty() || gb.empty()) return 0.0;
  auto hits = [tol](const PixelSet& from, const PixelSet& to) {
    std::size_t n = 0;
    for (const auto& [x, y] : from) {
      for (const auto& [u, v] : to) {
        if (std::max(std::abs(x - u), std::abs(y - v)) <= tol) {
          ++n;
          break;
        }
      }
    }
    return n;
  };
  const double p = static_cast<double>(hits(pb, gb)) / static_cast<double>(pb.size());
  const double r = static_cast<double>(hits(gb, pb)) / static_cast<double>(gb.size());
  if (p + r == 0.0) return 0.0;
  return 2.0 * p * r / (p + r);
}

/// Exhaustive selection: collect survivors, keep those with the maximal key,
/// then apply the tie-break chain one criterion at a time.
inline std::optional<GroundedBox> oracle_select(const std::vector<GroundedBox>& candidates,
                                                double tau_bbox, double tau_text,
                                                BoxSelection selection) {
  std::vector<GroundedBox> pool;
  for (const auto& c : candidates) {
    if (c.box_score() >= tau_bbox && c.text_score() >= tau_text) pool.push_back(c);
  }
  if (pool.empty()) return std::nullopt;
  auto key = [&](const GroundedBox& b) {
    return selection == BoxSelection::HighestBoxScore ? b.box_score() : b.box_score() * b.text_score();
  };
  auto keep = [&](auto score) {
    auto best = score(pool.front());
    for (const auto& b : pool) best = std::max(best, score(b));
    std::erase_if(pool, [&](const GroundedBox& b) { return score(b) != best; });
  };
  keep(key);
  keep([](const GroundedBox& b) {
    return std::make_tuple(-b.x1(), -b.y1(), -b.x2(), -b.y2());
  });
  keep([](const GroundedBox& b) { return b.box_score(); });
  keep([](const GroundedBox& b) { return b.text_score(); });
  return pool.front();
}

inline std::vector<GroundedBox> random_candidates(std::mt19937_64& rng, int w, int h,
                                                  std::size_t max_count) {
  std::uniform_int_distribution<std::size_t> count(0, max_count);
  std::uniform_int_distribution<int> score_pick(0, 4);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  // A small pool of exact values makes threshold hits and key ties frequent.
  const double specials[] = {0.0, 0.09, 0.1, 0.24, 0.25, 0.5, 1.0};
  auto score = [&] {
    return score_pick(rng) == 0 ? specials[rng() % 7] : unit(rng);
  };
  std::vector<GroundedBox> out;
  const std::size_t n = count(rng);
  for (std::size_t i = 0; i < n; ++i) {
    std::uniform_int_distribution<int> xs(0, w - 1), ys(0, h - 1);
    const int x1 = xs(rng);
    const int y1 = ys(rng);
    std::uniform_int_distribution<int> xe(x1 + 1, w), ye(y1 + 1, h);
    out.push_back(GroundedBox::make(x1, y1, xe(rng), ye(rng), score(), score(), w, h));
  }
  return out;
}

/// A random phrase of lowercase words, never the null marker and never
/// containing tag characters.
inline std::string random_phrase(std::mt19937_64& rng, int min_words, int max_words) {
  static const char* kWords[] = {"a",     "person", "guitar", "red",    "dog",   "left",
                                 "right", "moving", "loud",   "small",  "car",   "piano",
                                 "near",  "the",    "window", "violin", "bird,", "singing."};
  std::uniform_int_distribution<int> n(min_words, max_words);
  std::uniform_int_distribution<std::size_t> w(0, std::size(kWords) - 1);
  std::string out;
  const int count = n(rng);
  for (int i = 0; i < count; ++i) {
    if (i) out += ' ';
    out += kWords[w(rng)];
  }
  return out;
}

/// Strict canonical chains always carry a think section; pass
/// `allow_missing_think` for chains that only the lenient parser accepts.
inline ReasoningChain random_chain(std::mt19937_64& rng, bool allow_missing_think = false) {
  std::uniform_int_distribution<int> pick(0, 9);
  std::optional<std::string> think;
  if (!allow_missing_think || pick(rng) != 0) {
    think = "The referential expression is: \"" + random_phrase(rng, 2, 5) + "\". The video shows " +
            random_phrase(rng, 2, 6) + ".";
    if (pick(rng) < 3) think = *think + "\nThe audio contains " + random_phrase(rng, 1, 4) + ".";
  }
  if (pick(rng) == 0) return ReasoningChain::null_object(think);
  return ReasoningChain::make(think, random_phrase(rng, 1, 12), random_phrase(rng, 1, 3));
}

}  // namespace tgs::testing
