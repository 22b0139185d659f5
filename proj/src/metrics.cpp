/*
 * Copyright 2026 The TGS Agent Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#include "tgs/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace tgs {
namespace {

void require_same_shape(const FrameMask& a, const FrameMask& b) {
  if (!a.same_shape(b)) {
    throw std::invalid_argument("mask dimension mismatch: " + std::to_string(a.width()) + "x" +
                                std::to_string(a.height()) + " vs " + std::to_string(b.width()) +
                                "x" + std::to_string(b.height()));
  }
}

// Summed-area table over a boolean raster, (w+1) x (h+1).
class IntegralImage {
 public:
  explicit IntegralImage(const FrameMask& m) : w_(m.width()), h_(m.height()) {
    sums_.assign(static_cast<std::size_t>(w_ + 1) * (h_ + 1), 0);
    for (int y = 0; y < h_; ++y) {
      long row = 0;
      for (int x = 0; x < w_; ++x) {
        row += m.at(x, y) ? 1 : 0;
        at(x + 1, y + 1) = at(x + 1, y) + row;
      }
    }
  }

  // Count over the clipped inclusive window [x0, x1] x [y0, y1].
  long count(int x0, int y0, int x1, int y1) const {
    x0 = std::max(x0, 0);
    y0 = std::max(y0, 0);
    x1 = std::min(x1, w_ - 1);
    y1 = std::min(y1, h_ - 1);
    if (x0 > x1 || y0 > y1) return 0;
    return get(x1 + 1, y1 + 1) - get(x0, y1 + 1) - get(x1 + 1, y0) + get(x0, y0);
  }

 private:
  long& at(int x, int y) { return sums_[static_cast<std::size_t>(y) * (w_ + 1) + x]; }
  long get(int x, int y) const { return sums_[static_cast<std::size_t>(y) * (w_ + 1) + x]; }

  int w_, h_;
  std::vector<long> sums_;
};

// Boundary pixels of `from` that have a boundary pixel of `to` within the tolerance.
std::size_t matched(const FrameMask& from, const IntegralImage& to, int tol) {
  std::size_t n = 0;
  for (int y = 0; y < from.height(); ++y) {
    for (int x = 0; x < from.width(); ++x) {
      if (from.at(x, y) && to.count(x - tol, y - tol, x + tol, y + tol) > 0) ++n;
    }
  }
  return n;
}

// Order-independent mean: summing sorted values makes the result invariant
// under permutation of the inputs.
double stable_mean(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

double frame_mean(const std::vector<double>& v) { return stable_mean(v); }

SplitScores make_scores(std::vector<double> js, std::vector<double> fs, std::size_t samples) {
  SplitScores s;
  s.j = stable_mean(std::move(js));
  s.f = stable_mean(std::move(fs));
  s.jf = (s.j + s.f) / 2.0;
  s.samples = samples;
  return s;
}

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

nlohmann::json scores_json(const std::map<std::string, SplitScores>& m) {
  nlohmann::json out = nlohmann::json::object();
  for (const auto& [name, s] : m) {
    out[name] = {{"J", s.j}, {"F", s.f}, {"JF", s.jf}, {"samples", s.samples}};
  }
  return out;
}

}  // namespace

double jaccard(const FrameMask& pred, const FrameMask& gt) {
  require_same_shape(pred, gt);
  std::size_t inter = 0;
  std::size_t uni = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    inter += (pred[i] && gt[i]) ? 1 : 0;
    uni += (pred[i] || gt[i]) ? 1 : 0;
  }
  if (uni == 0) return 1.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

FrameMask boundary_map(const FrameMask& mask) {
  const int w = mask.width();
  const int h = mask.height();
  std::vector<bool> bits(mask.size(), false);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!mask.at(x, y)) continue;
      const bool edge = x == 0 || y == 0 || x == w - 1 || y == h - 1 || !mask.at(x - 1, y) ||
                        !mask.at(x + 1, y) || !mask.at(x, y - 1) || !mask.at(x, y + 1);
      bits[static_cast<std::size_t>(y) * w + x] = edge;
    }
  }
  return FrameMask(w, h, std::move(bits));
}

int default_boundary_tolerance(int width, int height) {
  const double diag = std::hypot(static_cast<double>(width), static_cast<double>(height));
  return std::max(1, static_cast<int>(std::lround(0.008 * diag)));
}

double boundary_f(const FrameMask& pred, const FrameMask& gt, int tolerance_px) {
  require_same_shape(pred, gt);
  if (tolerance_px < 0) throw std::invalid_argument("tolerance must be non-negative");
  const FrameMask pb = boundary_map(pred);
  const FrameMask gb = boundary_map(gt);
  const std::size_t np = mask_area(pb);
  const std::size_t ng = mask_area(gb);
  if (np == 0 && ng == 0) return 1.0;
  if (np == 0 || ng == 0) return 0.0;
  const double precision =
      static_cast<double>(matched(pb, IntegralImage(gb), tolerance_px)) / static_cast<double>(np);
  const double recall =
      static_cast<double>(matched(gb, IntegralImage(pb), tolerance_px)) / static_cast<double>(ng);
  if (precision + recall == 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

double null_s(const FrameMask& pred) {
  return static_cast<double>(mask_area(pred)) / static_cast<double>(pred.size());
}

EvalReport aggregate(std::span<const EvalSample> samples, const EvalOptions& options) {
  EvalReport report;
  report.averaging = options.averaging;

  for (const auto& s : samples) {
    if (s.pred.empty()) throw std::invalid_argument("sample '" + s.uid + "' has no predictions");
    SampleScores sc;
    sc.uid = s.uid;
    sc.split = s.split;
    if (s.split == Split::Null) {
      for (const auto& m : s.pred) sc.frame_s.push_back(null_s(m));
      sc.s = frame_mean(sc.frame_s);
    } else {
      if (!s.gt) {
        throw std::invalid_argument("sample '" + s.uid + "' has no ground-truth masks");
      }
      if (s.gt->size() != s.pred.size()) {
        throw std::invalid_argument("sample '" + s.uid + "' has " + std::to_string(s.pred.size()) +
                                    " predicted masks but " + std::to_string(s.gt->size()) +
                                    " ground-truth masks");
      }
      for (std::size_t i = 0; i < s.pred.size(); ++i) {
        const auto& p = s.pred[i];
        const auto& g = (*s.gt)[i];
        require_same_shape(p, g);
        const int tol = options.tolerance_px.value_or(default_boundary_tolerance(g.width(), g.height()));
        sc.frame_j.push_back(jaccard(p, g));
        sc.frame_f.push_back(boundary_f(p, g, tol));
      }
      sc.j = frame_mean(sc.frame_j);
      sc.f = frame_mean(sc.frame_f);
    }
    report.per_sample.push_back(std::move(sc));
  }
  std::sort(report.per_sample.begin(), report.per_sample.end(),
            [](const SampleScores& a, const SampleScores& b) {
              return std::tie(a.uid, a.j, a.f, a.s) < std::tie(b.uid, b.j, b.f, b.s);
            });

  auto build = [&](Averaging mode, std::map<std::string, SplitScores>& out,
                   std::optional<double>& null_out) {
    struct Acc {
      std::vector<double> j, f;
      std::size_t n = 0;
    };
    std::map<std::string, Acc> acc;
    std::vector<double> s_values;
    std::size_t null_n = 0;
    for (const auto& sc : report.per_sample) {
      if (sc.split == Split::Null) {
        ++null_n;
        if (mode == Averaging::PerFrameThenSample) {
          s_values.push_back(sc.s);
        } else {
          s_values.insert(s_values.end(), sc.frame_s.begin(), sc.frame_s.end());
        }
        continue;
      }
      for (const std::string& key : {std::string(to_string(sc.split)), std::string("mix")}) {
        auto& a = acc[key];
        ++a.n;
        if (mode == Averaging::PerFrameThenSample) {
          a.j.push_back(sc.j);
          a.f.push_back(sc.f);
        } else {
          a.j.insert(a.j.end(), sc.frame_j.begin(), sc.frame_j.end());
          a.f.insert(a.f.end(), sc.frame_f.begin(), sc.frame_f.end());
        }
      }
    }
    for (auto& [key, a] : acc) out[key] = make_scores(std::move(a.j), std::move(a.f), a.n);
    if (null_n > 0) null_out = stable_mean(std::move(s_values));
    report.null_samples = null_n;
  };

  const Averaging other = options.averaging == Averaging::PerFrameThenSample
                              ? Averaging::PooledFrames
                              : Averaging::PerFrameThenSample;
  build(options.averaging, report.per_split, report.null_s);
  build(other, report.alternate_per_split, report.alternate_null_s);
  return report;
}

nlohmann::json report_to_json(const EvalReport& report) {
  nlohmann::json j;
  j["averaging"] = report.averaging == Averaging::PerFrameThenSample ? "per_sample" : "pooled_frames";
  j["per_split"] = scores_json(report.per_split);
  j["null"] = report.null_s ? nlohmann::json{{"S", *report.null_s}, {"samples", report.null_samples}}
                            : nlohmann::json(nullptr);
  j["alternate"] = {{"per_split", scores_json(report.alternate_per_split)},
                    {"null_S", report.alternate_null_s ? nlohmann::json(*report.alternate_null_s)
                                                       : nlohmann::json(nullptr)}};
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& s : report.per_sample) {
    nlohmann::json row{{"uid", s.uid}, {"split", std::string(to_string(s.split))}};
    if (s.split == Split::Null) {
      row["S"] = s.s;
      row["frame_S"] = s.frame_s;
    } else {
      row["J"] = s.j;
      row["F"] = s.f;
      row["frame_J"] = s.frame_j;
      row["frame_F"] = s.frame_f;
    }
    rows.push_back(std::move(row));
  }
  j["per_sample"] = std::move(rows);
  return j;
}

std::string report_to_table(const EvalReport& report, bool verbose) {
  std::ostringstream out;
  auto grid = [&](const std::string& label, const std::map<std::string, SplitScores>& m,
                  const std::optional<double>& s) {
    char line[256];
    std::snprintf(line, sizeof line, "%-14s|%-20s|%-20s|%-20s|%s\n", "", " Seen (S)",
                  " Unseen (U)", " Mix (S+U)", " Null");
    out << line;
    std::snprintf(line, sizeof line, "%-14s|%6s %6s %6s |%6s %6s %6s |%6s %6s %6s |%6s\n",
                  label.c_str(), "J", "F", "J&F", "J", "F", "J&F", "J", "F", "J&F", "S");
    out << line;
    out << std::string(90, '-') << '\n';
    std::string row = "              |";
    for (const char* key : {"seen", "unseen", "mix"}) {
      auto it = m.find(key);
      for (int k = 0; k < 3; ++k) {
        std::string cell = "-";
        if (it != m.end()) {
          const double v = k == 0 ? it->second.j : k == 1 ? it->second.f : it->second.jf;
          cell = fixed(100.0 * v, 1);
        }
        row += std::string(6 - std::min<std::size_t>(6, cell.size()), ' ') + cell + " ";
      }
      row += "|";
    }
    const std::string sc = s ? fixed(*s, 3) : "-";
    row += std::string(6 - std::min<std::size_t>(6, sc.size()), ' ') + sc + "\n";
    out << row;
  };
  const bool per_sample = report.averaging == Averaging::PerFrameThenSample;
  grid(per_sample ? "per-sample" : "pooled", report.per_split, report.null_s);
  if (verbose) {
    out << '\n';
    grid(per_sample ? "pooled" : "per-sample", report.alternate_per_split, report.alternate_null_s);
  }
  return out.str();
}

std::string report_to_csv(const EvalReport& report) {
  std::ostringstream out;
  out << "uid,split,frames,J,F,JF,S\n";
  char buf[256];
  for (const auto& s : report.per_sample) {
    if (s.split == Split::Null) {
      std::snprintf(buf, sizeof buf, ",,,,%.17g", s.s);
      out << s.uid << ',' << to_string(s.split) << ',' << s.frame_s.size() << buf << '\n';
    } else {
      std::snprintf(buf, sizeof buf, ",%.17g,%.17g,%.17g,", s.j, s.f, (s.j + s.f) / 2.0);
      out << s.uid << ',' << to_string(s.split) << ',' << s.frame_j.size() << buf << '\n';
    }
  }
  return out.str();
}

std::string_view to_string(CategoryMatch match) {
  switch (match) {
    case CategoryMatch::Exact:
      return "exact";
    case CategoryMatch::NormalizedMatch:
      return "normalized";
    case CategoryMatch::Miss:
      return "miss";
  }
  return "unknown";
}

std::string normalize_category(std::string_view text) {
  std::string spaced;
  for (char c : text) {
    if (c == '-' || c == '_') c = ' ';
    spaced += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  std::istringstream in(spaced);
  std::string word;
  std::string out;
  while (in >> word) {
    if (word.size() > 3 && word.back() == 's' && word[word.size() - 2] != 's') word.pop_back();
    if (!out.empty()) out += ' ';
    out += word;
  }
  return out;
}

CategoryMatch match_category(std::string_view s_object, std::string_view gt_category) {
  auto trimmed = [](std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
  };
  const auto a = trimmed(s_object);
  const auto b = trimmed(gt_category);
  const bool exact = a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
                       return std::tolower(static_cast<unsigned char>(x)) ==
                              std::tolower(static_cast<unsigned char>(y));
                     });
  if (exact) return CategoryMatch::Exact;
  if (normalize_category(a) == normalize_category(b)) return CategoryMatch::NormalizedMatch;
  return CategoryMatch::Miss;
}

std::map<std::string, CategoryTally> tally_categories(std::span<const CategoryPair> pairs) {
  std::map<std::string, CategoryTally> out;
  for (const auto& p : pairs) {
    const auto m = match_category(p.s_object, p.gt_category);
    std::vector<std::string> keys{std::string(to_string(p.split))};
    if (p.split != Split::Null) keys.emplace_back("mix");
    for (const auto& k : keys) {
      auto& t = out[k];
      if (m == CategoryMatch::Exact) ++t.exact;
      if (m == CategoryMatch::NormalizedMatch) ++t.normalized;
      if (m == CategoryMatch::Miss) ++t.miss;
    }
  }
  return out;
}

}  // namespace tgs
