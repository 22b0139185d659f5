/*
 * Copyright 2026 The TGS Agent Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#include "tgs/mask_codec.hpp"

#include <cctype>
#include <fstream>
#include <iterator>
#include <sstream>

#include <nlohmann/json.hpp>

namespace tgs {
namespace {

std::string format_name(MaskFormat format) {
  return format == MaskFormat::Pgm ? "pgm" : "rle-json";
}

class PgmReader {
 public:
  explicit PgmReader(std::string_view data) : data_(data) {}

  void expect_magic() {
    if (data_.size() < 2 || data_[0] != 'P' || data_[1] != '5') {
      fail(0, "missing P5 magic");
    }
    pos_ = 2;
  }

  // Header integers are separated by whitespace and may be interleaved with
  // '#' comments running to end of line.
  long read_int(const char* what) {
    skip_space_and_comments();
    const std::size_t start = pos_;
    long value = 0;
    while (pos_ < data_.size() && std::isdigit(static_cast<unsigned char>(data_[pos_]))) {
      value = value * 10 + (data_[pos_] - '0');
      if (value > 1'000'000) fail(start, std::string(what) + " too large");
      ++pos_;
    }
    if (pos_ == start) fail(start, std::string("expected ") + what);
    return value;
  }

  void expect_single_space() {
    if (pos_ >= data_.size() || !std::isspace(static_cast<unsigned char>(data_[pos_]))) {
      fail(pos_, "expected whitespace before pixel data");
    }
    ++pos_;
  }

  std::size_t pos() const { return pos_; }
  std::string_view data() const { return data_; }

  [[noreturn]] static void fail(std::size_t at, const std::string& msg) {
    throw CodecError(MaskFormat::Pgm, at, msg);
  }

 private:
  void skip_space_and_comments() {
    while (pos_ < data_.size()) {
      const char c = data_[pos_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else if (c == '#') {
        while (pos_ < data_.size() && data_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  std::string_view data_;
  std::size_t pos_ = 0;
};

}  // namespace

CodecError::CodecError(MaskFormat format, std::size_t position, const std::string& message)
    : std::runtime_error(format_name(format) + " codec error at " +
                         (format == MaskFormat::Pgm ? "byte " : "run ") +
                         std::to_string(position) + ": " + message),
      format_(format),
      position_(position),
      detail_(message) {}

Raster decode_pgm(std::string_view payload) {
  PgmReader reader(payload);
  reader.expect_magic();
  const long width = reader.read_int("width");
  const long height = reader.read_int("height");
  const long maxval = reader.read_int("maxval");
  if (width <= 0 || height <= 0) PgmReader::fail(reader.pos(), "dimensions must be positive");
  if (maxval <= 0 || maxval > 255) PgmReader::fail(reader.pos(), "maxval must be in 1..255");
  reader.expect_single_space();
  const std::size_t offset = reader.pos();
  const std::size_t count = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  if (payload.size() - offset < count) {
    PgmReader::fail(payload.size(), "truncated pixel data: expected " + std::to_string(count) +
                                        " bytes, found " + std::to_string(payload.size() - offset));
  }
  if (payload.size() - offset > count) {
    PgmReader::fail(offset + count, "trailing bytes after pixel data");
  }
  Raster raster;
  raster.width = static_cast<int>(width);
  raster.height = static_cast<int>(height);
  raster.pixels.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const auto v = static_cast<std::uint8_t>(payload[offset + i]);
    if (v > maxval) PgmReader::fail(offset + i, "pixel exceeds maxval");
    raster.pixels.push_back(v);
  }
  return raster;
}

std::string encode_pgm(const Raster& raster) {
  std::string out = "P5\n" + std::to_string(raster.width) + " " + std::to_string(raster.height) +
                    "\n255\n";
  out.append(raster.pixels.begin(), raster.pixels.end());
  return out;
}

std::vector<std::size_t> mask_runs(const FrameMask& mask) {
  std::vector<std::size_t> runs;
  bool current = false;
  std::size_t count = 0;
  for (bool b : mask.bits()) {
    if (b != current) {
      runs.push_back(count);
      count = 0;
      current = b;
    }
    ++count;
  }
  runs.push_back(count);
  return runs;
}

FrameMask mask_from_runs(int width, int height, const std::vector<std::size_t>& runs) {
  if (width <= 0 || height <= 0) {
    throw CodecError(MaskFormat::RleJson, 0, "dimensions must be positive");
  }
  const std::size_t total = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  std::vector<bool> bits;
  bits.reserve(total);
  bool value = false;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    if (runs[i] > total - bits.size()) {
      throw CodecError(MaskFormat::RleJson, i,
                       "runs exceed " + std::to_string(total) + " pixels");
    }
    bits.insert(bits.end(), runs[i], value);
    value = !value;
  }
  if (bits.size() != total) {
    throw CodecError(MaskFormat::RleJson, runs.size(),
                     "runs cover " + std::to_string(bits.size()) + " of " +
                         std::to_string(total) + " pixels");
  }
  return FrameMask(width, height, std::move(bits));
}

std::string encode_mask(const FrameMask& mask, MaskFormat format) {
  if (format == MaskFormat::Pgm) {
    Raster raster;
    raster.width = mask.width();
    raster.height = mask.height();
    raster.pixels.reserve(mask.size());
    for (bool b : mask.bits()) raster.pixels.push_back(b ? 255 : 0);
    return encode_pgm(raster);
  }
  nlohmann::ordered_json j;
  j["w"] = mask.width();
  j["h"] = mask.height();
  j["runs"] = mask_runs(mask);
  return j.dump();
}

FrameMask decode_mask(std::string_view payload, MaskFormat format) {
  if (format == MaskFormat::Pgm) {
    const Raster raster = decode_pgm(payload);
    std::vector<bool> bits;
    bits.reserve(raster.pixels.size());
    for (auto v : raster.pixels) bits.push_back(v != 0);
    return FrameMask(raster.width, raster.height, std::move(bits));
  }
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(payload);
  } catch (const nlohmann::json::parse_error& e) {
    throw CodecError(MaskFormat::RleJson, 0, std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("w") || !j.contains("h") || !j.contains("runs") ||
      !j["w"].is_number_integer() || !j["h"].is_number_integer() || !j["runs"].is_array()) {
    throw CodecError(MaskFormat::RleJson, 0, "expected object with integer w, h and array runs");
  }
  std::vector<std::size_t> runs;
  const auto& arr = j["runs"];
  runs.reserve(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) {
    if (!arr[i].is_number_integer() || arr[i].get<long long>() < 0) {
      throw CodecError(MaskFormat::RleJson, i, "run length must be a non-negative integer");
    }
    runs.push_back(arr[i].get<std::size_t>());
  }
  const auto w = j["w"].get<long long>();
  const auto h = j["h"].get<long long>();
  if (w <= 0 || h <= 0 || w > 1'000'000 || h > 1'000'000) {
    throw CodecError(MaskFormat::RleJson, 0, "dimensions out of range");
  }
  return mask_from_runs(static_cast<int>(w), static_cast<int>(h), runs);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
}

FrameMask read_mask_file(const std::filesystem::path& path) {
  const auto format = path.extension() == ".json" ? MaskFormat::RleJson : MaskFormat::Pgm;
  try {
    return decode_mask(read_file(path), format);
  } catch (const CodecError& e) {
    throw CodecError(e.format(), e.position(), path.string() + ": " + e.detail());
  }
}

void write_mask_file(const std::filesystem::path& path, const FrameMask& mask) {
  const auto format = path.extension() == ".json" ? MaskFormat::RleJson : MaskFormat::Pgm;
  write_file(path, encode_mask(mask, format));
}

}  // namespace tgs
