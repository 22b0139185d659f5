/*
 * Copyright 2026 The TGS Agent Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#include "tgs/refchain.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include <nlohmann/json.hpp>

#include "tgs/mask_codec.hpp"

namespace tgs {
namespace {

constexpr std::array<std::string_view, 4> kTagNames = {"think", "answer", "f_object", "s_object"};

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

bool starts_with_ci(std::string_view s, std::string_view prefix) {
  if (s.size() < prefix.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(s[i])) !=
        std::tolower(static_cast<unsigned char>(prefix[i]))) {
      return false;
    }
  }
  return true;
}

struct TagToken {
  std::string name;  // canonical lowercase
  bool closing = false;
  std::size_t begin = 0;
  std::size_t end = 0;
  bool case_folded = false;

  std::string text() const { return std::string(closing ? "</" : "<") + name + ">"; }
};

// Strict tokens are the exact lowercase forms. Lenient tokens allow any case
// and whitespace around the slash and name.
std::vector<TagToken> tokenize(std::string_view raw, bool lenient) {
  std::vector<TagToken> tokens;
  std::size_t pos = 0;
  while ((pos = raw.find('<', pos)) != std::string_view::npos) {
    std::size_t i = pos + 1;
    auto skip_ws = [&] {
      if (lenient) {
        while (i < raw.size() && is_space(raw[i])) ++i;
      }
    };
    skip_ws();
    bool closing = false;
    if (i < raw.size() && raw[i] == '/') {
      closing = true;
      ++i;
      skip_ws();
    }
    std::optional<TagToken> found;
    for (auto name : kTagNames) {
      const std::string_view rest = raw.substr(std::min(i, raw.size()));
      const bool match = lenient ? starts_with_ci(rest, name) : rest.substr(0, name.size()) == name;
      if (!match) continue;
      std::size_t j = i + name.size();
      if (lenient) {
        while (j < raw.size() && is_space(raw[j])) ++j;
      }
      if (j < raw.size() && raw[j] == '>') {
        TagToken t;
        t.name = std::string(name);
        t.closing = closing;
        t.begin = pos;
        t.end = j + 1;
        t.case_folded = raw.substr(i, name.size()) != name;
        found = t;
      }
      break;
    }
    if (found) {
      tokens.push_back(*found);
      pos = found->end;
    } else {
      ++pos;
    }
  }
  return tokens;
}

bool contains_reserved_tag(std::string_view text) { return !tokenize(text, true).empty(); }

std::string normalize_think(std::string_view body) {
  std::string out;
  std::size_t start = 0;
  while (start <= body.size()) {
    std::size_t nl = body.find('\n', start);
    if (nl == std::string_view::npos) nl = body.size();
    const auto line = trim(body.substr(start, nl - start));
    if (!line.empty()) {
      if (!out.empty()) out += '\n';
      out.append(line);
    }
    start = nl + 1;
  }
  return out;
}

// Answer bodies become a single line with single spaces between words.
std::string normalize_answer(std::string_view body) {
  std::string out;
  std::size_t i = 0;
  while (i < body.size()) {
    while (i < body.size() && is_space(body[i])) ++i;
    const std::size_t start = i;
    while (i < body.size() && !is_space(body[i])) ++i;
    if (i > start) {
      if (!out.empty()) out += ' ';
      out.append(body.substr(start, i - start));
    }
  }
  return out;
}

[[noreturn]] void fail(ParseErrorKind kind, const std::string& tag, std::size_t begin,
                       std::size_t end, const std::string& message) {
  throw ChainParseError(kind, tag, begin, end, message);
}

const TagToken* find_token(const std::vector<TagToken>& tokens, std::string_view name,
                           bool closing) {
  for (const auto& t : tokens) {
    if (t.name == name && t.closing == closing) return &t;
  }
  return nullptr;
}

void check_duplicates(const std::vector<TagToken>& tokens) {
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (tokens[j].name == tokens[i].name && tokens[j].closing == tokens[i].closing) {
        fail(ParseErrorKind::DuplicateTag, tokens[i].text(), tokens[i].begin, tokens[i].end,
             "tag " + tokens[i].text() + " appears more than once");
      }
    }
  }
}

void require_non_empty(const std::string& body, const TagToken& open) {
  if (body.empty()) {
    fail(ParseErrorKind::EmptyAnswerSection, open.text(), open.begin, open.end,
         open.text() + " has an empty body");
  }
}

// Line [begin, end) containing byte `at`, excluding the newline.
std::pair<std::size_t, std::size_t> line_of(std::string_view raw, std::size_t at) {
  std::size_t begin = at == 0 ? std::string_view::npos : raw.rfind('\n', at - 1);
  begin = begin == std::string_view::npos ? 0 : begin + 1;
  std::size_t end = raw.find('\n', at);
  if (end == std::string_view::npos) end = raw.size();
  return {begin, end};
}

ChainFields parse_strict(std::string_view raw) {
  const auto tokens = tokenize(raw, false);
  check_duplicates(tokens);

  static const std::array<std::pair<std::string_view, bool>, 8> kExpected = {{
      {"think", false},
      {"think", true},
      {"answer", false},
      {"f_object", false},
      {"f_object", true},
      {"s_object", false},
      {"s_object", true},
      {"answer", true},
  }};
  for (const auto& [name, closing] : kExpected) {
    if (!find_token(tokens, name, closing)) {
      const std::string tag = std::string(closing ? "</" : "<") + std::string(name) + ">";
      fail(ParseErrorKind::MissingTag, tag, raw.size(), raw.size(), "missing tag " + tag);
    }
  }
  for (std::size_t i = 0; i < kExpected.size(); ++i) {
    if (tokens[i].name != kExpected[i].first || tokens[i].closing != kExpected[i].second) {
      fail(ParseErrorKind::TagOrderViolation, tokens[i].text(), tokens[i].begin, tokens[i].end,
           "tag " + tokens[i].text() + " out of order");
    }
  }

  // Each tag alone on its line; a leaf answer element may be written inline.
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const auto [lb, le] = line_of(raw, tokens[i].begin);
    const auto line = trim(raw.substr(lb, le - lb));
    const bool next_same_line = i + 1 < tokens.size() && tokens[i + 1].begin < le;
    if (!next_same_line) {
      if (line == tokens[i].text()) continue;
      fail(ParseErrorKind::TagLineViolation, tokens[i].text(), tokens[i].begin, tokens[i].end,
           "tag " + tokens[i].text() + " must appear on its own line");
    }
    const auto& open = tokens[i];
    const auto& close = tokens[i + 1];
    const bool leaf = (open.name == "f_object" || open.name == "s_object") && !open.closing &&
                      close.closing && close.name == open.name;
    const bool third_on_line = i + 2 < tokens.size() && tokens[i + 2].begin < le;
    const auto before = trim(raw.substr(lb, open.begin - lb));
    const auto after = trim(raw.substr(close.end, le - close.end));
    if (!leaf || third_on_line || !before.empty() || !after.empty()) {
      fail(ParseErrorKind::TagLineViolation, close.text(), close.begin, close.end,
           "tags " + open.text() + " and " + close.text() +
               " are merged on one line; each tag must appear on its own line");
    }
    ++i;
  }

  // Only whitespace may sit between structural tags.
  static const std::array<std::size_t, 5> kGapAfter = {1, 2, 4, 6, 7};
  auto check_gap = [&](std::size_t from, std::size_t to, const TagToken& at) {
    if (!trim(raw.substr(from, to - from)).empty()) {
      fail(ParseErrorKind::UnexpectedContent, at.text(), from, to,
           "unexpected text near " + at.text());
    }
  };
  check_gap(0, tokens[0].begin, tokens[0]);
  for (std::size_t k : kGapAfter) {
    const std::size_t to = k + 1 < tokens.size() ? tokens[k + 1].begin : raw.size();
    check_gap(tokens[k].end, to, tokens[k]);
  }

  ChainFields fields;
  fields.think = normalize_think(raw.substr(tokens[0].end, tokens[1].begin - tokens[0].end));
  fields.f_object = normalize_answer(raw.substr(tokens[3].end, tokens[4].begin - tokens[3].end));
  fields.s_object = normalize_answer(raw.substr(tokens[5].end, tokens[6].begin - tokens[5].end));
  require_non_empty(fields.f_object, tokens[3]);
  require_non_empty(fields.s_object, tokens[5]);
  return fields;
}

ChainFields parse_lenient(std::string_view raw, std::vector<std::string>& flags) {
  const auto tokens = tokenize(raw, true);
  check_duplicates(tokens);
  if (std::any_of(tokens.begin(), tokens.end(), [](const TagToken& t) { return t.case_folded; })) {
    flags.emplace_back("case-folded-tags");
  }

  auto element = [&](std::string_view name) -> std::pair<const TagToken*, const TagToken*> {
    const TagToken* open = find_token(tokens, name, false);
    const TagToken* close = find_token(tokens, name, true);
    return {open, close};
  };
  auto body_of = [&](const TagToken& open, const TagToken& close) {
    if (close.begin < open.end) {
      fail(ParseErrorKind::TagOrderViolation, close.text(), close.begin, close.end,
           close.text() + " precedes " + open.text());
    }
    for (const auto& t : tokens) {
      if (t.begin >= open.end && t.end <= close.begin) {
        fail(ParseErrorKind::TagOrderViolation, t.text(), t.begin, t.end,
             t.text() + " nested inside " + open.text());
      }
    }
    return raw.substr(open.end, close.begin - open.end);
  };

  ChainFields fields;
  for (std::string_view name : {std::string_view("f_object"), std::string_view("s_object")}) {
    const auto [open, close] = element(name);
    const std::string o = "<" + std::string(name) + ">";
    const std::string c = "</" + std::string(name) + ">";
    if (!open) fail(ParseErrorKind::MissingTag, o, raw.size(), raw.size(), "missing tag " + o);
    if (!close) fail(ParseErrorKind::MissingTag, c, raw.size(), raw.size(), "missing tag " + c);
    auto body = normalize_answer(body_of(*open, *close));
    require_non_empty(body, *open);
    (name == "f_object" ? fields.f_object : fields.s_object) = std::move(body);
  }
  const auto [fo, fc] = element("f_object");
  const auto [so, sc] = element("s_object");
  if (so->begin < fo->begin) flags.emplace_back("reordered-answer");

  const auto [ao, ac] = element("answer");
  if (!ao || !ac) flags.emplace_back("missing-answer-wrapper");

  const auto [to, tc] = element("think");
  if (to && tc && tc->begin >= to->end && tc->end <= std::min(fo->begin, so->begin)) {
    fields.think = normalize_think(raw.substr(to->end, tc->begin - to->end));
  } else {
    flags.emplace_back("missing-think");
  }
  return fields;
}

void check_body(std::string_view what, const std::string& body) {
  if (contains_reserved_tag(body)) {
    throw std::invalid_argument(std::string(what) + " contains reserved tag text");
  }
}

std::string strip_quotes(std::string_view s) {
  s = trim(s);
  static constexpr std::string_view kOpenCurly = "\xE2\x80\x9C";
  static constexpr std::string_view kCloseCurly = "\xE2\x80\x9D";
  auto first = s.find('"');
  std::size_t qlen = 1;
  const auto curly = s.find(kOpenCurly);
  if (curly != std::string_view::npos && (first == std::string_view::npos || curly < first)) {
    first = curly;
    qlen = kOpenCurly.size();
  }
  if (first != std::string_view::npos) {
    const auto rest = s.substr(first + qlen);
    auto last = qlen == 1 ? rest.find('"') : rest.find(kCloseCurly);
    if (last == std::string_view::npos) last = rest.rfind('"');
    if (last != std::string_view::npos) return std::string(trim(rest.substr(0, last)));
  }
  while (!s.empty() && (s.back() == '.' || s.back() == '"')) s.remove_suffix(1);
  return std::string(trim(s));
}

// Splits on '.', '!' or '?' followed by whitespace or end of text, ignoring
// terminators inside double quotes.
std::vector<std::string> sentences(std::string_view text) {
  std::vector<std::string> out;
  bool quoted = false;
  std::size_t start = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c == '"') quoted = !quoted;
    if (text.compare(i, 3, "\xE2\x80\x9C") == 0) quoted = true;
    if (text.compare(i, 3, "\xE2\x80\x9D") == 0) quoted = false;
    const bool terminator = (c == '.' || c == '!' || c == '?') && !quoted;
    if (terminator && (i + 1 == text.size() || is_space(text[i + 1]))) {
      const auto s = trim(text.substr(start, i + 1 - start));
      if (!s.empty()) out.emplace_back(s);
      start = i + 1;
    }
  }
  const auto tail = trim(text.substr(std::min(start, text.size())));
  if (!tail.empty()) out.emplace_back(tail);
  return out;
}

}  // namespace

std::string_view to_string(ParseErrorKind kind) {
  switch (kind) {
    case ParseErrorKind::MissingTag:
      return "MissingTag";
    case ParseErrorKind::TagOrderViolation:
      return "TagOrderViolation";
    case ParseErrorKind::DuplicateTag:
      return "DuplicateTag";
    case ParseErrorKind::EmptyAnswerSection:
      return "EmptyAnswerSection";
    case ParseErrorKind::TagLineViolation:
      return "TagLineViolation";
    case ParseErrorKind::UnexpectedContent:
      return "UnexpectedContent";
    case ParseErrorKind::NullMarkerMismatch:
      return "NullMarkerMismatch";
  }
  return "Unknown";
}

ChainParseError::ChainParseError(ParseErrorKind kind, std::string tag, std::size_t begin,
                                 std::size_t end, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + " [" + std::to_string(begin) + ", " +
                         std::to_string(end) + "): " + message),
      kind_(kind),
      tag_(std::move(tag)),
      begin_(begin),
      end_(end) {}

std::optional<StructuredThink> structure_think(std::string_view think_text) {
  StructuredThink st;
  std::string* current = nullptr;
  for (const auto& s : sentences(think_text)) {
    if (starts_with_ci(s, "The referential expression is") && st.reference_echo.empty()) {
      auto rest = std::string_view(s).substr(std::string_view("The referential expression is").size());
      rest = trim(rest);
      if (!rest.empty() && rest.front() == ':') rest.remove_prefix(1);
      st.reference_echo = strip_quotes(rest);
      current = nullptr;
      continue;
    }
    std::string* target = nullptr;
    if (starts_with_ci(s, "The video")) {
      target = &st.video_analysis;
    } else if (starts_with_ci(s, "The audio")) {
      target = &st.audio_analysis;
    } else if (starts_with_ci(s, "The ref")) {
      // "The reference ..." or a later "The referential expression ..." sentence.
      target = &st.modality_analysis;
    }
    if (target) current = target;
    if (!current) continue;
    if (!current->empty()) *current += ' ';
    *current += s;
  }
  if (st.reference_echo.empty() || st.video_analysis.empty() || st.audio_analysis.empty() ||
      st.modality_analysis.empty()) {
    return std::nullopt;
  }
  return st;
}

ReasoningChain ReasoningChain::make(std::optional<std::string> think, std::string f_object,
                                    std::string s_object) {
  ReasoningChain c;
  if (think) {
    check_body("think", *think);
    c.think_ = normalize_think(*think);
    c.structured_ = structure_think(*c.think_);
  }
  check_body("f_object", f_object);
  check_body("s_object", s_object);
  c.f_object_ = normalize_answer(f_object);
  c.s_object_ = normalize_answer(s_object);
  if (c.f_object_.empty()) throw std::invalid_argument("f_object is empty");
  if (c.s_object_.empty()) throw std::invalid_argument("s_object is empty");
  if ((c.f_object_ == kNullMarker) != (c.s_object_ == kNullMarker)) {
    throw std::invalid_argument("f_object and s_object must both be null or both non-null");
  }
  return c;
}

ReasoningChain ReasoningChain::make(ChainFields fields) {
  return make(std::move(fields.think), std::move(fields.f_object), std::move(fields.s_object));
}

ReasoningChain ReasoningChain::null_object(std::optional<std::string> think) {
  return make(std::move(think), std::string(kNullMarker), std::string(kNullMarker));
}

ChainFields parse_chain_fields(std::string_view raw, ParseMode mode,
                               std::vector<std::string>* flags) {
  if (mode == ParseMode::Strict) return parse_strict(raw);
  std::vector<std::string> local;
  auto fields = parse_lenient(raw, flags ? *flags : local);
  return fields;
}

ParseResult parse_chain_with_flags(std::string_view raw, ParseMode mode) {
  std::vector<std::string> flags;
  auto fields = parse_chain_fields(raw, mode, &flags);
  if ((fields.f_object == kNullMarker) != (fields.s_object == kNullMarker)) {
    fail(ParseErrorKind::NullMarkerMismatch, fields.f_object == kNullMarker ? "<s_object>" : "<f_object>",
         0, raw.size(), "exactly one of f_object and s_object is null");
  }
  try {
    return {ReasoningChain::make(std::move(fields)), std::move(flags)};
  } catch (const std::invalid_argument& e) {
    fail(ParseErrorKind::EmptyAnswerSection, "<answer>", 0, raw.size(), e.what());
  }
}

ReasoningChain parse_chain(std::string_view raw, ParseMode mode) {
  return parse_chain_with_flags(raw, mode).chain;
}

std::string serialize_chain(const ReasoningChain& chain) {
  std::string out;
  if (chain.think()) {
    out += "<think>\n";
    std::size_t start = 0;
    const std::string& t = *chain.think();
    while (start < t.size()) {
      std::size_t nl = t.find('\n', start);
      if (nl == std::string::npos) nl = t.size();
      out += "   ";
      out.append(t, start, nl - start);
      out += '\n';
      start = nl + 1;
    }
    out += "</think>\n";
  }
  out += "<answer>\n";
  out += "   <f_object>\n      " + chain.f_object() + "\n   </f_object>\n";
  out += "   <s_object>\n      " + chain.s_object() + "\n   </s_object>\n";
  out += "</answer>\n";
  return out;
}

// ---- validation ----

std::string_view to_string(ViolationCode code) {
  switch (code) {
    case ViolationCode::FObjectLengthSoft:
      return "f-object-length-soft";
    case ViolationCode::FObjectLengthHard:
      return "f-object-length-hard";
    case ViolationCode::SObjectTooLong:
      return "s-object-too-long";
    case ViolationCode::MissingReferenceEcho:
      return "missing-reference-echo";
    case ViolationCode::ReferenceEchoMismatch:
      return "reference-echo-mismatch";
    case ViolationCode::NullMarkerMismatch:
      return "null-marker-mismatch";
    case ViolationCode::EmptySObject:
      return "empty-s-object";
  }
  return "unknown";
}

std::vector<std::string> words(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    std::string token;
    while (i < text.size() && !is_space(text[i])) {
      const auto c = static_cast<unsigned char>(text[i]);
      if (c >= 0x80 || !std::ispunct(c)) token += text[i];
      ++i;
    }
    if (!token.empty()) out.push_back(std::move(token));
  }
  return out;
}

std::size_t word_count(std::string_view text) { return words(text).size(); }

std::vector<Violation> validate_chain(const ChainFields& fields, const ValidationPolicy& policy) {
  std::vector<Violation> out;
  const bool f_null = trim(fields.f_object) == kNullMarker;
  const bool s_null = trim(fields.s_object) == kNullMarker;
  if (f_null != s_null) {
    out.push_back({ViolationCode::NullMarkerMismatch, Severity::Hard,
                   std::string("f_object is ") + (f_null ? "null" : "non-null") +
                       " but s_object is " + (s_null ? "null" : "non-null")});
  }
  if (!f_null) {
    const auto n = word_count(fields.f_object);
    if (n > policy.f_hard_max_words) {
      out.push_back({ViolationCode::FObjectLengthHard, Severity::Hard,
                     "f_object has " + std::to_string(n) + " words (limit " +
                         std::to_string(policy.f_hard_max_words) + ")"});
    } else if (n < policy.f_soft_min_words || n > policy.f_soft_max_words) {
      out.push_back({ViolationCode::FObjectLengthSoft, Severity::Warning,
                     "f_object has " + std::to_string(n) + " words (expected " +
                         std::to_string(policy.f_soft_min_words) + "-" +
                         std::to_string(policy.f_soft_max_words) + ")"});
    }
  }
  if (!s_null) {
    if (trim(fields.s_object).empty()) {
      out.push_back({ViolationCode::EmptySObject, Severity::Hard, "s_object is empty"});
    } else if (const auto n = word_count(fields.s_object); n > policy.s_max_words) {
      out.push_back({ViolationCode::SObjectTooLong, Severity::Hard,
                     "s_object has " + std::to_string(n) + " words (limit " +
                         std::to_string(policy.s_max_words) + ")"});
    }
  }
  if (policy.require_reference_echo) {
    std::string echo;
    bool found = false;
    if (fields.think) {
      for (const auto& s : sentences(*fields.think)) {
        if (starts_with_ci(s, "The referential expression is")) {
          auto rest = trim(std::string_view(s).substr(29));
          if (!rest.empty() && rest.front() == ':') rest.remove_prefix(1);
          echo = strip_quotes(rest);
          found = true;
          break;
        }
      }
    }
    if (!found) {
      out.push_back({ViolationCode::MissingReferenceEcho, Severity::Hard,
                     "think section does not restate the referential expression"});
    } else if (policy.expected_reference && echo != trim(*policy.expected_reference)) {
      out.push_back({ViolationCode::ReferenceEchoMismatch, Severity::Hard,
                     "think restates \"" + echo + "\" instead of \"" +
                         std::string(trim(*policy.expected_reference)) + "\""});
    }
  }
  return out;
}

std::vector<Violation> validate_chain(const ReasoningChain& chain, const ValidationPolicy& policy) {
  return validate_chain(chain.fields(), policy);
}

bool has_hard_violation(const std::vector<Violation>& violations) {
  return std::any_of(violations.begin(), violations.end(),
                     [](const Violation& v) { return v.severity == Severity::Hard; });
}

// ---- prompts ----

PromptTemplate::PromptTemplate(std::string id, std::string text)
    : id_(std::move(id)), text_(std::move(text)) {
  std::size_t pos = 0;
  while ((pos = text_.find("{{", pos)) != std::string::npos) {
    const auto close = text_.find("}}", pos + 2);
    if (close == std::string::npos) {
      throw TemplateError("template '" + id_ + "': unterminated placeholder at byte " +
                          std::to_string(pos));
    }
    const std::string name = text_.substr(pos + 2, close - pos - 2);
    const bool valid = !name.empty() && std::all_of(name.begin(), name.end(), [](unsigned char c) {
      return std::isalnum(c) || c == '_';
    });
    if (!valid) {
      throw TemplateError("template '" + id_ + "': invalid placeholder name '" + name + "'");
    }
    if (std::find(names_.begin(), names_.end(), name) == names_.end()) names_.push_back(name);
    pos = close + 2;
  }
}

PromptTemplate PromptTemplate::from_file(const std::string& path) {
  std::filesystem::path p(path);
  return PromptTemplate(p.stem().string(), read_file(p));
}

bool PromptTemplate::has_placeholder(std::string_view name) const {
  return std::find(names_.begin(), names_.end(), name) != names_.end();
}

std::string PromptTemplate::render(const std::map<std::string, std::string>& bindings) const {
  for (const auto& [name, value] : bindings) {
    if (!has_placeholder(name)) {
      throw TemplateError("template '" + id_ + "': binding '" + name + "' has no placeholder");
    }
  }
  for (const auto& name : names_) {
    if (!bindings.contains(name)) {
      throw TemplateError("template '" + id_ + "': placeholder '" + name + "' is unbound");
    }
  }
  std::string out;
  std::size_t pos = 0;
  while (true) {
    const auto open = text_.find("{{", pos);
    if (open == std::string::npos) break;
    const auto close = text_.find("}}", open + 2);
    out.append(text_, pos, open - pos);
    out += bindings.at(text_.substr(open + 2, close - open - 2));
    pos = close + 2;
  }
  out.append(text_, pos);
  return out;
}

PromptTemplate default_user_prompt_template() {
  return PromptTemplate(
      "ref-thinker-user",
      "Video frames: {{video_span}}\n"
      "Audio track: {{audio_span}}\n"
      "Referring expression: \"{{reference}}\"\n"
      "Work out which object the expression refers to from the video, the audio and the text. "
      "Write your reasoning inside <think></think>, then answer inside <answer></answer> with a "
      "short fine-grained description in <f_object></f_object> and the bare category name in "
      "<s_object></s_object>. Put every tag on its own line. If the object does not appear, "
      "write null in both answer elements.\n");
}

std::string render_user_prompt(const PromptTemplate& tmpl, std::string_view reference) {
  if (trim(reference).empty()) throw std::invalid_argument("reference must be non-empty");
  for (const char* name : {"video_span", "audio_span", "reference"}) {
    if (!tmpl.has_placeholder(name)) {
      throw TemplateError("template '" + tmpl.id() + "' lacks the {{" + name + "}} placeholder");
    }
  }
  return tmpl.render({{"video_span", std::string(kVideoSpan)},
                      {"audio_span", std::string(kAudioSpan)},
                      {"reference", std::string(reference)}});
}

// ---- instruction tuning set ----

TuningOutcome build_tuning_record(const ReferenceSample& sample, std::string_view teacher_output,
                                  const PromptTemplate& tmpl, const ValidationPolicy& policy) {
  TuningOutcome outcome;
  auto reject = [&](std::vector<std::string> reasons) {
    outcome.rejection = TuningRejection{sample.uid(), std::move(reasons)};
    return outcome;
  };

  ChainFields fields;
  try {
    fields = parse_chain_fields(teacher_output, ParseMode::Strict);
  } catch (const ChainParseError& e) {
    return reject({e.what()});
  }

  ValidationPolicy p = policy;
  if (!p.expected_reference) p.expected_reference = sample.reference();
  const auto violations = validate_chain(fields, p);
  if (has_hard_violation(violations)) {
    std::vector<std::string> reasons;
    for (const auto& v : violations) {
      if (v.severity == Severity::Hard) {
        reasons.push_back(std::string(to_string(v.code)) + ": " + v.message);
      }
    }
    return reject(std::move(reasons));
  }

  std::optional<ReasoningChain> chain;
  try {
    chain = ReasoningChain::make(std::move(fields));
  } catch (const std::invalid_argument& e) {
    return reject({e.what()});
  }
  outcome.record = TuningRecord{sample.uid(), render_user_prompt(tmpl, sample.reference()),
                                serialize_chain(*chain)};
  return outcome;
}

std::string tuning_record_jsonl(const TuningRecord& record) {
  nlohmann::ordered_json j;
  j["uid"] = record.uid;
  j["user_prompt"] = record.user_prompt;
  j["target"] = record.target;
  return j.dump() + "\n";
}

}  // namespace tgs
