#pragma once

// Poem and evaluation records, corpus ingestion (JSONL and CSV), the
// generation prompt, and the versioned analysis report.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "json.hpp"

#include "poemetric/csv.hpp"
#include "poemetric/dimensions.hpp"
#include "poemetric/error.hpp"
#include "poemetric/form_validator.hpp"
#include "poemetric/rhyme.hpp"
#include "poemetric/scansion.hpp"
#include "poemetric/style_metrics.hpp"
#include "poemetric/text.hpp"
#include "poemetric/version.hpp"

namespace poemetric {

using json = nlohmann::json;

struct PoemRecord {
  std::string id;
  std::string author;
  std::string title;
  std::string body;
  std::string source;
  FormName form = FormName::sonnet;
  std::optional<std::string> meter;  // registry name or {u,S} literal, as written
  std::optional<std::string> rhyme;
  std::string theme;
  std::vector<std::string> imagery;
  std::string authored_by = "unknown";  // "human", "model:<name>" or "unknown"

  // Resolved at load time from `meter`.
  std::optional<MeterTemplate> meter_template;

  FormSpec form_spec() const { return FormSpec{form, meter_template, rhyme}; }
  bool is_human() const { return authored_by == "human"; }
};

// Field-wise equality on the record fields (the resolved template follows
// from `meter`).
inline bool same_fields(const PoemRecord& a, const PoemRecord& b) {
  return a.id == b.id && a.author == b.author && a.title == b.title && a.body == b.body &&
         a.source == b.source && a.form == b.form && a.meter == b.meter && a.rhyme == b.rhyme &&
         a.theme == b.theme && a.imagery == b.imagery && a.authored_by == b.authored_by;
}

struct EvaluationRecord {
  std::string poem_id;
  std::string judge;
  std::optional<DimensionScores> scores;  // absent when the response never parsed
  std::vector<std::string> free_comments;  // at most three
  std::optional<std::string> raw_transcript_ref;
  std::optional<std::string> failure;

  bool scored() const { return scores.has_value(); }
};

struct RecordIssue {
  std::size_t record = 0;  // 1-based position in the input
  std::string field;
  std::string message;
};

// Every validation problem found while loading, reported together.
class CorpusError : public Error {
 public:
  explicit CorpusError(std::vector<RecordIssue> issues)
      : Error(describe(issues)), issues_(std::move(issues)) {}

  const std::vector<RecordIssue>& issues() const noexcept { return issues_; }

 private:
  static std::string describe(const std::vector<RecordIssue>& issues) {
    std::string out = std::to_string(issues.size()) + " invalid record field(s)";
    for (const auto& i : issues)
      out += "\n  record " + std::to_string(i.record) + ", field '" + i.field + "': " + i.message;
    return out;
  }

  std::vector<RecordIssue> issues_;
};

enum class CorpusFormat { jsonl, csv };

inline CorpusFormat corpus_format_for(std::string_view path) {
  auto ends_with = [&](std::string_view suffix) {
    return path.size() >= suffix.size() &&
           text::to_lower(path.substr(path.size() - suffix.size())) == suffix;
  };
  return ends_with(".csv") ? CorpusFormat::csv : CorpusFormat::jsonl;
}

inline bool valid_authored_by(std::string_view s) {
  if (s == "human" || s == "unknown") return true;
  return s.size() > 6 && s.substr(0, 6) == "model:";
}

namespace detail {

// Field values as read, before validation.
struct RawRecord {
  std::map<std::string, std::string> strings;
  std::vector<std::string> imagery;
};

inline void validate_into(const RawRecord& raw, std::size_t index, std::vector<PoemRecord>& out,
                          std::vector<RecordIssue>& issues, std::set<std::string>& seen_ids) {
  const std::size_t issues_before = issues.size();
  auto issue = [&](std::string field, std::string msg) {
    issues.push_back({index, std::move(field), std::move(msg)});
  };
  auto get = [&](const char* key) -> std::optional<std::string> {
    auto it = raw.strings.find(key);
    if (it == raw.strings.end()) return std::nullopt;
    return it->second;
  };

  PoemRecord rec;
  if (auto id = get("id"); id && !text::trim(*id).empty()) {
    rec.id = *id;
    if (!seen_ids.insert(rec.id).second) issue("id", "duplicate id '" + rec.id + "'");
  } else {
    issue("id", "missing or empty");
  }
  rec.author = get("author").value_or("");
  rec.title = get("title").value_or("");
  rec.source = get("source").value_or("");
  rec.theme = get("theme").value_or("");
  rec.imagery = raw.imagery;

  rec.body = get("body").value_or("");
  if (!std::any_of(rec.body.begin(), rec.body.end(), [](char c) { return !text::is_space(c); }))
    issue("body", "empty body");
  else if (!text::contains_alpha(rec.body))
    issue("body", "body has no words");

  if (auto form = get("form")) {
    if (auto f = parse_form_name(*form))
      rec.form = *f;
    else
      issue("form", "unsupported form '" + *form + "'");
  } else {
    issue("form", "missing");
  }

  if (auto meter = get("meter"); meter && !text::trim(*meter).empty()) {
    rec.meter = *meter;
    try {
      rec.meter_template = expected_pattern(*meter);
    } catch (const InvalidArgument& e) {
      issue("meter", e.what());
    }
  }
  if (auto rhyme = get("rhyme"); rhyme && !text::trim(*rhyme).empty()) {
    rec.rhyme = *rhyme;
    try {
      parse_rhyme_target(*rhyme);
    } catch (const InvalidArgument& e) {
      issue("rhyme", e.what());
    }
  }
  if (auto by = get("authored_by"); by && !by->empty()) {
    rec.authored_by = *by;
    if (!valid_authored_by(*by))
      issue("authored_by", "expected human, unknown or model:<name>, got '" + *by + "'");
  }

  if (issues.size() == issues_before) out.push_back(std::move(rec));
}

inline constexpr std::string_view kStringFields[] = {
    "id", "author", "title", "body", "source", "form", "meter", "rhyme", "theme", "authored_by"};

inline std::vector<PoemRecord> load_jsonl(std::istream& in) {
  std::vector<PoemRecord> out;
  std::vector<RecordIssue> issues;
  std::set<std::string> ids;
  std::string line;
  std::size_t index = 0;
  while (std::getline(in, line)) {
    if (text::trim(line).empty()) continue;
    ++index;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      issues.push_back({index, "<record>", std::string("malformed JSON: ") + e.what()});
      continue;
    }
    if (!j.is_object()) {
      issues.push_back({index, "<record>", "expected a JSON object"});
      continue;
    }
    RawRecord raw;
    bool typed = true;
    for (auto key : kStringFields) {
      const std::string k(key);
      if (!j.contains(k) || j[k].is_null()) continue;
      if (!j[k].is_string()) {
        issues.push_back({index, k, "expected a string"});
        typed = false;
        continue;
      }
      raw.strings[k] = j[k].get<std::string>();
    }
    if (j.contains("imagery") && !j["imagery"].is_null()) {
      const auto& im = j["imagery"];
      if (!im.is_array() || !std::all_of(im.begin(), im.end(), [](const json& v) { return v.is_string(); })) {
        issues.push_back({index, "imagery", "expected an array of strings"});
        typed = false;
      } else {
        for (const auto& v : im) raw.imagery.push_back(v.get<std::string>());
      }
    }
    if (typed) validate_into(raw, index, out, issues, ids);
  }
  if (!issues.empty()) throw CorpusError(std::move(issues));
  return out;
}

inline std::vector<PoemRecord> load_csv(std::istream& in) {
  const auto rows = csv::read_all(in);
  if (rows.empty()) return {};
  const auto& header = rows.front();
  std::map<std::string, std::size_t> column;
  for (std::size_t i = 0; i < header.size(); ++i) column[std::string(text::trim(header[i]))] = i;
  std::vector<RecordIssue> issues;
  for (const char* required : {"id", "body", "form"})
    if (!column.count(required))
      issues.push_back({0, required, "missing column in CSV header"});
  if (!issues.empty()) throw CorpusError(std::move(issues));

  std::vector<PoemRecord> out;
  std::set<std::string> ids;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    RawRecord raw;
    for (auto key : kStringFields) {
      auto it = column.find(std::string(key));
      if (it != column.end() && it->second < row.size()) raw.strings[std::string(key)] = row[it->second];
    }
    if (auto it = column.find("imagery"); it != column.end() && it->second < row.size())
      for (const auto& w : text::split_on(row[it->second], ';'))
        if (!text::trim(w).empty()) raw.imagery.emplace_back(text::trim(w));
    validate_into(raw, r, out, issues, ids);
  }
  if (!issues.empty()) throw CorpusError(std::move(issues));
  return out;
}

}  // namespace detail

inline std::vector<PoemRecord> load_corpus(std::istream& in, CorpusFormat format) {
  return format == CorpusFormat::csv ? detail::load_csv(in) : detail::load_jsonl(in);
}

inline json to_json(const PoemRecord& r) {
  json j;
  j["id"] = r.id;
  j["author"] = r.author;
  j["title"] = r.title;
  j["body"] = r.body;
  j["source"] = r.source;
  j["form"] = std::string(to_string(r.form));
  if (r.meter) j["meter"] = *r.meter;
  if (r.rhyme) j["rhyme"] = *r.rhyme;
  j["theme"] = r.theme;
  j["imagery"] = r.imagery;
  j["authored_by"] = r.authored_by;
  return j;
}

inline void write_corpus_jsonl(const std::vector<PoemRecord>& records, std::ostream& out) {
  for (const auto& r : records) out << to_json(r).dump() << '\n';
  if (!out) throw Error("failed writing corpus");
}

// --- evaluation records -------------------------------------------------

inline json to_json(const EvaluationRecord& e) {
  json j;
  j["poem_id"] = e.poem_id;
  j["judge"] = e.judge;
  if (e.scores) {
    json s = json::object();
    for (std::size_t i = 0; i < kDimensionCount; ++i) s[std::string(kDimensionNames[i])] = (*e.scores)[i];
    j["scores"] = s;
  } else {
    j["scores"] = nullptr;
  }
  j["free_comments"] = e.free_comments;
  if (e.raw_transcript_ref) j["raw_transcript_ref"] = *e.raw_transcript_ref;
  if (e.failure) j["failure"] = *e.failure;
  return j;
}

inline EvaluationRecord evaluation_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("evaluation record is not a JSON object");
  EvaluationRecord e;
  try {
    e.poem_id = j.at("poem_id").get<std::string>();
    e.judge = j.value("judge", std::string());
    if (j.contains("scores") && !j["scores"].is_null()) {
      DimensionScores s{};
      for (std::size_t i = 0; i < kDimensionCount; ++i)
        s[i] = j["scores"].at(std::string(kDimensionNames[i])).get<int>();
      check_scores(s);
      e.scores = s;
    }
    if (j.contains("free_comments"))
      e.free_comments = j["free_comments"].get<std::vector<std::string>>();
    if (e.free_comments.size() > 3) throw ParseError("more than three free comments");
    if (j.contains("raw_transcript_ref")) e.raw_transcript_ref = j["raw_transcript_ref"].get<std::string>();
    if (j.contains("failure")) e.failure = j["failure"].get<std::string>();
  } catch (const json::exception& ex) {
    throw ParseError(std::string("evaluation record: ") + ex.what());
  } catch (const InvalidArgument& ex) {
    throw ParseError(std::string("evaluation record: ") + ex.what());
  }
  return e;
}

inline std::vector<EvaluationRecord> load_evaluations(std::istream& in) {
  std::vector<EvaluationRecord> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (text::trim(line).empty()) continue;
    try {
      out.push_back(evaluation_from_json(json::parse(line)));
    } catch (const json::parse_error& e) {
      throw ParseError(e.what(), n);
    } catch (const ParseError& e) {
      throw ParseError(e.what(), n);
    }
  }
  return out;
}

// --- generation prompt --------------------------------------------------

// Reconstructed generation template. Clauses for absent fields are dropped
// whole, so no connective is left dangling.
inline constexpr std::string_view kGenerationTemplate =
    "Write a {{form}}{{theme_clause}}.{{meter_clause}}{{rhyme_clause}} "
    "Reply with the poem only, no title or commentary, and separate stanzas with a blank line.";

namespace detail {

inline std::string neutralize_markers(std::string s) {
  for (std::size_t pos; (pos = s.find("{{")) != std::string::npos;) s.replace(pos, 2, "{ {");
  for (std::size_t pos; (pos = s.find("}}")) != std::string::npos;) s.replace(pos, 2, "} }");
  return s;
}

inline void fill(std::string& tmpl, std::string_view marker, const std::string& value) {
  const std::string key = "{{" + std::string(marker) + "}}";
  for (std::size_t pos; (pos = tmpl.find(key)) != std::string::npos;) tmpl.replace(pos, key.size(), value);
}

inline std::string describe_meter(const PoemRecord& rec) {
  const std::string written(text::trim(*rec.meter));
  if (!detail::is_literal_pattern(written)) return " Write it in " + rec.meter_template->name + ".";
  std::string patterns;
  for (std::size_t i = 0; i < rec.meter_template->line_patterns.size(); ++i) {
    if (i) patterns += ", then ";
    patterns += rec.meter_template->line_patterns[i].str();
  }
  std::string out = " Give each line the stress pattern " + patterns;
  if (rec.meter_template->line_patterns.size() > 1) out += ", alternating line by line";
  return out + " (u = unstressed syllable, S = stressed syllable).";
}

}  // namespace detail

inline std::string render_generation_prompt(const PoemRecord& rec) {
  std::string out(kGenerationTemplate);
  const std::string theme(text::trim(rec.theme));
  detail::fill(out, "form", std::string(to_string(rec.form)));
  detail::fill(out, "theme_clause",
               theme.empty() ? "" : " on the theme of " + detail::neutralize_markers(theme));
  std::string meter_clause;
  if (rec.meter) {
    if (!rec.meter_template) throw InvalidArgument("record '" + rec.id + "' has an unresolved meter");
    meter_clause = detail::neutralize_markers(detail::describe_meter(rec));
  }
  detail::fill(out, "meter_clause", meter_clause);
  detail::fill(out, "rhyme_clause",
               rec.rhyme ? " Follow the rhyme scheme " + detail::neutralize_markers(*rec.rhyme) + "."
                         : "");
  return out;
}

// --- report -------------------------------------------------------------

struct StyleSummary {
  std::size_t tokens = 0;
  std::optional<double> mattr;
  // Against the human poem sharing the generation prompt; absent for human
  // poems and when no such poem exists.
  std::optional<double> repetition_rate;
  std::optional<std::string> reference_id;
};

struct PoemResult {
  std::string poem_id;
  std::string authored_by;
  FormReport form;
  StyleSummary style;
  std::vector<EvaluationRecord> evaluations;
};

struct AuthorAggregate {
  std::string authored_by;
  std::size_t evaluated = 0;
  std::size_t passed = 0;
  double form_accuracy = 0.0;
  std::optional<double> mean_mattr;
  std::optional<double> mean_repetition_rate;
  std::size_t scored_evaluations = 0;
  std::map<std::string, double> mean_scores;
  std::vector<std::pair<std::string, std::size_t>> top_words;
  std::vector<std::pair<std::string, std::size_t>> top_opening_words;
  std::vector<std::pair<std::string, std::size_t>> top_imagery;
  // Cosine of content-word profiles against the human poems.
  std::optional<double> content_similarity_to_human;
};

struct ReportConfig {
  EvaluationOptions options;
  std::size_t mattr_window = kDefaultMattrWindow;
  std::string corpus_path;
  std::string dictionary_path;
  std::uint64_t dictionary_fingerprint = 0;
  std::size_t dictionary_entries = 0;
  std::string stopwords_version;
};

struct Report {
  std::string schema = std::string(kReportSchema);
  std::string tool_version = std::string(kToolVersion);
  ReportConfig config;
  std::vector<PoemResult> poems;
  std::vector<AuthorAggregate> authors;
};

inline constexpr std::size_t kTopWords = 10;

// Groups results by authored_by, in order of first appearance. `streams` is
// parallel to `results`; `imagery` may be null when no imagery lexicon is
// available.
inline std::vector<AuthorAggregate> aggregate_by_author(
    const std::vector<PoemResult>& results, const std::vector<TokenStream>& streams,
    const std::unordered_set<std::string>* imagery) {
  if (streams.size() != results.size())
    throw InvalidArgument("aggregate_by_author: streams and results differ in length");
  std::vector<std::string> order;
  std::map<std::string, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < results.size(); ++i) {
    auto [it, fresh] = members.try_emplace(results[i].authored_by);
    if (fresh) order.push_back(results[i].authored_by);
    it->second.push_back(i);
  }

  std::optional<FrequencyProfile> human_content;
  if (auto it = members.find("human"); it != members.end()) {
    std::vector<TokenStream> hs;
    for (auto i : it->second) hs.push_back(streams[i]);
    human_content = frequency_profile(hs, ProfileBasis::content);
  }

  std::vector<AuthorAggregate> out;
  for (const auto& who : order) {
    const auto& idx = members[who];
    AuthorAggregate a;
    a.authored_by = who;
    a.evaluated = idx.size();
    double mattr_sum = 0.0, rep_sum = 0.0;
    std::size_t mattr_n = 0, rep_n = 0;
    std::array<double, kDimensionCount> score_sum{};
    std::vector<TokenStream> group;
    for (auto i : idx) {
      const auto& r = results[i];
      a.passed += r.form.passed;
      if (r.style.mattr) {
        mattr_sum += *r.style.mattr;
        ++mattr_n;
      }
      if (r.style.repetition_rate) {
        rep_sum += *r.style.repetition_rate;
        ++rep_n;
      }
      for (const auto& e : r.evaluations) {
        if (!e.scores) continue;
        ++a.scored_evaluations;
        for (std::size_t d = 0; d < kDimensionCount; ++d) score_sum[d] += (*e.scores)[d];
      }
      group.push_back(streams[i]);
    }
    a.form_accuracy = static_cast<double>(a.passed) / static_cast<double>(a.evaluated);
    if (mattr_n) a.mean_mattr = mattr_sum / static_cast<double>(mattr_n);
    if (rep_n) a.mean_repetition_rate = rep_sum / static_cast<double>(rep_n);
    if (a.scored_evaluations)
      for (std::size_t d = 0; d < kDimensionCount; ++d)
        a.mean_scores[std::string(kDimensionNames[d])] =
            score_sum[d] / static_cast<double>(a.scored_evaluations);

    a.top_words = frequency_profile(group, ProfileBasis::content).top(kTopWords);
    a.top_opening_words = frequency_profile(group, ProfileBasis::opening).top(kTopWords);
    if (imagery) a.top_imagery = frequency_profile(group, ProfileBasis::imagery, imagery).top(kTopWords);
    const auto content = frequency_profile(group, ProfileBasis::content);
    if (human_content && !human_content->empty() && !content.empty())
      a.content_similarity_to_human = cosine_similarity(content, *human_content);
    out.push_back(std::move(a));
  }
  return out;
}

namespace detail {

template <class T>
json opt(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

template <class T>
std::optional<T> get_opt(const json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  return j[key].get<T>();
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

inline json word_counts(const std::vector<std::pair<std::string, std::size_t>>& v) {
  json a = json::array();
  for (const auto& [w, c] : v) a.push_back(json::array({w, c}));
  return a;
}

inline std::vector<std::pair<std::string, std::size_t>> word_counts_from(const json& a) {
  std::vector<std::pair<std::string, std::size_t>> v;
  for (const auto& e : a) v.emplace_back(e.at(0).get<std::string>(), e.at(1).get<std::size_t>());
  return v;
}

// Inverse of RhymeScheme::str().
inline RhymeScheme parse_scheme_string(std::string_view s) {
  RhymeScheme scheme;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (c == ' ') {
      scheme.stanza_breaks.push_back(scheme.classes.size());
    } else if (c >= 'A' && c <= 'Z') {
      scheme.classes.push_back(c - 'A');
    } else if (c >= 'a' && c <= 'z') {
      scheme.classes.push_back(26 + c - 'a');
    } else if (c == '[') {
      const auto close = s.find(']', i);
      if (close == std::string_view::npos) throw ParseError("bad rhyme scheme '" + std::string(s) + "'");
      scheme.classes.push_back(std::stoi(std::string(s.substr(i + 1, close - i - 1))));
      i = close;
    } else {
      throw ParseError("bad rhyme scheme '" + std::string(s) + "'");
    }
  }
  scheme.stanza_breaks.push_back(scheme.classes.size());
  return scheme;
}

}  // namespace detail

inline json to_json(const FormReport& f) {
  json j;
  j["name"] = std::string(to_string(f.form));
  j["passed"] = f.passed;
  if (f.structural_valid) {
    j["structural"] = {{"valid", *f.structural_valid},
                       {"failures", f.structural_failures},
                       {"notes", f.structural_notes}};
  } else {
    j["structural"] = nullptr;
  }
  j["meter_ratio"] = detail::opt(f.meter_ratio);
  j["rhyme_ratio"] = detail::opt(f.rhyme_ratio);
  j["gate_failures"] = f.gate_failures;
  j["inferred_scheme"] = f.inferred_scheme.str();
  json lines = json::array();
  for (const auto& l : f.lines) {
    lines.push_back({{"text", l.text},
                     {"pattern", l.pattern},
                     {"rhyme", l.rhyme_label},
                     {"end_foot", l.end_foot},
                     {"meter_matched", detail::opt(l.meter_matched)},
                     {"meter_agreement", detail::opt(l.meter_agreement)}});
  }
  j["lines"] = lines;
  return j;
}

inline FormReport form_report_from_json(const json& j) {
  FormReport f;
  f.form = form_from_string(j.at("name").get<std::string>());
  f.passed = j.at("passed").get<bool>();
  if (!j.at("structural").is_null()) {
    const auto& s = j["structural"];
    f.structural_valid = s.at("valid").get<bool>();
    f.structural_failures = s.at("failures").get<std::vector<std::string>>();
    f.structural_notes = s.at("notes").get<std::vector<std::string>>();
  }
  f.meter_ratio = detail::get_opt<double>(j, "meter_ratio");
  f.rhyme_ratio = detail::get_opt<double>(j, "rhyme_ratio");
  f.gate_failures = j.at("gate_failures").get<std::vector<std::string>>();
  f.inferred_scheme = detail::parse_scheme_string(j.at("inferred_scheme").get<std::string>());
  for (const auto& l : j.at("lines")) {
    LineVerdict v;
    v.text = l.at("text").get<std::string>();
    v.pattern = l.at("pattern").get<std::string>();
    v.rhyme_label = l.at("rhyme").get<std::string>();
    v.end_foot = l.at("end_foot").get<std::string>();
    v.meter_matched = detail::get_opt<bool>(l, "meter_matched");
    v.meter_agreement = detail::get_opt<double>(l, "meter_agreement");
    f.lines.push_back(std::move(v));
  }
  return f;
}

inline json to_json(const Report& r) {
  const auto& o = r.config.options;
  json config = {
      {"meter_gate", o.meter_gate},
      {"rhyme_gate", o.rhyme_gate},
      {"line_agreement", o.line_agreement},
      {"strict_sestina", o.strict_sestina},
      {"refrain_tolerance", o.refrain_tolerance},
      {"mattr_window", r.config.mattr_window},
      {"corpus", r.config.corpus_path},
      {"dictionary",
       {{"path", r.config.dictionary_path},
        {"fingerprint", detail::hex64(r.config.dictionary_fingerprint)},
        {"entries", r.config.dictionary_entries}}},
      {"stopwords", {{"version", r.config.stopwords_version}}},
      {"definitions",
       {{"rhyme_match",
         "share of satisfied pairwise same/different-rhyme constraints of the target pattern"},
        {"meter_match", "syllable count within 1 of the template and positional agreement >= "
                        "line_agreement, '*' agreeing with either stress"},
        {"repetition_rate",
         "distinct content words shared with the reference poem / distinct content words"},
        {"form_accuracy", "passed / evaluated"}}}};

  json poems = json::array();
  for (const auto& p : r.poems) {
    json evals = json::array();
    for (const auto& e : p.evaluations) evals.push_back(to_json(e));
    poems.push_back({{"id", p.poem_id},
                     {"authored_by", p.authored_by},
                     {"form", to_json(p.form)},
                     {"style",
                      {{"tokens", p.style.tokens},
                       {"mattr", detail::opt(p.style.mattr)},
                       {"repetition_rate", detail::opt(p.style.repetition_rate)},
                       {"reference_id", detail::opt(p.style.reference_id)}}},
                     {"evaluations", evals}});
  }

  json authors = json::array();
  for (const auto& a : r.authors) {
    authors.push_back({{"authored_by", a.authored_by},
                       {"evaluated", a.evaluated},
                       {"passed", a.passed},
                       {"form_accuracy", a.form_accuracy},
                       {"mean_mattr", detail::opt(a.mean_mattr)},
                       {"mean_repetition_rate", detail::opt(a.mean_repetition_rate)},
                       {"scored_evaluations", a.scored_evaluations},
                       {"mean_scores", a.mean_scores},
                       {"top_words", detail::word_counts(a.top_words)},
                       {"top_opening_words", detail::word_counts(a.top_opening_words)},
                       {"top_imagery", detail::word_counts(a.top_imagery)},
                       {"content_similarity_to_human", detail::opt(a.content_similarity_to_human)}});
  }
  return {{"schema", r.schema},
          {"tool_version", r.tool_version},
          {"config", config},
          {"poems", poems},
          {"authors", authors}};
}

inline Report report_from_json(const json& j) {
  Report r;
  try {
    r.schema = j.at("schema").get<std::string>();
    if (r.schema != kReportSchema) throw ParseError("unsupported report schema '" + r.schema + "'");
    r.tool_version = j.at("tool_version").get<std::string>();
    const auto& c = j.at("config");
    r.config.options.meter_gate = c.at("meter_gate").get<double>();
    r.config.options.rhyme_gate = c.at("rhyme_gate").get<double>();
    r.config.options.line_agreement = c.at("line_agreement").get<double>();
    r.config.options.strict_sestina = c.at("strict_sestina").get<bool>();
    r.config.options.refrain_tolerance = c.at("refrain_tolerance").get<std::size_t>();
    r.config.mattr_window = c.at("mattr_window").get<std::size_t>();
    r.config.corpus_path = c.at("corpus").get<std::string>();
    r.config.dictionary_path = c.at("dictionary").at("path").get<std::string>();
    r.config.dictionary_fingerprint =
        std::stoull(c["dictionary"].at("fingerprint").get<std::string>(), nullptr, 16);
    r.config.dictionary_entries = c["dictionary"].at("entries").get<std::size_t>();
    r.config.stopwords_version = c.at("stopwords").at("version").get<std::string>();

    for (const auto& p : j.at("poems")) {
      PoemResult pr;
      pr.poem_id = p.at("id").get<std::string>();
      pr.authored_by = p.at("authored_by").get<std::string>();
      pr.form = form_report_from_json(p.at("form"));
      const auto& s = p.at("style");
      pr.style.tokens = s.at("tokens").get<std::size_t>();
      pr.style.mattr = detail::get_opt<double>(s, "mattr");
      pr.style.repetition_rate = detail::get_opt<double>(s, "repetition_rate");
      pr.style.reference_id = detail::get_opt<std::string>(s, "reference_id");
      for (const auto& e : p.at("evaluations")) pr.evaluations.push_back(evaluation_from_json(e));
      r.poems.push_back(std::move(pr));
    }
    for (const auto& a : j.at("authors")) {
      AuthorAggregate ag;
      ag.authored_by = a.at("authored_by").get<std::string>();
      ag.evaluated = a.at("evaluated").get<std::size_t>();
      ag.passed = a.at("passed").get<std::size_t>();
      ag.form_accuracy = a.at("form_accuracy").get<double>();
      ag.mean_mattr = detail::get_opt<double>(a, "mean_mattr");
      ag.mean_repetition_rate = detail::get_opt<double>(a, "mean_repetition_rate");
      ag.scored_evaluations = a.at("scored_evaluations").get<std::size_t>();
      ag.mean_scores = a.at("mean_scores").get<std::map<std::string, double>>();
      ag.top_words = detail::word_counts_from(a.at("top_words"));
      ag.top_opening_words = detail::word_counts_from(a.at("top_opening_words"));
      ag.top_imagery = detail::word_counts_from(a.at("top_imagery"));
      ag.content_similarity_to_human = detail::get_opt<double>(a, "content_similarity_to_human");
      r.authors.push_back(std::move(ag));
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("report: ") + e.what());
  }
  return r;
}

inline void write_report(const Report& report, std::ostream& sink) {
  if (report.poems.empty()) throw InvalidArgument("write_report: no results");
  sink << to_json(report).dump(2) << '\n';
  sink.flush();
  if (!sink) throw Error("failed writing report");
}

inline Report read_report(std::istream& in) {
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("report: ") + e.what());
  }
  return report_from_json(j);
}

// Structural schema check of a report document. Returns the problems found;
// empty means valid. Also checks that every author's form accuracy equals
// passed / evaluated as recounted from the per-poem entries.
inline std::vector<std::string> validate_report(const json& j) {
  std::vector<std::string> problems;
  auto need = [&](const json& obj, const std::string& where, const char* key,
                  json::value_t type) -> bool {
    if (!obj.is_object() || !obj.contains(key)) {
      problems.push_back(where + ": missing '" + key + "'");
      return false;
    }
    const auto t = obj[key].type();
    const bool number = type == json::value_t::number_float &&
                        (t == json::value_t::number_integer || t == json::value_t::number_unsigned);
    const bool unsigned_ok = type == json::value_t::number_unsigned && t == json::value_t::number_integer &&
                             obj[key].get<long long>() >= 0;
    if (t != type && !number && !unsigned_ok) {
      problems.push_back(where + ": '" + key + "' has type " + obj[key].type_name());
      return false;
    }
    return true;
  };
  auto ratio = [&](const json& obj, const std::string& where, const char* key) {
    if (!obj.contains(key)) {
      problems.push_back(where + ": missing '" + key + "'");
      return;
    }
    const auto& v = obj[key];
    if (v.is_null()) return;
    if (!v.is_number() || v.get<double>() < 0.0 || v.get<double>() > 1.0)
      problems.push_back(where + ": '" + key + "' is not a ratio in [0,1]");
  };
  using vt = json::value_t;

  if (!j.is_object()) return {"report is not a JSON object"};
  if (need(j, "report", "schema", vt::string) && j["schema"] != kReportSchema)
    problems.push_back("report: schema is not " + std::string(kReportSchema));
  need(j, "report", "tool_version", vt::string);
  if (need(j, "report", "config", vt::object)) {
    const auto& c = j["config"];
    for (const char* k : {"meter_gate", "rhyme_gate", "line_agreement"}) ratio(c, "config", k);
    need(c, "config", "strict_sestina", vt::boolean);
    need(c, "config", "refrain_tolerance", vt::number_unsigned);
    need(c, "config", "mattr_window", vt::number_unsigned);
    if (need(c, "config", "dictionary", vt::object)) {
      need(c["dictionary"], "config.dictionary", "fingerprint", vt::string);
      need(c["dictionary"], "config.dictionary", "entries", vt::number_unsigned);
    }
    if (need(c, "config", "stopwords", vt::object))
      need(c["stopwords"], "config.stopwords", "version", vt::string);
  }

  std::map<std::string, std::pair<std::size_t, std::size_t>> counted;  // passed, evaluated
  if (need(j, "report", "poems", vt::array)) {
    std::size_t i = 0;
    for (const auto& p : j["poems"]) {
      const std::string where = "poems[" + std::to_string(i++) + "]";
      need(p, where, "id", vt::string);
      const bool by = need(p, where, "authored_by", vt::string);
      if (need(p, where, "form", vt::object)) {
        const auto& f = p["form"];
        const std::string fw = where + ".form";
        if (need(f, fw, "name", vt::string) && !parse_form_name(f["name"].get<std::string>()))
          problems.push_back(fw + ": unknown form name");
        const bool passed = need(f, fw, "passed", vt::boolean);
        ratio(f, fw, "meter_ratio");
        ratio(f, fw, "rhyme_ratio");
        need(f, fw, "gate_failures", vt::array);
        need(f, fw, "inferred_scheme", vt::string);
        if (need(f, fw, "lines", vt::array))
          for (const auto& l : f["lines"]) {
            need(l, fw + ".lines", "pattern", vt::string);
            need(l, fw + ".lines", "rhyme", vt::string);
          }
        if (!f.contains("structural")) problems.push_back(fw + ": missing 'structural'");
        if (by && passed) {
          auto& c = counted[p["authored_by"].get<std::string>()];
          c.first += f["passed"].get<bool>();
          c.second += 1;
        }
      }
      if (need(p, where, "style", vt::object)) {
        ratio(p["style"], where + ".style", "mattr");
        ratio(p["style"], where + ".style", "repetition_rate");
      }
      if (need(p, where, "evaluations", vt::array))
        for (const auto& e : p["evaluations"]) {
          try {
            evaluation_from_json(e);
          } catch (const Error& ex) {
            problems.push_back(where + ".evaluations: " + ex.what());
          }
        }
    }
  }
  if (need(j, "report", "authors", vt::array)) {
    std::size_t i = 0;
    for (const auto& a : j["authors"]) {
      const std::string where = "authors[" + std::to_string(i++) + "]";
      if (!need(a, where, "authored_by", vt::string) || !need(a, where, "evaluated", vt::number_unsigned) ||
          !need(a, where, "passed", vt::number_unsigned) || !need(a, where, "form_accuracy", vt::number_float))
        continue;
      ratio(a, where, "form_accuracy");
      const auto who = a["authored_by"].get<std::string>();
      const auto evaluated = a["evaluated"].get<std::size_t>();
      const auto passed = a["passed"].get<std::size_t>();
      const auto it = counted.find(who);
      if (it == counted.end() || it->second != std::make_pair(passed, evaluated))
        problems.push_back(where + ": counts disagree with the per-poem entries");
      if (evaluated == 0 ||
          a["form_accuracy"].get<double>() != static_cast<double>(passed) / static_cast<double>(evaluated))
        problems.push_back(where + ": form_accuracy is not passed / evaluated");
    }
  }
  return problems;
}

}  // namespace poemetric
