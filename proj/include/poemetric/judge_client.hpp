#pragma once

// LLM-as-a-judge client: rubric prompt, response parsing, retrying
// evaluation of one poem, and a resumable bounded-concurrency batch runner.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstddef>
#include <functional>
#include <istream>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <regex>
#include <set>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "json.hpp"

#include "poemetric/corpus.hpp"
#include "poemetric/dimensions.hpp"
#include "poemetric/error.hpp"
#include "poemetric/text.hpp"

namespace poemetric {

// Likert statements, in kDimensionNames order.
inline constexpr std::array<std::string_view, kDimensionCount> kJudgeStatements = {
    "The poem follows the requested form, including its meter and rhyme scheme where specified.",
    "The poem addresses the requested theme.",
    "The poem is written in a novel and creative way.",
    "The poem uses a varied vocabulary.",
    "The poem shows the personal characteristics of its author.",
    "The poem evokes an emotional response.",
    "The poem makes effective use of literary devices such as simile, metaphor, "
    "personification and allusion.",
    "The poem creates vivid images that engage the senses.",
    "This is a good poem.",
    "The poem was written by a human rather than by a language model."};

inline constexpr std::array<std::string_view, 3> kOpenQuestions = {
    "Why did you give the creativity score in Q3?",
    "Why did you give the overall quality score in Q9?",
    "Why did you give the authorship score in Q10?"};

inline constexpr std::string_view kBlockOpen = "[[SCORES]]";
inline constexpr std::string_view kBlockClose = "[[/SCORES]]";

inline constexpr std::string_view kFormatReminder =
    "Your previous reply could not be read. End your reply with the [[SCORES]] block exactly as "
    "specified: one line per key, each score a single digit from 1 to 5.";

namespace detail {

// Breaks "[[" and "]]" so embedded text cannot open or close a block.
inline std::string escape_delimiters(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    out += s[i];
    if ((s[i] == '[' || s[i] == ']') && i + 1 < s.size() && s[i + 1] == s[i]) out += ' ';
  }
  return out;
}

inline std::string canonical_key(std::string_view key) {
  std::string out;
  for (char c : text::trim(key)) {
    if (c == ' ' || c == '-') c = '_';
    out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

}  // namespace detail

inline std::string render_judge_prompt(std::string_view generation_prompt, std::string_view poem) {
  if (text::trim(generation_prompt).empty()) throw InvalidArgument("empty generation prompt");
  if (text::trim(poem).empty()) throw InvalidArgument("empty poem");
  std::string out =
      "You are an expert reader of English poetry. Read the writing prompt and the poem written "
      "in response to it, then answer the questions below.\n\n";
  out += "[[PROMPT]]\n" + detail::escape_delimiters(generation_prompt) + "\n[[/PROMPT]]\n\n";
  out += "[[POEM]]\n" + detail::escape_delimiters(poem) + "\n[[/POEM]]\n\n";
  out += "Rate each statement from 1 (Strongly Disagree) to 5 (Strongly Agree).\n";
  for (std::size_t i = 0; i < kDimensionCount; ++i)
    out += "Q" + std::to_string(i + 1) + ". " + std::string(kJudgeStatements[i]) + "\n";
  out += "\nThen answer briefly:\n";
  for (std::size_t i = 0; i < kOpenQuestions.size(); ++i)
    out += "C" + std::to_string(i + 1) + ". " + std::string(kOpenQuestions[i]) + "\n";
  out += "\nFinish your reply with this block, replacing each <...> with your answer:\n";
  out += std::string(kBlockOpen) + "\n";
  for (auto name : kDimensionNames) out += std::string(name) + ": <1-5>\n";
  for (std::size_t i = 0; i < kOpenQuestions.size(); ++i)
    out += "comment_" + std::to_string(i + 1) + ": <one line>\n";
  out += std::string(kBlockClose) + "\n";
  return out;
}

// The block a compliant judge returns; used by mocks and tests.
inline std::string render_score_block(const DimensionScores& scores,
                                      const std::vector<std::string>& comments = {}) {
  std::string out = std::string(kBlockOpen) + "\n";
  for (std::size_t i = 0; i < kDimensionCount; ++i)
    out += std::string(kDimensionNames[i]) + ": " + std::to_string(scores[i]) + "\n";
  for (std::size_t i = 0; i < comments.size() && i < kOpenQuestions.size(); ++i)
    out += "comment_" + std::to_string(i + 1) + ": " + comments[i] + "\n";
  return out + std::string(kBlockClose) + "\n";
}

struct ParsedJudgment {
  std::optional<DimensionScores> scores;
  std::vector<std::string> comments;
  std::optional<std::string> failure;  // names the first offending dimension
  bool used_fallback = false;

  bool ok() const { return scores.has_value(); }
};

namespace detail {

inline std::optional<int> parse_score(std::string_view v) {
  v = text::trim(v);
  if (v.empty() || v.size() > 3) return std::nullopt;
  int n = 0;
  for (char c : v) {
    if (c < '0' || c > '9') return std::nullopt;
    n = n * 10 + (c - '0');
  }
  return n;
}

inline ParsedJudgment parse_block(std::string_view block) {
  ParsedJudgment out;
  std::array<std::optional<std::string>, kDimensionCount> raw;
  std::array<std::string, 3> comments;
  for (const auto& line : text::split_lines(block)) {
    const auto colon = line.find_first_of(":=");
    if (colon == std::string::npos) continue;
    const std::string key = canonical_key(std::string_view(line).substr(0, colon));
    const std::string value(text::trim(std::string_view(line).substr(colon + 1)));
    if (auto d = dimension_index(key)) {
      raw[*d] = value;
    } else if (key.size() == 9 && key.rfind("comment_", 0) == 0 && key[8] >= '1' && key[8] <= '3') {
      comments[key[8] - '1'] = value;
    }
  }
  DimensionScores scores{};
  for (std::size_t i = 0; i < kDimensionCount; ++i) {
    const std::string name(kDimensionNames[i]);
    if (!raw[i]) {
      out.failure = "missing score for " + name;
      return out;
    }
    const auto v = parse_score(*raw[i]);
    if (!v) {
      out.failure = "unreadable score for " + name + ": '" + *raw[i] + "'";
      return out;
    }
    if (!valid_score(*v)) {
      out.failure = "score for " + name + " out of range: " + std::to_string(*v);
      return out;
    }
    scores[i] = *v;
  }
  out.scores = scores;
  for (auto& c : comments)
    if (!c.empty()) out.comments.push_back(std::move(c));
  return out;
}

// "Q3: 4", "Question 3 - 4", "q3=4".
inline ParsedJudgment parse_fallback(std::string_view raw) {
  static const std::regex kAnswer(R"((?:question|q)\s*(\d{1,2})\s*[:=\-]\s*(\d+))",
                                  std::regex::icase);
  ParsedJudgment out;
  out.used_fallback = true;
  std::array<std::optional<int>, kDimensionCount> found;
  const std::string s(raw);
  for (auto it = std::sregex_iterator(s.begin(), s.end(), kAnswer); it != std::sregex_iterator(); ++it) {
    const int q = std::stoi((*it)[1].str());
    if (q < 1 || q > static_cast<int>(kDimensionCount) || found[q - 1]) continue;
    const auto& digits = (*it)[2].str();
    found[q - 1] = digits.size() > 3 ? 1000 : std::stoi(digits);
  }
  DimensionScores scores{};
  for (std::size_t i = 0; i < kDimensionCount; ++i) {
    const std::string name(kDimensionNames[i]);
    if (!found[i]) {
      out.failure = "missing score for " + name;
      return out;
    }
    if (!valid_score(*found[i])) {
      out.failure = "score for " + name + " out of range: " + std::to_string(*found[i]);
      return out;
    }
    scores[i] = *found[i];
  }
  out.scores = scores;
  return out;
}

}  // namespace detail

// Reads the last [[SCORES]] block of the response. Only when the response has
// no block at all are "QuestionN: <digit>" answers scanned instead.
inline ParsedJudgment parse_judge_response(std::string_view raw) {
  const auto open = raw.rfind(kBlockOpen);
  if (open == std::string_view::npos) return detail::parse_fallback(raw);
  auto body = raw.substr(open + kBlockOpen.size());
  if (auto close = body.find(kBlockClose); close != std::string_view::npos) body = body.substr(0, close);
  return detail::parse_block(body);
}

// --- transport ----------------------------------------------------------

class TransportError : public Error {
 public:
  TransportError(const std::string& what, bool retryable) : Error(what), retryable_(retryable) {}
  bool retryable() const noexcept { return retryable_; }

 private:
  bool retryable_;
};

// Sends one prompt and returns the judge's reply text. Implementations must
// be safe to call from several threads at once.
class JudgeTransport {
 public:
  virtual ~JudgeTransport() = default;
  virtual std::string complete(const std::string& prompt) = 0;
  virtual std::string judge_name() const = 0;
};

struct RetryPolicy {
  std::size_t max_retries = 3;
  std::chrono::milliseconds initial_backoff{500};
  std::chrono::milliseconds max_backoff{30000};
  double backoff_multiplier = 2.0;
  std::size_t max_inflight = 4;

  std::chrono::milliseconds backoff_for(std::size_t retry) const {
    double ms = static_cast<double>(initial_backoff.count());
    for (std::size_t i = 1; i < retry; ++i) ms *= backoff_multiplier;
    return std::min(max_backoff, std::chrono::milliseconds(static_cast<long long>(ms)));
  }
};

using Sleeper = std::function<void(std::chrono::milliseconds)>;

inline Sleeper real_sleeper() {
  return [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

struct JudgeTranscript {
  std::string poem_id;
  std::string judge;
  std::string prompt;     // last prompt sent
  std::string response;   // last raw response, empty after transport failure
  std::optional<DimensionScores> scores;
  std::vector<std::string> comments;
  std::optional<std::string> failure;
  std::size_t attempts = 0;
  double elapsed_ms = 0.0;
};

inline json to_json(const JudgeTranscript& t) {
  json j = {{"poem_id", t.poem_id},       {"judge", t.judge},       {"prompt", t.prompt},
            {"response", t.response},     {"comments", t.comments}, {"attempts", t.attempts},
            {"elapsed_ms", t.elapsed_ms}};
  if (t.scores) {
    json s = json::object();
    for (std::size_t i = 0; i < kDimensionCount; ++i) s[std::string(kDimensionNames[i])] = (*t.scores)[i];
    j["scores"] = s;
  } else {
    j["scores"] = nullptr;
  }
  j["failure"] = t.failure ? json(*t.failure) : json(nullptr);
  return j;
}

inline JudgeTranscript transcript_from_json(const json& j) {
  JudgeTranscript t;
  try {
    t.poem_id = j.at("poem_id").get<std::string>();
    t.judge = j.value("judge", std::string());
    t.prompt = j.value("prompt", std::string());
    t.response = j.value("response", std::string());
    t.comments = j.value("comments", std::vector<std::string>{});
    t.attempts = j.value("attempts", std::size_t{0});
    t.elapsed_ms = j.value("elapsed_ms", 0.0);
    if (j.contains("scores") && !j["scores"].is_null()) {
      DimensionScores s{};
      for (std::size_t i = 0; i < kDimensionCount; ++i)
        s[i] = j["scores"].at(std::string(kDimensionNames[i])).get<int>();
      t.scores = s;
    }
    if (j.contains("failure") && !j["failure"].is_null()) t.failure = j["failure"].get<std::string>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("transcript: ") + e.what());
  }
  if (!t.scores && !t.failure) throw ParseError("transcript for '" + t.poem_id + "' has neither scores nor failure");
  return t;
}

// Poem ids already present in a transcript JSONL stream. Lines that do not
// parse (say, a write cut short) are ignored so the poem is judged again.
inline std::set<std::string> completed_poem_ids(std::istream& transcripts) {
  std::set<std::string> ids;
  std::string line;
  while (std::getline(transcripts, line)) {
    if (text::trim(line).empty()) continue;
    try {
      ids.insert(transcript_from_json(json::parse(line)).poem_id);
    } catch (const std::exception&) {
    }
  }
  return ids;
}

// Thrown when the transport keeps failing; carries the last transcript.
class JudgeFailure : public Error {
 public:
  JudgeFailure(const std::string& what, JudgeTranscript transcript)
      : Error(what), transcript_(std::move(transcript)) {}
  const JudgeTranscript& transcript() const noexcept { return transcript_; }

 private:
  JudgeTranscript transcript_;
};

struct JudgeOutcome {
  EvaluationRecord record;
  JudgeTranscript transcript;
};

namespace detail {

inline bool word_char(char c) { return text::is_alnum(c) || c == '\''; }

// Case-insensitive replacement of `needle` in `hay`; whole words only when
// `whole_word` is set.
inline std::string replace_ci(std::string hay, std::string_view needle, std::string_view with,
                              bool whole_word) {
  if (needle.empty()) return hay;
  const std::string n = text::to_lower(needle);
  std::size_t pos = 0;
  while (true) {
    const std::string lower = text::to_lower(hay);
    pos = lower.find(n, pos);
    if (pos == std::string::npos) return hay;
    const bool left_ok = pos == 0 || !word_char(hay[pos - 1]);
    const bool right_ok = pos + n.size() >= hay.size() || !word_char(hay[pos + n.size()]);
    if (whole_word && !(left_ok && right_ok)) {
      ++pos;
      continue;
    }
    hay.replace(pos, n.size(), with);
    pos += with.size();
  }
}

}  // namespace detail

inline constexpr std::string_view kRedaction = "[redacted]";

// Removes the author's name from text shown to the judge: the full name
// anywhere, then each name part of two or more letters as a whole word.
inline std::string redact_author(std::string text_in, std::string_view author) {
  author = text::trim(author);
  if (author.empty() || author == "unknown") return text_in;
  text_in = detail::replace_ci(std::move(text_in), author, kRedaction, false);
  for (const auto& part : text::split_words(author)) {
    std::string p;
    for (char c : part)
      if (text::is_alnum(c) || c == '\'' || c == '-') p += c;
    if (p.size() >= 2) text_in = detail::replace_ci(std::move(text_in), p, kRedaction, true);
  }
  return text_in;
}

inline std::string anonymized_judge_prompt(const PoemRecord& rec, std::string_view poem) {
  return render_judge_prompt(redact_author(render_generation_prompt(rec), rec.author),
                             redact_author(std::string(poem), rec.author));
}

// Renders, sends and parses, with up to 1 + max_retries attempts in total.
// A transport error backs off exponentially before the next attempt; a
// response that does not parse is retried with the format reminder
// appended. Parse failure on the last attempt yields an unscored record;
// transport failure on the last attempt (or a non-retryable one) throws
// JudgeFailure.
inline JudgeOutcome evaluate_poem(const PoemRecord& rec, std::string_view poem,
                                  JudgeTransport& transport, const RetryPolicy& policy = {},
                                  const Sleeper& sleep = real_sleeper()) {
  const auto start = std::chrono::steady_clock::now();
  const std::string base_prompt = anonymized_judge_prompt(rec, poem);
  JudgeTranscript t;
  t.poem_id = rec.id;
  t.judge = transport.judge_name();
  std::string prompt = base_prompt;
  std::size_t transport_failures = 0;
  const std::size_t max_attempts = 1 + policy.max_retries;
  auto elapsed = [&] {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  };

  ParsedJudgment parsed;
  while (t.attempts < max_attempts) {
    ++t.attempts;
    t.prompt = prompt;
    try {
      t.response = transport.complete(prompt);
    } catch (const TransportError& e) {
      t.response.clear();
      t.failure = std::string("transport: ") + e.what();
      if (!e.retryable() || t.attempts == max_attempts) {
        t.elapsed_ms = elapsed();
        throw JudgeFailure("judge request for '" + rec.id + "' failed: " + e.what(), t);
      }
      sleep(policy.backoff_for(++transport_failures));
      continue;
    }
    parsed = parse_judge_response(t.response);
    if (parsed.ok()) break;
    t.failure = parsed.failure;
    prompt = base_prompt + "\n" + std::string(kFormatReminder) + "\n";
  }

  t.elapsed_ms = elapsed();
  JudgeOutcome out;
  if (parsed.ok()) {
    t.scores = parsed.scores;
    t.comments = parsed.comments;
    t.failure.reset();
  }
  out.record.poem_id = rec.id;
  out.record.judge = t.judge;
  out.record.scores = t.scores;
  out.record.free_comments = t.comments;
  out.record.failure = t.failure;
  out.transcript = std::move(t);
  return out;
}

// --- batch --------------------------------------------------------------

struct BatchSummary {
  std::size_t skipped = 0;
  std::size_t scored = 0;
  std::size_t unscored = 0;
  std::vector<std::string> transport_failures;  // messages, input order
};

// Judges every record whose id is not in `done`, at most
// policy.max_inflight at a time. Transcripts and evaluation records are
// appended to the sinks in input order as soon as every earlier poem has
// finished, so an interrupted run keeps its completed prefix and the output
// does not depend on thread timing. Poems whose transport failed are not
// written, so a rerun retries them.
inline BatchSummary run_judge_batch(const std::vector<PoemRecord>& records, JudgeTransport& transport,
                                    const RetryPolicy& policy, const std::set<std::string>& done,
                                    std::ostream& transcripts, std::ostream& evaluations,
                                    const std::string& transcript_ref = "",
                                    const Sleeper& sleep = real_sleeper()) {
  BatchSummary summary;
  std::vector<std::size_t> todo;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (done.count(records[i].id))
      ++summary.skipped;
    else
      todo.push_back(i);
  }

  struct Slot {
    bool finished = false;
    std::optional<JudgeOutcome> outcome;
    std::string error;
  };
  std::vector<Slot> slots(todo.size());
  std::size_t flushed = 0;
  std::mutex mutex;
  std::atomic<std::size_t> next{0};

  auto flush_ready = [&] {
    while (flushed < slots.size() && slots[flushed].finished) {
      auto& s = slots[flushed];
      if (s.outcome) {
        if (!transcript_ref.empty()) s.outcome->record.raw_transcript_ref = transcript_ref;
        transcripts << to_json(s.outcome->transcript).dump() << '\n';
        evaluations << to_json(s.outcome->record).dump() << '\n';
        transcripts.flush();
        evaluations.flush();
        if (s.outcome->record.scored())
          ++summary.scored;
        else
          ++summary.unscored;
        s.outcome.reset();
      } else {
        summary.transport_failures.push_back(s.error);
      }
      ++flushed;
    }
  };

  auto worker = [&] {
    while (true) {
      const std::size_t k = next.fetch_add(1);
      if (k >= todo.size()) return;
      const auto& rec = records[todo[k]];
      Slot result;
      result.finished = true;
      try {
        result.outcome = evaluate_poem(rec, rec.body, transport, policy, sleep);
      } catch (const JudgeFailure& e) {
        result.error = e.what();
      }
      std::lock_guard lock(mutex);
      slots[k] = std::move(result);
      flush_ready();
    }
  };

  const std::size_t workers = std::clamp<std::size_t>(policy.max_inflight, 1, std::max<std::size_t>(todo.size(), 1));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (!transcripts || !evaluations) throw Error("failed writing judge output");
  return summary;
}

}  // namespace poemetric
