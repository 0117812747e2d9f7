#pragma once

// Commands behind the poemetric executable. Each takes the resolved
// configuration and output streams and returns the process exit status:
// 0 success, 1 input/validation error, 2 usage/configuration error,
// 3 judge transport failure.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "poemetric/agreement.hpp"
#include "poemetric/corpus.hpp"
#include "poemetric/csv.hpp"
#include "poemetric/dimensions.hpp"
#include "poemetric/error.hpp"
#include "poemetric/form_validator.hpp"
#include "poemetric/judge_client.hpp"
#include "poemetric/judge_http.hpp"
#include "poemetric/lexicon.hpp"
#include "poemetric/parallel.hpp"
#include "poemetric/style_metrics.hpp"
#include "poemetric/version.hpp"

namespace poemetric::cli {

enum Exit : int { kOk = 0, kInputError = 1, kUsageError = 2, kTransportError = 3 };

struct RunConfig {
  std::string dict_path;
  std::string corpus_path;
  std::string out_path;  // empty: standard output
  EvaluationOptions options;
  std::size_t mattr_window = kDefaultMattrWindow;
  std::string imagery_path;      // default: union of the corpus imagery annotations
  std::string stopwords_path;    // default: built-in list
  std::string evaluations_path;  // judge evaluations merged into the report
  std::size_t threads = 0;       // 0: hardware concurrency

  std::string endpoint;
  std::string model;
  std::string api_key_env = "POEMETRIC_API_KEY";
  std::string transcripts_path;  // default: <out>.transcripts.jsonl
  std::size_t max_inflight = 4;
  std::size_t max_retries = 3;

  std::string ratings_a;
  std::string ratings_b;

  void validate() const {
    for (auto [name, v] : {std::pair{"meter gate", options.meter_gate},
                           std::pair{"rhyme gate", options.rhyme_gate},
                           std::pair{"line agreement", options.line_agreement}})
      if (!(v >= 0.0 && v <= 1.0))
        throw InvalidArgument(std::string(name) + " must be in [0,1], got " + std::to_string(v));
    if (mattr_window < 1) throw InvalidArgument("MATTR window must be at least 1");
    if (max_inflight < 1) throw InvalidArgument("max in-flight must be at least 1");
  }
};

namespace detail {

inline std::ifstream open_in(const std::string& path, const char* what) {
  if (path.empty()) throw InvalidArgument(std::string("no ") + what + " given");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(std::string("cannot read ") + what + " '" + path + "'");
  return in;
}

inline std::vector<PoemRecord> load_corpus_file(const std::string& path) {
  auto in = open_in(path, "corpus");
  return load_corpus(in, corpus_format_for(path));
}

// Writes to `path`, or to `fallback` when the path is empty. The file is
// written through a temporary and renamed, so a failed run leaves no
// truncated output behind.
template <class WriteFn>
void emit(const std::string& path, std::ostream& fallback, WriteFn&& write) {
  if (path.empty()) {
    write(fallback);
    return;
  }
  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot write '" + path + "'");
    write(f);
    f.flush();
    if (!f) throw Error("failed writing '" + path + "'");
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace detail

// --- analyze ------------------------------------------------------------

inline Report analyze_corpus(const std::vector<PoemRecord>& records, const PronouncingLexicon& lex,
                             const RunConfig& config, const StopwordList& stopwords,
                             const std::unordered_set<std::string>& imagery,
                             const std::vector<EvaluationRecord>& evaluations) {
  Report report;
  report.config.options = config.options;
  report.config.mattr_window = config.mattr_window;
  report.config.corpus_path = config.corpus_path;
  report.config.dictionary_path = config.dict_path;
  report.config.dictionary_fingerprint = lex.fingerprint();
  report.config.dictionary_entries = lex.entry_count();
  report.config.stopwords_version = stopwords.version();

  // Repetition reference: the first human poem written for the same prompt.
  std::vector<std::string> prompts;
  std::unordered_map<std::string, std::size_t> human_by_prompt;
  for (std::size_t i = 0; i < records.size(); ++i) {
    prompts.push_back(render_generation_prompt(records[i]));
    if (records[i].is_human()) human_by_prompt.try_emplace(prompts.back(), i);
  }

  const std::size_t threads = config.threads ? config.threads : default_thread_count();
  auto streams = parallel_map(records.size(), threads, [&](std::size_t i) {
    return make_token_stream(records[i].body, stopwords);
  });
  auto results = parallel_map(records.size(), threads, [&](std::size_t i) {
    const auto& rec = records[i];
    PoemResult r;
    r.poem_id = rec.id;
    r.authored_by = rec.authored_by;
    try {
      r.form = evaluate_form(rec.body, rec.form_spec(), lex, config.options);
    } catch (const Error& e) {
      throw Error("poem '" + rec.id + "': " + e.what());
    }
    r.style.tokens = streams[i].tokens.size();
    if (!streams[i].tokens.empty()) r.style.mattr = mattr(streams[i], config.mattr_window);
    if (!rec.is_human()) {
      auto it = human_by_prompt.find(prompts[i]);
      if (it != human_by_prompt.end() && !streams[i].content_tokens.empty()) {
        r.style.reference_id = records[it->second].id;
        r.style.repetition_rate = repetition_rate(streams[i], streams[it->second]);
      }
    }
    return r;
  });

  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < results.size(); ++i) index[results[i].poem_id] = i;
  for (const auto& e : evaluations)
    if (auto it = index.find(e.poem_id); it != index.end())
      results[it->second].evaluations.push_back(e);

  report.authors = aggregate_by_author(results, streams, imagery.empty() ? nullptr : &imagery);
  report.poems = std::move(results);
  return report;
}

inline int cmd_analyze(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    config.validate();
    if (config.dict_path.empty()) throw InvalidArgument("no dictionary given (--dict)");
    const auto lex = load_dictionary_file(config.dict_path);
    const auto records = detail::load_corpus_file(config.corpus_path);
    if (records.empty()) throw InvalidArgument("corpus '" + config.corpus_path + "' has no records");

    StopwordList stopwords = StopwordList::builtin();
    if (!config.stopwords_path.empty()) {
      auto in = detail::open_in(config.stopwords_path, "stopword list");
      stopwords = StopwordList::load(in, std::filesystem::path(config.stopwords_path).filename().string());
    }
    std::unordered_set<std::string> imagery;
    if (!config.imagery_path.empty()) {
      auto in = detail::open_in(config.imagery_path, "imagery list");
      imagery = load_word_list(in);
    } else {
      for (const auto& r : records)
        for (const auto& w : r.imagery) imagery.insert(text::to_lower(w));
    }
    std::vector<EvaluationRecord> evaluations;
    if (!config.evaluations_path.empty()) {
      auto in = detail::open_in(config.evaluations_path, "evaluations");
      evaluations = load_evaluations(in);
      std::set<std::string> ids;
      for (const auto& r : records) ids.insert(r.id);
      std::size_t orphans = 0;
      for (const auto& e : evaluations) orphans += !ids.count(e.poem_id);
      if (orphans) err << "warning: " << orphans << " evaluation(s) name poems not in the corpus\n";
    }

    const Report report = analyze_corpus(records, lex, config, stopwords, imagery, evaluations);
    detail::emit(config.out_path, out, [&](std::ostream& s) { write_report(report, s); });
    if (!config.out_path.empty()) {
      std::size_t passed = 0;
      for (const auto& p : report.poems) passed += p.form.passed;
      out << "analyzed " << report.poems.size() << " poems (" << passed << " passed form checks) -> "
          << config.out_path << "\n";
    }
    return kOk;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  }
}

// --- gen-prompts --------------------------------------------------------

inline int cmd_gen_prompts(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    const auto records = detail::load_corpus_file(config.corpus_path);
    detail::emit(config.out_path, out, [&](std::ostream& s) {
      for (const auto& r : records)
        s << json{{"id", r.id}, {"prompt", render_generation_prompt(r)}}.dump() << '\n';
    });
    return kOk;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  }
}

// --- judge --------------------------------------------------------------

// Judges every corpus poem not yet in the transcript file, appending
// transcripts and evaluation records. `transport` overrides the HTTP adapter
// (tests use a mock).
inline int cmd_judge(const RunConfig& config, std::ostream& out, std::ostream& err,
                     JudgeTransport* transport = nullptr, const Sleeper& sleep = real_sleeper()) {
  try {
    config.validate();
    if (config.out_path.empty()) throw InvalidArgument("judge needs --out for evaluation records");
    const auto records = detail::load_corpus_file(config.corpus_path);
    std::unique_ptr<JudgeTransport> http;
    if (!transport) {
      if (config.endpoint.empty() || config.model.empty())
        throw InvalidArgument("judge needs --endpoint and --model");
      http = std::make_unique<HttpJudgeTransport>(
          HttpJudgeConfig{config.endpoint, config.model, config.api_key_env, std::chrono::seconds(120)});
      transport = http.get();
    }
    const std::string transcripts_path =
        config.transcripts_path.empty() ? config.out_path + ".transcripts.jsonl" : config.transcripts_path;

    std::set<std::string> done;
    if (std::ifstream existing(transcripts_path); existing) done = completed_poem_ids(existing);

    std::ofstream transcripts(transcripts_path, std::ios::binary | std::ios::app);
    std::ofstream evaluations(config.out_path, std::ios::binary | std::ios::app);
    if (!transcripts) throw Error("cannot write '" + transcripts_path + "'");
    if (!evaluations) throw Error("cannot write '" + config.out_path + "'");

    RetryPolicy policy;
    policy.max_retries = config.max_retries;
    policy.max_inflight = config.max_inflight;
    const auto summary =
        run_judge_batch(records, *transport, policy, done, transcripts, evaluations, transcripts_path, sleep);

    out << "judged " << summary.scored + summary.unscored << " poems (" << summary.scored << " scored, "
        << summary.unscored << " unscored), skipped " << summary.skipped << " already judged\n";
    if (summary.unscored)
      err << "warning: " << summary.unscored << " judge response(s) could not be parsed; recorded unscored\n";
    for (const auto& f : summary.transport_failures) err << "error: " << f << "\n";
    return summary.transport_failures.empty() ? kOk : kTransportError;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  }
}

// --- agreement ----------------------------------------------------------

// rater -> dimension -> item -> score, with first-appearance orders kept.
struct RatingTable {
  std::vector<std::string> raters;
  std::vector<std::string> dimensions;
  std::map<std::string, std::map<std::string, std::vector<std::pair<std::string, int>>>> scores;

  void add(const std::string& rater, const std::string& dimension, const std::string& item, int score,
           const std::string& where) {
    if (!valid_score(score))
      throw ParseError(where + ": score " + std::to_string(score) + " outside [1,5]");
    if (std::find(raters.begin(), raters.end(), rater) == raters.end()) raters.push_back(rater);
    if (std::find(dimensions.begin(), dimensions.end(), dimension) == dimensions.end())
      dimensions.push_back(dimension);
    auto& series = scores[rater][dimension];
    for (const auto& [it, _] : series)
      if (it == item)
        throw ParseError(where + ": duplicate rating of item '" + item + "' by '" + rater + "' for " + dimension);
    series.emplace_back(item, score);
  }
};

inline RatingTable load_ratings_csv(std::istream& in, const std::string& name) {
  const auto rows = csv::read_all(in);
  if (rows.empty()) throw ParseError(name + ": empty ratings file");
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < rows[0].size(); ++i) col[std::string(text::trim(rows[0][i]))] = i;
  for (const char* c : {"item_id", "rater_id", "dimension", "score"})
    if (!col.count(c)) throw ParseError(name + ": missing column '" + c + "'");
  RatingTable t;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    const std::string where = name + " row " + std::to_string(r + 1);
    auto cell = [&](const char* c) -> std::string {
      const auto i = col[c];
      if (i >= row.size()) throw ParseError(where + ": missing '" + c + "'");
      return std::string(text::trim(row[i]));
    };
    const std::string raw = cell("score");
    int score = 0;
    try {
      std::size_t used = 0;
      score = std::stoi(raw, &used);
      if (used != raw.size()) throw std::invalid_argument(raw);
    } catch (const std::exception&) {
      throw ParseError(where + ": score '" + raw + "' is not an integer");
    }
    t.add(cell("rater_id"), cell("dimension"), cell("item_id"), score, where);
  }
  return t;
}

inline RatingTable load_ratings_jsonl(std::istream& in, const std::string& name, std::ostream& err) {
  RatingTable t;
  std::size_t unscored = 0;
  for (const auto& e : load_evaluations(in)) {
    if (!e.scores) {
      ++unscored;
      continue;
    }
    for (std::size_t d = 0; d < kDimensionCount; ++d)
      t.add(e.judge, std::string(kDimensionNames[d]), e.poem_id, (*e.scores)[d], name);
  }
  if (unscored) err << "warning: " << name << ": skipped " << unscored << " unscored evaluation(s)\n";
  return t;
}

inline RatingTable load_ratings_file(const std::string& path, std::ostream& err) {
  auto in = detail::open_in(path, "ratings");
  return corpus_format_for(path) == CorpusFormat::csv ? load_ratings_csv(in, path)
                                                      : load_ratings_jsonl(in, path, err);
}

struct AgreementTable {
  std::string reference;
  std::vector<std::string> raters;
  // Dimension rows in order, then "overall".
  std::vector<std::pair<std::string, PooledAgreement>> rows;
};

// File A holds one reference rater; every rater in B is compared against it
// on the same items. Throws on the first item present in one file and not
// the other.
inline AgreementTable compute_agreement(const RatingTable& a, const RatingTable& b) {
  if (a.raters.size() != 1)
    throw InvalidArgument("ratings A must hold exactly one rater, found " + std::to_string(a.raters.size()));
  if (b.raters.empty()) throw InvalidArgument("ratings B hold no ratings");
  AgreementTable table;
  table.reference = a.raters.front();
  table.raters = b.raters;
  const auto& ref = a.scores.at(table.reference);

  std::vector<std::pair<RatingSeries, RatingSeries>> overall(b.raters.size());
  for (const auto& dim : a.dimensions) {
    const auto& ref_series = ref.at(dim);
    std::vector<std::pair<RatingSeries, RatingSeries>> pairs;
    for (std::size_t r = 0; r < b.raters.size(); ++r) {
      const auto& rater = b.raters[r];
      const auto& by_dim = b.scores.at(rater);
      auto it = by_dim.find(dim);
      if (it == by_dim.end())
        throw ParseError("dimension '" + dim + "' rated in A but not by '" + rater + "' in B");
      std::map<std::string, int> other(it->second.begin(), it->second.end());
      RatingSeries sa, sb;
      for (const auto& [item, score] : ref_series) {
        auto o = other.find(item);
        if (o == other.end())
          throw ParseError("item '" + item + "' (" + dim + ") rated in A but not by '" + rater + "' in B");
        sa.push_back(score);
        sb.push_back(o->second);
        other.erase(o);
      }
      if (!other.empty())
        throw ParseError("item '" + other.begin()->first + "' (" + dim + ") rated by '" + rater +
                         "' in B but not in A");
      overall[r].first.insert(overall[r].first.end(), sa.begin(), sa.end());
      overall[r].second.insert(overall[r].second.end(), sb.begin(), sb.end());
      pairs.emplace_back(std::move(sa), std::move(sb));
    }
    table.rows.emplace_back(dim, pooled_agreement(pairs));
  }
  for (const auto& rater : b.raters)
    for (const auto& [dim, _] : b.scores.at(rater))
      if (!ref.count(dim)) throw ParseError("dimension '" + dim + "' rated in B but not in A");
  table.rows.emplace_back("overall", pooled_agreement(overall));
  return table;
}

namespace detail {

inline std::string fmt(double v) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(4) << v;
  return s.str();
}

inline json stats_json(const AgreementStats& s) {
  return {{"items", s.items}, {"pao", s.pao}, {"kappa", s.kappa}, {"rho", s.rho ? json(*s.rho) : json(nullptr)}};
}

}  // namespace detail

inline void print_agreement(const AgreementTable& t, std::ostream& out) {
  out << "reference: " << t.reference << "; raters:";
  for (const auto& r : t.raters) out << ' ' << r;
  out << "\n";
  out << std::left << std::setw(22) << "dimension" << std::setw(8) << "method" << std::right << std::setw(7)
      << "items" << std::setw(10) << "pao" << std::setw(10) << "kappa" << std::setw(11) << "rho" << "\n";
  for (const auto& [dim, p] : t.rows) {
    for (const auto& [label, s] : {std::pair{"mean", &p.mean}, std::pair{"pooled", &p.pooled}}) {
      out << std::left << std::setw(22) << dim << std::setw(8) << label << std::right << std::setw(7)
          << s->items << std::setw(10) << detail::fmt(s->pao) << std::setw(10) << detail::fmt(s->kappa)
          << std::setw(11) << (s->rho ? detail::fmt(*s->rho) : std::string("undefined")) << "\n";
    }
  }
}

inline json agreement_json(const AgreementTable& t) {
  json rows = json::object();
  for (const auto& [dim, p] : t.rows) {
    json per = json::object();
    for (std::size_t i = 0; i < t.raters.size(); ++i) per[t.raters[i]] = detail::stats_json(p.per_rater[i]);
    rows[dim] = {{"mean", detail::stats_json(p.mean)}, {"pooled", detail::stats_json(p.pooled)}, {"per_rater", per}};
  }
  return {{"reference", t.reference}, {"raters", t.raters}, {"dimensions", rows}};
}

inline int cmd_agreement(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    if (config.ratings_a.empty() || config.ratings_b.empty())
      throw InvalidArgument("agreement needs two ratings files");
    const auto a = load_ratings_file(config.ratings_a, err);
    const auto b = load_ratings_file(config.ratings_b, err);
    const auto table = compute_agreement(a, b);
    print_agreement(table, out);
    if (!config.out_path.empty())
      detail::emit(config.out_path, out, [&](std::ostream& s) { s << agreement_json(table).dump(2) << '\n'; });
    return kOk;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  }
}

// --- argument parsing ---------------------------------------------------

// Parses `args` (without the program name) and runs the chosen command.
// Options may also come from a key = value file given with --config; flags
// on the command line win.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
               JudgeTransport* transport = nullptr, const Sleeper& sleep = real_sleeper()) {
  RunConfig c;
  CLI::App app{"Rule-based and judge-based evaluation of fixed-form poems", "poemetric"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.set_config("--config", "", "Read options from a key = value file");
  app.require_subcommand(1);

  app.add_option("--dict", c.dict_path, "Pronouncing dictionary (CMU format)");
  app.add_option("--corpus", c.corpus_path, "Poem records (.jsonl or .csv)");
  app.add_option("--out", c.out_path, "Output path (default: standard output)");
  app.add_option("--meter-gate", c.options.meter_gate, "Meter match ratio gate")->capture_default_str();
  app.add_option("--rhyme-gate", c.options.rhyme_gate, "Rhyme match ratio gate")->capture_default_str();
  app.add_option("--line-agreement", c.options.line_agreement, "Per-line stress agreement threshold")
      ->capture_default_str();
  app.add_option("--mattr-window", c.mattr_window, "MATTR window size")->capture_default_str();
  app.add_flag("--strict-sestina", c.options.strict_sestina, "Require the 6-1-5-2-4-3 end-word spiral");
  app.add_option("--refrain-tolerance", c.options.refrain_tolerance,
                 "Token edits allowed in repeated refrain lines")
      ->capture_default_str();
  app.add_option("--imagery", c.imagery_path, "Imagery word list (one word per line)");
  app.add_option("--stopwords", c.stopwords_path, "Stopword list (one word per line)");
  app.add_option("--evaluations", c.evaluations_path, "Judge evaluation records to merge (JSONL)");
  app.add_option("--threads", c.threads, "Worker threads for analyze (0: all cores)");
  app.add_option("--endpoint", c.endpoint, "Chat-completion endpoint URL");
  app.add_option("--model", c.model, "Judge model name");
  app.add_option("--api-key-env", c.api_key_env, "Environment variable holding the API key")
      ->capture_default_str();
  app.add_option("--transcripts", c.transcripts_path, "Judge transcript JSONL (default: <out>.transcripts.jsonl)");
  app.add_option("--max-inflight", c.max_inflight, "Concurrent judge requests")->capture_default_str();
  app.add_option("--max-retries", c.max_retries, "Judge retries per poem")->capture_default_str();

  auto* analyze = app.add_subcommand("analyze", "Evaluate form and style of every poem and write a report");
  auto* gen = app.add_subcommand("gen-prompts", "Render the generation prompt of every record");
  auto* judge = app.add_subcommand("judge", "Score poems with an LLM judge");
  auto* agreement = app.add_subcommand("agreement", "Inter-rater agreement between two ratings files");
  agreement->add_option("ratings_a", c.ratings_a, "Reference ratings (one rater)")->required();
  agreement->add_option("ratings_b", c.ratings_b, "Ratings to compare (one or more raters)")->required();
  for (auto* sub : {analyze, gen, judge, agreement}) sub->fallthrough();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << kToolVersion << "\n";
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kUsageError;
  }

  if (analyze->parsed()) return cmd_analyze(c, out, err);
  if (gen->parsed()) return cmd_gen_prompts(c, out, err);
  if (judge->parsed()) return cmd_judge(c, out, err, transport, sleep);
  return cmd_agreement(c, out, err);
}

}  // namespace poemetric::cli
