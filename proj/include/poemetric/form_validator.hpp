#pragma once

// Fixed-form structural checks (ghazal, sestina, villanelle, pantoum,
// limerick) and the three-phase evaluation that combines them with meter and
// rhyme gates.
//
// Phase 1 scans every line and infers the rhyme scheme. Phase 2 runs the
// form's structural check. Phase 3 gates the meter ratio and, for non-fixed
// forms, the rhyme ratio. All phases are always computed so a failing report
// still shows every ratio; `passed` keeps the short-circuit semantics.

#include <algorithm>
#include <array>
#include <cstddef>
#include <iterator>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "poemetric/error.hpp"
#include "poemetric/lexicon.hpp"
#include "poemetric/rhyme.hpp"
#include "poemetric/scansion.hpp"
#include "poemetric/text.hpp"

namespace poemetric {

enum class FormName { ballad, ghazal, limerick, pantoum, sestina, sonnet, villanelle };

inline constexpr std::array<FormName, 7> kAllForms = {
    FormName::ballad,  FormName::ghazal, FormName::limerick,  FormName::pantoum,
    FormName::sestina, FormName::sonnet, FormName::villanelle};

inline std::string_view to_string(FormName f) {
  switch (f) {
    case FormName::ballad: return "ballad";
    case FormName::ghazal: return "ghazal";
    case FormName::limerick: return "limerick";
    case FormName::pantoum: return "pantoum";
    case FormName::sestina: return "sestina";
    case FormName::sonnet: return "sonnet";
    case FormName::villanelle: return "villanelle";
  }
  return "unknown";
}

inline std::optional<FormName> parse_form_name(std::string_view name) {
  const std::string key = text::to_lower(text::trim(name));
  for (FormName f : kAllForms)
    if (to_string(f) == key) return f;
  return std::nullopt;
}

inline FormName form_from_string(std::string_view name) {
  if (auto f = parse_form_name(name)) return *f;
  throw InvalidArgument("unknown form '" + std::string(name) + "'");
}

// Forms validated by a structural check; their general rhyme gate is bypassed.
inline bool is_fixed_form(FormName f) {
  return f == FormName::ghazal || f == FormName::limerick || f == FormName::pantoum ||
         f == FormName::sestina || f == FormName::villanelle;
}

struct FormSpec {
  FormName form = FormName::sonnet;
  std::optional<MeterTemplate> meter;
  std::optional<std::string> rhyme;
};

struct EvaluationOptions {
  double meter_gate = 0.7;
  double rhyme_gate = 0.7;
  double line_agreement = 0.8;
  bool strict_sestina = false;
  // Token edits allowed between a refrain (or repeated pantoum line) and its
  // repetition.
  std::size_t refrain_tolerance = 0;
};

struct Stanzas {
  std::vector<std::vector<std::string>> raw;
  std::vector<std::vector<std::string>> normalized;

  std::size_t line_count() const {
    std::size_t n = 0;
    for (const auto& s : raw) n += s.size();
    return n;
  }

  std::vector<std::size_t> sizes() const {
    std::vector<std::size_t> out;
    for (const auto& s : raw) out.push_back(s.size());
    return out;
  }
};

// Splits on runs of blank lines; lines are trimmed. Throws when the text has
// no non-blank line.
inline Stanzas segment_stanzas(std::string_view poem) {
  Stanzas out;
  std::vector<std::string> current;
  auto flush = [&] {
    if (current.empty()) return;
    std::vector<std::string> norm;
    for (const auto& l : current) norm.push_back(text::normalize_line(l));
    out.raw.push_back(std::move(current));
    out.normalized.push_back(std::move(norm));
    current.clear();
  };
  for (const auto& line : text::split_lines(poem)) {
    std::string_view trimmed = text::trim(line);
    if (trimmed.empty()) {
      flush();
    } else {
      current.emplace_back(trimmed);
    }
  }
  flush();
  if (out.raw.empty()) throw InvalidArgument("poem has no non-blank lines");
  return out;
}

struct StructuralResult {
  bool valid = true;
  std::vector<std::string> failures;
  std::vector<std::string> notes;
  // Set by checks that score rhyme internally (villanelle).
  std::optional<double> rhyme_ratio;

  void fail(std::string name) {
    valid = false;
    if (std::find(failures.begin(), failures.end(), name) == failures.end())
      failures.push_back(std::move(name));
  }
};

namespace detail {

inline std::vector<std::string> lower_tokens(std::string_view line) {
  std::vector<std::string> out;
  for (auto& t : text::word_tokens(line)) out.push_back(text::to_lower(t));
  return out;
}

inline std::string end_word(std::string_view line) {
  auto tokens = lower_tokens(line);
  return tokens.empty() ? std::string() : tokens.back();
}

inline std::size_t token_edit_distance(const std::vector<std::string>& a,
                                       const std::vector<std::string>& b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1,
                         prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

// Normalized lines equal, or within `tolerance` token edits.
inline bool same_line(const std::string& a, const std::string& b, std::size_t tolerance) {
  if (a == b) return true;
  if (tolerance == 0) return false;
  return token_edit_distance(text::split_on(a, ' '), text::split_on(b, ' ')) <= tolerance;
}

inline std::string join(const std::vector<std::string>& words, std::string_view sep = " ") {
  std::string out;
  for (const auto& w : words) {
    if (!out.empty()) out += sep;
    out += w;
  }
  return out;
}

}  // namespace detail

// Couplets; a radif (common trailing words) closing both lines of the first
// couplet and the second line of every other; qafia words before the radif
// that all rhyme.
inline StructuralResult check_ghazal(const Stanzas& s, const PronouncingLexicon& lex) {
  StructuralResult r;
  for (const auto& stanza : s.raw)
    if (stanza.size() != 2) {
      r.fail("couplets");
      return r;
    }

  std::vector<std::vector<std::string>> lines;
  lines.push_back(detail::lower_tokens(s.raw[0][0]));
  for (const auto& stanza : s.raw) lines.push_back(detail::lower_tokens(stanza[1]));

  std::size_t radif = 0;
  while (true) {
    bool all_share = true;
    std::string word;
    for (const auto& l : lines) {
      if (l.size() <= radif) {
        all_share = false;
        break;
      }
      const auto& w = l[l.size() - 1 - radif];
      if (word.empty()) word = w;
      if (w != word) {
        all_share = false;
        break;
      }
    }
    if (!all_share) break;
    ++radif;
  }
  if (radif == 0) {
    r.fail("radif");
    return r;
  }
  const auto& first = lines.front();
  r.notes.push_back("radif: " + detail::join(std::vector<std::string>(
                                    first.end() - static_cast<std::ptrdiff_t>(radif), first.end())));

  std::vector<std::string> qafia;
  for (const auto& l : lines) {
    if (l.size() <= radif) {
      r.fail("qafia");
      return r;
    }
    qafia.push_back(l[l.size() - 1 - radif]);
  }
  r.notes.push_back("qafia: " + detail::join(qafia, ", "));

  // Feet shared by every qafia word (any dictionary variant).
  std::set<RhymeFoot> common;
  for (std::size_t i = 0; i < qafia.size(); ++i) {
    std::set<RhymeFoot> feet;
    for (const auto& pron : lookup(lex, qafia[i]))
      if (pron.vowel_count() > 0) feet.insert(rhyme_foot_of(pron));
    if (i == 0) {
      common = std::move(feet);
    } else {
      std::set<RhymeFoot> kept;
      std::set_intersection(common.begin(), common.end(), feet.begin(), feet.end(),
                            std::inserter(kept, kept.begin()));
      common = std::move(kept);
    }
  }
  if (common.empty()) r.fail("qafia");
  return r;
}

// Six sestets and a tercet envoi; every sestet's end words permute the first
// sestet's with no two consecutive stanzas in the same order; the envoi holds
// all six words, one mid-line and one line-final per line. Strict mode also
// requires the 6-1-5-2-4-3 spiral between consecutive stanzas.
inline StructuralResult check_sestina(const Stanzas& s, bool strict = false) {
  static constexpr std::array<std::size_t, 6> kSpiral = {5, 0, 4, 1, 3, 2};
  StructuralResult r;
  const auto sizes = s.sizes();
  if (sizes != std::vector<std::size_t>{6, 6, 6, 6, 6, 6, 3}) {
    r.fail("shape");
    return r;
  }

  std::vector<std::vector<std::string>> ends(6);
  for (std::size_t k = 0; k < 6; ++k)
    for (const auto& line : s.raw[k]) ends[k].push_back(detail::end_word(line));

  std::vector<std::string> sorted_first = ends[0];
  std::sort(sorted_first.begin(), sorted_first.end());
  if (std::adjacent_find(sorted_first.begin(), sorted_first.end()) != sorted_first.end() ||
      sorted_first.front().empty())
    r.fail("permutation");
  for (std::size_t k = 1; k < 6; ++k) {
    auto sorted_k = ends[k];
    std::sort(sorted_k.begin(), sorted_k.end());
    if (sorted_k != sorted_first || ends[k] == ends[k - 1]) r.fail("permutation");
    if (strict) {
      for (std::size_t j = 0; j < 6; ++j)
        if (ends[k][j] != ends[k - 1][kSpiral[j]]) {
          r.fail("spiral");
          break;
        }
    }
  }

  // Envoi: choose one mid-line end word per line so that, with the three
  // line-final words, all six appear.
  const std::set<std::string> words(ends[0].begin(), ends[0].end());
  std::array<std::string, 3> finals;
  std::array<std::vector<std::string>, 3> mids;
  bool envoi_ok = true;
  for (std::size_t i = 0; i < 3; ++i) {
    auto tokens = detail::lower_tokens(s.raw[6][i]);
    if (tokens.empty() || !words.count(tokens.back())) {
      envoi_ok = false;
      break;
    }
    finals[i] = tokens.back();
    for (std::size_t t = 0; t + 1 < tokens.size(); ++t)
      if (words.count(tokens[t]) && tokens[t] != finals[i] &&
          std::find(mids[i].begin(), mids[i].end(), tokens[t]) == mids[i].end())
        mids[i].push_back(tokens[t]);
  }
  if (envoi_ok) {
    bool found = false;
    for (const auto& a : mids[0])
      for (const auto& b : mids[1])
        for (const auto& c : mids[2]) {
          std::set<std::string> used = {finals[0], finals[1], finals[2], a, b, c};
          if (used.size() == 6) found = true;
        }
    envoi_ok = found;
  }
  if (!envoi_ok) r.fail("envoi");
  return r;
}

// Five tercets and a quatrain; the first line of the poem recurs at lines
// 6, 12 and 18, its third line at 9, 15 and 19 (1-based); the tercets follow
// a global ABA rhyme with the closing quatrain ABAA, scored against the rhyme
// gate.
inline StructuralResult check_villanelle(const Stanzas& s, const RhymeScheme& scheme,
                                         const EvaluationOptions& options = {}) {
  StructuralResult r;
  if (s.sizes() != std::vector<std::size_t>{3, 3, 3, 3, 3, 4}) {
    r.fail("shape");
    return r;
  }
  const auto& n = s.normalized;
  const std::string& r1 = n[0][0];
  const std::string& r2 = n[0][2];
  const std::size_t tol = options.refrain_tolerance;
  const bool r1_ok = detail::same_line(n[1][2], r1, tol) && detail::same_line(n[3][2], r1, tol) &&
                     detail::same_line(n[5][2], r1, tol);
  const bool r2_ok = detail::same_line(n[2][2], r2, tol) && detail::same_line(n[4][2], r2, tol) &&
                     detail::same_line(n[5][3], r2, tol);
  if (!r1_ok || !r2_ok) r.fail("refrain");

  const double ratio = rhyme_match_ratio(scheme, "ABA ABA ABA ABA ABA ABAA");
  r.rhyme_ratio = ratio;
  if (ratio < options.rhyme_gate) r.fail("rhyme");
  return r;
}

inline StructuralResult check_villanelle(const Stanzas& s, const PronouncingLexicon& lex,
                                         const EvaluationOptions& options = {}) {
  std::vector<LineScansion> scans;
  for (const auto& stanza : s.raw)
    for (const auto& line : stanza) scans.push_back(scan_line(line, lex, scans.size()));
  if (scans.size() < 2) {
    StructuralResult r;
    r.fail("shape");
    return r;
  }
  const auto sizes = s.sizes();
  return check_villanelle(s, infer_scheme(scans, sizes), options);
}

// Quatrains; lines 2 and 4 of each stanza return as lines 1 and 3 of the
// next; the last stanza's lines 2 and 4 repeat the first stanza's lines 1 and
// 3 in either order.
inline StructuralResult check_pantoum(const Stanzas& s, std::size_t tolerance = 0) {
  StructuralResult r;
  if (s.raw.size() < 2) {
    r.fail("quatrains");
    return r;
  }
  for (const auto& stanza : s.raw)
    if (stanza.size() != 4) {
      r.fail("quatrains");
      return r;
    }
  const auto& n = s.normalized;
  for (std::size_t k = 0; k + 1 < n.size(); ++k)
    if (!detail::same_line(n[k][1], n[k + 1][0], tolerance) ||
        !detail::same_line(n[k][3], n[k + 1][2], tolerance))
      r.fail("repetition");

  const auto& last = n.back();
  const auto& first = n.front();
  if (detail::same_line(last[1], first[0], tolerance) &&
      detail::same_line(last[3], first[2], tolerance)) {
    r.notes.push_back("closing lines: 1,3 order");
  } else if (detail::same_line(last[1], first[2], tolerance) &&
             detail::same_line(last[3], first[0], tolerance)) {
    r.notes.push_back("closing lines: 3,1 order");
  } else {
    r.fail("repetition");
  }
  return r;
}

// One stanza rhyming AABBA (five lines) or AABA (four lines).
inline StructuralResult check_limerick(const RhymeScheme& scheme) {
  StructuralResult r;
  const std::string letters = scheme.letters();
  const bool one_stanza = scheme.stanza_breaks.size() <= 1;
  if (!one_stanza || (letters != "AABBA" && letters != "AABA")) r.fail("pattern");
  return r;
}

struct LineVerdict {
  std::string text;
  std::string pattern;
  std::string rhyme_label;
  std::string end_foot;  // first variant, empty when absent
  std::optional<bool> meter_matched;
  std::optional<double> meter_agreement;
};

struct FormReport {
  FormName form = FormName::sonnet;
  // Absent for forms without a structural check (ballad, sonnet).
  std::optional<bool> structural_valid;
  std::vector<std::string> structural_failures;
  std::vector<std::string> structural_notes;
  std::optional<double> meter_ratio;
  std::optional<double> rhyme_ratio;
  // "meter" and/or "rhyme" when the corresponding ratio is below its gate.
  std::vector<std::string> gate_failures;
  RhymeScheme inferred_scheme;
  std::vector<LineVerdict> lines;
  bool passed = false;
};

inline FormReport evaluate_form(std::string_view poem, const FormSpec& spec,
                                const PronouncingLexicon& lex,
                                const EvaluationOptions& options = {}) {
  const Stanzas stanzas = segment_stanzas(poem);
  const auto sizes = stanzas.sizes();

  // Phase 1.
  std::vector<LineScansion> scans;
  for (const auto& stanza : stanzas.raw)
    for (const auto& line : stanza) scans.push_back(scan_line(line, lex, scans.size()));
  if (std::all_of(scans.begin(), scans.end(), [](const auto& l) { return l.empty(); }))
    throw InvalidArgument("poem has no words");

  FormReport report;
  report.form = spec.form;
  if (scans.size() >= 2) {
    report.inferred_scheme = infer_scheme(scans, sizes);
  } else {
    report.inferred_scheme.classes = {0};
    report.inferred_scheme.stanza_breaks = {1};
  }

  // Phase 2.
  std::optional<StructuralResult> structural;
  switch (spec.form) {
    case FormName::ghazal: structural = check_ghazal(stanzas, lex); break;
    case FormName::sestina: structural = check_sestina(stanzas, options.strict_sestina); break;
    case FormName::villanelle:
      structural = check_villanelle(stanzas, report.inferred_scheme, options);
      break;
    case FormName::pantoum:
      structural = check_pantoum(stanzas, options.refrain_tolerance);
      break;
    case FormName::limerick: structural = check_limerick(report.inferred_scheme); break;
    case FormName::ballad:
    case FormName::sonnet: break;
  }
  if (structural) {
    report.structural_valid = structural->valid;
    report.structural_failures = structural->failures;
    report.structural_notes = structural->notes;
  }

  // Phase 3.
  if (spec.meter) {
    report.meter_ratio = meter_match_ratio(scans, *spec.meter, options.line_agreement);
    if (*report.meter_ratio < options.meter_gate) report.gate_failures.push_back("meter");
  }
  if (spec.form == FormName::villanelle) {
    report.rhyme_ratio = structural->rhyme_ratio;
  } else if (spec.rhyme && !is_fixed_form(spec.form)) {
    report.rhyme_ratio = rhyme_match_ratio(report.inferred_scheme, *spec.rhyme);
    if (*report.rhyme_ratio < options.rhyme_gate) report.gate_failures.push_back("rhyme");
  }

  for (const auto& scan : scans) {
    LineVerdict v;
    std::size_t stanza = 0, offset = scan.line_index;
    while (offset >= sizes[stanza]) offset -= sizes[stanza++];
    v.text = stanzas.raw[stanza][offset];
    v.pattern = scan.pattern.str();
    v.rhyme_label = RhymeScheme::label(report.inferred_scheme.classes[scan.line_index]);
    if (scan.has_end_foot()) v.end_foot = scan.end_feet.front().str();
    if (spec.meter && !scan.empty()) {
      const auto m = line_matches_meter(scan, *spec.meter, options.line_agreement);
      v.meter_matched = m.matched;
      v.meter_agreement = m.agreement;
    }
    report.lines.push_back(std::move(v));
  }

  report.passed = (!structural || structural->valid) && report.gate_failures.empty();
  return report;
}

}  // namespace poemetric
