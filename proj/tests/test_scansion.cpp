#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "poemetric/scansion.hpp"
#include "support/fixture.hpp"
#include "support/poems.hpp"

using namespace poemetric;
using poemetric::testing::fixture_lexicon;
using poemetric::testing::lexicon_from;

namespace {

const char* kTiny =
    "THE  DH AH0\n"
    "SUN  S AH1 N\n"
    "MORNING  M AO1 R N IH0 NG\n"
    "RECORD  R EH1 K ER0 D\n"
    "RECORD(1)  R IH0 K AO1 R D\n";

// A scansion whose single token scans exactly as `symbols`.
LineScansion literal_scansion(const std::string& symbols, std::size_t line_index = 0) {
  LineScansion s;
  s.line_index = line_index;
  s.tokens = {"X"};
  s.pattern = StressPattern(symbols);
  s.token_alternatives = {{symbols}};
  return s;
}

}  // namespace

TEST(ScanLine, MonosyllablesAreIndeterminate) {
  auto lex = lexicon_from(kTiny);
  auto s = scan_line("The sun", lex);
  EXPECT_EQ(s.pattern.str(), "**");
  ASSERT_EQ(s.end_feet.size(), 1u);
  EXPECT_EQ(s.end_feet[0].phonemes, (std::vector<std::string>{"AH", "N"}));
}

TEST(ScanLine, EmptyLine) {
  auto s = scan_line("", lexicon_from(kTiny));
  EXPECT_TRUE(s.pattern.empty());
  EXPECT_FALSE(s.has_end_foot());
  EXPECT_TRUE(scan_line("  -- ,", lexicon_from(kTiny)).empty());
}

TEST(ScanLine, OovFallsBackToWildcards) {
  auto lex = lexicon_from(kTiny);
  EXPECT_EQ(scan_line("zzxqj morning", lex).pattern.str(), "*Su");
  auto s = scan_line("the morning zzxqj", lex);
  EXPECT_EQ(s.pattern.str(), "*Su*");
  EXPECT_FALSE(s.has_end_foot());
}

TEST(ScanLine, VariantsAreKeptAsAlternatives) {
  auto s = scan_line("record", lexicon_from(kTiny));
  EXPECT_EQ(s.pattern.str(), "Su");
  ASSERT_EQ(s.token_alternatives.size(), 1u);
  EXPECT_EQ(s.token_alternatives[0], (std::vector<std::string>{"Su", "uS"}));
  EXPECT_EQ(s.end_feet.size(), 2u);
}

TEST(ScanLine, PatternLengthIsSumOfTokenSyllables) {
  const auto& lex = fixture_lexicon();
  for (std::size_t i = 0; i < 6; ++i) {
    const std::string line = poemetric::testing::iambic(i, "light");
    auto s = scan_line(line, lex);
    std::size_t total = 0;
    for (const auto& alts : s.token_alternatives) total += alts.front().size();
    EXPECT_EQ(s.pattern.size(), total);
    EXPECT_EQ(s.pattern.size(), 10u) << line;
    EXPECT_EQ(scan_line(line, lex).pattern, s.pattern);
  }
}

TEST(ExpectedPattern, RegistryAndLiterals) {
  auto t = expected_pattern("iambic pentameter");
  EXPECT_EQ(t.pattern().str(), "uSuSuSuSuS");
  EXPECT_EQ(t.length(), 10u);
  EXPECT_EQ(expected_pattern("Iambic-Pentameter").name, "iambic pentameter");
  EXPECT_EQ(expected_pattern("iambic tetrameter").pattern().str(), "uSuSuSuS");
  EXPECT_EQ(expected_pattern("iambic trimeter").pattern().str(), "uSuSuS");
  EXPECT_EQ(expected_pattern("trochaic tetrameter").pattern().str(), "SuSuSuSu");
  EXPECT_EQ(expected_pattern("anapestic trimeter").pattern().str(), "uuSuuSuuS");

  auto lit = expected_pattern("SuSuSuSu");
  EXPECT_EQ(lit.length(), 8u);
  EXPECT_EQ(lit.pattern(), expected_pattern("trochaic tetrameter").pattern());
}

TEST(ExpectedPattern, CommonMeterAlternatesByLine) {
  auto t = expected_pattern("common meter");
  ASSERT_EQ(t.line_patterns.size(), 2u);
  EXPECT_EQ(t.for_line(0).size(), 8u);
  EXPECT_EQ(t.for_line(1).size(), 6u);
  EXPECT_EQ(t.for_line(2).size(), 8u);
  EXPECT_EQ(t.for_line(7).size(), 6u);
  auto lit = expected_pattern("uSuSuSuS/uSuSuS");
  EXPECT_EQ(lit.line_patterns, t.line_patterns);
}

TEST(ExpectedPattern, UnknownNameListsRegistry) {
  try {
    expected_pattern("dactylic heptameter");
    FAIL();
  } catch (const InvalidArgument& e) {
    EXPECT_NE(std::string(e.what()).find("iambic pentameter"), std::string::npos);
  }
  EXPECT_THROW(expected_pattern(""), InvalidArgument);
  EXPECT_THROW(expected_pattern("uS//uS"), InvalidArgument);
}

TEST(LineMatchesMeter, Examples) {
  const auto t = expected_pattern("iambic pentameter");
  auto m = line_matches_meter(literal_scansion("**********"), t);
  EXPECT_TRUE(m.matched);
  EXPECT_EQ(m.agreement, 1.0);
  m = line_matches_meter(literal_scansion("uSuSuSuSuS"), t);
  EXPECT_TRUE(m.matched);
  EXPECT_EQ(m.agreement, 1.0);
  m = line_matches_meter(literal_scansion("SuSuSuSuSu"), t);
  EXPECT_FALSE(m.matched);
  EXPECT_EQ(m.agreement, 0.0);
}

TEST(LineMatchesMeter, AgreementMatchesPositionCount) {
  const auto t = expected_pattern("iambic pentameter");
  std::mt19937 rng(7);
  const char symbols[] = {'u', 'S', '*'};
  for (int trial = 0; trial < 500; ++trial) {
    std::string p;
    const std::size_t len = 1 + rng() % 14;
    for (std::size_t i = 0; i < len; ++i) p += symbols[rng() % 3];
    std::size_t agree = 0, n = std::min<std::size_t>(len, 10);
    for (std::size_t i = 0; i < n; ++i) agree += p[i] == '*' || p[i] == "uSuSuSuSuS"[i];
    const double expected = static_cast<double>(agree) / static_cast<double>(n);
    const bool expect_match = len >= 9 && len <= 11 && expected >= 0.8;
    const auto m = line_matches_meter(literal_scansion(p), t);
    EXPECT_EQ(m.agreement, expected) << p;
    EXPECT_EQ(m.matched, expect_match) << p;
  }
}

TEST(LineMatchesMeter, SyllableToleranceIsOne) {
  const auto t = expected_pattern("iambic pentameter");
  EXPECT_TRUE(line_matches_meter(literal_scansion("uSuSuSuSu"), t).matched);
  EXPECT_TRUE(line_matches_meter(literal_scansion("uSuSuSuSuSu"), t).matched);
  EXPECT_FALSE(line_matches_meter(literal_scansion("uSuSuSuS"), t).matched);
  EXPECT_FALSE(line_matches_meter(literal_scansion("uSuSuSuSuSuS"), t).matched);
  EXPECT_FALSE(line_matches_meter(LineScansion{}, t).matched);
}

TEST(LineMatchesMeter, AnyVariantCombinationMayMatch) {
  auto lex = lexicon_from(kTiny);
  // RECORD as noun (Su) would fail the iambic slot; the verb variant fits.
  const auto t = expected_pattern("uSuS");
  auto s = scan_line("the record sun", lex);
  EXPECT_EQ(s.pattern.str(), "*Su*");
  auto m = line_matches_meter(s, t);
  EXPECT_TRUE(m.matched);
  EXPECT_EQ(m.agreement, 1.0);
}

TEST(LineMatchesMeter, GateIsConfigurable) {
  const auto t = expected_pattern("uSuSuSuSuS");
  auto s = literal_scansion("uSuSuSuSSu");  // 8 of 10 agree
  EXPECT_TRUE(line_matches_meter(s, t, 0.8).matched);
  EXPECT_FALSE(line_matches_meter(s, t, 0.81).matched);
}

TEST(LineMatchesMeter, TemplateAcceptsItsOwnPattern) {
  for (const auto& name : meter_registry_names()) {
    const auto t = expected_pattern(name);
    for (std::size_t line = 0; line < t.line_patterns.size(); ++line) {
      auto m = line_matches_meter(literal_scansion(t.for_line(line).str(), line), t);
      EXPECT_TRUE(m.matched) << name;
      EXPECT_EQ(m.agreement, 1.0) << name;
    }
  }
}

TEST(MeterMatchRatio, SyntheticSonnetCounts) {
  const auto& lex = fixture_lexicon();
  const auto t = expected_pattern("iambic pentameter");
  for (std::size_t conforming : {0u, 9u, 10u, 14u}) {
    const auto lines = text::split_lines(poemetric::testing::sonnet(conforming));
    std::vector<LineScansion> scans;
    std::size_t matching = 0;
    for (const auto& l : lines) {
      scans.push_back(scan_line(l, lex, scans.size()));
      matching += line_matches_meter(scans.back(), t).matched;
    }
    EXPECT_EQ(matching, conforming);
    EXPECT_EQ(meter_match_ratio(scans, t), static_cast<double>(conforming) / 14.0);
  }
}

TEST(MeterMatchRatio, SkipsEmptyLinesAndRejectsAllEmpty) {
  const auto t = expected_pattern("iambic pentameter");
  std::vector<LineScansion> scans = {literal_scansion("uSuSuSuSuS"), LineScansion{},
                                     literal_scansion("SuSuSuSuSu")};
  EXPECT_EQ(meter_match_ratio(scans, t), 0.5);
  std::vector<LineScansion> empty(3);
  EXPECT_THROW(meter_match_ratio(empty, t), InvalidArgument);
}

TEST(MeterMatchRatio, PermutationInvarianceAndWildcardMonotonicity) {
  const auto t = expected_pattern("iambic pentameter");
  std::mt19937 rng(99);
  const char symbols[] = {'u', 'S', '*'};
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<LineScansion> scans;
    const std::size_t n = 1 + rng() % 16;
    for (std::size_t i = 0; i < n; ++i) {
      std::string p;
      const std::size_t len = 8 + rng() % 5;
      for (std::size_t k = 0; k < len; ++k) p += symbols[rng() % 3];
      scans.push_back(literal_scansion(p, i));
    }
    const double before = meter_match_ratio(scans, t);

    auto shuffled = scans;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    EXPECT_EQ(meter_match_ratio(shuffled, t), before);

    auto starred = scans;
    const std::size_t k = rng() % n;
    starred[k] = literal_scansion(std::string(t.length(), '*'), k);
    EXPECT_GE(meter_match_ratio(starred, t), before);
  }
}
