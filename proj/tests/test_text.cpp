#include <gtest/gtest.h>

#include <sstream>

#include "poemetric/csv.hpp"
#include "poemetric/text.hpp"

using namespace poemetric;

TEST(Text, SplitLinesDropsTrailingNewlineAndCr) {
  EXPECT_EQ(text::split_lines("a\r\nb\n"), (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(text::split_lines("a\n\nb"), (std::vector<std::string>{"a", "", "b"}));
  EXPECT_TRUE(text::split_lines("").empty());
}

TEST(Text, AsciiFoldTypography) {
  EXPECT_EQ(text::ascii_fold("\xE2\x80\x9CO\xE2\x80\x9D"), "\"O\"");
  EXPECT_EQ(text::ascii_fold("summer\xE2\x80\x99s"), "summer's");
  EXPECT_EQ(text::ascii_fold("day\xE2\x80\x94night"), "day night");
  EXPECT_EQ(text::ascii_fold("day--night"), "day night");
}

TEST(Text, NormalizeWord) {
  EXPECT_EQ(text::normalize_word("Hello,"), "HELLO");
  EXPECT_EQ(text::normalize_word("(\"thee!\")"), "THEE");
  EXPECT_EQ(text::normalize_word("summer's"), "SUMMER");
  EXPECT_EQ(text::normalize_word("summer\xE2\x80\x99s"), "SUMMER");
  EXPECT_EQ(text::normalize_word("o'er"), "O'ER");
  EXPECT_EQ(text::normalize_word("well-known"), "WELL-KNOWN");
  EXPECT_EQ(text::normalize_word("..."), "");
}

TEST(Text, WordTokensSkipNumbersAndDashes) {
  EXPECT_EQ(text::word_tokens("Shall I -- compare thee, 1609?"),
            (std::vector<std::string>{"SHALL", "I", "COMPARE", "THEE"}));
}

TEST(Text, NormalizeLineCollapsesCaseAndPunctuation) {
  EXPECT_EQ(text::normalize_line("  Do not go GENTLE   into that good night! "),
            "do not go gentle into that good night");
  EXPECT_EQ(text::normalize_line("Rage, rage against the dying of the light."),
            text::normalize_line("rage rage against the dying of the light"));
}

TEST(Text, SplitOnKeepsEmptyParts) {
  EXPECT_EQ(text::split_on("a--b", '-'), (std::vector<std::string>{"a", "", "b"}));
}

TEST(Csv, QuotedFieldsWithCommasQuotesAndNewlines) {
  std::istringstream in("id,body\r\n1,\"a, \"\"b\"\"\nc\"\n\n2,plain\n");
  const auto rows = csv::read_all(in);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[1][1], "a, \"b\"\nc");
  EXPECT_EQ(rows[2], (csv::Row{"2", "plain"}));
}

TEST(Csv, WriteThenReadIsIdentity) {
  const csv::Row row = {"x", "has,comma", "has \"quote\"", "two\nlines", ""};
  std::ostringstream out;
  csv::write_row(out, row);
  std::istringstream in(out.str());
  const auto rows = csv::read_all(in);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0], row);
}

TEST(Csv, UnterminatedQuoteNamesRecordLine) {
  std::istringstream in("a,b\n1,\"open\n");
  try {
    csv::read_all(in);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}
