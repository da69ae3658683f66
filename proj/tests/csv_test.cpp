#include "cwpor/csv.hpp"

#include <gtest/gtest.h>

#include <sstream>

#include "cwpor/error.hpp"

namespace cwpor {
namespace {

TEST(Csv, QuotedFieldsWithCommasQuotesAndNewlines) {
  const auto rows = csv::parse("a,\"b,c\",\"say \"\"hi\"\"\"\r\n\"multi\nline\",,x\n");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0], (csv::Row{"a", "b,c", "say \"hi\""}));
  EXPECT_EQ(rows[1], (csv::Row{"multi\nline", "", "x"}));
}

TEST(Csv, NoTrailingNewline) {
  const auto rows = csv::parse("h1,h2\n1,2");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[1], (csv::Row{"1", "2"}));
}

TEST(Csv, UnterminatedQuoteThrows) { EXPECT_THROW(csv::parse("a,\"b\n"), Error); }

TEST(Csv, WriteThenParseRoundTrips) {
  const csv::Row row{"plain", "with,comma", "with \"quote\"", "line\nbreak", ""};
  std::ostringstream out;
  csv::write_row(out, row);
  const auto parsed = csv::parse(out.str());
  ASSERT_EQ(parsed.size(), 1u);
  EXPECT_EQ(parsed[0], row);
}

}  // namespace
}  // namespace cwpor
