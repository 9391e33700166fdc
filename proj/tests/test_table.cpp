#include <gtest/gtest.h>

#include <random>

#include "tqprep/digest.hpp"
#include "tqprep/table.hpp"
#include "tqprep/text.hpp"
#include "tqprep/value.hpp"

using namespace tqprep;

TEST(Value, Kinds) {
  EXPECT_TRUE(Value().is_null());
  EXPECT_EQ(Value::integer(3).as_number(), 3.0);
  EXPECT_THROW(Value::real(std::nan("")), std::invalid_argument);
  EXPECT_EQ(Value::boolean(true).to_text(), "true");
  EXPECT_EQ(Value::null().to_text(), "");
  EXPECT_NE(Value::integer(1), Value::real(1.0));
}

TEST(Value, FormatDouble) {
  EXPECT_EQ(format_double(2.0), "2.0");
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(7.449999999999999), "7.449999999999999");
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> d(-1e6, 1e6);
  for (int i = 0; i < 2000; ++i) {
    double x = d(rng);
    EXPECT_EQ(std::stod(format_double(x)), x);
  }
}

TEST(Value, ParseNumber) {
  EXPECT_EQ(*parse_number(" 42 "), Value::integer(42));
  EXPECT_EQ(*parse_number("-3.5"), Value::real(-3.5));
  EXPECT_EQ(*parse_number("1e3"), Value::real(1000.0));
  EXPECT_FALSE(parse_number("12abc"));
  EXPECT_FALSE(parse_number(""));
  EXPECT_FALSE(parse_number("1,000"));
  EXPECT_TRUE(parse_number("99999999999999999999")->is_float());
}

TEST(Table, FromRowsDedup) {
  Table t = from_rows({"A", "A", "B"}, {{"1", "2", "3"}});
  EXPECT_EQ(t.column_names(), (std::vector<std::string>{"A", "A_2", "B"}));
  EXPECT_EQ(t.cell(0, 1), Value::str("2"));
  EXPECT_THROW(from_rows({"A", "A"}, {{"1", "2"}}, false), TableError);
}

TEST(Table, RaggedRows) {
  try {
    from_rows({"A", "B"}, {{"1", "2"}, {"3"}});
    FAIL();
  } catch (const TableError& e) {
    EXPECT_EQ(e.kind(), TableError::Kind::RaggedRows);
    EXPECT_EQ(e.subject(), "1");
  }
}

TEST(Table, ColumnOps) {
  Table t = from_rows({"A", "B"}, {{"1", "x"}, {"2", "y"}});
  EXPECT_THROW(t.column("C"), TableError);
  Table u = add_column(t, "C", {Value::integer(1), Value::integer(2)});
  EXPECT_EQ(u.column_count(), 3u);
  EXPECT_EQ(t.column_count(), 2u);
  EXPECT_THROW(add_column(t, "A", {Value(), Value()}), TableError);
  EXPECT_THROW(add_column(t, "D", {Value()}), TableError);
  Table k = keep_columns(u, {"C", "A"});
  EXPECT_EQ(k.column_names(), (std::vector<std::string>{"C", "A"}));
  EXPECT_THROW(keep_columns(u, {"Z"}), TableError);
  auto [m, errs] = map_column(t, "A", [](const Value& v) {
    if (v.as_str() == "2") throw std::runtime_error("no");
    return Value::integer(7);
  });
  EXPECT_EQ(m.cell(0, 0), Value::integer(7));
  EXPECT_EQ(m.cell(1, 0), Value::str("2"));
  ASSERT_EQ(errs.size(), 1u);
  EXPECT_EQ(errs[0].row, 1u);
}

TEST(Table, CsvRoundTrip) {
  Table t = read_csv("Name,Note\n\"Smith, J\",\"say \"\"hi\"\"\"\nLee,\"two\nlines\"\n");
  ASSERT_EQ(t.row_count(), 2u);
  EXPECT_EQ(t.cell(0, 0), Value::str("Smith, J"));
  EXPECT_EQ(t.cell(0, 1), Value::str("say \"hi\""));
  EXPECT_EQ(t.cell(1, 1), Value::str("two\nlines"));
  EXPECT_EQ(read_csv(write_csv(t)), t);
}

TEST(Table, CsvProperty) {
  std::mt19937 rng(11);
  const std::string alphabet = "ab,\"\n |x1";
  for (int iter = 0; iter < 300; ++iter) {
    std::size_t cols = 1 + rng() % 4, rows = rng() % 5;
    std::vector<std::string> header;
    for (std::size_t c = 0; c < cols; ++c) header.push_back("c" + std::to_string(c));
    std::vector<std::vector<std::string>> body(rows);
    for (auto& r : body) {
      for (std::size_t c = 0; c < cols; ++c) {
        std::string s;
        for (std::size_t k = rng() % 6; k > 0; --k) s.push_back(alphabet[rng() % alphabet.size()]);
        r.push_back(s);
      }
    }
    Table t = from_rows(header, body);
    EXPECT_EQ(read_csv(write_csv(t)), t) << write_csv(t);
  }
}

TEST(Table, Markdown) {
  Table t = from_rows({"A", "B"}, {{"x|y", "a\\b"}});
  std::string md = serialize_markdown(t);
  EXPECT_NE(md.find("x\\|y"), std::string::npos);
  EXPECT_NE(md.find("a\\\\b"), std::string::npos);
}

TEST(Table, TokensAndBuckets) {
  EXPECT_EQ(count_tokens("ab cd!"), 3u);
  EXPECT_EQ(count_tokens("  "), 0u);
  EXPECT_EQ(count_tokens("x1_y"), 3u);
  EXPECT_EQ(bucket_for(2047), SizeBucket::Small);
  EXPECT_EQ(bucket_for(2048), SizeBucket::Medium);
  EXPECT_EQ(bucket_for(4096), SizeBucket::Medium);
  EXPECT_EQ(bucket_for(4097), SizeBucket::Large);
  EXPECT_STREQ(bucket_name(SizeBucket::Large), "Large");
}

TEST(Table, DistinctAndExcerpt) {
  std::vector<std::vector<std::string>> rows;
  for (int i = 0; i < 50; ++i) rows.push_back({std::to_string(i % 30)});
  Table t = from_rows({"N"}, rows);
  auto d = distinct_values(t, "N", 20);
  ASSERT_EQ(d.size(), 20u);
  EXPECT_EQ(d.front(), "0");
  EXPECT_EQ(d.back(), "19");
  std::string ex = table_excerpt(t, 5);
  EXPECT_NE(ex.find("(50 rows)"), std::string::npos);
}

TEST(Digest, Sha256) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  Table a = from_rows({"A"}, {{"1"}});
  Table b = from_rows({"A"}, {{"2"}});
  EXPECT_EQ(table_digest(a).rfind("sha256:", 0), 0u);
  EXPECT_NE(table_digest(a), table_digest(b));
}

TEST(Text, Helpers) {
  EXPECT_EQ(text::collapse_whitespace("  a \t b\n"), "a b");
  EXPECT_TRUE(text::iequals("SeLeCt", "select"));
  std::string body;
  ASSERT_TRUE(text::fenced_block("x\n```SQL\nSELECT 1\n```\n", "sql", body));
  EXPECT_EQ(text::trim(body), "SELECT 1");
  EXPECT_FALSE(text::fenced_block("no fence", "sql", body));
  EXPECT_EQ(text::utf8_encode(text::utf8_decode("héllo")), "héllo");
  EXPECT_EQ(text::utf8_decode("\xff").size(), 1u);
}
