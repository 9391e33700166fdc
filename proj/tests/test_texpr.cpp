#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "tqprep/executor.hpp"
#include "tqprep/texpr.hpp"

using namespace tqprep;
using namespace tqprep::texpr;

namespace {

Value scalar(const std::string& src, const Value& v) { return eval_scalar(parse_transform(src), v); }
Value scalar(const std::string& src, const std::string& s) { return scalar(src, Value::str(s)); }

Value row(const std::string& src, const std::map<std::string, Value>& r) { return eval_row(parse_transform(src), r); }

}  // namespace

TEST(TexprPrinted, ExtractRegex) {
  const std::string f = R"(lambda x: re.search(r'\((.*?)\)', x).group(1))";
  EXPECT_EQ(scalar(f, "Alej (ESP)"), Value::str("ESP"));
  EXPECT_EQ(scalar(f, "Alex (ITA)"), Value::str("ITA"));
  EXPECT_THROW(scalar(f, "Dav. ITA"), EvalError);
}

TEST(TexprPrinted, GrowthRate) {
  auto e = parse_transform("lambda x: (x['2013']-x['2012'])/x['2012']");
  EXPECT_EQ(e.mode, Mode::Row);
  EXPECT_EQ(referenced_keys(e), (std::set<std::string>{"2012", "2013"}));
  Value v = eval_row(e, {{"2012", Value::integer(8532)}, {"2013", Value::integer(9570)}});
  ASSERT_TRUE(v.is_float());
  EXPECT_DOUBLE_EQ(v.as_float(), (9570.0 - 8532.0) / 8532.0);
  EXPECT_THROW(eval_row(e, {{"2012", Value::integer(1)}}), MissingKeyError);
}

TEST(TexprPrinted, CommaStrip) {
  EXPECT_EQ(scalar("lambda x: int(x.replace(',', ''))", "8,532"), Value::integer(8532));
  EXPECT_EQ(scalar("lambda x: int(x.replace(',', ''))", "16,155"), Value::integer(16155));
}

TEST(TexprPrinted, CleanStringDictionary) {
  EXPECT_EQ(exec::clean_string("Italia", {{"Italia", "ITA"}}), "ITA");
  EXPECT_EQ(exec::clean_string("Italia Italy", {{"Italia", "ITA"}, {"Italy", "ITA"}}), "ITA ITA");
  EXPECT_EQ(exec::clean_string("abc", {{"a", "1"}, {"ab", "2"}}), "2c");
}

TEST(Texpr, Modes) {
  EXPECT_EQ(parse_transform("lambda x: x.strip()").mode, Mode::Scalar);
  EXPECT_EQ(parse_transform("lambda r: r['A'] + r['B']").mode, Mode::Row);
  EXPECT_THROW(parse_transform("lambda x: x['A'] + x.strip()"), ModeError);
  EXPECT_TRUE(parse_transform("lambda x: 3").param_free);
  EXPECT_THROW(eval_scalar(parse_transform("lambda r: r['A']"), Value::str("a")), EvalError);
}

TEST(Texpr, ParseErrors) {
  for (const char* bad : {"x + 1", "lambda: 1", "lambda x: ", "lambda x: (1", "lambda x: x.", "lambda x: 'abc",
                          "lambda x: x[", "lambda x: import os", "lambda x: x ++", "lambda x: 1 1", "lambda x: y", "lambda x: bool(x)"}) {
    EXPECT_THROW(parse_transform(bad), ParseError) << bad;
  }
  try {
    parse_transform("lambda x: (1");
  } catch (const ParseError& e) {
    EXPECT_EQ(e.position(), 12u);
  }
}

TEST(Texpr, StringMethods) {
  EXPECT_EQ(scalar("lambda x: x.split(' ')[-1]", "Dav. ITA"), Value::str("ITA"));
  EXPECT_EQ(scalar("lambda x: x.split()[0]", "  a  b "), Value::str("a"));
  EXPECT_EQ(scalar("lambda x: x[:3]", "February"), Value::str("Feb"));
  EXPECT_EQ(scalar("lambda x: x[-2:]", "1999"), Value::str("99"));
  EXPECT_EQ(scalar("lambda x: x.lower().startswith('w')", "Win"), Value::boolean(true));
  EXPECT_EQ(scalar("lambda x: x.zfill(3)", "7"), Value::str("007"));
  EXPECT_EQ(scalar("lambda x: len(x)", "héllo"), Value::integer(5));
  EXPECT_EQ(scalar("lambda x: x.find('l')", "héllo"), Value::integer(2));
  EXPECT_EQ(scalar("lambda x: 'yes' if 'W' in x else 'no'", "W 3-1"), Value::str("yes"));
  EXPECT_EQ(scalar("lambda x: x.strip('*')", "*5*"), Value::str("5"));
  EXPECT_EQ(scalar("lambda x: float(x.split('/')[0])", "8.1/10"), Value::real(8.1));
  EXPECT_EQ(scalar(R"(lambda x: int(re.search(r'(\d{4})', x).group(1)))", "est. 1878"), Value::integer(1878));
  EXPECT_EQ(scalar("lambda x: x if x else None", ""), Value::null());
}

TEST(Texpr, Errors) {
  EXPECT_THROW(scalar("lambda x: int(x)", "seven"), EvalError);
  EXPECT_THROW(scalar("lambda x: x.group(1)", "a"), EvalError);
  EXPECT_THROW(scalar("lambda x: x + 1", "a"), EvalError);
  EXPECT_THROW(scalar("lambda x: x[10]", "abc"), EvalError);
  EXPECT_THROW(scalar("lambda x: 1 // 0", Value::integer(0)), EvalError);
  EXPECT_THROW(scalar("lambda x: x * 2", Value::integer(INT64_MAX)), EvalError);
  EXPECT_THROW(scalar("lambda x: x.split(' ')", "a b"), EvalError);  // a list cannot be a cell
  EXPECT_THROW(scalar(R"(lambda x: re.search(r'(a)\1', x))", "aa"), EvalError);
}

TEST(Texpr, NumericBuiltins) {
  EXPECT_EQ(scalar("lambda x: round(x, 1)", Value::real(2.25)), Value::real(2.2));
  EXPECT_EQ(scalar("lambda x: round(x)", Value::real(2.5)), Value::integer(2));
  EXPECT_EQ(scalar("lambda x: round(x)", Value::real(3.5)), Value::integer(4));
  EXPECT_EQ(scalar("lambda x: abs(x)", Value::integer(-4)), Value::integer(4));
  EXPECT_EQ(scalar("lambda x: max(x, 3)", Value::integer(1)), Value::integer(3));
  EXPECT_EQ(scalar("lambda x: x / 2", Value::integer(3)), Value::real(1.5));
  EXPECT_EQ(scalar("lambda x: True + 1", Value::integer(0)), Value::integer(2));
  EXPECT_EQ(scalar("lambda x: round(x, 2)", Value::real(2.675)), Value::real(2.67));
  EXPECT_EQ(scalar("lambda x: round(x, -2)", Value::integer(1250)), Value::integer(1200));
  EXPECT_EQ(scalar("lambda x: str(x)", Value::real(2.0)), Value::str("2.0"));
}

// Python integer semantics: floor division and modulo follow the divisor's sign.
TEST(TexprProperty, IntegerArithmeticMatchesReference) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<long long> d(-1000, 1000);
  auto floordiv = [](long long a, long long b) {
    long long q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
  };
  auto pmod = [&](long long a, long long b) { return a - floordiv(a, b) * b; };
  auto e_add = parse_transform("lambda x: x['a'] + x['b'] * 3 - x['a']");
  auto e_div = parse_transform("lambda x: x['a'] // x['b']");
  auto e_mod = parse_transform("lambda x: x['a'] % x['b']");
  auto e_neg = parse_transform("lambda x: -x['a'] - -x['b']");
  for (int i = 0; i < 5000; ++i) {
    long long a = d(rng), b = d(rng);
    if (b == 0) b = 7;
    std::map<std::string, Value> r{{"a", Value::integer(a)}, {"b", Value::integer(b)}};
    EXPECT_EQ(eval_row(e_add, r), Value::integer(b * 3));
    EXPECT_EQ(eval_row(e_div, r), Value::integer(floordiv(a, b)));
    EXPECT_EQ(eval_row(e_mod, r), Value::integer(pmod(a, b)));
    EXPECT_EQ(eval_row(e_neg, r), Value::integer(-a + b));
  }
}

namespace {

// Random expression text from a small grammar.
std::string gen_expr(std::mt19937& rng, int depth) {
  static const char* atoms[] = {"x", "1", "2.5", "'a,b'", "r'\\d+'", "None", "True", "x.strip()", "len(x)"};
  static const char* bins[] = {" + ", " - ", " * ", " / ", " // ", " % "};
  static const char* cmps[] = {" == ", " != ", " < ", " >= ", " in ", " not in "};
  if (depth == 0) return atoms[rng() % 9];
  switch (rng() % 8) {
    case 0: return "(" + gen_expr(rng, depth - 1) + bins[rng() % 6] + gen_expr(rng, depth - 1) + ")";
    case 1: return gen_expr(rng, depth - 1) + cmps[rng() % 6] + gen_expr(rng, depth - 1);
    case 2: return "not " + gen_expr(rng, depth - 1);
    case 3: return "-" + gen_expr(rng, 0);
    case 4: return gen_expr(rng, depth - 1) + " if " + gen_expr(rng, depth - 1) + " else " + gen_expr(rng, depth - 1);
    case 5: return "x.replace(" + gen_expr(rng, 0) + ", 'z')";
    case 6: return "x[" + gen_expr(rng, 0) + ":" + gen_expr(rng, 0) + "]";
    default: return "(" + gen_expr(rng, depth - 1) + " and " + gen_expr(rng, depth - 1) + ")";
  }
}

}  // namespace

TEST(TexprProperty, PrettyPrintRoundTrip) {
  std::mt19937 rng(99);
  int parsed = 0;
  for (int i = 0; i < 3000; ++i) {
    std::string src = "lambda x: " + gen_expr(rng, 1 + i % 4);
    TransformExpr e;
    try {
      e = parse_transform(src);
    } catch (const ParseError&) {
      continue;
    }
    ++parsed;
    std::string printed = pretty_print(e);
    TransformExpr back = parse_transform(printed);
    EXPECT_EQ(back, e) << src << "\n" << printed;
    EXPECT_EQ(pretty_print(back), printed);
  }
  EXPECT_GT(parsed, 2500);
}

TEST(TexprProperty, GarbageNeverCrashes) {
  std::mt19937 rng(5);
  const std::string alphabet = "lambda x:()[]'\"+-*/%.,=<>!rnot if else 0123456789_";
  for (int i = 0; i < 20000; ++i) {
    std::string src = i % 2 ? "lambda x: " : "";
    for (std::size_t k = rng() % 25; k > 0; --k) src.push_back(alphabet[rng() % alphabet.size()]);
    try {
      auto e = parse_transform(src);
      if (e.mode == Mode::Scalar) eval_scalar(e, Value::str("12 (ab)"));
    } catch (const ParseError&) {
    } catch (const ModeError&) {
    } catch (const EvalError&) {
    }
  }
}
