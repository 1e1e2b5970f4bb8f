#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <random>
#include <regex>
#include <string>

#include "doctest.h"
#include "modelcc/regex.hpp"

using namespace modelcc;

namespace {

// Longest match at `pos` by brute force: try every end, longest first.
size_t reference_longest(const std::string& pattern, const std::string& text, size_t pos) {
  std::regex re(pattern, std::regex::ECMAScript);
  for (size_t end = text.size(); end > pos; --end) {
    if (std::regex_match(text.begin() + pos, text.begin() + end, re)) return end;
  }
  return kNoOffset;
}

}  // namespace

TEST_CASE("literal and escape matching") {
  Regex re = Regex::compile("a\\+b").take();
  CHECK(re.full_match("a+b"));
  CHECK_FALSE(re.full_match("aab"));
  CHECK(re.literal_text() == "a+b");
  CHECK(Regex::compile("[0-9]").take().literal_text().empty());
}

TEST_CASE("longest-prefix semantics beat alternative order") {
  // ECMAScript alternation would stop at "a"; this dialect is longest-match.
  Regex re = Regex::compile("a|ab|abc").take();
  CHECK(re.match_prefix("abcd", 0) == 3);
  CHECK(re.match_prefix("abd", 0) == 2);
  CHECK(re.match_prefix("ad", 0) == 1);
  CHECK(re.match_prefix("d", 0) == kNoOffset);
}

TEST_CASE("quantifiers and classes") {
  Regex num = Regex::compile("[0-9]+(\\.[0-9]+)?").take();
  CHECK(num.match_prefix("10/", 0) == 2);
  CHECK(num.match_prefix("0.5+1", 0) == 3);
  CHECK(num.match_prefix("3.", 0) == 1);  // dot needs digits after it
  CHECK(num.match_prefix("x3", 0) == kNoOffset);
  CHECK(num.match_prefix("x3", 1) == 2);

  Regex opt = Regex::compile("ab?c*").take();
  CHECK(opt.match_prefix("accc", 0) == 4);
  CHECK(opt.match_prefix("abccx", 0) == 4);
  CHECK(opt.matches_empty() == false);
  CHECK(Regex::compile("a*").take().matches_empty());

  Regex neg = Regex::compile("\"[^\"]*\"").take();
  CHECK(neg.full_match("\"hi\""));
  CHECK_FALSE(neg.full_match("\"a\"b\""));

  Regex cls = Regex::compile("\\w+\\s\\d").take();
  CHECK(cls.full_match("ab_1 7"));
}

TEST_CASE("unsupported constructs are rejected") {
  CHECK_FALSE(Regex::compile("a{3}").ok());
  CHECK_FALSE(Regex::compile("(a").ok());
  CHECK_FALSE(Regex::compile("[a").ok());
  CHECK_FALSE(Regex::compile("*a").ok());
}

TEST_CASE("agreement with a reference engine on random inputs") {
  const std::vector<std::string> patterns = {
      "[0-9]+(\\.[0-9]+)?", "[a-z]+", "\\+",    "if",  "[^ab]+",
      "(ab|a)*c",           "x.y",    "a+b+|c", "-?[0-9]+",
  };
  std::mt19937 rng(20240817);
  std::uniform_int_distribution<int> len(0, 12);
  const std::string alphabet = "aabbcxyz019.+- if";
  std::uniform_int_distribution<size_t> pick(0, alphabet.size() - 1);
  for (const std::string& pattern : patterns) {
    Regex re = Regex::compile(pattern).take();
    for (int iter = 0; iter < 300; ++iter) {
      std::string text;
      int n = len(rng);
      for (int i = 0; i < n; ++i) text += alphabet[pick(rng)];
      for (size_t pos = 0; pos + 1 <= text.size(); ++pos) {
        CAPTURE(pattern);
        CAPTURE(text);
        CAPTURE(pos);
        CHECK(re.match_prefix(text, pos) == reference_longest(pattern, text, pos));
      }
    }
  }
}
