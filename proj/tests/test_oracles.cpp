#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "modelcc/grammar.hpp"
#include "oracles.hpp"

using namespace modelcc;

TEST_CASE("catalan numbers") {
  CHECK(oracle::catalan(0) == 1);
  CHECK(oracle::catalan(1) == 1);
  CHECK(oracle::catalan(2) == 2);
  CHECK(oracle::catalan(3) == 5);
  CHECK(oracle::catalan(4) == 14);
  CHECK(oracle::catalan(5) == 42);
  CHECK(oracle::catalan(6) == 132);
  CHECK(oracle::catalan(7) == 429);
}

TEST_CASE("conventional evaluator") {
  CHECK(oracle::eval_conventional("5") == 5.0);
  CHECK(oracle::eval_conventional("10/(2+3)*0.5+1") == 2.0);
  CHECK(oracle::eval_conventional("1-2-3") == -4.0);
  CHECK(oracle::eval_conventional("1+2*3") == 7.0);
  CHECK(oracle::eval_conventional("8/4/2") == 1.0);
  CHECK(oracle::eval_conventional(" 1 + 2 ") == 3.0);
  CHECK(std::isinf(oracle::eval_conventional("1/0")));
}

TEST_CASE("brute-force tree counts on the arith grammar") {
  Model model = testing::gallery_model("arith");
  Result<Grammar> grammar = generate_grammar(model);
  REQUIRE(grammar.ok());
  auto count = [&](const std::string& spaced) {
    testing::TokenString ts = testing::arith_tokens(grammar.value(), spaced);
    return oracle::count_trees_bruteforce(grammar.value(), ts.classes, ts.texts);
  };
  CHECK(count("7") == 1);
  CHECK(count("1 + 2 * 3") == 2);
  CHECK(count("1 + 2 + 3 + 4") == 5);
  CHECK(count("( 1 )") == 1);
  CHECK(count("1 +") == 0);
  CHECK(count("") == 0);  // Expression never derives epsilon
}

TEST_CASE("brute-force enumeration renders distinct bracketings") {
  Model model = testing::gallery_model("arith");
  Result<Grammar> grammar = generate_grammar(model);
  REQUIRE(grammar.ok());
  testing::TokenString ts = testing::arith_tokens(grammar.value(), "1 + 2 * 3");
  oracle::BruteForest forest = oracle::parse_bruteforce(grammar.value(), ts.classes, ts.texts);
  REQUIRE(forest.trees.size() == 2);
  CHECK(forest.trees[0] != forest.trees[1]);
  for (const std::string& tree : forest.trees) {
    CHECK(tree.find("Literal\"1\"") != std::string::npos);
    CHECK(tree.find("MultiplicationOperator\"*\"") != std::string::npos);
  }
}

TEST_CASE("maximal-match token oracle") {
  std::vector<std::pair<std::string, std::string>> classes{
      {"integer", "[0-9]+"}, {"real", "[0-9]+\\.[0-9]+"}, {"plus", "\\+"}};
  std::vector<oracle::TokenSpan> spans = oracle::max_match_tokens(classes, "3.14+9");
  auto has = [&](const std::string& cls, size_t start, size_t end) {
    return std::find(spans.begin(), spans.end(), oracle::TokenSpan{cls, start, end}) !=
           spans.end();
  };
  CHECK(has("integer", 0, 1));   // maximal integer at 0 is just "3"
  CHECK(has("real", 0, 4));      // while real reaches across the dot
  CHECK(has("plus", 4, 5));
  CHECK(has("integer", 5, 6));
  CHECK_FALSE(has("integer", 0, 2));
  CHECK_FALSE(has("real", 1, 4));
}

TEST_CASE("tree counts match Catalan on unconstrained chains") {
  Model model = testing::unconstrained_arith();
  Result<Grammar> grammar = generate_grammar(model);
  REQUIRE(grammar.ok());
  for (unsigned n = 1; n <= 5; ++n) {
    std::string spaced = "1";
    for (unsigned i = 0; i < n; ++i) spaced += " + 1";
    testing::TokenString ts = testing::arith_tokens(grammar.value(), spaced);
    CHECK(oracle::count_trees_bruteforce(grammar.value(), ts.classes, ts.texts) ==
          oracle::catalan(n));
  }
}
