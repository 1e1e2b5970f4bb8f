#pragma once

// Brute-force reference implementations used to cross-check the pipeline.
// Nothing here shares code with the lexer, parser, or disambiguation passes:
// trees come from exhaustive substring splitting, expression values from a
// shunting-yard evaluator, and token candidates from std::regex.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "modelcc/grammar.hpp"

namespace oracle {

uint64_t catalan(unsigned n);

// Every parse tree of the token string, found by memoized exhaustive
// splitting over all productions. Exponential; intended for <= 14 tokens.
// Trees render exactly like the parser's compact format so sets compare as
// sorted string vectors.
struct BruteForest {
  uint64_t count = 0;
  std::vector<std::string> trees;  // sorted, deduplicated
};
BruteForest parse_bruteforce(const modelcc::Grammar& grammar, const std::vector<int>& classes,
                             const std::vector<std::string>& texts);

uint64_t count_trees_bruteforce(const modelcc::Grammar& grammar, const std::vector<int>& classes,
                                const std::vector<std::string>& texts);

// Terminal index for a display id ("Literal", "(", ...); -1 when absent.
int terminal_index(const modelcc::Grammar& grammar, const std::string& id);

// Shunting-yard evaluation of a four-operator expression with conventional
// precedence and left associativity; whitespace ignored, division by zero
// yields IEEE infinity.
double eval_conventional(const std::string& expr);

// Longest match of each named pattern at each byte offset, computed with
// std::regex by shrinking candidate ends. Skip handling is the caller's job.
struct TokenSpan {
  std::string cls;
  size_t start = 0;
  size_t end = 0;

  bool operator==(const TokenSpan&) const = default;
  auto operator<=>(const TokenSpan&) const = default;
};
std::vector<TokenSpan> max_match_tokens(
    const std::vector<std::pair<std::string, std::string>>& classes, const std::string& input);

}  // namespace oracle
