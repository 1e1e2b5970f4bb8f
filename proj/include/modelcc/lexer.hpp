#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "modelcc/diag.hpp"
#include "modelcc/grammar.hpp"
#include "modelcc/regex.hpp"

namespace modelcc {

// One maximal match of a token class. Anchors are the canonical non-skip
// positions; `to_anchor` is where the next token may start (after skipping).
struct TokenCandidate {
  int cls = -1;
  size_t start = 0, end = 0;  // byte offsets, end exclusive
  int from_anchor = -1, to_anchor = -1;
};

// All candidate tokenizations at once. Overlapping candidates coexist; a
// parse path never mixes overlapping ones because successors only continue
// where the previous candidate ended.
struct TokenGraph {
  std::string input;
  std::vector<size_t> anchors;  // sorted; last is the input-exhausted position when reachable
  std::vector<TokenCandidate> candidates;       // sorted by (start, cls, end)
  std::vector<std::vector<int>> at_anchor;      // anchor -> candidates starting there
  std::vector<std::vector<int>> into_anchor;    // anchor -> candidates ending there
  std::vector<int> start_set, end_set;
  int start_anchor = -1;
  int end_anchor = -1;  // -1 when the end of input was not reached

  std::string_view text_of(const TokenCandidate& c) const {
    return std::string_view(input).substr(c.start, c.end - c.start);
  }
  const std::vector<int>& successors(int candidate) const {
    return at_anchor[candidates[candidate].to_anchor];
  }
};

class Lexer {
 public:
  // Compiles every class pattern plus the skip pattern; rejects patterns that
  // match the empty string.
  static Result<Lexer> compile(std::vector<TokenClassDef> classes, std::string skip_pattern);

  // Pure function of (input, classes, skip). Every class contributes its
  // maximal match at every reachable anchor; fixed-text classes suppress
  // pattern classes only at an identical span. Fails when no tokenization
  // reaches the end of input.
  Result<TokenGraph> tokenize(std::string_view input) const;

  const std::vector<TokenClassDef>& classes() const { return classes_; }

 private:
  Lexer() = default;
  std::vector<TokenClassDef> classes_;
  std::vector<Regex> regexes_;
  std::optional<Regex> skip_;
};

// "class@[start,end) \"text\"" lines in (start, class) order.
std::string dump_tokens(const TokenGraph& graph, const std::vector<TokenClassDef>& classes);

}  // namespace modelcc
