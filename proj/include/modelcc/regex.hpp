#pragma once

#include <bitset>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "modelcc/diag.hpp"

namespace modelcc {

// Byte-oriented regular expressions over a fixed dialect:
//   literals, character classes [...] (ranges, ^ negation), '.',
//   postfix * + ?, alternation |, groups (...), and escapes
//   (\\ \+ \. etc. for punctuation, \n \t \r \f \v, \d \D \w \W \s \S).
// Anchors, bounded repetition {m,n}, and backreferences are rejected.
//
// Matching is longest-prefix: match_prefix returns the end of the longest
// match starting exactly at `pos`, independent of alternative order.
class Regex {
 public:
  static Result<Regex> compile(std::string_view pattern);

  // End offset of the longest match starting at pos, or kNoOffset if none
  // (a zero-length match reports pos itself).
  size_t match_prefix(std::string_view text, size_t pos) const;

  bool full_match(std::string_view text) const;

  // True if the pattern accepts the empty string.
  bool matches_empty() const;

  const std::string& pattern() const { return pattern_; }

  // Unescaped text when the pattern is a plain literal sequence, else "".
  const std::string& literal_text() const { return literal_; }

 private:
  struct State {
    int next = -1;                // char-edge target, -1 if none
    std::bitset<256> chars;      // char-edge label
    int eps0 = -1, eps1 = -1;    // up to two epsilon edges
  };

  Regex() = default;

  std::vector<State> states_;
  int start_ = 0;
  int accept_ = 0;
  std::string pattern_;
  std::string literal_;

  friend class RegexCompiler;
};

}  // namespace modelcc
