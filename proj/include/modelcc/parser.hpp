#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "modelcc/diag.hpp"
#include "modelcc/grammar.hpp"
#include "modelcc/lexer.hpp"

namespace modelcc {

// One way to derive a forest node: a production plus one child per rhs symbol.
struct Derivation {
  int production = -1;
  std::vector<int> children;  // forest node ids
  bool operator==(const Derivation&) const = default;
};

// Packed-forest node, interned by (symbol, span). Terminal leaves carry the
// token candidate; nonterminal nodes carry every surviving derivation.
struct ForestNode {
  Symbol symbol;
  int from_anchor = -1, to_anchor = -1;
  size_t start = 0, end = 0;  // tight byte span (no trailing skip)
  int token = -1;
  std::vector<Derivation> derivations;
};

struct ParseForest {
  std::vector<ForestNode> nodes;
  int root = -1;  // augmented-start node spanning the whole input
};

// Earley-style recognizer over the token graph; handles left and right
// recursion, empty productions (nullable pre-pass), and ambiguity. parse() is
// const and touches no shared mutable state, so one parser may serve many
// threads.
class EarleyParser {
 public:
  explicit EarleyParser(const Grammar& grammar);
  ~EarleyParser();
  EarleyParser(EarleyParser&&) noexcept;
  EarleyParser& operator=(EarleyParser&&) noexcept;

  Result<ParseForest> parse(const TokenGraph& graph) const;
  const Grammar& grammar() const;

  struct Tables;  // opaque precomputed dotted-position tables

 private:
  std::unique_ptr<Tables> tables_;
};

// Tree counts saturate here; "at least this many".
inline constexpr uint64_t kTreeCountCap = 1'000'000'000'000'000'000ull;

// Number of distinct derivation trees the forest packs (saturating).
uint64_t count_trees(const ParseForest& forest);

// An unpacked interpretation.
struct TreeNode {
  Symbol symbol;
  size_t start = 0, end = 0;
  int production = -1;  // -1 for terminal leaves
  int token = -1;
  std::vector<int> children;
};

struct ParseTree {
  std::vector<TreeNode> nodes;  // pre-order; root first
  int root = -1;
};

struct TreeEnumeration {
  std::vector<ParseTree> trees;
  uint64_t total = 0;  // saturating
  bool more = false;   // trees remain beyond `limit`
};

// Deterministic order: lexicographic by derivation indices, pre-order, with
// later sibling subtrees varying fastest. Iterative; safe on deep trees.
TreeEnumeration enumerate_trees(const ParseForest& forest, size_t limit);

// The single surviving interpretation, or an Ambiguity error carrying the
// saturating interpretation count.
Result<ParseTree> unique_tree(const ParseForest& forest);

// Compact one-line rendering, e.g. Expression(Literal"1" AdditionOperator"+" ...).
// The augmented-start wrapper is elided.
std::string format_tree(const ParseTree& tree, const Grammar& grammar, std::string_view input);

// Forest dump for --dump-forest: one "symbol[start,end): derivation" line per
// packed derivation, in node-span order.
std::string dump_forest(const ParseForest& forest, const Grammar& grammar);

}  // namespace modelcc
