#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <random>
#include <set>

#include "doctest.h"
#include "helpers.hpp"
#include "modelcc/lexer.hpp"
#include "modelcc/pipeline.hpp"
#include "oracles.hpp"

using namespace modelcc;

namespace {

std::optional<Lexer> arith_lexer() {
  Model arith = testing::gallery_model("arith");
  Grammar g = generate_grammar(arith).take();
  Result<Lexer> lx = Lexer::compile(g.terminals, arith.effective_skip());
  if (!lx.ok()) return std::nullopt;
  return lx.take();
}

// Every complete start-to-end candidate path, as candidate index sequences.
std::vector<std::vector<int>> all_paths(const TokenGraph& g) {
  std::vector<std::vector<int>> done;
  std::vector<std::vector<int>> work;
  for (int c : g.start_set) work.push_back({c});
  while (!work.empty()) {
    std::vector<int> path = std::move(work.back());
    work.pop_back();
    const TokenCandidate& last = g.candidates[path.back()];
    if (last.to_anchor == g.end_anchor) {
      done.push_back(path);
      continue;
    }
    for (int next : g.successors(path.back())) {
      std::vector<int> longer = path;
      longer.push_back(next);
      work.push_back(std::move(longer));
    }
  }
  return done;
}

}  // namespace

TEST_CASE("the worked expression lexes to a single eleven-token path") {
  std::optional<Lexer> lx = arith_lexer();
  REQUIRE(lx.has_value());
  Result<TokenGraph> r = lx->tokenize("10/(2+3)*0.5+1");
  REQUIRE(r.ok());
  std::vector<std::vector<int>> paths = all_paths(r.value());
  REQUIRE(paths.size() == 1);
  std::vector<std::string> texts;
  for (int c : paths[0]) texts.emplace_back(r.value().text_of(r.value().candidates[c]));
  CHECK(texts == std::vector<std::string>{"10", "/", "(", "2", "+", "3", ")", "*", "0.5", "+",
                                          "1"});
}

TEST_CASE("empty input yields an empty graph, not an error") {
  std::optional<Lexer> lx = arith_lexer();
  REQUIRE(lx.has_value());
  Result<TokenGraph> r = lx->tokenize("");
  REQUIRE(r.ok());
  CHECK(r.value().candidates.empty());
  CHECK(r.value().start_set.empty());
  CHECK(r.value().end_anchor == r.value().start_anchor);
}

TEST_CASE("per-class maximal matches coexist") {
  std::vector<TokenClassDef> classes;
  classes.push_back({.id = "Int", .pattern = "[0-9]+", .fixed_text = false});
  classes.push_back({.id = "Real", .pattern = "[0-9]+\\.[0-9]+", .fixed_text = false});
  Lexer lx = Lexer::compile(classes, "[ ]+").take();
  Result<TokenGraph> r = lx.tokenize("3.14");
  REQUIRE(r.ok());
  // Both maximal matches appear even though only Real reaches the end.
  auto has = [&](const char* id, size_t start, size_t end) {
    return std::any_of(r.value().candidates.begin(), r.value().candidates.end(),
                       [&](const TokenCandidate& c) {
                         return lx.classes()[c.cls].id == id && c.start == start && c.end == end;
                       });
  };
  CHECK(has("Real", 0, 4));
  CHECK(has("Int", 0, 1));
  std::vector<std::vector<int>> paths = all_paths(r.value());
  REQUIRE(paths.size() == 1);
  CHECK(lx.classes()[r.value().candidates[paths[0][0]].cls].id == "Real");
}

TEST_CASE("fixed text beats patterns only on identical spans") {
  std::vector<TokenClassDef> classes;
  classes.push_back({.id = "if", .pattern = "if", .fixed_text = true});
  classes.push_back({.id = "Name", .pattern = "[a-z]+", .fixed_text = false});
  Lexer lx = Lexer::compile(classes, "[ ]+").take();

  Result<TokenGraph> exact = lx.tokenize("if");
  REQUIRE(exact.ok());
  REQUIRE(exact.value().candidates.size() == 1);  // Name"if" suppressed
  CHECK(lx.classes()[exact.value().candidates[0].cls].fixed_text);

  Result<TokenGraph> longer = lx.tokenize("iffy");
  REQUIRE(longer.ok());
  // Different spans coexist: Name[0,4) and if[0,2)+Name[2,4).
  CHECK(all_paths(longer.value()).size() == 2);
}

TEST_CASE("skip spans never break path soundness") {
  std::optional<Lexer> lx = arith_lexer();
  REQUIRE(lx.has_value());
  Result<TokenGraph> r = lx->tokenize(" 1 +\t2 ");
  REQUIRE(r.ok());
  std::vector<std::vector<int>> paths = all_paths(r.value());
  REQUIRE(paths.size() == 1);
  CHECK(paths[0].size() == 3);
}

TEST_CASE("lexical failure reports the furthest offset") {
  std::optional<Lexer> lx = arith_lexer();
  REQUIRE(lx.has_value());
  Result<TokenGraph> r = lx->tokenize("12$3");
  REQUIRE_FALSE(r.ok());
  CHECK(r.error().kind == ErrorKind::Lexical);
  CHECK(r.error().offset == 2);
  CHECK(r.error().message.find("$") != std::string::npos);
}

TEST_CASE("empty-matching patterns are rejected at compile time") {
  std::vector<TokenClassDef> classes;
  classes.push_back({.id = "Star", .pattern = "a*", .fixed_text = false});
  CHECK_FALSE(Lexer::compile(classes, "[ ]+").ok());
}

TEST_CASE("candidates agree with the brute-force maximal-match oracle") {
  Model json = testing::gallery_model("json");
  Grammar g = generate_grammar(json).take();
  std::optional<Lexer> lx;
  {
    Result<Lexer> r = Lexer::compile(g.terminals, json.effective_skip());
    REQUIRE(r.ok());
    lx = r.take();
  }
  std::vector<std::pair<std::string, std::string>> oracle_classes;
  for (const TokenClassDef& t : g.terminals) oracle_classes.push_back({t.id, t.pattern});

  std::mt19937 rng(77);
  const std::string alphabet = "{}[]:,\"\\ 0123456789.eE+-truefalsenull\n\tax";
  std::uniform_int_distribution<size_t> pick(0, alphabet.size() - 1);
  std::uniform_int_distribution<int> len(0, 24);
  for (int iter = 0; iter < 400; ++iter) {
    std::string input;
    int n = len(rng);
    for (int i = 0; i < n; ++i) input += alphabet[pick(rng)];
    Result<TokenGraph> r = lx->tokenize(input);
    if (!r.ok()) continue;
    std::vector<oracle::TokenSpan> spans = oracle::max_match_tokens(oracle_classes, input);
    CAPTURE(input);
    for (const TokenCandidate& c : r.value().candidates) {
      // Every candidate is its class's maximal match at that offset.
      oracle::TokenSpan want{lx->classes()[c.cls].id, c.start, c.end};
      CHECK(std::find(spans.begin(), spans.end(), want) != spans.end());
    }
    // Path soundness: tokens plus skipped whitespace reproduce the input.
    for (const std::vector<int>& path : all_paths(r.value())) {
      std::string rebuilt;
      size_t at = 0;
      bool gaps_ok = true;
      for (int ci : path) {
        const TokenCandidate& c = r.value().candidates[ci];
        for (size_t k = at; k < c.start; ++k) {
          if (std::string(" \t\r\n").find(input[k]) == std::string::npos) gaps_ok = false;
        }
        rebuilt += input.substr(c.start, c.end - c.start);
        at = c.end;
      }
      CHECK(gaps_ok);
      std::string squashed;
      for (char ch : input) {
        if (std::string(" \t\r\n").find(ch) == std::string::npos) squashed += ch;
      }
      CHECK(rebuilt == squashed);
    }
  }
}

TEST_CASE("tokenize is deterministic") {
  std::optional<Lexer> lx = arith_lexer();
  REQUIRE(lx.has_value());
  Result<TokenGraph> a = lx->tokenize("10/(2+3)*0.5+1");
  Result<TokenGraph> b = lx->tokenize("10/(2+3)*0.5+1");
  REQUIRE(a.ok());
  REQUIRE(b.ok());
  CHECK(dump_tokens(a.value(), lx->classes()) == dump_tokens(b.value(), lx->classes()));
}
