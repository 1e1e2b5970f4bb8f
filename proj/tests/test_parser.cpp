#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <atomic>
#include <chrono>
#include <random>
#include <thread>

#include "doctest.h"
#include "helpers.hpp"
#include "modelcc/pipeline.hpp"
#include "oracles.hpp"

using namespace modelcc;

namespace {

// Plain-grammar stack for raw-forest tests: no constraints, no filtering.
// The parser keeps a pointer to the grammar, so it lives behind a unique_ptr.
struct RawStack {
  std::unique_ptr<Grammar> grammar;
  std::unique_ptr<Lexer> lexer;
  std::unique_ptr<EarleyParser> parser;

  explicit RawStack(const Model& model)
      : grammar(std::make_unique<Grammar>(generate_grammar(model).take())),
        lexer(std::make_unique<Lexer>(
            Lexer::compile(grammar->terminals, model.effective_skip()).take())),
        parser(std::make_unique<EarleyParser>(*grammar)) {}

  Result<ParseForest> parse(const std::string& text) const {
    Result<TokenGraph> tokens = lexer->tokenize(text);
    if (!tokens.ok()) return tokens.error();
    return parser->parse(tokens.value());
  }
};

Model word_list_model() {
  ModelBuilder b("Seq");
  b.add_element("Doc", ElementKind::Composite)
      .start()
      .add_member("items", "Word")
      .multiplicity(0, Multiplicity::kUnbounded);
  b.add_element("Word", ElementKind::Basic).pattern("[a-z]+").value(ValueType::Text);
  return b.build().take();
}

Model keyword_model() {
  ModelBuilder b("Kw");
  b.add_element("Stmt", ElementKind::Selection).start();
  b.add_element("IfStmt", ElementKind::Composite)
      .supertype("Stmt")
      .prefix("if")
      .add_member("name", "Name");
  b.add_element("Bare", ElementKind::Composite).supertype("Stmt").add_member("name", "Name");
  b.add_element("Name", ElementKind::Basic).pattern("[a-z]+").value(ValueType::Text);
  return b.build().take();
}

}  // namespace

TEST_CASE("the worked expression yields exactly one constrained interpretation") {
  LanguageParser lp = LanguageParser::create(testing::gallery_model("arith")).take();
  Result<ParseForest> forest = lp.parse_forest("10/(2+3)*0.5+1");
  REQUIRE(forest.ok());
  CHECK(count_trees(forest.value()) == 1);
}

TEST_CASE("unconstrained forests pack every bracketing") {
  RawStack raw(testing::unconstrained_arith());
  Result<ParseForest> two = raw.parse("1+2*3");
  REQUIRE(two.ok());
  CHECK(count_trees(two.value()) == 2);
  Result<ParseForest> five = raw.parse("1+2+3+4");
  REQUIRE(five.ok());
  CHECK(count_trees(five.value()) == 5);
}

TEST_CASE("tree counts match the brute-force oracle on random inputs") {
  RawStack raw(testing::unconstrained_arith());
  const std::vector<std::string> vocab = {"1", "2", "37", "0.5", "+", "-", "*", "/", "(", ")"};
  std::mt19937 rng(4242);
  std::uniform_int_distribution<size_t> pick(0, vocab.size() - 1);
  std::uniform_int_distribution<int> len(1, 12);
  int parsed = 0;
  for (int iter = 0; iter < 300; ++iter) {
    int n = len(rng);
    std::string spaced;
    for (int i = 0; i < n; ++i) {
      if (i) spaced += ' ';
      spaced += vocab[pick(rng)];
    }
    testing::TokenString ts = testing::arith_tokens(*raw.grammar, spaced);
    uint64_t want = oracle::count_trees_bruteforce(*raw.grammar, ts.classes, ts.texts);
    Result<ParseForest> forest = raw.parse(spaced);
    CAPTURE(spaced);
    if (forest.ok()) {
      CHECK(count_trees(forest.value()) == want);
      CHECK(want > 0);
      ++parsed;
    } else {
      CHECK(want == 0);
      CHECK(forest.error().kind == ErrorKind::Syntax);
    }
  }
  CHECK(parsed > 20);  // the sample actually exercises the accept path
}

TEST_CASE("syntax errors carry the failure offset and expectations") {
  LanguageParser lp = LanguageParser::create(testing::gallery_model("arith")).take();

  Result<ParseForest> dangling = lp.parse_forest("1+");
  REQUIRE_FALSE(dangling.ok());
  CHECK(dangling.error().kind == ErrorKind::Syntax);
  CHECK(dangling.error().offset == 2);
  CHECK_FALSE(dangling.error().expected.empty());

  Result<ParseForest> empty = lp.parse_forest("");
  REQUIRE_FALSE(empty.ok());
  CHECK(empty.error().kind == ErrorKind::Syntax);
  CHECK(empty.error().offset == 0);
}

TEST_CASE("a zero-minimum list accepts the empty input") {
  LanguageParser lp = LanguageParser::create(word_list_model()).take();
  Result<AbstractSyntaxGraph> graph = lp.parse("");
  REQUIRE(graph.ok());
  const ElementInstance& root = graph.value().instances[graph.value().root];
  CHECK(root.type == "Doc");
  const FieldValue* items = root.field("items");
  REQUIRE(items != nullptr);
  CHECK(items->kind == FieldValue::Kind::List);
  CHECK(items->list.empty());

  Result<AbstractSyntaxGraph> three = lp.parse("one two three");
  REQUIRE(three.ok());
  CHECK(three.value().instances[three.value().root].field("items")->list.size() == 3);
}

TEST_CASE("enumeration honours the limit and reports what remains") {
  RawStack raw(testing::unconstrained_arith());
  ParseForest forest = raw.parse("1+2*3").take();

  TreeEnumeration first = enumerate_trees(forest, 1);
  CHECK(first.trees.size() == 1);
  CHECK(first.total == 2);
  CHECK(first.more);

  TreeEnumeration all = enumerate_trees(forest, 10);
  CHECK(all.trees.size() == 2);
  CHECK_FALSE(all.more);
  std::vector<std::string> rendered;
  for (const ParseTree& t : all.trees)
    rendered.push_back(format_tree(t, *raw.grammar, "1+2*3"));
  std::sort(rendered.begin(), rendered.end());
  CHECK(rendered[0] != rendered[1]);
}

TEST_CASE("unique_tree rejects ambiguous forests with a count") {
  RawStack raw(testing::unconstrained_arith());
  ParseForest forest = raw.parse("1+2*3").take();
  Result<ParseTree> tree = unique_tree(forest);
  REQUIRE_FALSE(tree.ok());
  CHECK(tree.error().kind == ErrorKind::Ambiguity);
  CHECK(tree.error().interpretation_count == 2);

  LanguageParser lp = LanguageParser::create(testing::gallery_model("arith")).take();
  Result<ParseTree> one = lp.parse_unique("1+2*3");
  REQUIRE(one.ok());
  CHECK(format_tree(one.value(), lp.grammar(), "1+2*3").find("BinaryExpression") !=
        std::string::npos);
}

TEST_CASE("deep left recursion stays fast") {
  LanguageParser lp = LanguageParser::create(testing::gallery_model("arith")).take();
  std::string chain = testing::ones_chain(5000);  // 10001 tokens
  auto t0 = std::chrono::steady_clock::now();
  Result<ParseTree> tree = lp.parse_unique(chain);
  auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                std::chrono::steady_clock::now() - t0)
                .count();
  REQUIRE(tree.ok());
  CHECK(ms < 5000);
}

TEST_CASE("deep right recursion stays fast") {
  LanguageParser lp = LanguageParser::create(word_list_model()).take();
  std::string text;
  for (int i = 0; i < 10000; ++i) {
    if (i) text += ' ';
    text += "w";
  }
  auto t0 = std::chrono::steady_clock::now();
  Result<AbstractSyntaxGraph> graph = lp.parse(text);
  auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                std::chrono::steady_clock::now() - t0)
                .count();
  REQUIRE(graph.ok());
  CHECK(graph.value().instances[graph.value().root].field("items")->list.size() == 10000);
  CHECK(ms < 5000);
}

TEST_CASE("parsing is deterministic run to run") {
  RawStack raw(testing::unconstrained_arith());
  ParseForest a = raw.parse("1+2*3-4").take();
  ParseForest b = raw.parse("1+2*3-4").take();
  CHECK(dump_forest(a, *raw.grammar) == dump_forest(b, *raw.grammar));
}

TEST_CASE("one parser instance serves many threads") {
  LanguageParser lp = LanguageParser::create(testing::gallery_model("arith")).take();
  ParseTree reference = lp.parse_unique("10/(2+3)*0.5+1").take();
  std::string want = format_tree(reference, lp.grammar(), "10/(2+3)*0.5+1");

  std::atomic<int> mismatches{0};
  std::vector<std::thread> pool;
  for (int t = 0; t < 8; ++t) {
    pool.emplace_back([&] {
      for (int i = 0; i < 50; ++i) {
        Result<ParseTree> tree = lp.parse_unique("10/(2+3)*0.5+1");
        if (!tree.ok() || format_tree(tree.value(), lp.grammar(), "10/(2+3)*0.5+1") != want)
          mismatches.fetch_add(1);
      }
    });
  }
  for (std::thread& th : pool) th.join();
  CHECK(mismatches.load() == 0);
}

TEST_CASE("lexical ambiguity flows into the forest") {
  LanguageParser lp = LanguageParser::create(keyword_model()).take();
  Result<ParseForest> forest = lp.parse_forest("iffy");
  REQUIRE(forest.ok());
  CHECK(count_trees(forest.value()) == 2);

  Result<ParseTree> tree = lp.parse_unique("iffy");
  REQUIRE_FALSE(tree.ok());
  CHECK(tree.error().kind == ErrorKind::Ambiguity);
  CHECK(tree.error().interpretation_count == 2);

  // An unambiguous continuation wins outright.
  Result<ParseTree> bare = lp.parse_unique("zebra");
  REQUIRE(bare.ok());
}
