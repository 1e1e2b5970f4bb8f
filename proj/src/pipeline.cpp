#include "modelcc/pipeline.hpp"

#include <optional>
#include <utility>

namespace modelcc {

struct LanguageParser::State {
  Model model;
  Grammar grammar;
  ConstraintSet constraints;
  std::optional<Lexer> lexer;
  std::optional<EarleyParser> plain;
  std::optional<RefinedGrammar> refined;  // structural route, when enabled
  std::optional<EarleyParser> refined_parser;
};

Result<LanguageParser> LanguageParser::create(Model model, PipelineOptions options) {
  auto state = std::make_shared<State>();
  state->model = std::move(model);

  Result<Grammar> grammar = generate_grammar(state->model);
  if (!grammar.ok()) return grammar.error();
  state->grammar = grammar.take();

  Result<ConstraintSet> constraints =
      ConstraintSet::analyze(state->model, options.custom_hooks);
  if (!constraints.ok()) return constraints.error();
  state->constraints = constraints.take();

  Result<Lexer> lexer =
      Lexer::compile(state->grammar.terminals, state->model.effective_skip());
  if (!lexer.ok()) return lexer.error();
  state->lexer.emplace(lexer.take());

  state->plain.emplace(state->grammar);
  if (options.use_refined_grammar && state->constraints.any_structural()) {
    Result<RefinedGrammar> refined = refine_grammar(state->grammar, state->constraints);
    if (!refined.ok()) return refined.error();
    state->refined.emplace(refined.take());
    state->refined_parser.emplace(state->refined->grammar);
  }

  LanguageParser parser;
  parser.state_ = std::move(state);
  return parser;
}

const Model& LanguageParser::model() const { return state_->model; }
const Grammar& LanguageParser::grammar() const { return state_->grammar; }
const ConstraintSet& LanguageParser::constraints() const { return state_->constraints; }
const Lexer& LanguageParser::lexer() const { return *state_->lexer; }
bool LanguageParser::refined_route() const { return state_->refined.has_value(); }

Result<TokenGraph> LanguageParser::tokenize(std::string_view input) const {
  return state_->lexer->tokenize(input);
}

Result<ParseForest> LanguageParser::parse_forest(std::string_view input) const {
  Result<TokenGraph> tokens = tokenize(input);
  if (!tokens.ok()) return tokens.error();
  return parse_forest(tokens.value());
}

Result<ParseForest> LanguageParser::parse_forest(const TokenGraph& tokens) const {
  const State& s = *state_;
  if (s.refined_parser) {
    Result<ParseForest> forest = s.refined_parser->parse(tokens);
    if (forest.ok()) {
      ParseForest merged = derefine_forest(forest.take(), *s.refined);
      return filter_forest(std::move(merged), s.constraints, s.grammar, tokens.input,
                           /*structural=*/false);
    }
    // The refined grammar rejects inputs whose every interpretation breaks a
    // structural rule. Distinguish that from a plain syntax error by parsing
    // the unrefined grammar and filtering: over-constrained inputs then get
    // the rule-naming error, truly malformed ones the original diagnostics.
    Result<ParseForest> plain = s.plain->parse(tokens);
    if (!plain.ok()) return plain.error();
    return filter_forest(plain.take(), s.constraints, s.grammar, tokens.input,
                         /*structural=*/true);
  }
  Result<ParseForest> forest = s.plain->parse(tokens);
  if (!forest.ok()) return forest.error();
  return filter_forest(forest.take(), s.constraints, s.grammar, tokens.input,
                       /*structural=*/true);
}

Result<ParseTree> LanguageParser::parse_unique(std::string_view input) const {
  Result<ParseForest> forest = parse_forest(input);
  if (!forest.ok()) return forest.error();
  Result<ParseTree> tree = unique_tree(forest.value());
  if (tree.ok()) return tree;
  Error error = tree.error();
  if (error.kind == ErrorKind::Ambiguity) {
    TreeEnumeration first = enumerate_trees(forest.value(), 2);
    for (size_t i = 0; i < first.trees.size(); ++i) {
      error.details.push_back("interpretation " + std::to_string(i + 1) + ": " +
                              format_tree(first.trees[i], state_->grammar, input));
    }
  }
  return error;
}

Result<AbstractSyntaxGraph> LanguageParser::parse(std::string_view input,
                                                  const SymbolTable* symbols) const {
  Result<ParseTree> tree = parse_unique(input);
  if (!tree.ok()) return tree.error();
  Result<AbstractSyntaxGraph> graph =
      instantiate(tree.value(), state_->model, state_->grammar, input);
  if (!graph.ok()) return graph.error();
  if (symbols) return resolve_references(graph.take(), *symbols);
  SymbolTable empty(state_->model);
  return resolve_references(graph.take(), empty);
}

}  // namespace modelcc
