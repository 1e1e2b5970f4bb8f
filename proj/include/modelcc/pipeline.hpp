#pragma once

#include <memory>
#include <string_view>

#include "modelcc/binder.hpp"
#include "modelcc/diag.hpp"
#include "modelcc/disambiguation.hpp"
#include "modelcc/grammar.hpp"
#include "modelcc/lexer.hpp"
#include "modelcc/model.hpp"
#include "modelcc/parser.hpp"

namespace modelcc {

struct PipelineOptions {
  CustomRegistry custom_hooks;
  // Structural constraints normally parse through a refined grammar so
  // invalid interpretations are never materialized; turning this off forces
  // the plain grammar plus post-filter route. Both yield the same trees.
  bool use_refined_grammar = true;
};

// Build-once / parse-many facade: derives the grammar, compiles the lexer,
// precomputes parser tables and constraint analysis from a model, then maps
// inputs to filtered forests, unique trees, or bound instance graphs.
class LanguageParser {
 public:
  static Result<LanguageParser> create(Model model, PipelineOptions options = {});

  const Model& model() const;
  const Grammar& grammar() const;
  const ConstraintSet& constraints() const;
  const Lexer& lexer() const;
  bool refined_route() const;  // structural constraints present and enabled

  Result<TokenGraph> tokenize(std::string_view input) const;

  // Constraint-filtered forest over all surviving interpretations.
  Result<ParseForest> parse_forest(std::string_view input) const;
  Result<ParseForest> parse_forest(const TokenGraph& tokens) const;

  // Exactly one interpretation, or an Ambiguity error carrying the
  // interpretation count and renderings of the first two trees.
  Result<ParseTree> parse_unique(std::string_view input) const;

  // Full pipeline: unique tree, instantiation, reference resolution. A null
  // symbol table resolves against parsed instances only.
  Result<AbstractSyntaxGraph> parse(std::string_view input,
                                    const SymbolTable* symbols = nullptr) const;

 private:
  struct State;
  std::shared_ptr<const State> state_;
};

}  // namespace modelcc
