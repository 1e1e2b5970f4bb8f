#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "modelcc/diag.hpp"
#include "modelcc/grammar.hpp"
#include "modelcc/model.hpp"
#include "modelcc/parser.hpp"

namespace modelcc {

// Candidate composite handed to a custom constraint predicate.
struct CustomContext {
  const Model* model = nullptr;
  const ElementType* element = nullptr;  // composite being realized
  int variant = 0;
  std::string_view input;  // whole source text
  std::string_view text;   // the candidate's span
  size_t start = 0, end = 0;

  struct Child {
    const MemberSpec* member = nullptr;
    const ElementType* type = nullptr;  // concrete type when it resolves uniquely
    std::string_view text;
    size_t start = 0, end = 0;
  };
  std::vector<Child> children;  // bound slots in rhs order (delimiters omitted)
};

// Returns true to keep the derivation.
using CustomHook = std::function<bool(const CustomContext&)>;
using CustomRegistry = std::map<std::string, CustomHook>;

// Evaluation spec after supertype inheritance; each field falls back to the
// nearest ancestor that sets it.
EvaluationSpec effective_evaluation(const Model& model, const ElementType& element);

// Mechanically derived constraint tables: effective priorities/associativity,
// operator-carrier slots, comparability families (shared Selection supertype),
// trailing optional members for eager/lazy, custom hooks.
class ConstraintSet {
 public:
  static Result<ConstraintSet> analyze(const Model& model, const CustomRegistry& hooks = {});

  struct ElementInfo {
    std::optional<int> priority;  // effective; lower binds tighter
    Associativity assoc = Associativity::Unspecified;
    Composition composition = Composition::Unspecified;
    bool delimited = false;
    bool spec_bearing = false;      // priority or associativity present
    bool self_carrier = false;      // composite carries its own spec
    int carrier_member = -1;        // member whose concrete types carry specs
    int trailing_optional = -1;     // member index for composition (R3)
    std::vector<std::string> selection_ancestors;  // comparability family, sorted
    std::vector<char> operand_slots;  // per member: can hold a constrained operator construct
    std::string hook_name;            // custom predicate ("" when none)
  };

  const ElementInfo& info(const std::string& element) const;
  const CustomHook* hook(const std::string& element) const;
  const Model& model() const { return *model_; }
  // Concrete types a carrier member can take (the element itself when concrete).
  const std::vector<std::string>& carrier_closure(const std::string& member_type) const;

  bool any_structural() const { return any_structural_; }   // R1/R2 material
  bool any_composition() const { return any_composition_; } // R3 material
  bool any_custom() const { return any_custom_; }           // R4 material
  bool empty() const { return !any_structural_ && !any_composition_ && !any_custom_; }

 private:
  const Model* model_ = nullptr;
  std::map<std::string, ElementInfo> info_;
  mutable std::map<std::string, std::vector<std::string>> closure_;
  CustomRegistry hooks_;
  bool any_structural_ = false, any_composition_ = false, any_custom_ = false;
};

// Which rule families removed derivations during a filter run.
struct FilterStats {
  bool r1_priority = false;
  bool r2_associativity = false;
  bool r3_composition = false;
  bool r4_custom = false;
  const char* last_applied() const;  // nullptr when nothing dropped
};

// Removes derivations violating priority (R1), associativity (R2), eager/lazy
// composition (R3), and custom predicates (R4). Nodes split per structural
// context where sharing would conflate distinct parents. When `structural` is
// false only R3/R4 run (used after parsing with a constraint-refined grammar,
// which already enforces R1/R2). Errors with "over-constrained" when every
// interpretation is eliminated.
Result<ParseForest> filter_forest(const ParseForest& forest, const ConstraintSet& constraints,
                                  const Grammar& grammar, std::string_view input,
                                  bool structural = true, FilterStats* stats = nullptr);

// Grammar with priority/associativity folded into the symbols, so violating
// derivations never enter the chart. Parsing with it and mapping the forest
// back must agree with filter_forest on the plain grammar.
struct RefinedGrammar {
  Grammar grammar;               // shares the original terminal table
  std::vector<int> nt_origin;    // refined nonterminal -> original nonterminal
  std::vector<int> prod_origin;  // refined production -> original production
};

Result<RefinedGrammar> refine_grammar(const Grammar& grammar, const ConstraintSet& constraints);

// Translates a forest parsed with the refined grammar back onto the original
// symbols, merging nodes that differ only by context.
ParseForest derefine_forest(const ParseForest& forest, const RefinedGrammar& refined);

}  // namespace modelcc
