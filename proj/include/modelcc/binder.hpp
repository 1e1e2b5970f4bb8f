#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "modelcc/diag.hpp"
#include "modelcc/grammar.hpp"
#include "modelcc/model.hpp"
#include "modelcc/parser.hpp"

namespace modelcc {

// One member's value inside an instantiated element. References start out as
// the raw id text and become Instance links after resolution.
struct FieldValue {
  enum class Kind { Absent, Text, Number, Boolean, Instance, List };
  Kind kind = Kind::Absent;
  std::string text;
  double number = 0;
  bool boolean = false;
  int instance = -1;             // node id
  std::vector<FieldValue> list;  // items in source order
  size_t start = kNoOffset, end = kNoOffset;  // token span behind the value, if any

  bool operator==(const FieldValue&) const = default;
};

FieldValue text_value(std::string text);
FieldValue number_value(double value);
FieldValue boolean_value(bool value);

struct ElementInstance {
  std::string type;  // concrete element name
  int node_id = -1;
  bool predefined = false;        // registered up front, no source span
  size_t start = 0, end = 0;      // source span (parsed instances)
  std::vector<std::pair<std::string, FieldValue>> fields;  // declaration order

  const FieldValue* field(std::string_view name) const;
};

struct ResolvedRef {
  int node = -1;
  std::string field;
  int item = -1;  // index for list-valued reference members, -1 otherwise
  int target = -1;
};

// Instances plus resolved reference links; node ids index `instances`.
// Cycles are expected — serialization uses a flat node table.
struct AbstractSyntaxGraph {
  std::vector<ElementInstance> instances;
  int root = -1;
  std::vector<ResolvedRef> resolved;
};

// Builds one instance per meaningful tree node: composites gather members in
// declaration order, lists collect items in source order, delimiters are
// consumed, basic tokens become instances with their value member converted
// per the declared value type. Reference members keep the id text until
// resolve_references links them.
Result<AbstractSyntaxGraph> instantiate(const ParseTree& tree, const Model& model,
                                        const Grammar& grammar, std::string_view input);

// Pre-registered instances plus (type, id) lookup with subtype matching.
class SymbolTable {
 public:
  explicit SymbolTable(const Model& model) : model_(&model) {}

  // Convenience for predefined instances (e.g. Constant pi = 3.1415927).
  static ElementInstance make_instance(const std::string& type,
                                       std::vector<std::pair<std::string, FieldValue>> fields);

  std::optional<Error> register_instance(ElementInstance instance);

  const Model& model() const { return *model_; }
  const std::map<std::pair<std::string, std::string>, ElementInstance>& predefined() const {
    return predefined_;
  }

 private:
  const Model* model_ = nullptr;
  std::map<std::pair<std::string, std::string>, ElementInstance> predefined_;  // (type, id)
};

// Two passes: register every parsed instance owning an id member (predefined
// entries are never overridden), then bind each reference field by (expected
// type, id text) with subtype matching. Forward, backward, and cyclic
// references resolve alike; referenced predefined instances are merged into
// the graph.
Result<AbstractSyntaxGraph> resolve_references(AbstractSyntaxGraph graph, const SymbolTable& table);

// -- Semantics ----------------------------------------------------------------

using SemanticValue = std::variant<double, bool, std::string>;

std::string to_display(const SemanticValue& value);

namespace detail {
class Evaluator;
}

// Handed to a fold hook; evaluates members on demand through the registry.
struct SemanticContext {
  const AbstractSyntaxGraph& graph;
  const Model& model;
  int node;
  detail::Evaluator* ev;

  const ElementInstance& instance() const { return graph.instances[node]; }
  const FieldValue* field(std::string_view name) const { return instance().field(name); }
  Result<SemanticValue> eval(const FieldValue& value);
  Result<SemanticValue> eval_field(std::string_view name);
};

using SemanticHook = std::function<Result<SemanticValue>(SemanticContext&)>;
using SemanticRegistry = std::map<std::string, SemanticHook>;

// Bottom-up fold from the root, memoized per node. Hooks attach to the most
// derived type and are inherited through supertypes; a reachable type without
// one is an error, as is a cyclic dependency among strict folds.
Result<SemanticValue> apply_semantics(const AbstractSyntaxGraph& graph, const Model& model,
                                      const SemanticRegistry& hooks);

// -- Serialization ------------------------------------------------------------

// {"root": id, "nodes": {id: {"type", "span", "fields"}}} with {"ref": id}
// for instance links; field order follows declaration order, numbers use the
// shortest round-tripping decimal form, predefined spans serialize as the
// string "predefined".
std::string to_json(const AbstractSyntaxGraph& graph);

// Indented one-node-per-line rendering; reference links print as <ref #id>
// so cyclic graphs terminate.
std::string to_tree_text(const AbstractSyntaxGraph& graph);

}  // namespace modelcc
