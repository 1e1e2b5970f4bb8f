#include "modelcc/binder.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <deque>
#include <utility>

#include "json.hpp"

namespace modelcc {

namespace {

// Intermediate value of one parse-tree node while instances are being built.
struct NodeVal {
  enum class Kind { None, Token, Inst, Items };
  Kind kind = Kind::None;
  int term = -1;  // token class (Kind::Token)
  int inst = -1;  // node id (Kind::Inst)
  size_t start = 0, end = 0;
  std::vector<NodeVal> items;  // flattened list items (Kind::Items)
};

std::string escape_text(std::string_view text) {
  std::string out;
  out.reserve(text.size() + 2);
  out += '"';
  for (char c : text) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  out += '"';
  return out;
}

struct Instantiator {
  const ParseTree& tree;
  const Model& model;
  const Grammar& grammar;
  std::string_view input;
  AbstractSyntaxGraph graph;
  std::optional<Error> failed;

  std::string_view text_of(size_t start, size_t end) const {
    return input.substr(start, end - start);
  }

  // Converts a consumed token into a basic-element instance.
  Result<int> materialize_basic(const NodeVal& v) {
    const TokenClassDef& cls = grammar.terminals[static_cast<size_t>(v.term)];
    const ElementType* elem = model.find(cls.origin_element);
    if (!elem) {
      return Error{ErrorKind::Model,
                   "token class '" + cls.id + "' has no backing element", v.start};
    }
    std::string text(text_of(v.start, v.end));
    FieldValue value;
    value.text = text;
    value.start = v.start;
    value.end = v.end;
    switch (cls.value_type) {
      case ValueType::Number: {
        errno = 0;
        char* done = nullptr;
        double parsed = std::strtod(text.c_str(), &done);
        if (done != text.c_str() + text.size() || errno == ERANGE || !std::isfinite(parsed)) {
          return Error{ErrorKind::Eval,
                       "numeric value '" + text + "' does not fit a double", v.start};
        }
        value.kind = FieldValue::Kind::Number;
        value.number = parsed;
        break;
      }
      case ValueType::Boolean:
        value.kind = FieldValue::Kind::Boolean;
        value.boolean = text == "true";
        break;
      default:
        value.kind = FieldValue::Kind::Text;
        break;
    }
    std::string field_name = "value";
    for (const MemberSpec& m : elem->members) {
      if (m.value_field) field_name = m.field_name;
    }
    ElementInstance inst;
    inst.type = elem->name;
    inst.start = v.start;
    inst.end = v.end;
    inst.fields.emplace_back(std::move(field_name), std::move(value));
    inst.node_id = static_cast<int>(graph.instances.size());
    graph.instances.push_back(std::move(inst));
    return graph.instances.back().node_id;
  }

  Result<FieldValue> to_field(const NodeVal& v, const MemberSpec& member) {
    FieldValue out;
    out.start = v.start;
    out.end = v.end;
    if (member.reference_kind == ReferenceKind::Reference) {
      // Keep the id text; resolve_references turns it into a link.
      out.kind = FieldValue::Kind::Text;
      out.text = std::string(text_of(v.start, v.end));
      return out;
    }
    int id = v.inst;
    if (v.kind == NodeVal::Kind::Token) {
      Result<int> made = materialize_basic(v);
      if (!made.ok()) return made.error();
      id = made.value();
    }
    out.kind = FieldValue::Kind::Instance;
    out.instance = id;
    return out;
  }

  Result<NodeVal> build_composite(const TreeNode& node, const Production& prod,
                                  std::vector<NodeVal>& child_vals) {
    const ElementType* elem = model.find(prod.origin_element);
    if (!elem) {
      return Error{ErrorKind::Model, "unknown element '" + prod.origin_element + "'", node.start};
    }
    std::vector<std::vector<NodeVal>> collected(elem->members.size());
    for (size_t i = 0; i < prod.binding.size(); ++i) {
      int member = prod.binding[i];
      if (member < 0) continue;  // delimiter
      NodeVal& v = child_vals[i];
      if (v.kind == NodeVal::Kind::Items) {
        for (NodeVal& item : v.items) collected[static_cast<size_t>(member)].push_back(std::move(item));
      } else if (v.kind != NodeVal::Kind::None) {
        collected[static_cast<size_t>(member)].push_back(std::move(v));
      }
    }
    ElementInstance inst;
    inst.type = elem->name;
    inst.start = node.start;
    inst.end = node.end;
    for (size_t m = 0; m < elem->members.size(); ++m) {
      const MemberSpec& member = elem->members[m];
      Multiplicity mult = effective_multiplicity(member);
      std::vector<NodeVal>& vals = collected[m];
      FieldValue field;
      if (mult.max > 1) {
        field.kind = FieldValue::Kind::List;
        for (const NodeVal& v : vals) {
          Result<FieldValue> item = to_field(v, member);
          if (!item.ok()) return item.error();
          field.list.push_back(item.take());
        }
        if (!field.list.empty()) {
          field.start = field.list.front().start;
          field.end = field.list.back().end;
        }
      } else if (!vals.empty()) {
        Result<FieldValue> single = to_field(vals.front(), member);
        if (!single.ok()) return single.error();
        field = single.take();
      }
      inst.fields.emplace_back(member.field_name, std::move(field));
    }
    inst.node_id = static_cast<int>(graph.instances.size());
    graph.instances.push_back(std::move(inst));
    NodeVal out;
    out.kind = NodeVal::Kind::Inst;
    out.inst = graph.instances.back().node_id;
    out.start = node.start;
    out.end = node.end;
    return out;
  }

  Result<NodeVal> combine(int node_id, std::vector<NodeVal>& child_vals) {
    const TreeNode& node = tree.nodes[static_cast<size_t>(node_id)];
    if (node.production < 0) {
      NodeVal v;
      v.kind = NodeVal::Kind::Token;
      v.term = node.symbol.index;
      v.start = node.start;
      v.end = node.end;
      return v;
    }
    const Production& prod = grammar.productions[static_cast<size_t>(node.production)];
    switch (prod.kind) {
      case ProductionKind::AugmentedStart:
      case ProductionKind::SelectionUnit: {
        for (size_t i = 0; i < prod.binding.size(); ++i) {
          if (prod.binding[i] == 0) return std::move(child_vals[i]);
        }
        NodeVal none;  // empty start production
        none.start = node.start;
        none.end = node.end;
        return none;
      }
      case ProductionKind::ListBase:
      case ProductionKind::ListRecursive: {
        NodeVal out;
        out.kind = NodeVal::Kind::Items;
        out.start = node.start;
        out.end = node.end;
        for (size_t i = 0; i < prod.binding.size(); ++i) {
          NodeVal& v = child_vals[i];
          if (prod.binding[i] == 0) {
            out.items.push_back(std::move(v));
          } else if (prod.binding[i] == 1) {
            if (out.items.empty()) {
              out.items = std::move(v.items);  // steal the accumulated prefix
            } else {
              for (NodeVal& item : v.items) out.items.push_back(std::move(item));
            }
          }
        }
        return out;
      }
      case ProductionKind::Composite:
        return build_composite(node, prod, child_vals);
    }
    return Error{ErrorKind::Model, "unhandled production kind", node.start};
  }

  // Post-order walk without recursion; trees can be 10^4 nodes deep.
  Result<NodeVal> run() {
    struct Frame {
      int node;
      size_t next_child = 0;
      std::vector<NodeVal> child_vals;
    };
    std::deque<Frame> stack;
    stack.push_back(Frame{tree.root});
    NodeVal result;
    while (!stack.empty()) {
      Frame& top = stack.back();
      const TreeNode& node = tree.nodes[static_cast<size_t>(top.node)];
      if (top.next_child < node.children.size()) {
        int child = node.children[top.next_child];
        ++top.next_child;
        stack.push_back(Frame{child});
        continue;
      }
      Result<NodeVal> combined = combine(top.node, top.child_vals);
      if (!combined.ok()) return combined.error();
      stack.pop_back();
      if (stack.empty()) {
        result = combined.take();
      } else {
        stack.back().child_vals.push_back(combined.take());
      }
    }
    return result;
  }
};

std::string scalar_text(const FieldValue& value) {
  switch (value.kind) {
    case FieldValue::Kind::Text: return value.text;
    case FieldValue::Kind::Number: return format_double(value.number);
    case FieldValue::Kind::Boolean: return value.boolean ? "true" : "false";
    default: return value.text;
  }
}

// The id text a referenceable instance is registered under.
std::optional<std::string> id_text_of(const ElementInstance& inst, const Model& model,
                                      const std::vector<ElementInstance>& all) {
  const ElementType* elem = model.find(inst.type);
  if (!elem) return std::nullopt;
  const MemberSpec* id = id_member(model, *elem);
  if (!id) return std::nullopt;
  const FieldValue* field = inst.field(id->field_name);
  if (!field) return std::nullopt;
  if (field->kind == FieldValue::Kind::Instance) {
    // Id member parsed as a basic element; key on its value text.
    const ElementInstance& basic = all[static_cast<size_t>(field->instance)];
    if (basic.fields.empty()) return std::nullopt;
    return scalar_text(basic.fields.front().second);
  }
  if (field->kind == FieldValue::Kind::Absent || field->kind == FieldValue::Kind::List) {
    return std::nullopt;
  }
  return scalar_text(*field);
}

nlohmann::ordered_json field_json(const FieldValue& value) {
  using json = nlohmann::ordered_json;
  switch (value.kind) {
    case FieldValue::Kind::Absent: return nullptr;
    case FieldValue::Kind::Text: return value.text;
    case FieldValue::Kind::Number: return value.number;
    case FieldValue::Kind::Boolean: return value.boolean;
    case FieldValue::Kind::Instance: return json{{"ref", value.instance}};
    case FieldValue::Kind::List: {
      json items = json::array();
      for (const FieldValue& item : value.list) items.push_back(field_json(item));
      return items;
    }
  }
  return nullptr;
}

}  // namespace

FieldValue text_value(std::string text) {
  FieldValue v;
  v.kind = FieldValue::Kind::Text;
  v.text = std::move(text);
  return v;
}

FieldValue number_value(double value) {
  FieldValue v;
  v.kind = FieldValue::Kind::Number;
  v.number = value;
  return v;
}

FieldValue boolean_value(bool value) {
  FieldValue v;
  v.kind = FieldValue::Kind::Boolean;
  v.boolean = value;
  return v;
}

const FieldValue* ElementInstance::field(std::string_view name) const {
  for (const auto& [field_name, value] : fields) {
    if (field_name == name) return &value;
  }
  return nullptr;
}

Result<AbstractSyntaxGraph> instantiate(const ParseTree& tree, const Model& model,
                                        const Grammar& grammar, std::string_view input) {
  if (tree.root < 0) return Error{ErrorKind::Model, "cannot instantiate an empty parse tree"};
  Instantiator inst{tree, model, grammar, input};
  Result<NodeVal> rooted = inst.run();
  if (!rooted.ok()) return rooted.error();
  NodeVal root = rooted.take();
  if (root.kind == NodeVal::Kind::Token) {
    Result<int> made = inst.materialize_basic(root);
    if (!made.ok()) return made.error();
    inst.graph.root = made.value();
  } else if (root.kind == NodeVal::Kind::Inst) {
    inst.graph.root = root.inst;
  } else {
    return Error{ErrorKind::Model, "start element did not produce an instance",
                 tree.nodes[static_cast<size_t>(tree.root)].start};
  }
  return std::move(inst.graph);
}

ElementInstance SymbolTable::make_instance(
    const std::string& type, std::vector<std::pair<std::string, FieldValue>> fields) {
  ElementInstance inst;
  inst.type = type;
  inst.predefined = true;
  inst.fields = std::move(fields);
  return inst;
}

std::optional<Error> SymbolTable::register_instance(ElementInstance instance) {
  const ElementType* elem = model_->find(instance.type);
  if (!elem) {
    return Error{ErrorKind::Model, "unknown element type '" + instance.type + "'"};
  }
  const MemberSpec* id = id_member(*model_, *elem);
  if (!id) {
    return Error{ErrorKind::Model,
                 "element '" + instance.type + "' has no id member to register by"};
  }
  const FieldValue* field = instance.field(id->field_name);
  if (!field || field->kind == FieldValue::Kind::Absent) {
    return Error{ErrorKind::Model, "instance of '" + instance.type + "' is missing its id field '" +
                                       id->field_name + "'"};
  }
  std::string key = scalar_text(*field);
  instance.predefined = true;
  instance.node_id = -1;
  auto [it, inserted] = predefined_.emplace(std::make_pair(instance.type, key), ElementInstance{});
  if (!inserted) {
    return Error{ErrorKind::DuplicateId,
                 "id '" + key + "' is already defined for element '" + instance.type + "'"};
  }
  it->second = std::move(instance);
  return std::nullopt;
}

Result<AbstractSyntaxGraph> resolve_references(AbstractSyntaxGraph graph,
                                               const SymbolTable& table) {
  const Model& model = table.model();
  std::map<std::pair<std::string, std::string>, int> parsed;  // (type, id) -> node
  for (const ElementInstance& inst : graph.instances) {
    std::optional<std::string> id = id_text_of(inst, model, graph.instances);
    if (!id) continue;
    std::pair<std::string, std::string> key{inst.type, *id};
    if (table.predefined().count(key)) continue;  // predefined entries win
    auto [it, inserted] = parsed.emplace(key, inst.node_id);
    if (!inserted) {
      return Error{ErrorKind::DuplicateId,
                   "id '" + *id + "' is already defined for element '" + inst.type + "'",
                   inst.start};
    }
  }

  std::map<std::pair<std::string, std::string>, int> merged;  // predefined pulled into the graph
  auto resolve_one = [&](const std::string& expected, const std::string& id,
                         size_t offset) -> Result<int> {
    for (const std::string& concrete : concrete_subtypes(model, expected)) {
      std::pair<std::string, std::string> key{concrete, id};
      if (auto hit = parsed.find(key); hit != parsed.end()) return hit->second;
      if (auto hit = merged.find(key); hit != merged.end()) return hit->second;
      if (auto hit = table.predefined().find(key); hit != table.predefined().end()) {
        int node = static_cast<int>(graph.instances.size());
        graph.instances.push_back(hit->second);
        graph.instances.back().node_id = node;
        merged.emplace(key, node);
        return node;
      }
    }
    return Error{ErrorKind::UnresolvedReference,
                 "no " + expected + " named '" + id + "' is defined", offset};
  };

  // At most one merge per predefined entry; reserving keeps field pointers
  // stable while resolve_one appends merged targets.
  graph.instances.reserve(graph.instances.size() + table.predefined().size());
  size_t known = graph.instances.size();  // merged targets have no reference members to walk
  for (size_t n = 0; n < known; ++n) {
    const ElementType* elem = model.find(graph.instances[n].type);
    if (!elem) continue;
    for (const MemberSpec& member : elem->members) {
      if (member.reference_kind != ReferenceKind::Reference) continue;
      FieldValue* field = nullptr;
      for (auto& [name, value] : graph.instances[n].fields) {
        if (name == member.field_name) field = &value;
      }
      if (!field) continue;
      auto bind = [&](FieldValue& slot, int item) -> std::optional<Error> {
        if (slot.kind != FieldValue::Kind::Text) return std::nullopt;
        Result<int> target = resolve_one(member.element_type, slot.text, slot.start);
        if (!target.ok()) return target.error();
        slot.kind = FieldValue::Kind::Instance;
        slot.instance = target.value();
        graph.resolved.push_back(ResolvedRef{static_cast<int>(n), member.field_name, item,
                                             target.value()});
        return std::nullopt;
      };
      if (field->kind == FieldValue::Kind::List) {
        for (size_t i = 0; i < field->list.size(); ++i) {
          if (auto err = bind(field->list[i], static_cast<int>(i))) return *err;
        }
      } else if (auto err = bind(*field, -1)) {
        return *err;
      }
    }
  }
  return graph;
}

namespace detail {

class Evaluator {
 public:
  Evaluator(const AbstractSyntaxGraph& graph, const Model& model, const SemanticRegistry& hooks)
      : graph_(graph), model_(model), hooks_(hooks),
        memo_(graph.instances.size()), visiting_(graph.instances.size(), 0) {}

  Result<SemanticValue> eval_node(int node) {
    size_t n = static_cast<size_t>(node);
    if (memo_[n]) return *memo_[n];
    const ElementInstance& inst = graph_.instances[n];
    if (visiting_[n]) {
      return Error{ErrorKind::Eval,
                   "cyclic dependency while evaluating element '" + inst.type + "'", inst.start};
    }
    const SemanticHook* hook = nullptr;
    for (const std::string& type : supertype_chain(model_, inst.type)) {
      if (auto it = hooks_.find(type); it != hooks_.end()) {
        hook = &it->second;
        break;
      }
    }
    if (!hook) {
      return Error{ErrorKind::Eval, "no semantic hook registered for element '" + inst.type + "'",
                   inst.start};
    }
    visiting_[n] = 1;
    SemanticContext ctx{graph_, model_, node, this};
    Result<SemanticValue> result = (*hook)(ctx);
    visiting_[n] = 0;
    if (result.ok()) memo_[n] = result.value();
    return result;
  }

 private:
  const AbstractSyntaxGraph& graph_;
  const Model& model_;
  const SemanticRegistry& hooks_;
  std::vector<std::optional<SemanticValue>> memo_;
  std::vector<char> visiting_;
};

}  // namespace detail

Result<SemanticValue> SemanticContext::eval(const FieldValue& value) {
  switch (value.kind) {
    case FieldValue::Kind::Number: return SemanticValue{value.number};
    case FieldValue::Kind::Boolean: return SemanticValue{value.boolean};
    case FieldValue::Kind::Text: return SemanticValue{value.text};
    case FieldValue::Kind::Instance: return ev->eval_node(value.instance);
    case FieldValue::Kind::List:
      return Error{ErrorKind::Eval, "cannot evaluate a list field as a single value",
                   instance().start};
    case FieldValue::Kind::Absent:
      return Error{ErrorKind::Eval, "cannot evaluate an absent field", instance().start};
  }
  return Error{ErrorKind::Eval, "cannot evaluate field", instance().start};
}

Result<SemanticValue> SemanticContext::eval_field(std::string_view name) {
  const FieldValue* value = field(name);
  if (!value) {
    return Error{ErrorKind::Eval, "element '" + instance().type + "' has no field '" +
                                      std::string(name) + "'",
                 instance().start};
  }
  return eval(*value);
}

std::string to_display(const SemanticValue& value) {
  if (const double* d = std::get_if<double>(&value)) return format_double(*d);
  if (const bool* b = std::get_if<bool>(&value)) return *b ? "true" : "false";
  return std::get<std::string>(value);
}

Result<SemanticValue> apply_semantics(const AbstractSyntaxGraph& graph, const Model& model,
                                      const SemanticRegistry& hooks) {
  if (graph.root < 0) return Error{ErrorKind::Eval, "graph has no root instance"};
  detail::Evaluator ev(graph, model, hooks);
  return ev.eval_node(graph.root);
}

std::string to_json(const AbstractSyntaxGraph& graph) {
  using json = nlohmann::ordered_json;
  json doc;
  doc["root"] = graph.root;
  json nodes = json::object();
  for (const ElementInstance& inst : graph.instances) {
    json entry;
    entry["type"] = inst.type;
    if (inst.predefined) {
      entry["span"] = "predefined";
    } else {
      entry["span"] = json{{"start", inst.start}, {"end", inst.end}};
    }
    json fields = json::object();
    for (const auto& [name, value] : inst.fields) fields[name] = field_json(value);
    entry["fields"] = fields;
    nodes[std::to_string(inst.node_id)] = entry;
  }
  doc["nodes"] = nodes;
  return doc.dump(2) + "\n";
}

std::string to_tree_text(const AbstractSyntaxGraph& graph) {
  std::string out;
  if (graph.root < 0) return out;
  std::vector<char> printed(graph.instances.size(), 0);

  struct Job {
    int indent;
    std::string label;
    const FieldValue* value;  // null for instance jobs
    int node;
  };
  std::vector<Job> stack;
  stack.push_back(Job{0, "", nullptr, graph.root});

  auto push_instance = [&](std::string& line, int indent, int node,
                           std::vector<Job>& pending) {
    const ElementInstance& inst = graph.instances[static_cast<size_t>(node)];
    if (printed[static_cast<size_t>(node)]) {
      line += "<ref #" + std::to_string(node) + ">";
      return;
    }
    printed[static_cast<size_t>(node)] = 1;
    line += inst.type + " #" + std::to_string(node);
    if (inst.predefined) {
      line += " (predefined)";
    } else {
      line += " [" + std::to_string(inst.start) + "," + std::to_string(inst.end) + ")";
    }
    for (const auto& [name, value] : inst.fields) {
      pending.push_back(Job{indent + 1, name + ": ", &value, -1});
    }
  };

  while (!stack.empty()) {
    Job job = std::move(stack.back());
    stack.pop_back();
    std::string line(static_cast<size_t>(job.indent) * 2, ' ');
    line += job.label;
    std::vector<Job> pending;
    if (!job.value) {
      push_instance(line, job.indent, job.node, pending);
    } else {
      switch (job.value->kind) {
        case FieldValue::Kind::Absent: line += "(absent)"; break;
        case FieldValue::Kind::Text: line += escape_text(job.value->text); break;
        case FieldValue::Kind::Number: line += format_double(job.value->number); break;
        case FieldValue::Kind::Boolean: line += job.value->boolean ? "true" : "false"; break;
        case FieldValue::Kind::Instance:
          push_instance(line, job.indent, job.value->instance, pending);
          break;
        case FieldValue::Kind::List: {
          line += "[" + std::to_string(job.value->list.size()) + "]";
          for (const FieldValue& item : job.value->list) {
            pending.push_back(Job{job.indent + 1, "- ", &item, -1});
          }
          break;
        }
      }
    }
    out += line;
    out += '\n';
    for (auto it = pending.rbegin(); it != pending.rend(); ++it) stack.push_back(std::move(*it));
  }
  return out;
}

}  // namespace modelcc
