#include "modelcc/gallery.hpp"

#include <utility>

#include "modelcc/gallery_data.hpp"
#include "modelcc/model_text.hpp"
#include "modelcc/pipeline.hpp"

namespace modelcc {

namespace {

Result<SemanticValue> eval_number_field(SemanticContext& ctx, const char* name) {
  Result<SemanticValue> v = ctx.eval_field(name);
  if (!v.ok()) return v;
  if (!std::holds_alternative<double>(v.value())) {
    return Error{ErrorKind::Eval, std::string("field '") + name + "' is not numeric",
                 ctx.instance().start};
  }
  return v;
}

// Shared by the arith and constants entries.
SemanticRegistry arith_semantics() {
  SemanticRegistry r;
  r["Literal"] = [](SemanticContext& ctx) { return ctx.eval_field("value"); };
  r["ExpressionGroup"] = [](SemanticContext& ctx) { return ctx.eval_field("expression"); };
  r["Constant"] = [](SemanticContext& ctx) { return ctx.eval_field("value"); };
  r["ConstantRef"] = [](SemanticContext& ctx) { return ctx.eval_field("target"); };
  r["BinaryExpression"] = [](SemanticContext& ctx) -> Result<SemanticValue> {
    Result<SemanticValue> left = eval_number_field(ctx, "left");
    if (!left.ok()) return left;
    Result<SemanticValue> right = eval_number_field(ctx, "right");
    if (!right.ok()) return right;
    const FieldValue* op = ctx.field("operator");
    if (!op || op->kind != FieldValue::Kind::Instance) {
      return Error{ErrorKind::Eval, "binary expression is missing its operator",
                   ctx.instance().start};
    }
    double a = std::get<double>(left.value());
    double b = std::get<double>(right.value());
    const std::string& kind = ctx.graph.instances[op->instance].type;
    if (kind == "AdditionOperator") return SemanticValue{a + b};
    if (kind == "SubtractionOperator") return SemanticValue{a - b};
    if (kind == "MultiplicationOperator") return SemanticValue{a * b};
    return SemanticValue{a / b};
  };
  return r;
}

GalleryCase value_case(std::string input, std::string expected) {
  return GalleryCase{std::move(input), GalleryCase::Kind::Value, std::move(expected)};
}

GalleryCase unique_case(std::string input) {
  return GalleryCase{std::move(input), GalleryCase::Kind::Unique};
}

GalleryCase tree_case(std::string input, std::string expected) {
  return GalleryCase{std::move(input), GalleryCase::Kind::Tree, std::move(expected)};
}

GalleryCase reject_case(std::string input, ErrorKind error) {
  return GalleryCase{std::move(input), GalleryCase::Kind::Reject, "", error};
}

std::vector<GalleryEntry> build_gallery() {
  std::vector<GalleryEntry> entries;

  {
    GalleryEntry e;
    e.name = "arith";
    e.description = "infix arithmetic with precedence, associativity, and grouping";
    e.model_text = gallery_data::k_arith;
    e.semantics = arith_semantics();
    e.corpus = {
        value_case("10/(2+3)*0.5+1", "2"),
        value_case("1+2*3", "7"),
        value_case("(1+2)*3", "9"),
        value_case("2-3-4", "-5"),
        value_case("8/4/2", "1"),
        reject_case("1+", ErrorKind::Syntax),
        reject_case("1$", ErrorKind::Lexical),
    };
    entries.push_back(std::move(e));
  }

  {
    GalleryEntry e;
    e.name = "json";
    e.description = "JSON documents: objects, arrays, strings, numbers, booleans, null";
    e.model_text = gallery_data::k_json;
    e.corpus = {
        tree_case("{}",
                  "JSONDocument #1 [0,2)\n"
                  "  value: JSONObject #0 [0,2)\n"
                  "    pairs: [0]\n"),
        unique_case("[1, 2, 3]"),
        unique_case("{\"a\": [true, null], \"b\": {\"c\": -1.5e3}}"),
        unique_case("\"escape\\n\\u0041\""),
        reject_case("{", ErrorKind::Syntax),
        reject_case("{,}", ErrorKind::Syntax),
        reject_case("{\"a\" 1}", ErrorKind::Syntax),
    };
    entries.push_back(std::move(e));
  }

  {
    GalleryEntry e;
    e.name = "ifelse_eager";
    e.description = "dangling else bound to the nearest if (eager composition)";
    e.model_text = gallery_data::k_ifelse_eager;
    e.corpus = {
        tree_case("if c1 then if c2 then s1 else s2",
                  "Conditional #5 [0,32)\n"
                  "  condition: Name #4 [3,5)\n"
                  "    value: \"c1\"\n"
                  "  then: Conditional #3 [11,32)\n"
                  "    condition: Name #0 [14,16)\n"
                  "      value: \"c2\"\n"
                  "    then: Name #1 [22,24)\n"
                  "      value: \"s1\"\n"
                  "    else: Name #2 [30,32)\n"
                  "      value: \"s2\"\n"
                  "  else: (absent)\n"),
        unique_case("if a then b"),
        unique_case("if a then b else c"),
    };
    entries.push_back(std::move(e));
  }

  {
    GalleryEntry e;
    e.name = "ifelse_lazy";
    e.description = "dangling else bound to the outermost if (lazy composition)";
    e.model_text = gallery_data::k_ifelse_lazy;
    e.corpus = {
        tree_case("if c1 then if c2 then s1 else s2",
                  "Conditional #5 [0,32)\n"
                  "  condition: Name #3 [3,5)\n"
                  "    value: \"c1\"\n"
                  "  then: Conditional #2 [11,24)\n"
                  "    condition: Name #0 [14,16)\n"
                  "      value: \"c2\"\n"
                  "    then: Name #1 [22,24)\n"
                  "      value: \"s1\"\n"
                  "    else: (absent)\n"
                  "  else: Name #4 [30,32)\n"
                  "    value: \"s2\"\n"),
        unique_case("if a then b"),
        unique_case("if a then b else c"),
    };
    entries.push_back(std::move(e));
  }

  {
    GalleryEntry e;
    e.name = "awk";
    e.description = "pattern/action rule lists; eager composition joins adjacent pairs";
    e.model_text = gallery_data::k_awk;
    e.corpus = {
        unique_case("/x/ { print }"),
        unique_case("/x/"),
        unique_case("{ print }"),
        unique_case("/a/ /b/ { x y } { z }"),
        reject_case("", ErrorKind::Syntax),
    };
    entries.push_back(std::move(e));
  }

  {
    GalleryEntry e;
    e.name = "sexpr";
    e.description = "LISP-style S-expressions";
    e.model_text = gallery_data::k_sexpr;
    e.corpus = {
        tree_case("(a (b c) d)",
                  "SList #5 [0,11)\n"
                  "  elements: [3]\n"
                  "    - Atom #3 [1,2)\n"
                  "      value: \"a\"\n"
                  "    - SList #2 [3,8)\n"
                  "      elements: [2]\n"
                  "        - Atom #0 [4,5)\n"
                  "          value: \"b\"\n"
                  "        - Atom #1 [6,7)\n"
                  "          value: \"c\"\n"
                  "    - Atom #4 [9,10)\n"
                  "      value: \"d\"\n"),
        unique_case("()"),
        unique_case("atom"),
        reject_case("(a", ErrorKind::Syntax),
    };
    entries.push_back(std::move(e));
  }

  {
    GalleryEntry e;
    e.name = "constants";
    e.description = "arithmetic extended with predefined, referenceable constants";
    e.model_text = gallery_data::k_constants;
    e.semantics = arith_semantics();
    e.symbols = [](SymbolTable& table) {
      return table.register_instance(SymbolTable::make_instance(
          "Constant", {{"name", text_value("pi")}, {"value", number_value(3.1415927)}}));
    };
    e.corpus = {
        value_case("pi", "3.1415927"),
        value_case("2*pi", "6.2831854"),
        value_case("pi*pi", "9.86960469269329"),
        reject_case("2*e", ErrorKind::UnresolvedReference),
    };
    entries.push_back(std::move(e));
  }

  {
    GalleryEntry e;
    e.name = "graph";
    e.description = "node declarations with cyclic by-name references";
    e.model_text = gallery_data::k_graph;
    e.corpus = {
        unique_case("node a -> b; node b -> a;"),
        unique_case("node solo;"),
        reject_case("node a -> zz;", ErrorKind::UnresolvedReference),
        reject_case("node a; node a;", ErrorKind::DuplicateId),
    };
    entries.push_back(std::move(e));
  }

  {
    GalleryEntry e;
    e.name = "prolog";
    e.description = "facts and rules over atoms and variables";
    e.model_text = gallery_data::k_prolog;
    e.corpus = {
        unique_case("parent(tom, bob)."),
        unique_case("grandparent(X, Z) :- parent(X, Y), parent(Y, Z)."),
        unique_case("happy."),
        reject_case("parent(tom bob).", ErrorKind::Syntax),
    };
    entries.push_back(std::move(e));
  }

  return entries;
}

}  // namespace

bool GalleryReport::all_pass() const {
  for (const Item& item : items)
    if (!item.pass) return false;
  return true;
}

const std::vector<GalleryEntry>& gallery() {
  static const std::vector<GalleryEntry> entries = build_gallery();
  return entries;
}

const GalleryEntry* find_gallery(std::string_view name) {
  for (const GalleryEntry& entry : gallery())
    if (entry.name == name) return &entry;
  return nullptr;
}

GalleryReport run_gallery(const GalleryEntry& entry) {
  GalleryReport report;
  report.entry = entry.name;
  auto fail = [&](const std::string& input, std::string detail) {
    report.items.push_back({input, false, std::move(detail)});
  };

  Result<ModelDocument> doc = read_model(entry.model_text);
  if (!doc.ok()) {
    fail("<model>", doc.error().to_string());
    return report;
  }
  Result<LanguageParser> built = LanguageParser::create(doc.take().model);
  if (!built.ok()) {
    fail("<model>", built.error().to_string());
    return report;
  }
  LanguageParser parser = built.take();
  SymbolTable table(parser.model());
  if (entry.symbols) {
    if (std::optional<Error> err = entry.symbols(table)) {
      fail("<symbols>", err->to_string());
      return report;
    }
  }

  for (const GalleryCase& test : entry.corpus) {
    switch (test.kind) {
      case GalleryCase::Kind::Value: {
        Result<AbstractSyntaxGraph> graph = parser.parse(test.input, &table);
        if (!graph.ok()) {
          fail(test.input, graph.error().to_string());
          break;
        }
        Result<SemanticValue> value =
            apply_semantics(graph.value(), parser.model(), entry.semantics);
        if (!value.ok()) {
          fail(test.input, value.error().to_string());
        } else if (std::string shown = to_display(value.value()); shown != test.expected) {
          fail(test.input, "expected " + test.expected + ", got " + shown);
        } else {
          report.items.push_back({test.input, true, shown});
        }
        break;
      }
      case GalleryCase::Kind::Unique: {
        Result<ParseTree> tree = parser.parse_unique(test.input);
        if (!tree.ok()) {
          fail(test.input, tree.error().to_string());
        } else {
          report.items.push_back({test.input, true, "unique parse"});
        }
        break;
      }
      case GalleryCase::Kind::Tree: {
        Result<AbstractSyntaxGraph> graph = parser.parse(test.input, &table);
        if (!graph.ok()) {
          fail(test.input, graph.error().to_string());
          break;
        }
        std::string shown = to_tree_text(graph.value());
        if (shown != test.expected) {
          fail(test.input, "expected:\n" + test.expected + "got:\n" + shown);
        } else {
          report.items.push_back({test.input, true, "instances match"});
        }
        break;
      }
      case GalleryCase::Kind::Reject: {
        Result<AbstractSyntaxGraph> graph = parser.parse(test.input, &table);
        if (graph.ok()) {
          fail(test.input, "expected rejection, but the input parsed");
        } else if (graph.error().kind != test.error) {
          fail(test.input, "wrong error: " + graph.error().to_string());
        } else {
          report.items.push_back({test.input, true, graph.error().to_string()});
        }
        break;
      }
    }
  }
  return report;
}

std::string format_report(const GalleryReport& report) {
  size_t passed = 0;
  for (const GalleryReport::Item& item : report.items) passed += item.pass;
  std::string out = "gallery '" + report.entry + "': " + std::to_string(passed) + "/" +
                    std::to_string(report.items.size()) + " passed\n";
  for (const GalleryReport::Item& item : report.items) {
    out += item.pass ? "  ok    " : "  FAIL  ";
    out += item.input.empty() ? "<empty>" : item.input;
    if (!item.pass || !item.detail.empty()) out += "  -- " + item.detail;
    out += '\n';
  }
  return out;
}

}  // namespace modelcc
