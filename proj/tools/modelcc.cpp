#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "modelcc/gallery.hpp"
#include "modelcc/model_text.hpp"
#include "modelcc/parser.hpp"
#include "modelcc/pipeline.hpp"

using namespace modelcc;

namespace {

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Usage:
    case ErrorKind::Io: return 1;
    case ErrorKind::Model: return 2;
    case ErrorKind::Lexical:
    case ErrorKind::Syntax:
    case ErrorKind::OverConstrained:
    case ErrorKind::Eval: return 3;
    case ErrorKind::Ambiguity: return 4;
    case ErrorKind::UnresolvedReference:
    case ErrorKind::DuplicateId: return 5;
  }
  return 1;
}

SourcePos line_col(std::string_view text, size_t offset) {
  SourcePos pos;
  for (size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++pos.line;
      pos.column = 1;
    } else {
      ++pos.column;
    }
  }
  return pos;
}

// Diagnostics go to stderr; the offending line is echoed with a caret.
int report(const Error& error, const std::string& source_name, std::string_view text) {
  if (error.offset != kNoOffset && error.offset <= text.size()) {
    SourcePos pos = line_col(text, error.offset);
    std::cerr << source_name << ":" << pos.line << ":" << pos.column
              << ": error: " << error.to_string() << "\n";
    size_t begin = text.rfind('\n', error.offset == 0 ? 0 : error.offset - 1);
    begin = begin == std::string_view::npos ? 0 : begin + 1;
    size_t end = text.find('\n', error.offset);
    end = end == std::string_view::npos ? text.size() : end;
    std::cerr << "  " << text.substr(begin, end - begin) << "\n  "
              << std::string(error.offset - begin, ' ') << "^\n";
  } else {
    std::cerr << source_name << ": error: " << error.to_string() << "\n";
  }
  for (const std::string& detail : error.details) std::cerr << "  " << detail << "\n";
  return exit_code_for(error.kind);
}

struct ModelChoice {
  std::string path;     // --model
  std::string builtin;  // --builtin
};

struct InputChoice {
  std::string inline_text;  // -e
  std::string path;         // positional
  bool has_inline = false;
};

void add_model_options(CLI::App* cmd, ModelChoice& choice) {
  auto* model = cmd->add_option("--model", choice.path, "model file (.mcc)");
  auto* builtin = cmd->add_option("--builtin", choice.builtin, "built-in gallery model");
  model->excludes(builtin);
  builtin->excludes(model);
}

void add_input_options(CLI::App* cmd, InputChoice& choice) {
  cmd->add_option("-e,--input", choice.inline_text, "inline input text");
  cmd->add_option("file", choice.path, "input file (default: standard input)");
}

struct Loaded {
  Model model;
  const GalleryEntry* entry = nullptr;
  std::string source;
};

Result<Loaded> load_model(const ModelChoice& choice) {
  Loaded loaded;
  if (!choice.builtin.empty()) {
    loaded.entry = find_gallery(choice.builtin);
    if (!loaded.entry) {
      std::string names;
      for (const GalleryEntry& e : gallery()) names += (names.empty() ? "" : ", ") + e.name;
      return Error{ErrorKind::Usage,
                   "unknown built-in model '" + choice.builtin + "' (available: " + names + ")"};
    }
    loaded.source = "builtin:" + choice.builtin;
    Result<ModelDocument> doc = read_model(loaded.entry->model_text);
    if (!doc.ok()) return doc.error();
    loaded.model = doc.take().model;
    return loaded;
  }
  if (choice.path.empty()) {
    return Error{ErrorKind::Usage, "one of --model or --builtin is required"};
  }
  std::ifstream in(choice.path);
  if (!in) return Error{ErrorKind::Io, "cannot open model file '" + choice.path + "'"};
  std::ostringstream text;
  text << in.rdbuf();
  loaded.source = choice.path;
  Result<ModelDocument> doc = read_model(text.str());
  if (!doc.ok()) return doc.error();
  loaded.model = doc.take().model;
  return loaded;
}

Result<std::pair<std::string, std::string>> read_input(const InputChoice& choice) {
  if (choice.has_inline) return std::pair{choice.inline_text, std::string("<input>")};
  if (!choice.path.empty()) {
    std::ifstream in(choice.path);
    if (!in) return Error{ErrorKind::Io, "cannot open input file '" + choice.path + "'"};
    std::ostringstream text;
    text << in.rdbuf();
    return std::pair{text.str(), choice.path};
  }
  std::ostringstream text;
  text << std::cin.rdbuf();
  return std::pair{text.str(), std::string("<stdin>")};
}

std::optional<Error> apply_defines(const std::vector<std::string>& defines, SymbolTable& table) {
  for (const std::string& def : defines) {
    size_t eq = def.find('=');
    if (eq == std::string::npos || eq == 0) {
      return Error{ErrorKind::Usage, "--define expects name=value, got '" + def + "'"};
    }
    std::string name = def.substr(0, eq);
    std::string value = def.substr(eq + 1);
    char* done = nullptr;
    double number = std::strtod(value.c_str(), &done);
    if (value.empty() || done != value.c_str() + value.size()) {
      return Error{ErrorKind::Usage, "--define value must be numeric, got '" + value + "'"};
    }
    const ElementType* constant = table.model().find("Constant");
    if (!constant) {
      return Error{ErrorKind::Model, "--define requires the model to declare a Constant element"};
    }
    const MemberSpec* id = id_member(table.model(), *constant);
    if (!id) {
      return Error{ErrorKind::Model, "the Constant element has no id member"};
    }
    if (std::optional<Error> err = table.register_instance(SymbolTable::make_instance(
            "Constant", {{id->field_name, text_value(name)}, {"value", number_value(number)}}))) {
      return err;
    }
  }
  return std::nullopt;
}

void print_grammar(const Model& model, const Grammar& grammar) {
  std::cout << "language: " << model.name << "\n";
  std::cout << "start: <" << model.start << ">\n";
  std::cout << "tokens:\n";
  for (const TokenClassDef& t : grammar.terminals) {
    if (t.fixed_text) {
      std::cout << "  \"" << t.id << "\"\n";
    } else {
      std::cout << "  " << t.id << "  /" << t.pattern << "/\n";
    }
  }
  std::cout << "productions:\n";
  for (const Production& p : grammar.productions) {
    if (p.kind == ProductionKind::AugmentedStart) continue;
    std::cout << "  " << grammar.symbol_name(Symbol::nt(p.lhs)) << " ::=";
    if (p.rhs.empty()) std::cout << " <empty>";
    for (Symbol s : p.rhs) std::cout << ' ' << grammar.symbol_name(s);
    std::cout << "\n";
  }
}

int run_parse(const ModelChoice& mc, const InputChoice& ic, const std::string& format,
              const std::string& eval_name, const std::vector<std::string>& defines, bool all,
              size_t limit, bool want_tokens, bool want_forest) {
  Result<Loaded> loaded = load_model(mc);
  if (!loaded.ok()) return report(loaded.error(), "modelcc", "");
  Result<LanguageParser> built = LanguageParser::create(loaded.value().model);
  if (!built.ok()) return report(built.error(), loaded.value().source, "");
  LanguageParser parser = built.take();

  Result<std::pair<std::string, std::string>> input = read_input(ic);
  if (!input.ok()) return report(input.error(), "modelcc", "");
  const std::string& text = input.value().first;
  const std::string& source = input.value().second;

  SymbolTable table(parser.model());
  if (loaded.value().entry && loaded.value().entry->symbols) {
    if (std::optional<Error> err = loaded.value().entry->symbols(table)) {
      return report(*err, loaded.value().source, "");
    }
  }
  if (std::optional<Error> err = apply_defines(defines, table)) {
    return report(*err, "modelcc", "");
  }

  if (want_tokens) {
    Result<TokenGraph> tokens = parser.tokenize(text);
    if (!tokens.ok()) return report(tokens.error(), source, text);
    std::cout << dump_tokens(tokens.value(), parser.grammar().terminals);
  }
  if (want_forest || all) {
    Result<ParseForest> forest = parser.parse_forest(text);
    if (!forest.ok()) return report(forest.error(), source, text);
    if (want_forest) std::cout << dump_forest(forest.value(), parser.grammar());
    if (all) {
      TreeEnumeration trees = enumerate_trees(forest.value(), limit);
      std::cout << "interpretations: " << trees.total << (trees.more ? "+" : "") << "\n";
      for (size_t i = 0; i < trees.trees.size(); ++i) {
        std::cout << "--- " << (i + 1) << "\n"
                  << format_tree(trees.trees[i], parser.grammar(), text) << "\n";
      }
      return 0;
    }
  }

  Result<AbstractSyntaxGraph> graph = parser.parse(text, &table);
  if (!graph.ok()) return report(graph.error(), source, text);

  if (!eval_name.empty()) {
    const SemanticRegistry* hooks = nullptr;
    if (loaded.value().entry && eval_name == "eval" &&
        !loaded.value().entry->semantics.empty()) {
      hooks = &loaded.value().entry->semantics;
    }
    if (!hooks) {
      return report(Error{ErrorKind::Usage, "no evaluation hook set named '" + eval_name + "'"},
                    "modelcc", "");
    }
    Result<SemanticValue> value = apply_semantics(graph.value(), parser.model(), *hooks);
    if (!value.ok()) return report(value.error(), source, text);
    std::cout << to_display(value.value()) << "\n";
    return 0;
  }

  if (format == "tree-text") {
    std::cout << to_tree_text(graph.value());
  } else {
    std::cout << to_json(graph.value());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"model-driven parser generator"};
  app.require_subcommand(1);

  ModelChoice parse_model, grammar_model, tokens_model, validate_model;
  InputChoice parse_input, tokens_input;
  std::string format = "asg-json";
  std::string eval_name;
  std::vector<std::string> defines;
  bool all = false;
  size_t limit = 10;
  bool dump_tokens = false, dump_forest = false;
  std::string gallery_name;

  CLI::App* parse = app.add_subcommand("parse", "parse input into an abstract syntax graph");
  add_model_options(parse, parse_model);
  add_input_options(parse, parse_input);
  parse->add_option("--format", format, "asg-json or tree-text")
      ->check(CLI::IsMember({"asg-json", "tree-text"}));
  parse->add_option("--eval", eval_name, "evaluate with the named hook set and print the value");
  parse->add_option("--define", defines, "pre-register a Constant, name=value");
  parse->add_flag("--all", all, "enumerate interpretations instead of requiring uniqueness");
  parse->add_option("--limit", limit, "max interpretations printed with --all");
  parse->add_flag("--dump-tokens", dump_tokens, "print the token graph first");
  parse->add_flag("--dump-forest", dump_forest, "print the parse forest first");

  CLI::App* grammar = app.add_subcommand("grammar", "print the grammar derived from the model");
  add_model_options(grammar, grammar_model);

  CLI::App* tokens = app.add_subcommand("tokens", "print the token graph for an input");
  add_model_options(tokens, tokens_model);
  add_input_options(tokens, tokens_input);

  CLI::App* gallery_cmd = app.add_subcommand("gallery", "run the built-in model galleries");
  gallery_cmd->add_option("name", gallery_name, "run a single entry");

  CLI::App* validate = app.add_subcommand("validate", "check a model file");
  add_model_options(validate, validate_model);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      return app.exit(e);
    }
    std::cerr << "modelcc: " << e.what() << "\n";
    return 1;
  }

  parse_input.has_inline = parse->count("-e") > 0;
  tokens_input.has_inline = tokens->count("-e") > 0;

  if (parse->parsed()) {
    return run_parse(parse_model, parse_input, format, eval_name, defines, all, limit,
                     dump_tokens, dump_forest);
  }

  if (grammar->parsed()) {
    Result<Loaded> loaded = load_model(grammar_model);
    if (!loaded.ok()) return report(loaded.error(), "modelcc", "");
    Result<Grammar> derived = generate_grammar(loaded.value().model);
    if (!derived.ok()) return report(derived.error(), loaded.value().source, "");
    print_grammar(loaded.value().model, derived.value());
    return 0;
  }

  if (tokens->parsed()) {
    Result<Loaded> loaded = load_model(tokens_model);
    if (!loaded.ok()) return report(loaded.error(), "modelcc", "");
    Result<LanguageParser> built = LanguageParser::create(loaded.value().model);
    if (!built.ok()) return report(built.error(), loaded.value().source, "");
    Result<std::pair<std::string, std::string>> input = read_input(tokens_input);
    if (!input.ok()) return report(input.error(), "modelcc", "");
    Result<TokenGraph> graph = built.value().tokenize(input.value().first);
    if (!graph.ok()) return report(graph.error(), input.value().second, input.value().first);
    std::cout << dump_tokens(graph.value(), built.value().grammar().terminals);
    return 0;
  }

  if (gallery_cmd->parsed()) {
    std::vector<const GalleryEntry*> entries;
    if (!gallery_name.empty()) {
      const GalleryEntry* entry = find_gallery(gallery_name);
      if (!entry) {
        return report(Error{ErrorKind::Usage, "unknown gallery entry '" + gallery_name + "'"},
                      "modelcc", "");
      }
      entries.push_back(entry);
    } else {
      for (const GalleryEntry& entry : gallery()) entries.push_back(&entry);
    }
    bool ok = true;
    for (const GalleryEntry* entry : entries) {
      GalleryReport r = run_gallery(*entry);
      std::cout << format_report(r);
      ok = ok && r.all_pass();
    }
    return ok ? 0 : 1;
  }

  // validate
  Result<Loaded> loaded = load_model(validate_model);
  if (!loaded.ok()) return report(loaded.error(), "modelcc", "");
  const Model& model = loaded.value().model;
  Result<Grammar> derived = generate_grammar(model);
  if (!derived.ok()) return report(derived.error(), loaded.value().source, "");
  std::cout << "model '" << model.name << "': " << model.elements.size()
            << " elements, start '" << model.start << "', " << derived.value().productions.size()
            << " productions\n";
  return 0;
}
