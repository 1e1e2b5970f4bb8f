#include "modelcc/model_text.hpp"

#include <cctype>
#include <charconv>

namespace modelcc {

namespace {

struct Tok {
  enum Kind { Ident, Str, Num, Punct, End } kind = End;
  std::string text;  // identifier text, unescaped string body, or digits
  char punct = 0;
  int line = 1, col = 1;
  size_t offset = 0, length = 0;
};

std::string describe(const Tok& t) {
  switch (t.kind) {
    case Tok::Ident: return "'" + t.text + "'";
    case Tok::Str: return "string";
    case Tok::Num: return "number";
    case Tok::Punct: return std::string("'") + t.punct + "'";
    case Tok::End: return "end of input";
  }
  return "?";
}

class MccReader {
 public:
  explicit MccReader(const std::string& text) : text_(text) {}

  Result<ModelDocument> run() {
    if (auto err = lex()) return *err;
    parse_file();
    if (error_) return *error_;
    if (!explicit_start_ && !doc_.model.elements.empty())
      doc_.model.start = doc_.model.elements.front().name;
    ValidationReport report = validate_model(doc_.model);
    if (!report.empty()) {
      std::string msg;
      size_t first_offset = kNoOffset;
      for (const ValidationIssue& i : report.issues) {
        if (!msg.empty()) msg += '\n';
        auto span = doc_.source_spans.find(i.element);
        if (span != doc_.source_spans.end()) {
          msg += std::to_string(span->second.begin.line) + ":" +
                 std::to_string(span->second.begin.column) + ": ";
          if (first_offset == kNoOffset) first_offset = element_offsets_[i.element];
        }
        msg += (i.element.empty() ? "model" : "element '" + i.element + "'") + ": " +
               i.message + " (" + i.constraint + ")";
      }
      return Error{ErrorKind::Model, msg, first_offset};
    }
    doc_.source_text = text_;
    return std::move(doc_);
  }

 private:
  const std::string& text_;
  std::vector<Tok> toks_;
  size_t pos_ = 0;
  std::optional<Error> error_;
  ModelDocument doc_;
  bool explicit_start_ = false;
  std::map<std::string, size_t> element_offsets_;

  std::optional<Error> lex() {
    size_t i = 0;
    int line = 1, col = 1;
    auto advance = [&](size_t n) {
      for (size_t k = 0; k < n; ++k) {
        if (text_[i + k] == '\n') {
          ++line;
          col = 1;
        } else {
          ++col;
        }
      }
      i += n;
    };
    while (i < text_.size()) {
      char c = text_[i];
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        advance(1);
        continue;
      }
      if (c == '/' && i + 1 < text_.size() && text_[i + 1] == '/') {
        while (i < text_.size() && text_[i] != '\n') advance(1);
        continue;
      }
      Tok t;
      t.line = line;
      t.col = col;
      t.offset = i;
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        size_t j = i;
        while (j < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[j])) ||
                                    text_[j] == '_'))
          ++j;
        t.kind = Tok::Ident;
        t.text = text_.substr(i, j - i);
        t.length = j - i;
        advance(j - i);
      } else if (std::isdigit(static_cast<unsigned char>(c))) {
        size_t j = i;
        while (j < text_.size() && std::isdigit(static_cast<unsigned char>(text_[j]))) ++j;
        t.kind = Tok::Num;
        t.text = text_.substr(i, j - i);
        t.length = j - i;
        advance(j - i);
      } else if (c == '"') {
        size_t j = i + 1;
        std::string body;
        bool closed = false;
        while (j < text_.size()) {
          char d = text_[j];
          if (d == '\n') break;
          if (d == '"') {
            closed = true;
            ++j;
            break;
          }
          if (d == '\\' && j + 1 < text_.size()) {
            char e = text_[j + 1];
            if (e == '"' || e == '\\') {
              body += e;  // quoting escape
            } else {
              body += d;  // regex escape passes through verbatim
              body += e;
            }
            j += 2;
            continue;
          }
          body += d;
          ++j;
        }
        if (!closed)
          return Error{ErrorKind::Model,
                       std::to_string(line) + ":" + std::to_string(col) +
                           ": unterminated string",
                       i};
        t.kind = Tok::Str;
        t.text = std::move(body);
        t.length = j - i;
        advance(j - i);
      } else if (std::string_view("@(){}:;,*-").find(c) != std::string_view::npos) {
        t.kind = Tok::Punct;
        t.punct = c;
        t.length = 1;
        advance(1);
      } else {
        return Error{ErrorKind::Model,
                     std::to_string(line) + ":" + std::to_string(col) +
                         ": unexpected character '" + c + "'",
                     i};
      }
      toks_.push_back(std::move(t));
    }
    Tok end;
    end.kind = Tok::End;
    end.line = line;
    end.col = col;
    end.offset = i;
    toks_.push_back(end);
    return std::nullopt;
  }

  const Tok& cur() const { return toks_[pos_]; }
  void bump() {
    if (pos_ + 1 < toks_.size()) ++pos_;
  }

  void fail_at(const Tok& t, const std::string& msg) {
    if (!error_)
      error_ = Error{ErrorKind::Model,
                     std::to_string(t.line) + ":" + std::to_string(t.col) + ": " + msg,
                     t.offset};
  }

  bool expect_punct(char c, const char* what) {
    if (error_) return false;
    if (cur().kind == Tok::Punct && cur().punct == c) {
      bump();
      return true;
    }
    fail_at(cur(), std::string("expected '") + c + "' " + what + ", found " + describe(cur()));
    return false;
  }

  std::string expect_ident(const char* what) {
    if (error_) return "";
    if (cur().kind == Tok::Ident) {
      std::string s = cur().text;
      bump();
      return s;
    }
    fail_at(cur(), std::string("expected ") + what + ", found " + describe(cur()));
    return "";
  }

  bool at_punct(char c) const { return cur().kind == Tok::Punct && cur().punct == c; }

  std::string expect_string_arg(const std::string& ann) {
    if (!expect_punct('(', ("after @" + ann).c_str())) return "";
    if (cur().kind != Tok::Str) {
      fail_at(cur(), "expected string argument for @" + ann);
      return "";
    }
    std::string s = cur().text;
    bump();
    expect_punct(')', ("after @" + ann + " argument").c_str());
    return s;
  }

  int expect_int_arg(const std::string& ann) {
    if (!expect_punct('(', ("after @" + ann).c_str())) return 0;
    bool neg = false;
    if (at_punct('-')) {
      neg = true;
      bump();
    }
    if (cur().kind != Tok::Num) {
      fail_at(cur(), "expected integer argument for @" + ann);
      return 0;
    }
    int v = 0;
    std::from_chars(cur().text.data(), cur().text.data() + cur().text.size(), v);
    bump();
    expect_punct(')', ("after @" + ann + " argument").c_str());
    return neg ? -v : v;
  }

  // annotation = '@' ident [args]; returns name, leaves args to the caller
  // via the shared helpers above.
  std::string annotation_name() {
    bump();  // '@'
    return expect_ident("annotation name");
  }

  SourcePos after(const Tok& t) const {
    return SourcePos{t.line, t.col + static_cast<int>(t.length)};
  }

  void parse_file() {
    const Tok& head = cur();
    if (!(head.kind == Tok::Ident && head.text == "language")) {
      fail_at(head, "expected 'language' header");
      return;
    }
    bump();
    doc_.model.name = expect_ident("language name");
    while (!error_ && at_punct('@')) {
      std::string ann = annotation_name();
      if (ann == "skip") {
        if (doc_.model.skip) {
          fail_at(cur(), "conflicting constraint: @skip set twice");
          return;
        }
        doc_.model.skip = expect_string_arg(ann);
      } else {
        fail_at(cur(), "unknown language annotation '@" + ann + "'");
      }
    }
    expect_punct(';', "after language header");
    while (!error_ && cur().kind != Tok::End) parse_block();
  }

  void parse_block() {
    const Tok& first = cur();
    ElementKind kind = ElementKind::Composite;
    if (first.kind == Tok::Ident && first.text == "abstract") {
      kind = ElementKind::Selection;
      bump();
    } else if (first.kind == Tok::Ident && first.text == "basic") {
      kind = ElementKind::Basic;
      bump();
    }
    if (!(cur().kind == Tok::Ident && cur().text == "element")) {
      fail_at(cur(), "expected 'element', found " + describe(cur()));
      return;
    }
    bump();
    ElementType elem;
    elem.kind = kind;
    elem.name = expect_ident("element name");
    if (error_) return;
    if (at_punct(':')) {
      bump();
      elem.supertype = expect_ident("supertype name");
    }
    parse_element_annotations(elem);
    if (error_) return;

    if (kind == ElementKind::Composite) {
      if (!expect_punct('{', "to open the member list")) return;
      while (!error_ && !at_punct('}')) {
        if (cur().kind == Tok::End) {
          fail_at(cur(), "expected '}' to close element '" + elem.name + "'");
          return;
        }
        parse_member(elem);
      }
      const Tok& close = cur();
      expect_punct('}', "to close the member list");
      record_element(elem, first, close);
    } else {
      const Tok& semi = cur();
      expect_punct(';', "after element declaration");
      record_element(elem, first, semi);
    }
  }

  void record_element(ElementType& elem, const Tok& first, const Tok& last) {
    if (error_) return;
    doc_.source_spans[elem.name] = SourceRange{SourcePos{first.line, first.col}, after(last)};
    element_offsets_[elem.name] = first.offset;
    doc_.model.elements.push_back(std::move(elem));
  }

  void parse_element_annotations(ElementType& elem) {
    bool saw_pattern = false, saw_value = false, saw_assoc = false, saw_prio = false,
         saw_comp = false, saw_free = false, saw_hook = false, saw_start = false;
    while (!error_ && at_punct('@')) {
      const Tok& at = cur();
      std::string ann = annotation_name();
      if (error_) return;
      auto once = [&](bool& flag) {
        if (flag) fail_at(at, "conflicting constraint: @" + ann + " set twice on '" + elem.name + "'");
        flag = true;
      };
      if (ann == "pattern") {
        if (elem.kind != ElementKind::Basic) {
          fail_at(at, "@pattern is only valid on basic elements");
          return;
        }
        once(saw_pattern);
        if (!elem.pattern) elem.pattern = PatternSpec{};
        elem.pattern->regexp = expect_string_arg(ann);
      } else if (ann == "value") {
        if (elem.kind != ElementKind::Basic) {
          fail_at(at, "@value is only valid on basic elements");
          return;
        }
        once(saw_value);
        if (!expect_punct('(', "after @value")) return;
        std::string v = expect_ident("value type (text|number|boolean)");
        ValueType vt;
        if (v == "text") vt = ValueType::Text;
        else if (v == "number") vt = ValueType::Number;
        else if (v == "boolean") vt = ValueType::Boolean;
        else {
          fail_at(at, "unknown value type '" + v + "'");
          return;
        }
        expect_punct(')', "after @value argument");
        if (!elem.pattern) elem.pattern = PatternSpec{};
        elem.pattern->value_type = vt;
        MemberSpec vm;
        vm.field_name = "value";
        vm.value_field = true;
        elem.members.push_back(std::move(vm));
      } else if (ann == "prefix") {
        elem.delimiters.prefixes.push_back(expect_string_arg(ann));
      } else if (ann == "suffix") {
        elem.delimiters.suffixes.push_back(expect_string_arg(ann));
      } else if (ann == "associativity") {
        once(saw_assoc);
        if (!expect_punct('(', "after @associativity")) return;
        std::string v = expect_ident("associativity (ltr|rtl|non)");
        if (v == "ltr") elem.evaluation.associativity = Associativity::LeftToRight;
        else if (v == "rtl") elem.evaluation.associativity = Associativity::RightToLeft;
        else if (v == "non") elem.evaluation.associativity = Associativity::NonAssociative;
        else {
          fail_at(at, "unknown associativity '" + v + "'");
          return;
        }
        expect_punct(')', "after @associativity argument");
      } else if (ann == "priority") {
        once(saw_prio);
        elem.evaluation.priority = expect_int_arg(ann);
      } else if (ann == "composition") {
        once(saw_comp);
        if (!expect_punct('(', "after @composition")) return;
        std::string v = expect_ident("composition (eager|lazy)");
        if (v == "eager") elem.evaluation.composition = Composition::Eager;
        else if (v == "lazy") elem.evaluation.composition = Composition::Lazy;
        else {
          fail_at(at, "unknown composition '" + v + "'");
          return;
        }
        expect_punct(')', "after @composition argument");
      } else if (ann == "freeorder") {
        once(saw_free);
        elem.evaluation.free_order = true;
      } else if (ann == "constraint") {
        once(saw_hook);
        elem.custom = expect_string_arg(ann);
      } else if (ann == "start") {
        once(saw_start);
        if (explicit_start_) {
          fail_at(at, "@start declared on more than one element");
          return;
        }
        explicit_start_ = true;
        doc_.model.start = elem.name;
      } else {
        fail_at(at, "unknown element annotation '@" + ann + "'");
        return;
      }
    }
  }

  void parse_member(ElementType& elem) {
    const Tok& first = cur();
    MemberSpec m;
    m.field_name = expect_ident("member name");
    if (!expect_punct(':', "after member name")) return;
    m.element_type = expect_ident("member type");
    bool saw_opt = false, saw_mult = false, saw_pos = false, saw_ref = false;
    while (!error_ && at_punct('@')) {
      const Tok& at = cur();
      std::string ann = annotation_name();
      if (error_) return;
      auto once = [&](bool& flag) {
        if (flag)
          fail_at(at, "conflicting constraint: @" + ann + " set twice on member '" +
                          m.field_name + "'");
        flag = true;
      };
      if (ann == "optional") {
        once(saw_opt);
        m.optional = true;
      } else if (ann == "multiplicity") {
        once(saw_mult);
        if (!expect_punct('(', "after @multiplicity")) return;
        if (cur().kind != Tok::Num) {
          fail_at(cur(), "expected minimum multiplicity");
          return;
        }
        uint32_t lo = 0;
        std::from_chars(cur().text.data(), cur().text.data() + cur().text.size(), lo);
        bump();
        if (!expect_punct(',', "between multiplicity bounds")) return;
        uint32_t hi = Multiplicity::kUnbounded;
        if (at_punct('*')) {
          bump();
        } else if (cur().kind == Tok::Num) {
          std::from_chars(cur().text.data(), cur().text.data() + cur().text.size(), hi);
          bump();
        } else {
          fail_at(cur(), "expected maximum multiplicity or '*'");
          return;
        }
        expect_punct(')', "after @multiplicity bounds");
        m.multiplicity = Multiplicity{lo, hi};
      } else if (ann == "separator") {
        m.separators.push_back(expect_string_arg(ann));
      } else if (ann == "prefix") {
        m.prefixes.push_back(expect_string_arg(ann));
      } else if (ann == "suffix") {
        m.suffixes.push_back(expect_string_arg(ann));
      } else if (ann == "position") {
        once(saw_pos);
        int v = expect_int_arg(ann);
        if (v < 0) {
          fail_at(at, "@position must be nonnegative");
          return;
        }
        m.position = static_cast<uint32_t>(v);
      } else if (ann == "id") {
        once(saw_ref);
        m.reference_kind = ReferenceKind::Id;
        if (elem.reference.id_field) {
          fail_at(at, "more than one member marked @id on '" + elem.name + "'");
          return;
        }
        elem.reference.id_field = m.field_name;
      } else if (ann == "reference") {
        once(saw_ref);
        m.reference_kind = ReferenceKind::Reference;
      } else {
        fail_at(at, "unknown member annotation '@" + ann + "'");
        return;
      }
    }
    const Tok& semi = cur();
    if (!expect_punct(';', "after member declaration")) return;
    doc_.source_spans[elem.name + "." + m.field_name] =
        SourceRange{SourcePos{first.line, first.col}, after(semi)};
    elem.members.push_back(std::move(m));
  }
};

std::string escape_mcc(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

void append_quoted(std::string& out, const std::string& s) {
  out += '"';
  out += escape_mcc(s);
  out += '"';
}

void append_element_annotations(std::string& out, const Model& model, const ElementType& e) {
  if (model.start == e.name) out += " @start";
  if (e.kind == ElementKind::Basic && e.pattern) {
    out += " @pattern(";
    append_quoted(out, e.pattern->regexp);
    out += ")";
    if (e.pattern->value_type != ValueType::None) {
      out += " @value(";
      out += to_string(e.pattern->value_type);
      out += ")";
    }
  }
  for (const std::string& p : e.delimiters.prefixes) {
    out += " @prefix(";
    append_quoted(out, p);
    out += ")";
  }
  for (const std::string& p : e.delimiters.suffixes) {
    out += " @suffix(";
    append_quoted(out, p);
    out += ")";
  }
  if (e.evaluation.associativity != Associativity::Unspecified) {
    out += " @associativity(";
    out += to_string(e.evaluation.associativity);
    out += ")";
  }
  if (e.evaluation.priority) {
    out += " @priority(" + std::to_string(*e.evaluation.priority) + ")";
  }
  if (e.evaluation.composition != Composition::Unspecified) {
    out += " @composition(";
    out += to_string(e.evaluation.composition);
    out += ")";
  }
  if (e.evaluation.free_order) out += " @freeorder";
  if (e.custom) {
    out += " @constraint(";
    append_quoted(out, *e.custom);
    out += ")";
  }
}

void append_member(std::string& out, const MemberSpec& m) {
  out += "  " + m.field_name + " : " + m.element_type;
  if (m.optional) out += " @optional";
  if (!(m.multiplicity == Multiplicity{1, 1})) {
    out += " @multiplicity(" + std::to_string(m.multiplicity.min) + ",";
    out += m.multiplicity.bounded() ? std::to_string(m.multiplicity.max) : std::string("*");
    out += ")";
  }
  for (const std::string& s : m.separators) {
    out += " @separator(";
    append_quoted(out, s);
    out += ")";
  }
  for (const std::string& s : m.prefixes) {
    out += " @prefix(";
    append_quoted(out, s);
    out += ")";
  }
  for (const std::string& s : m.suffixes) {
    out += " @suffix(";
    append_quoted(out, s);
    out += ")";
  }
  if (m.position) out += " @position(" + std::to_string(*m.position) + ")";
  if (m.reference_kind == ReferenceKind::Id) out += " @id";
  if (m.reference_kind == ReferenceKind::Reference) out += " @reference";
  out += " ;\n";
}

}  // namespace

Result<ModelDocument> read_model(const std::string& text) {
  return MccReader(text).run();
}

std::string write_model(const Model& model) {
  std::string out = "language " + model.name;
  if (model.skip) {
    out += " @skip(";
    append_quoted(out, *model.skip);
    out += ")";
  }
  out += " ;\n";
  for (const ElementType& e : model.elements) {
    out += '\n';
    switch (e.kind) {
      case ElementKind::Selection: out += "abstract element " + e.name; break;
      case ElementKind::Basic: out += "basic element " + e.name; break;
      case ElementKind::Composite: out += "element " + e.name; break;
    }
    if (e.supertype) out += " : " + *e.supertype;
    append_element_annotations(out, model, e);
    if (e.kind == ElementKind::Composite) {
      out += " {\n";
      for (const MemberSpec& m : e.members) append_member(out, m);
      out += "}\n";
    } else {
      out += " ;\n";
    }
  }
  return out;
}

}  // namespace modelcc
