#include "modelcc/model.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "modelcc/regex.hpp"

namespace modelcc {

const char* to_string(ElementKind k) {
  switch (k) {
    case ElementKind::Composite: return "composite";
    case ElementKind::Selection: return "selection";
    case ElementKind::Basic: return "basic";
  }
  return "?";
}

const char* to_string(ValueType v) {
  switch (v) {
    case ValueType::None: return "none";
    case ValueType::Text: return "text";
    case ValueType::Number: return "number";
    case ValueType::Boolean: return "boolean";
  }
  return "?";
}

const char* to_string(Associativity a) {
  switch (a) {
    case Associativity::Unspecified: return "unspecified";
    case Associativity::LeftToRight: return "ltr";
    case Associativity::RightToLeft: return "rtl";
    case Associativity::NonAssociative: return "non";
  }
  return "?";
}

const char* to_string(Composition c) {
  switch (c) {
    case Composition::Unspecified: return "unspecified";
    case Composition::Eager: return "eager";
    case Composition::Lazy: return "lazy";
  }
  return "?";
}

const ElementType* Model::find(std::string_view element_name) const {
  for (const ElementType& e : elements)
    if (e.name == element_name) return &e;
  return nullptr;
}

int Model::index_of(std::string_view element_name) const {
  for (size_t i = 0; i < elements.size(); ++i)
    if (elements[i].name == element_name) return static_cast<int>(i);
  return -1;
}

std::vector<const MemberSpec*> ordered_members(const ElementType& element) {
  struct Entry {
    const MemberSpec* member;
    uint32_t key;
    int explicit_rank;  // explicit positions win ties against declaration slots
  };
  std::vector<Entry> entries;
  entries.reserve(element.members.size());
  for (size_t i = 0; i < element.members.size(); ++i) {
    const MemberSpec& m = element.members[i];
    entries.push_back({&m, m.position ? *m.position : static_cast<uint32_t>(i),
                       m.position ? 0 : 1});
  }
  std::stable_sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    if (a.key != b.key) return a.key < b.key;
    return a.explicit_rank < b.explicit_rank;
  });
  std::vector<const MemberSpec*> out;
  out.reserve(entries.size());
  for (const Entry& e : entries) out.push_back(e.member);
  return out;
}

Multiplicity effective_multiplicity(const MemberSpec& member) {
  if (member.optional) return Multiplicity{0, 1};
  return member.multiplicity;
}

bool is_subtype_of(const Model& model, std::string_view sub, std::string_view ancestor) {
  std::set<std::string_view> seen;
  std::string_view cur = sub;
  while (true) {
    if (cur == ancestor) return true;
    if (!seen.insert(cur).second) return false;  // cyclic chain: give up
    const ElementType* e = model.find(cur);
    if (!e || !e->supertype) return false;
    cur = *e->supertype;
  }
}

std::vector<std::string> direct_subtypes(const Model& model, std::string_view super) {
  std::vector<std::string> out;
  for (const ElementType& e : model.elements)
    if (e.supertype && *e.supertype == super) out.push_back(e.name);
  return out;
}

std::vector<std::string> concrete_subtypes(const Model& model, std::string_view name) {
  std::vector<std::string> out;
  std::set<std::string> visited;
  std::vector<std::string> queue{std::string(name)};
  while (!queue.empty()) {
    std::string cur = queue.front();
    queue.erase(queue.begin());
    if (!visited.insert(cur).second) continue;
    const ElementType* e = model.find(cur);
    if (!e) continue;
    if (e->kind == ElementKind::Selection) {
      for (std::string& s : direct_subtypes(model, cur)) queue.push_back(std::move(s));
    } else {
      out.push_back(cur);
    }
  }
  return out;
}

std::vector<std::string> supertype_chain(const Model& model, std::string_view name) {
  std::vector<std::string> out;
  std::set<std::string> visited;
  std::string cur(name);
  while (visited.insert(cur).second) {
    out.push_back(cur);
    const ElementType* e = model.find(cur);
    if (!e || !e->supertype) break;
    cur = *e->supertype;
  }
  return out;
}

const MemberSpec* id_member(const Model&, const ElementType& element) {
  if (!element.reference.id_field) return nullptr;
  for (const MemberSpec& m : element.members)
    if (m.field_name == *element.reference.id_field) return &m;
  return nullptr;
}

std::string ValidationReport::to_string() const {
  std::string out;
  for (const ValidationIssue& i : issues) {
    if (!out.empty()) out += '\n';
    out += i.element.empty() ? "model" : "element '" + i.element + "'";
    out += ": " + i.message + " (" + i.constraint + ")";
  }
  return out;
}

namespace {

bool is_canonical_value_member(const MemberSpec& m) {
  return m.field_name == "value" && m.element_type.empty() && m.value_field &&
         !m.optional && m.multiplicity == Multiplicity{1, 1} && m.separators.empty() &&
         m.prefixes.empty() && m.suffixes.empty() && !m.position &&
         m.reference_kind == ReferenceKind::None;
}

void check_pattern_list(const std::vector<std::string>& pats, const std::string& element,
                        const char* what, ValidationReport& rep) {
  for (const std::string& p : pats) {
    auto re = Regex::compile(p);
    if (!re.ok()) {
      rep.issues.push_back({element, "bad-pattern",
                            std::string(what) + " does not compile: " + re.error().message});
    } else if (re.value().matches_empty()) {
      rep.issues.push_back(
          {element, "empty-pattern", std::string(what) + " \"" + p + "\" matches the empty string"});
    }
  }
}

}  // namespace

ValidationReport validate_model(const Model& model) {
  ValidationReport rep;
  auto issue = [&](const std::string& elem, const char* tag, std::string msg) {
    rep.issues.push_back({elem, tag, std::move(msg)});
  };

  std::set<std::string> names;
  for (const ElementType& e : model.elements) {
    if (!names.insert(e.name).second)
      issue(e.name, "duplicate-element-name", "duplicate element name");
  }

  if (!model.find(model.start))
    issue("", "missing-start", "start element '" + model.start + "' is not declared");

  {
    auto re = Regex::compile(model.effective_skip());
    if (!re.ok())
      issue("", "bad-pattern", "skip pattern does not compile: " + re.error().message);
    else if (re.value().matches_empty())
      issue("", "empty-pattern", "skip pattern matches the empty string");
  }

  for (const ElementType& e : model.elements) {
    // supertype link
    if (e.supertype) {
      const ElementType* super = model.find(*e.supertype);
      if (!super)
        issue(e.name, "unknown-supertype", "supertype '" + *e.supertype + "' is not declared");
      else if (super->kind != ElementKind::Selection)
        issue(e.name, "supertype-not-selection",
              "supertype '" + *e.supertype + "' is not a selection element");
      // self-revisiting chain (each cycle participant reports itself)
      std::set<std::string> seen{e.name};
      std::string cur = *e.supertype;
      while (true) {
        if (cur == e.name) {
          issue(e.name, "cyclic-supertype", "supertype chain returns to '" + e.name + "'");
          break;
        }
        if (!seen.insert(cur).second) break;
        const ElementType* s = model.find(cur);
        if (!s || !s->supertype) break;
        cur = *s->supertype;
      }
    }

    check_pattern_list(e.delimiters.prefixes, e.name, "prefix pattern", rep);
    check_pattern_list(e.delimiters.suffixes, e.name, "suffix pattern", rep);

    // kind shape
    switch (e.kind) {
      case ElementKind::Basic: {
        if (!e.pattern || e.pattern->regexp.empty()) {
          issue(e.name, "missing-pattern", "basic element requires a pattern");
        } else {
          auto re = Regex::compile(e.pattern->regexp);
          if (!re.ok())
            issue(e.name, "bad-pattern", "pattern does not compile: " + re.error().message);
          else if (re.value().matches_empty())
            issue(e.name, "empty-pattern", "pattern matches the empty string");
        }
        bool wants_value = e.pattern && e.pattern->value_type != ValueType::None;
        if (wants_value) {
          if (e.members.size() != 1 || !is_canonical_value_member(e.members[0]))
            issue(e.name, "value-member",
                  "basic element with a value type must carry exactly the implicit "
                  "'value' member");
        } else if (!e.members.empty()) {
          issue(e.name, "value-member", "basic element without a value type has no members");
        }
        break;
      }
      case ElementKind::Selection: {
        if (!e.members.empty())
          issue(e.name, "selection-members", "selection elements have no members");
        if (e.pattern)
          issue(e.name, "selection-pattern", "selection elements have no pattern");
        if (direct_subtypes(model, e.name).empty())
          issue(e.name, "selection-empty", "selection element has no declared subelement");
        break;
      }
      case ElementKind::Composite: {
        if (e.members.empty())
          issue(e.name, "composite-empty", "composite element requires at least one member");
        if (e.pattern)
          issue(e.name, "composite-pattern", "composite elements have no pattern");
        break;
      }
    }

    if (e.evaluation.free_order &&
        !(e.kind == ElementKind::Composite && e.members.size() >= 2))
      issue(e.name, "freeorder-shape",
            "free order applies only to composite elements with at least two members");

    // members
    std::set<std::string> field_names;
    std::set<uint32_t> positions;
    size_t id_count = 0;
    std::string id_field;
    for (const MemberSpec& m : e.members) {
      if (!field_names.insert(m.field_name).second)
        issue(e.name, "duplicate-member-name", "duplicate member name '" + m.field_name + "'");
      if (m.position && !positions.insert(*m.position).second)
        issue(e.name, "duplicate-position",
              "duplicate member position " + std::to_string(*m.position));

      if (m.value_field) {
        if (e.kind != ElementKind::Basic)
          issue(e.name, "value-member",
                "value member '" + m.field_name + "' on a non-basic element");
        continue;  // canonical shape already checked above
      }

      const ElementType* target = model.find(m.element_type);
      if (!target)
        issue(e.name, "unknown-member-type",
              "member '" + m.field_name + "' references undeclared element '" +
                  m.element_type + "'");

      const Multiplicity& mm = m.multiplicity;
      if (mm.max == 0)
        issue(e.name, "multiplicity", "member '" + m.field_name + "' has max multiplicity 0");
      else if (mm.bounded() && mm.min > mm.max)
        issue(e.name, "multiplicity",
              "member '" + m.field_name + "' has min multiplicity above max");
      if (m.optional && !(mm == Multiplicity{1, 1} || mm == Multiplicity{0, 1}))
        issue(e.name, "optional-multiplicity",
              "member '" + m.field_name + "' combines @optional with a contradictory multiplicity");

      check_pattern_list(m.separators, e.name, "separator pattern", rep);
      check_pattern_list(m.prefixes, e.name, "member prefix pattern", rep);
      check_pattern_list(m.suffixes, e.name, "member suffix pattern", rep);

      if (m.reference_kind == ReferenceKind::Id) {
        ++id_count;
        id_field = m.field_name;
        if (target && !(target->kind == ElementKind::Basic && target->pattern &&
                        target->pattern->value_type == ValueType::Text))
          issue(e.name, "id-member-type",
                "id member '" + m.field_name + "' must be a basic element with text value");
        if (m.optional || !(mm == Multiplicity{1, 1}))
          issue(e.name, "id-member-multiplicity",
                "id member '" + m.field_name + "' must appear exactly once");
      } else if (m.reference_kind == ReferenceKind::Reference) {
        if (target) {
          bool any_referenceable = false;
          for (const std::string& sub : concrete_subtypes(model, m.element_type)) {
            const ElementType* c = model.find(sub);
            if (c && c->reference.referenceable()) any_referenceable = true;
          }
          if (!any_referenceable)
            issue(e.name, "reference-target",
                  "member '" + m.field_name + "' references type '" + m.element_type +
                      "' which has no referenceable element");
        }
      }
    }
    if (id_count > 1)
      issue(e.name, "id-member-count", "more than one member marked @id");
    std::optional<std::string> expected_id =
        id_count == 1 ? std::optional<std::string>(id_field) : std::nullopt;
    if (e.reference.id_field != expected_id)
      issue(e.name, "id-field-sync",
            "reference id field must match the member marked @id");
  }

  // productivity: can each element derive a finite sentence?
  std::map<std::string, bool> productive;
  for (const ElementType& e : model.elements) productive[e.name] = false;
  bool changed = true;
  while (changed) {
    changed = false;
    for (const ElementType& e : model.elements) {
      if (productive[e.name]) continue;
      bool p = false;
      switch (e.kind) {
        case ElementKind::Basic:
          p = true;
          break;
        case ElementKind::Selection:
          for (const std::string& sub : direct_subtypes(model, e.name))
            if (productive[sub]) p = true;
          break;
        case ElementKind::Composite: {
          p = true;
          for (const MemberSpec& m : e.members) {
            if (m.value_field) continue;
            if (effective_multiplicity(m).min == 0) continue;
            if (m.reference_kind == ReferenceKind::Reference) continue;  // parses as an id token
            auto it = productive.find(m.element_type);
            if (it == productive.end() || !it->second) p = false;
          }
          break;
        }
      }
      if (p) {
        productive[e.name] = true;
        changed = true;
      }
    }
  }
  for (const ElementType& e : model.elements)
    if (!productive[e.name]) issue(e.name, "no-finite-derivation", "no finite derivation");

  return rep;
}

// -- ModelBuilder -------------------------------------------------------------

ModelBuilder::ModelBuilder(std::string language_name) {
  model_.name = std::move(language_name);
}

ModelBuilder& ModelBuilder::fail(const std::string& message) {
  if (error_.empty()) error_ = message;
  return *this;
}

ElementType* ModelBuilder::current_element() {
  return model_.elements.empty() ? nullptr : &model_.elements.back();
}

MemberSpec* ModelBuilder::current_member() {
  ElementType* e = current_element();
  if (!e || e->members.empty()) return nullptr;
  MemberSpec* m = &e->members.back();
  return m->value_field ? nullptr : m;  // implicit value members take no annotations
}

ModelBuilder& ModelBuilder::set_once(const char* what, bool& flag) {
  if (flag) return fail(std::string("conflicting constraint: ") + what + " set twice");
  flag = true;
  return *this;
}

ModelBuilder& ModelBuilder::skip(std::string pattern) {
  if (model_.skip) return fail("conflicting constraint: skip set twice");
  model_.skip = std::move(pattern);
  return *this;
}

ModelBuilder& ModelBuilder::add_element(std::string name, ElementKind kind) {
  model_.elements.push_back(ElementType{});
  model_.elements.back().name = std::move(name);
  model_.elements.back().kind = kind;
  elem_latch_ = Latches{};
  member_latch_ = MemberLatches{};
  return *this;
}

ModelBuilder& ModelBuilder::supertype(std::string super_name) {
  ElementType* e = current_element();
  if (!e) return fail("supertype before any element");
  set_once("supertype", elem_latch_.supertype);
  e->supertype = std::move(super_name);
  return *this;
}

ModelBuilder& ModelBuilder::pattern(std::string regexp) {
  ElementType* e = current_element();
  if (!e) return fail("pattern before any element");
  set_once("@pattern", elem_latch_.pattern);
  if (!e->pattern) e->pattern = PatternSpec{};
  e->pattern->regexp = std::move(regexp);
  return *this;
}

ModelBuilder& ModelBuilder::value(ValueType type) {
  ElementType* e = current_element();
  if (!e) return fail("value before any element");
  set_once("@value", elem_latch_.value);
  if (!e->pattern) e->pattern = PatternSpec{};
  e->pattern->value_type = type;
  if (type != ValueType::None) {
    MemberSpec value_member;
    value_member.field_name = "value";
    value_member.value_field = true;
    e->members.push_back(std::move(value_member));
  }
  return *this;
}

ModelBuilder& ModelBuilder::prefix(std::string pat) {
  ElementType* e = current_element();
  if (!e) return fail("prefix before any element");
  e->delimiters.prefixes.push_back(std::move(pat));
  return *this;
}

ModelBuilder& ModelBuilder::suffix(std::string pat) {
  ElementType* e = current_element();
  if (!e) return fail("suffix before any element");
  e->delimiters.suffixes.push_back(std::move(pat));
  return *this;
}

ModelBuilder& ModelBuilder::associativity(Associativity a) {
  ElementType* e = current_element();
  if (!e) return fail("associativity before any element");
  set_once("@associativity", elem_latch_.assoc);
  e->evaluation.associativity = a;
  return *this;
}

ModelBuilder& ModelBuilder::priority(int level) {
  ElementType* e = current_element();
  if (!e) return fail("priority before any element");
  set_once("@priority", elem_latch_.prio);
  e->evaluation.priority = level;
  return *this;
}

ModelBuilder& ModelBuilder::composition(Composition c) {
  ElementType* e = current_element();
  if (!e) return fail("composition before any element");
  set_once("@composition", elem_latch_.comp);
  e->evaluation.composition = c;
  return *this;
}

ModelBuilder& ModelBuilder::free_order() {
  ElementType* e = current_element();
  if (!e) return fail("freeorder before any element");
  set_once("@freeorder", elem_latch_.freeorder);
  e->evaluation.free_order = true;
  return *this;
}

ModelBuilder& ModelBuilder::constraint_hook(std::string hook_name) {
  ElementType* e = current_element();
  if (!e) return fail("constraint before any element");
  set_once("@constraint", elem_latch_.hook);
  e->custom = std::move(hook_name);
  return *this;
}

ModelBuilder& ModelBuilder::start() {
  ElementType* e = current_element();
  if (!e) return fail("start before any element");
  if (explicit_start_) return fail("conflicting constraint: @start declared twice");
  explicit_start_ = true;
  model_.start = e->name;
  return *this;
}

ModelBuilder& ModelBuilder::add_member(std::string field_name, std::string element_type) {
  ElementType* e = current_element();
  if (!e) return fail("member before any element");
  MemberSpec m;
  m.field_name = std::move(field_name);
  m.element_type = std::move(element_type);
  e->members.push_back(std::move(m));
  member_latch_ = MemberLatches{};
  return *this;
}

ModelBuilder& ModelBuilder::optional() {
  MemberSpec* m = current_member();
  if (!m) return fail("@optional before any member");
  set_once("@optional", member_latch_.optional);
  m->optional = true;
  return *this;
}

ModelBuilder& ModelBuilder::multiplicity(uint32_t min, uint32_t max) {
  MemberSpec* m = current_member();
  if (!m) return fail("@multiplicity before any member");
  set_once("@multiplicity", member_latch_.mult);
  m->multiplicity = Multiplicity{min, max};
  return *this;
}

ModelBuilder& ModelBuilder::separator(std::string pat) {
  MemberSpec* m = current_member();
  if (!m) return fail("@separator before any member");
  m->separators.push_back(std::move(pat));
  return *this;
}

ModelBuilder& ModelBuilder::member_prefix(std::string pat) {
  MemberSpec* m = current_member();
  if (!m) return fail("@prefix before any member");
  m->prefixes.push_back(std::move(pat));
  return *this;
}

ModelBuilder& ModelBuilder::member_suffix(std::string pat) {
  MemberSpec* m = current_member();
  if (!m) return fail("@suffix before any member");
  m->suffixes.push_back(std::move(pat));
  return *this;
}

ModelBuilder& ModelBuilder::at_position(uint32_t index) {
  MemberSpec* m = current_member();
  if (!m) return fail("@position before any member");
  set_once("@position", member_latch_.position);
  m->position = index;
  return *this;
}

ModelBuilder& ModelBuilder::id() {
  MemberSpec* m = current_member();
  if (!m) return fail("@id before any member");
  set_once("@id/@reference", member_latch_.refkind);
  m->reference_kind = ReferenceKind::Id;
  ElementType* e = current_element();
  if (e->reference.id_field)
    return fail("conflicting constraint: more than one @id member on '" + e->name + "'");
  e->reference.id_field = m->field_name;
  return *this;
}

ModelBuilder& ModelBuilder::reference() {
  MemberSpec* m = current_member();
  if (!m) return fail("@reference before any member");
  set_once("@id/@reference", member_latch_.refkind);
  m->reference_kind = ReferenceKind::Reference;
  return *this;
}

Result<Model> ModelBuilder::build() const {
  if (!error_.empty()) return Error{ErrorKind::Model, error_};
  Model m = model_;
  if (!explicit_start_ && !m.elements.empty()) m.start = m.elements.front().name;
  ValidationReport report = validate_model(m);
  if (!report.empty()) return Error{ErrorKind::Model, report.to_string()};
  return m;
}

}  // namespace modelcc
