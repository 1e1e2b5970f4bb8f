#include "modelcc/lexer.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <sstream>

namespace modelcc {

Result<Lexer> Lexer::compile(std::vector<TokenClassDef> classes, std::string skip_pattern) {
  Lexer lx;
  lx.classes_ = std::move(classes);
  lx.regexes_.reserve(lx.classes_.size());
  for (const auto& def : lx.classes_) {
    auto re = Regex::compile(def.pattern);
    if (!re.ok())
      return Error{ErrorKind::Model,
                   "token class '" + def.id + "': " + re.error().message};
    if (re.value().matches_empty())
      return Error{ErrorKind::Model,
                   "token class '" + def.id + "' matches the empty string"};
    lx.regexes_.push_back(std::move(re.value()));
  }
  if (!skip_pattern.empty()) {
    auto re = Regex::compile(skip_pattern);
    if (!re.ok())
      return Error{ErrorKind::Model, "skip pattern: " + re.error().message};
    if (re.value().matches_empty())
      return Error{ErrorKind::Model, "skip pattern matches the empty string"};
    lx.skip_ = std::move(re.value());
  }
  return lx;
}

namespace {

size_t skip_from(const std::optional<Regex>& skip, std::string_view input, size_t pos) {
  if (!skip) return pos;
  for (;;) {
    size_t next = skip->match_prefix(input, pos);
    if (next == kNoOffset || next <= pos) return pos;
    pos = next;
  }
}

std::string describe_byte(std::string_view input, size_t offset) {
  if (offset >= input.size()) return "end of input";
  unsigned char ch = static_cast<unsigned char>(input[offset]);
  if (ch >= 0x20 && ch < 0x7f) return std::string("'") + static_cast<char>(ch) + "'";
  std::ostringstream os;
  os << "byte 0x" << std::hex << static_cast<int>(ch);
  return os.str();
}

}  // namespace

Result<TokenGraph> Lexer::tokenize(std::string_view input) const {
  TokenGraph graph;
  graph.input.assign(input);

  const size_t size = input.size();
  const size_t first = skip_from(skip_, input, 0);

  struct RawCandidate {
    int cls;
    size_t start, end, to_pos;
  };
  std::vector<RawCandidate> raw;
  std::set<size_t> positions;  // every anchor position, including dead ends
  std::deque<size_t> pending;
  bool end_reached = first >= size;

  positions.insert(first);
  if (first < size) pending.push_back(first);

  std::vector<std::pair<int, size_t>> here;  // (cls, end) matches at one position
  while (!pending.empty()) {
    size_t pos = pending.front();
    pending.pop_front();

    here.clear();
    for (size_t i = 0; i < regexes_.size(); ++i) {
      size_t end = regexes_[i].match_prefix(input, pos);
      if (end != kNoOffset && end > pos) here.emplace_back(static_cast<int>(i), end);
    }
    // Fixed text wins over patterns only when the spans are identical.
    std::vector<size_t> fixed_ends;
    for (const auto& [cls, end] : here)
      if (classes_[cls].fixed_text) fixed_ends.push_back(end);
    if (!fixed_ends.empty()) {
      std::erase_if(here, [&](const std::pair<int, size_t>& other) {
        return !classes_[other.first].fixed_text &&
               std::find(fixed_ends.begin(), fixed_ends.end(), other.second) != fixed_ends.end();
      });
    }
    for (const auto& [cls, end] : here) {
      size_t to_pos = skip_from(skip_, input, end);
      raw.push_back({cls, pos, end, to_pos});
      if (to_pos >= size) {
        end_reached = true;
        positions.insert(size);
      } else if (positions.insert(to_pos).second) {
        pending.push_back(to_pos);
      }
    }
  }

  if (!end_reached) {
    // Every path died before the end; report the furthest anchor that
    // rejected all classes.
    size_t furthest = first;
    for (size_t pos : positions) {
      bool any = std::any_of(raw.begin(), raw.end(),
                             [&](const RawCandidate& c) { return c.start == pos; });
      if (!any && pos > furthest) furthest = pos;
    }
    if (raw.empty()) furthest = first;
    return Error{ErrorKind::Lexical,
                 "no token matches " + describe_byte(input, furthest), furthest};
  }

  graph.anchors.assign(positions.begin(), positions.end());
  std::map<size_t, int> anchor_index;
  for (size_t i = 0; i < graph.anchors.size(); ++i)
    anchor_index[graph.anchors[i]] = static_cast<int>(i);

  std::sort(raw.begin(), raw.end(), [](const RawCandidate& a, const RawCandidate& b) {
    return std::tie(a.start, a.cls, a.end) < std::tie(b.start, b.cls, b.end);
  });

  graph.at_anchor.resize(graph.anchors.size());
  graph.into_anchor.resize(graph.anchors.size());
  graph.candidates.reserve(raw.size());
  for (const auto& c : raw) {
    TokenCandidate out;
    out.cls = c.cls;
    out.start = c.start;
    out.end = c.end;
    out.from_anchor = anchor_index.at(c.start);
    out.to_anchor = anchor_index.at(std::min(c.to_pos, size));
    int id = static_cast<int>(graph.candidates.size());
    graph.at_anchor[out.from_anchor].push_back(id);
    graph.into_anchor[out.to_anchor].push_back(id);
    graph.candidates.push_back(out);
  }

  graph.start_anchor = anchor_index.at(first);
  graph.start_set = graph.at_anchor[graph.start_anchor];
  auto end_it = anchor_index.find(size);
  if (end_it != anchor_index.end()) {
    graph.end_anchor = end_it->second;
    graph.end_set = graph.into_anchor[graph.end_anchor];
  } else if (first >= size) {
    // Empty (or all-skip) input: both sets are empty and the graph is the
    // zero-token path.
    graph.end_anchor = graph.start_anchor;
  }
  return graph;
}

std::string dump_tokens(const TokenGraph& graph, const std::vector<TokenClassDef>& classes) {
  std::string out;
  for (const auto& c : graph.candidates) {
    out += classes[c.cls].id;
    out += "@[" + std::to_string(c.start) + "," + std::to_string(c.end) + ") \"";
    out.append(graph.text_of(c));
    out += "\"\n";
  }
  return out;
}

}  // namespace modelcc
