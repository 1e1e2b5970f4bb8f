#include "modelcc/regex.hpp"

#include <cctype>

namespace modelcc {

namespace {

std::bitset<256> class_of(const char* chars) {
  std::bitset<256> b;
  for (const char* p = chars; *p; ++p) b.set(static_cast<unsigned char>(*p));
  return b;
}

std::bitset<256> digit_class() { return class_of("0123456789"); }

std::bitset<256> word_class() {
  std::bitset<256> b = digit_class();
  for (char c = 'a'; c <= 'z'; ++c) b.set(static_cast<unsigned char>(c));
  for (char c = 'A'; c <= 'Z'; ++c) b.set(static_cast<unsigned char>(c));
  b.set('_');
  return b;
}

std::bitset<256> space_class() { return class_of(" \t\r\n\f\v"); }

bool is_plain_punct_escape(char c) {
  return std::ispunct(static_cast<unsigned char>(c)) != 0;
}

}  // namespace

class RegexCompiler {
 public:
  explicit RegexCompiler(std::string_view pattern) : pat_(pattern) {}

  Result<Regex> run() {
    Frag all = parse_alt();
    if (!err_.empty()) {
      return Error{ErrorKind::Model, "regex \"" + std::string(pat_) + "\": " + err_, pos_};
    }
    if (pos_ != pat_.size()) {
      return Error{ErrorKind::Model,
                   "regex \"" + std::string(pat_) + "\": unexpected ')'", pos_};
    }
    Regex re;
    re.states_ = std::move(states_);
    re.start_ = all.start;
    re.accept_ = all.accept;
    re.pattern_ = std::string(pat_);
    re.literal_ = literal_only_ ? literal_ : std::string();
    return re;
  }

 private:
  struct Frag {
    int start = 0;
    int accept = 0;
  };

  std::string_view pat_;
  size_t pos_ = 0;
  std::string err_;
  std::vector<Regex::State> states_;
  bool literal_only_ = true;
  std::string literal_;

  int new_state() {
    states_.emplace_back();
    return static_cast<int>(states_.size()) - 1;
  }

  void add_eps(int from, int to) {
    auto& s = states_[from];
    if (s.eps0 < 0) s.eps0 = to;
    else if (s.eps1 < 0) s.eps1 = to;
    else fail("internal: epsilon fanout");
  }

  void fail(const std::string& m) {
    if (err_.empty()) err_ = m;
  }

  bool at_end() const { return pos_ >= pat_.size(); }
  char peek() const { return pat_[pos_]; }

  Frag char_frag(const std::bitset<256>& cls) {
    Frag f;
    f.start = new_state();
    f.accept = new_state();
    states_[f.start].chars = cls;
    states_[f.start].next = f.accept;
    return f;
  }

  Frag empty_frag() {
    Frag f;
    f.start = new_state();
    f.accept = f.start;
    return f;
  }

  Frag parse_alt() {
    Frag left = parse_concat();
    while (!at_end() && peek() == '|' && err_.empty()) {
      literal_only_ = false;
      ++pos_;
      Frag right = parse_concat();
      Frag f;
      f.start = new_state();
      f.accept = new_state();
      add_eps(f.start, left.start);
      add_eps(f.start, right.start);
      add_eps(left.accept, f.accept);
      add_eps(right.accept, f.accept);
      left = f;
    }
    return left;
  }

  Frag parse_concat() {
    Frag f = empty_frag();
    while (!at_end() && peek() != '|' && peek() != ')' && err_.empty()) {
      Frag next = parse_rep();
      if (f.start == f.accept && states_[f.start].next < 0 && states_[f.start].eps0 < 0) {
        f = next;  // first atom replaces the placeholder
      } else {
        add_eps(f.accept, next.start);
        f.accept = next.accept;
      }
    }
    return f;
  }

  Frag parse_rep() {
    Frag a = parse_atom();
    while (!at_end() && err_.empty()) {
      char c = peek();
      if (c != '*' && c != '+' && c != '?') break;
      literal_only_ = false;
      ++pos_;
      Frag f;
      f.start = new_state();
      f.accept = new_state();
      if (c == '*') {
        add_eps(f.start, a.start);
        add_eps(f.start, f.accept);
        add_eps(a.accept, f.accept);
        // loop back through a fresh state to respect the two-edge limit
        int loop = new_state();
        add_eps(a.accept, loop);
        add_eps(loop, a.start);
      } else if (c == '+') {
        add_eps(f.start, a.start);
        add_eps(a.accept, f.accept);
        int loop = new_state();
        add_eps(a.accept, loop);
        add_eps(loop, a.start);
      } else {  // '?'
        add_eps(f.start, a.start);
        add_eps(f.start, f.accept);
        add_eps(a.accept, f.accept);
      }
      a = f;
    }
    return a;
  }

  Frag parse_atom() {
    if (at_end()) {
      fail("unexpected end of pattern");
      return empty_frag();
    }
    char c = peek();
    switch (c) {
      case '(': {
        literal_only_ = false;
        ++pos_;
        Frag inner = parse_alt();
        if (at_end() || peek() != ')') {
          fail("missing ')'");
          return inner;
        }
        ++pos_;
        return inner;
      }
      case '[':
        literal_only_ = false;
        return parse_class();
      case '.': {
        literal_only_ = false;
        ++pos_;
        std::bitset<256> any;
        any.set();
        any.reset('\n');
        return char_frag(any);
      }
      case '\\':
        return parse_escape();
      case '*':
      case '+':
      case '?':
        fail("repetition operator with nothing to repeat");
        ++pos_;
        return empty_frag();
      case '^':
      case '$':
        fail("anchors are not supported");
        ++pos_;
        return empty_frag();
      case '{':
      case '}':
        fail("bounded repetition is not supported; escape braces to match them literally");
        ++pos_;
        return empty_frag();
      default: {
        ++pos_;
        literal_.push_back(c);
        std::bitset<256> b;
        b.set(static_cast<unsigned char>(c));
        return char_frag(b);
      }
    }
  }

  // Resolves an escape to either a single char (returned in `single`) or a
  // shorthand class; returns the class either way.
  std::bitset<256> escape_set(bool* is_class_shorthand, char* single) {
    ++pos_;  // consume backslash
    *is_class_shorthand = false;
    *single = 0;
    std::bitset<256> b;
    if (at_end()) {
      fail("dangling backslash");
      return b;
    }
    char c = pat_[pos_++];
    switch (c) {
      case 'n': *single = '\n'; break;
      case 't': *single = '\t'; break;
      case 'r': *single = '\r'; break;
      case 'f': *single = '\f'; break;
      case 'v': *single = '\v'; break;
      case '0': *single = '\0'; break;
      case 'd': *is_class_shorthand = true; return digit_class();
      case 'D': *is_class_shorthand = true; return ~digit_class();
      case 'w': *is_class_shorthand = true; return word_class();
      case 'W': *is_class_shorthand = true; return ~word_class();
      case 's': *is_class_shorthand = true; return space_class();
      case 'S': *is_class_shorthand = true; return ~space_class();
      default:
        if (is_plain_punct_escape(c)) {
          *single = c;
        } else {
          fail(std::string("unknown escape '\\") + c + "'");
        }
        break;
    }
    b.set(static_cast<unsigned char>(*single));
    return b;
  }

  Frag parse_escape() {
    bool shorthand = false;
    char single = 0;
    std::bitset<256> b = escape_set(&shorthand, &single);
    if (shorthand) {
      literal_only_ = false;
    } else {
      literal_.push_back(single);
    }
    return char_frag(b);
  }

  Frag parse_class() {
    ++pos_;  // consume '['
    bool negate = false;
    if (!at_end() && peek() == '^') {
      negate = true;
      ++pos_;
    }
    std::bitset<256> b;
    bool first = true;
    while (!at_end() && peek() != ']') {
      unsigned char lo;
      if (peek() == '\\') {
        bool shorthand = false;
        char single = 0;
        std::bitset<256> sub = escape_set(&shorthand, &single);
        if (shorthand) {
          b |= sub;
          first = false;
          continue;
        }
        lo = static_cast<unsigned char>(single);
      } else {
        lo = static_cast<unsigned char>(pat_[pos_++]);
      }
      if (!at_end() && peek() == '-' && pos_ + 1 < pat_.size() && pat_[pos_ + 1] != ']') {
        ++pos_;  // consume '-'
        unsigned char hi;
        if (peek() == '\\') {
          bool shorthand = false;
          char single = 0;
          escape_set(&shorthand, &single);
          if (shorthand) {
            fail("class shorthand cannot end a range");
            return empty_frag();
          }
          hi = static_cast<unsigned char>(single);
        } else {
          hi = static_cast<unsigned char>(pat_[pos_++]);
        }
        if (hi < lo) {
          fail("inverted range in character class");
          return empty_frag();
        }
        for (unsigned v = lo; v <= hi; ++v) b.set(v);
      } else {
        b.set(lo);
      }
      first = false;
    }
    if (at_end()) {
      fail("missing ']'");
      return empty_frag();
    }
    ++pos_;  // consume ']'
    if (first) {
      fail("empty character class");
      return empty_frag();
    }
    if (negate) b = ~b;
    return char_frag(b);
  }
};

Result<Regex> Regex::compile(std::string_view pattern) {
  return RegexCompiler(pattern).run();
}

size_t Regex::match_prefix(std::string_view text, size_t pos) const {
  // Simulates the NFA; thread-safe (all per-call state is local).
  std::vector<int> current, next;
  std::vector<uint32_t> mark(states_.size(), 0);
  uint32_t stamp = 0;

  auto add = [&](int s, std::vector<int>& set) {
    // iterative epsilon closure
    std::vector<int> stack{s};
    while (!stack.empty()) {
      int t = stack.back();
      stack.pop_back();
      if (mark[t] == stamp) continue;
      mark[t] = stamp;
      set.push_back(t);
      const State& st = states_[t];
      if (st.eps0 >= 0) stack.push_back(st.eps0);
      if (st.eps1 >= 0) stack.push_back(st.eps1);
    }
  };

  ++stamp;
  add(start_, current);

  size_t best = kNoOffset;
  size_t at = pos;
  auto accepts = [&](const std::vector<int>& set) {
    for (int s : set)
      if (s == accept_) return true;
    return false;
  };
  if (accepts(current)) best = at;

  while (at < text.size() && !current.empty()) {
    unsigned char c = static_cast<unsigned char>(text[at]);
    next.clear();
    ++stamp;
    for (int s : current) {
      const State& st = states_[s];
      if (st.next >= 0 && st.chars.test(c)) add(st.next, next);
    }
    std::swap(current, next);
    ++at;
    if (accepts(current)) best = at;
  }
  return best;
}

bool Regex::full_match(std::string_view text) const {
  return match_prefix(text, 0) == text.size();
}

bool Regex::matches_empty() const {
  return match_prefix(std::string_view{}, 0) == 0;
}

}  // namespace modelcc
