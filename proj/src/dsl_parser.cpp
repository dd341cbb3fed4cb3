#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <set>

#include "tasklaw/dsl.hpp"

namespace tasklaw::dsl {

namespace {

constexpr std::size_t kMaxDiagnostics = 100;

enum class Tok {
  Ident,
  Int,
  Real,
  LBrace,
  RBrace,
  LParen,
  RParen,
  Comma,
  Colon,
  Equals,
  Plus,
  Arrow,
  Dot,
  DotDot,
  Sep,  // newline or ';'
  End,
  Bad,
};

struct Token {
  Tok kind = Tok::End;
  std::string text;
  Span span;
};

const char* describe(Tok t) {
  switch (t) {
    case Tok::Ident: return "a name";
    case Tok::Int: return "an integer";
    case Tok::Real: return "a number";
    case Tok::LBrace: return "'{'";
    case Tok::RBrace: return "'}'";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::Comma: return "','";
    case Tok::Colon: return "':'";
    case Tok::Equals: return "'='";
    case Tok::Plus: return "'+'";
    case Tok::Arrow: return "'->'";
    case Tok::Dot: return "'.'";
    case Tok::DotDot: return "'..'";
    case Tok::Sep: return "end of statement";
    case Tok::End: return "end of file";
    case Tok::Bad: return "an invalid character";
  }
  return "a token";
}

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'';
}
bool digit(char c) { return c >= '0' && c <= '9'; }

std::vector<Token> lex(std::string_view src) {
  std::vector<Token> out;
  std::size_t i = 0, line = 1, col = 1;
  auto push = [&](Tok k, std::size_t len, Span at) {
    out.push_back({k, std::string(src.substr(i, len)), at});
    i += len;
    col += len;
  };
  while (i < src.size()) {
    const char c = src[i];
    const Span at{line, col};
    if (c == '\n') {
      out.push_back({Tok::Sep, "\n", at});
      ++i;
      ++line;
      col = 1;
    } else if (c == ' ' || c == '\t' || c == '\r') {
      ++i;
      ++col;
    } else if (c == '#') {
      while (i < src.size() && src[i] != '\n') ++i;
    } else if (ident_start(c)) {
      std::size_t n = 1;
      while (i + n < src.size() && ident_char(src[i + n])) ++n;
      push(Tok::Ident, n, at);
    } else if (digit(c) || (c == '-' && i + 1 < src.size() &&
                            (digit(src[i + 1]) || src[i + 1] == '.'))) {
      std::size_t n = c == '-' ? 1 : 0;
      bool real = c == '-';
      while (i + n < src.size() && digit(src[i + n])) ++n;
      if (i + n + 1 < src.size() && src[i + n] == '.' && digit(src[i + n + 1])) {
        real = true;
        ++n;
        while (i + n < src.size() && digit(src[i + n])) ++n;
      } else if (c == '-' && i + n < src.size() && src[i + n] == '.') {
        ++n;
        while (i + n < src.size() && digit(src[i + n])) ++n;
      }
      if (i + n < src.size() && (src[i + n] == 'e' || src[i + n] == 'E')) {
        std::size_t m = n + 1;
        if (i + m < src.size() && (src[i + m] == '+' || src[i + m] == '-')) ++m;
        if (i + m < src.size() && digit(src[i + m])) {
          while (i + m < src.size() && digit(src[i + m])) ++m;
          n = m;
          real = true;
        }
      }
      push(real ? Tok::Real : Tok::Int, n, at);
    } else if (c == '-' && i + 1 < src.size() && src[i + 1] == '>') {
      push(Tok::Arrow, 2, at);
    } else if (c == '.' && i + 1 < src.size() && src[i + 1] == '.') {
      push(Tok::DotDot, 2, at);
    } else {
      Tok k = Tok::Bad;
      switch (c) {
        case '{': k = Tok::LBrace; break;
        case '}': k = Tok::RBrace; break;
        case '(': k = Tok::LParen; break;
        case ')': k = Tok::RParen; break;
        case ',': k = Tok::Comma; break;
        case ':': k = Tok::Colon; break;
        case '=': k = Tok::Equals; break;
        case '+': k = Tok::Plus; break;
        case '.': k = Tok::Dot; break;
        case ';': k = Tok::Sep; break;
        default: break;
      }
      if (k == Tok::Bad) {
        // one whole UTF-8 sequence
        std::size_t n = 1;
        while (i + n < src.size() && (static_cast<unsigned char>(src[i + n]) & 0xC0) == 0x80) ++n;
        push(k, n, at);
      } else {
        push(k, 1, at);
      }
    }
  }
  out.push_back({Tok::End, "", Span{line, col}});
  return out;
}

struct SyntaxError {};

class Parser {
 public:
  explicit Parser(std::string_view src) : toks_(lex(src)) {}

  ParseResult run() {
    while (true) {
      skip_seps();
      if (peek().kind == Tok::End) break;
      if (diags_.size() >= kMaxDiagnostics) break;
      const std::size_t start = pos_;
      try {
        declaration();
        expect_end_of_statement();
      } catch (const SyntaxError&) {
        recover(start);
      }
    }
    if (diags_.size() >= kMaxDiagnostics) {
      diags_.push_back({Severity::Error, peek().span, "too many errors; giving up", ""});
    }
    return {std::move(model_), std::move(diags_)};
  }

 private:
  const Token& peek(std::size_t k = 0) const {
    return toks_[std::min(pos_ + k, toks_.size() - 1)];
  }
  bool at(Tok k) const { return peek().kind == k; }
  bool at_word(std::string_view w) const { return at(Tok::Ident) && peek().text == w; }
  Token take() {
    Token t = peek();
    if (pos_ < toks_.size() - 1) ++pos_;
    return t;
  }
  void skip_seps() {
    while (at(Tok::Sep)) take();
  }

  [[noreturn]] void fail(const Span& at, std::string message, std::string suggestion = {}) {
    diags_.push_back({Severity::Error, at, std::move(message), std::move(suggestion)});
    throw SyntaxError{};
  }
  [[noreturn]] void unexpected(std::string what) {
    const Token& t = peek();
    std::string got = t.kind == Tok::Ident || t.kind == Tok::Int || t.kind == Tok::Real ||
                              t.kind == Tok::Bad
                          ? "'" + t.text + "'"
                          : describe(t.kind);
    fail(t.span, "expected " + what + ", found " + got);
  }

  Token expect(Tok k, std::string what = {}) {
    if (!at(k)) unexpected(what.empty() ? describe(k) : what);
    return take();
  }
  void expect_word(std::string_view w) {
    if (!at_word(w)) unexpected("'" + std::string(w) + "'");
    take();
  }
  std::string name(std::string what = "a name") { return expect(Tok::Ident, what).text; }

  std::int64_t integer(std::string what = "an integer") {
    const Token t = expect(Tok::Int, what);
    std::int64_t v = 0;
    auto [p, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
    if (ec != std::errc() || p != t.text.data() + t.text.size()) {
      fail(t.span, "integer '" + t.text + "' is out of range");
    }
    return v;
  }

  std::int64_t signed_integer(std::string what) {
    if (at(Tok::Real) && !peek().text.empty() && peek().text[0] == '-') {
      const Token t = take();
      std::int64_t v = 0;
      auto [p, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
      if (ec != std::errc() || p != t.text.data() + t.text.size()) {
        fail(t.span, "expected " + what + ", found '" + t.text + "'");
      }
      return v;
    }
    return integer(what);
  }

  double real() {
    if (!at(Tok::Int) && !at(Tok::Real)) unexpected("a number");
    const Token t = take();
    double v = 0;
    auto [p, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
    if (ec != std::errc() || p != t.text.data() + t.text.size() || !std::isfinite(v)) {
      fail(t.span, "number '" + t.text + "' is not a finite real");
    }
    return v;
  }

  void expect_end_of_statement() {
    if (at(Tok::Sep) || at(Tok::End) || at(Tok::RBrace)) return;
    unexpected("end of statement");
  }

  // Skips the rest of a failed declaration, including any block it opened.
  void recover(std::size_t start) {
    int depth = 0;
    for (std::size_t i = start; i < pos_; ++i) {
      if (toks_[i].kind == Tok::LBrace) ++depth;
      if (toks_[i].kind == Tok::RBrace) --depth;
    }
    if (pos_ == start) take();
    while (!at(Tok::End)) {
      if (depth <= 0 && at(Tok::Sep)) break;
      if (at(Tok::LBrace)) ++depth;
      if (at(Tok::RBrace)) {
        --depth;
        if (depth <= 0) {
          take();
          break;
        }
      }
      take();
    }
  }

  // ---------------------------------------------------------------- items

  // Labels and integer ranges up to the end of the statement or a closer.
  std::vector<std::string> items(Tok closer, std::size_t& budget) {
    std::vector<std::string> out;
    while (!at(Tok::Sep) && !at(Tok::End) && !at(closer)) {
      if (at(Tok::Ident)) {
        out.push_back(take().text);
      } else if (at(Tok::Int)) {
        const Token lo_tok = peek();
        const std::int64_t lo = integer();
        if (at(Tok::DotDot)) {
          take();
          const Token hi_tok = peek();
          const std::int64_t hi = integer("the end of the range");
          if (hi < lo) {
            fail(hi_tok.span, "range " + std::to_string(lo) + ".." + std::to_string(hi) +
                                  " is empty", "write the smaller bound first");
          }
          if (static_cast<std::uint64_t>(hi - lo) >= budget) {
            fail(lo_tok.span, "range expands to more than " + std::to_string(kMaxDeclaredStates) +
                                  " states");
          }
          for (std::int64_t v = lo; v <= hi; ++v) out.push_back(std::to_string(v));
        } else {
          out.push_back(lo_tok.text);
        }
      } else {
        unexpected("a state label");
      }
      if (out.size() > budget) {
        fail(peek().span, "more than " + std::to_string(kMaxDeclaredStates) + " states listed");
      }
    }
    budget -= std::min(budget, out.size());
    return out;
  }

  std::vector<std::string> braced_items() {
    expect(Tok::LBrace);
    std::size_t budget = kMaxDeclaredStates;
    auto out = items(Tok::RBrace, budget);
    if (at(Tok::Sep)) fail(peek().span, "state sets must close on the same line", "add '}'");
    expect(Tok::RBrace);
    return out;
  }

  // ---------------------------------------------------------- declarations

  void declaration() {
    if (!at(Tok::Ident)) unexpected("a declaration");
    const std::string& w = peek().text;
    if (w == "substrate") return substrate();
    if (w == "attribute") return attribute();
    if (w == "timer") return timer();
    if (w == "task") return task();
    if (w == "law") return law();
    if (w == "variable") return variable();
    fail(peek().span, "unknown declaration '" + w + "'",
         "declarations start with substrate, attribute, timer, task, law or variable");
  }

  template <class F>
  void block(F&& statement) {
    expect(Tok::LBrace);
    while (true) {
      skip_seps();
      if (at(Tok::RBrace)) {
        take();
        return;
      }
      if (at(Tok::End)) unexpected("'}'");
      statement();
      if (!at(Tok::Sep) && !at(Tok::RBrace)) unexpected("';', a new line or '}'");
    }
  }

  void substrate() {
    SubstrateDecl d;
    d.span = take().span;
    d.name = name("a substrate name");
    bool have_states = false, have_step = false;
    block([&] {
      const Token key = expect(Tok::Ident, "'states' or 'step'");
      if (key.text == "states") {
        if (have_states) fail(key.span, "states of '" + d.name + "' listed twice");
        have_states = true;
        std::size_t budget = kMaxDeclaredStates;
        d.states = items(Tok::RBrace, budget);
      } else if (key.text == "step") {
        if (have_step) fail(key.span, "step of '" + d.name + "' given twice");
        have_step = true;
        if (at_word("identity")) {
          take();
          d.step = StepKind::Identity;
        } else if (at_word("shift")) {
          take();
          d.step = StepKind::Shift;
          d.shift = integer("a shift amount");
        } else {
          d.step = StepKind::Cycles;
          std::size_t budget = kMaxDeclaredStates;
          if (!at(Tok::LParen)) unexpected("'identity', 'shift' or a cycle such as '(a b)'");
          while (at(Tok::LParen)) {
            take();
            d.cycles.push_back(items(Tok::RParen, budget));
            expect(Tok::RParen);
          }
        }
      } else {
        fail(key.span, "unknown substrate field '" + key.text + "'", "use 'states' or 'step'");
      }
    });
    if (!have_states) fail(d.span, "substrate '" + d.name + "' lists no states", "add 'states ...'");
    if (!have_step) fail(d.span, "substrate '" + d.name + "' has no step map", "add 'step identity'");
    model_.substrates.push_back(std::move(d));
  }

  void attribute() {
    AttributeDecl d;
    d.span = take().span;
    d.name = name("an attribute name");
    expect_word("on");
    d.substrate = name("a substrate name");
    d.states = braced_items();
    model_.attributes.push_back(std::move(d));
  }

  void timer() {
    TimerDecl d;
    d.span = take().span;
    const Token kind = expect(Tok::Ident, "a timer kind");
    d.name = name("a timer name");
    auto field = [&](std::optional<std::int64_t>& slot, const Token& key) {
      if (slot) fail(key.span, "field '" + key.text + "' given twice");
      slot = integer("a value for '" + key.text + "'");
    };
    if (kind.text == "counter" || kind.text == "particle") {
      const bool counter = kind.text == "counter";
      d.kind = counter ? TimerDeclKind::Counter : TimerDeclKind::Particle;
      block([&] {
        const Token key = expect(Tok::Ident, "a timer field");
        if (counter && key.text == "bits") return field(d.bits, key);
        if (counter && key.text == "threshold") return field(d.threshold, key);
        if (!counter && key.text == "grid") return field(d.grid, key);
        if (!counter && key.text == "velocity") return field(d.velocity, key);
        if (!counter && key.text == "target") return field(d.target, key);
        fail(key.span, "unknown " + kind.text + " field '" + key.text + "'",
             counter ? "counters take 'bits' and 'threshold'"
                     : "particles take 'grid', 'velocity' and 'target'");
      });
      const bool complete = counter ? d.bits && d.threshold : d.grid && d.velocity && d.target;
      if (!complete) {
        fail(d.span, kind.text + " timer '" + d.name + "' is missing a field",
             counter ? "give 'bits' and 'threshold'" : "give 'grid', 'velocity' and 'target'");
      }
    } else if (kind.text == "custom") {
      d.kind = TimerDeclKind::Custom;
      expect_word("on");
      d.on = name("a substrate name");
      block([&] {
        const Token key = expect(Tok::Ident, "a timer field");
        std::string* slot = key.text == "zero"      ? &d.zero
                            : key.text == "running" ? &d.running
                            : key.text == "one"     ? &d.one
                            : key.text == "halt"    ? &d.halt
                                                    : nullptr;
        if (key.text == "horizon") return field(d.horizon, key);
        if (!slot) {
          fail(key.span, "unknown custom timer field '" + key.text + "'",
               "use zero, running, one, halt or horizon");
        }
        if (!slot->empty()) fail(key.span, "field '" + key.text + "' given twice");
        *slot = name("an attribute name");
      });
      if (d.zero.empty() || d.running.empty() || d.one.empty() || d.halt.empty()) {
        fail(d.span, "custom timer '" + d.name + "' is missing an attribute",
             "give zero, running, one and halt");
      }
    } else if (kind.text == "composite") {
      d.kind = TimerDeclKind::Composite;
      expect(Tok::Equals);
      d.first = name("a timer name");
      expect(Tok::Plus);
      d.second = name("a timer name");
    } else {
      fail(kind.span, "unknown timer kind '" + kind.text + "'",
           "use counter, particle, custom or composite");
    }
    model_.timers.push_back(std::move(d));
  }

  AttrRef ref(int depth = 0) {
    AttrRef r;
    r.span = peek().span;
    if (depth > 8) fail(r.span, "pairings nest too deeply");
    if (at(Tok::LParen)) {
      take();
      r.pair.push_back(ref(depth + 1));
      expect(Tok::Comma);
      r.pair.push_back(ref(depth + 1));
      expect(Tok::RParen);
      return r;
    }
    r.name = name("an attribute");
    if (at(Tok::Dot)) {
      take();
      if (at(Tok::Ident) || at(Tok::Int)) {
        r.part = take().text;
      } else {
        unexpected("a timer attribute (0, R, 1 or halt)");
      }
    }
    return r;
  }

  void task() {
    TaskDecl d;
    d.span = take().span;
    d.name = name("a task name");
    expect(Tok::Colon);
    d.input = ref();
    expect(Tok::Arrow);
    d.output = ref();
    model_.tasks.push_back(std::move(d));
  }

  void law() {
    LawDecl d;
    d.span = take().span;
    const Token status = expect(Tok::Ident, "'possible' or 'impossible'");
    if (status.text == "possible") {
      d.status = Status::Possible;
    } else if (status.text == "impossible") {
      d.status = Status::Impossible;
    } else {
      fail(status.span, "expected 'possible' or 'impossible', found '" + status.text + "'");
    }
    if (at_word("null")) {
      take();
      d.null_task = true;
    } else {
      expect_word("task");
      d.task_span = peek().span;
      d.task = name("a task name");
      if (at_word("on")) {
        take();
        d.on_span = peek().span;
        d.on = name("a substrate name");
      }
    }
    model_.laws.push_back(std::move(d));
  }

  void variable() {
    VariableDecl d;
    d.span = take().span;
    d.name = name("a variable name");
    expect_word("on");
    d.substrate = name("a substrate name");
    block([&] {
      VariableEntry e;
      e.span = peek().span;
      e.lambda = signed_integer("a parameter value");
      expect(Tok::Colon);
      if (at(Tok::LBrace)) {
        e.states = braced_items();
      } else {
        e.attribute = name("an attribute or '{'");
      }
      expect(Tok::Equals);
      e.value = real();
      if (at_word("static")) {
        take();
        e.is_static = true;
      }
      d.entries.push_back(std::move(e));
    });
    model_.variables.push_back(std::move(d));
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  ModelDecl model_;
  std::vector<Diagnostic> diags_;
};

}  // namespace

std::string Diagnostic::format(std::string_view path) const {
  std::string out;
  if (!path.empty()) out += std::string(path) + ":";
  if (span.line) out += std::to_string(span.line) + ":" + std::to_string(span.column) + ":";
  if (!out.empty()) out += " ";
  out += severity == Severity::Error ? "error: " : "warning: ";
  out += message;
  if (!suggestion.empty()) out += " [hint: " + suggestion + "]";
  return out;
}

bool has_errors(const std::vector<Diagnostic>& ds) {
  return std::any_of(ds.begin(), ds.end(),
                     [](const Diagnostic& d) { return d.severity == Severity::Error; });
}

bool ModelDecl::empty() const {
  return substrates.empty() && attributes.empty() && timers.empty() && tasks.empty() &&
         laws.empty() && variables.empty();
}

ParseResult parse_model(std::string_view text) { return Parser(text).run(); }

}  // namespace tasklaw::dsl
