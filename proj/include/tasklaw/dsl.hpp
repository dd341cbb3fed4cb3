#pragma once

// The .ctm model format: syntax tree, parser, diagnostics and the canonical
// pretty printer. Lowering to engine objects lives in model.hpp.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tasklaw/task_algebra.hpp"

namespace tasklaw::dsl {

/// 1-based source position; line 0 means "no position".
struct Span {
  std::size_t line = 0;
  std::size_t column = 0;

  // Positions never take part in structural equality.
  bool operator==(const Span&) const { return true; }
};

enum class Severity { Error, Warning };

struct Diagnostic {
  Severity severity = Severity::Error;
  Span span;
  std::string message;
  std::string suggestion;

  /// "path:line:col: error: message [hint: suggestion]"
  std::string format(std::string_view path = {}) const;
};

bool has_errors(const std::vector<Diagnostic>& ds);

enum class StepKind { Identity, Shift, Cycles };

struct SubstrateDecl {
  std::string name;
  std::vector<std::string> states;
  StepKind step = StepKind::Identity;
  std::int64_t shift = 0;
  std::vector<std::vector<std::string>> cycles;
  Span span;
  bool operator==(const SubstrateDecl&) const = default;
};

struct AttributeDecl {
  std::string name;
  std::string substrate;
  std::vector<std::string> states;
  Span span;
  bool operator==(const AttributeDecl&) const = default;
};

enum class TimerDeclKind { Counter, Particle, Custom, Composite };

struct TimerDecl {
  TimerDeclKind kind = TimerDeclKind::Counter;
  std::string name;
  // counter
  std::optional<std::int64_t> bits, threshold;
  // particle
  std::optional<std::int64_t> grid, velocity, target;
  // custom
  std::string on, zero, running, one, halt;
  std::optional<std::int64_t> horizon;
  // composite
  std::string first, second;
  Span span;
  bool operator==(const TimerDecl&) const = default;
};

/// `x`, `C.0` / `C.R` / `C.1` / `C.halt`, or a pairing `(a, b)`.
struct AttrRef {
  std::string name;
  std::string part;
  std::vector<AttrRef> pair;
  Span span;
  bool is_pair() const { return pair.size() == 2; }
  bool operator==(const AttrRef&) const = default;
};

struct TaskDecl {
  std::string name;
  AttrRef input;
  AttrRef output;
  Span span;
  bool operator==(const TaskDecl&) const = default;
};

struct LawDecl {
  Status status = Status::Possible;
  bool null_task = false;
  std::string task;
  /// Optional substrate the task is asserted to live on.
  std::string on;
  Span span;
  Span task_span;
  Span on_span;
  bool operator==(const LawDecl&) const = default;
};

struct VariableEntry {
  std::int64_t lambda = 0;
  /// Name of a declared attribute, or empty for an inline state set.
  std::string attribute;
  std::vector<std::string> states;
  double value = 0.0;
  bool is_static = false;
  Span span;
  bool operator==(const VariableEntry&) const = default;
};

struct VariableDecl {
  std::string name;
  std::string substrate;
  std::vector<VariableEntry> entries;
  Span span;
  bool operator==(const VariableDecl&) const = default;
};

struct ModelDecl {
  std::vector<SubstrateDecl> substrates;
  std::vector<AttributeDecl> attributes;
  std::vector<TimerDecl> timers;
  std::vector<TaskDecl> tasks;
  std::vector<LawDecl> laws;
  std::vector<VariableDecl> variables;

  bool empty() const;
  bool operator==(const ModelDecl&) const = default;
};

/// Upper bound on the states a single declaration may list or expand to.
inline constexpr std::size_t kMaxDeclaredStates = std::size_t{1} << 20;

struct ParseResult {
  ModelDecl model;
  std::vector<Diagnostic> diagnostics;
  bool ok() const { return !has_errors(diagnostics); }
};

/// Total on every input: syntax errors become diagnostics, never exceptions.
ParseResult parse_model(std::string_view text);

/// Canonical text: substrates, attributes, timers, tasks, laws, variables.
std::string pretty_print(const ModelDecl& m);

/// Shortest text that reads back as exactly `v`.
std::string format_real(double v);

}  // namespace tasklaw::dsl
