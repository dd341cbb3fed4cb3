#pragma once

// Lowering of a parsed .ctm model to engine objects, with semantic
// diagnostics.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tasklaw/dsl.hpp"
#include "tasklaw/dynamics.hpp"
#include "tasklaw/task_algebra.hpp"
#include "tasklaw/timers.hpp"

namespace tasklaw {

struct NamedVariable {
  std::string name;
  TrajectoryModel model;
};

/// A law as declared, with the index of its statement in `Model::laws`.
struct DeclaredLaw {
  dsl::LawDecl decl;
  std::size_t statement = 0;
};

struct Model {
  std::map<std::string, Substrate> substrates;
  std::map<std::string, Attribute> attributes;
  /// Declaration order.
  std::vector<TimerSpec> timers;
  std::map<std::string, Task> tasks;
  LawSet laws;
  std::vector<DeclaredLaw> declared_laws;
  std::vector<NamedVariable> variables;

  const TimerSpec* timer(const std::string& name) const;
  const NamedVariable* variable(const std::string& name) const;
  /// True if every atomic part of `s` is a timer substrate.
  bool on_timers(const Substrate& s) const;
};

struct LoadResult {
  std::optional<Model> model;
  std::vector<dsl::Diagnostic> diagnostics;
  bool ok() const { return model.has_value(); }
};

/// Resolves names, builds substrates, timers, tasks, laws and variables, and
/// validates timers as null constructors. No model when any error is found.
LoadResult build_model(const dsl::ModelDecl& decl);

/// Semantic diagnostics for a parsed model (empty for a well-formed one).
std::vector<dsl::Diagnostic> validate_model(const dsl::ModelDecl& decl);

/// Parse and build.
LoadResult load_model_text(std::string_view text);
/// Reads the file; an unreadable file is reported as a diagnostic.
LoadResult load_model_file(const std::filesystem::path& path);

}  // namespace tasklaw
