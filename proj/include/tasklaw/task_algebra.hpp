#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tasklaw/core_model.hpp"

namespace tasklaw {

/// An ordered pair of attributes `input -> output` on one substrate, or the
/// null task `{ }` which has no substrate, input or output.
class Task {
 public:
  Task(Attribute input, Attribute output);
  static Task null();

  bool is_null() const { return !input_.has_value(); }
  /// Throws PreconditionError on the null task.
  const Attribute& input() const;
  const Attribute& output() const;
  const Substrate& substrate() const { return input().substrate(); }

  /// Identity of the task as a state-set pair (attribute names ignored).
  std::string key() const;
  /// Human-readable form, e.g. "x -> y on P" or "{ }".
  std::string describe() const;

  bool same_task(const Task& other) const { return key() == other.key(); }

 private:
  Task() = default;
  std::optional<Attribute> input_;
  std::optional<Attribute> output_;
};

/// Serial composition a • b.
///
/// Chained tasks (a.output == b.input) give a.input -> b.output; disjoint
/// intermediate attributes give the null task, which is absorbing. Partial
/// overlap throws CompositionUndefined.
Task serial_compose(const Task& a, const Task& b);

/// (a.in, b.in) -> (a.out, b.out) on a.substrate ⊕ b.substrate.
Task parallel_compose(const Task& a, const Task& b);

enum class Status { Possible, Impossible };

const char* to_string(Status s);

struct Provenance {
  /// Empty for declared statements, otherwise "serial" or "parallel".
  std::string rule;
  /// Indices of the premises inside the owning LawSet.
  std::vector<std::size_t> premises;

  bool declared() const { return rule.empty(); }
};

struct LawStatement {
  Task task;
  Status status;
  Provenance provenance;
  /// Optional label from the declaring model.
  std::string label;
};

/// Declared possibility/impossibility statements plus derived facts.
class LawSet {
 public:
  std::size_t declare(Task task, Status status, std::string label = {});

  const std::vector<LawStatement>& statements() const { return statements_; }
  const LawStatement& at(std::size_t i) const { return statements_.at(i); }
  std::size_t size() const { return statements_.size(); }
  bool closed() const { return closed_; }
  /// Number of fixpoint rounds run by the closure that produced this set.
  std::size_t rounds() const { return rounds_; }

  /// Index of a statement for `task` with `status`, if any.
  std::optional<std::size_t> find(const Task& task, Status status) const;
  bool holds(const Task& task, Status status) const { return find(task, status).has_value(); }

  /// Declared statements whose premises trace back from statement i (i itself
  /// if declared), in index order.
  std::vector<std::size_t> declared_support(std::size_t i) const;
  /// Indented derivation tree of statement i.
  std::vector<std::string> trace(std::size_t i) const;

 private:
  friend LawSet deductive_closure(const LawSet& laws);
  std::size_t add(LawStatement s);

  std::vector<LawStatement> statements_;
  std::map<std::pair<std::string, Status>, std::size_t> index_;
  bool closed_ = false;
  std::size_t rounds_ = 0;
};

/// Least fixpoint of the declared Possible statements under serial and
/// parallel composition. Parallel composition pairs tasks on substrates named
/// by declared statements only; derived composites are not paired again.
LawSet deductive_closure(const LawSet& laws);

struct Contradiction {
  std::string task;
  std::size_t possible;
  std::size_t impossible;
  std::vector<std::string> possible_trace;
  std::vector<std::string> impossible_trace;
  /// Declared statements the Possible side rests on.
  std::vector<std::size_t> premises;
};

struct ConsistencyReport {
  std::vector<Contradiction> contradictions;
  bool consistent() const { return contradictions.empty(); }
};

/// Lists every task present with both statuses. Closes `laws` first if needed.
ConsistencyReport check_consistency(const LawSet& laws);

}  // namespace tasklaw
