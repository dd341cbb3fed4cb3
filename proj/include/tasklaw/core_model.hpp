#pragma once

// Finite operational semantics: substrates with reversible one-step
// evolution, attributes as state sets, composition and isolation.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tasklaw/errors.hpp"

namespace tasklaw {

using StateId = std::uint32_t;
using StepCount = std::uint64_t;

/// Upper bound on the number of states of any substrate, composite included.
inline constexpr std::size_t kMaxStates = std::size_t{1} << 22;

/// A finite, ordered set of uniquely labelled states.
class StateSpace {
 public:
  StateSpace() = default;
  StateSpace(std::string id, std::vector<std::string> labels);

  const std::string& id() const { return id_; }
  std::size_t size() const { return labels_.size(); }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::string& label(StateId s) const { return labels_.at(s); }

  /// Throws ModelError for labels not in the space.
  StateId index_of(std::string_view label) const;
  bool contains(std::string_view label) const;

 private:
  std::string id_;
  std::vector<std::string> labels_;
  std::unordered_map<std::string, StateId> index_;
};

/// A physical system: a state space plus its isolated one-step evolution.
///
/// Substrates are immutable shared values. Two atomic substrates are the same
/// instance only if one was copied from the other; `instantiate()` makes a
/// structurally identical but distinct instance. Composite states are indexed
/// `first * |second| + second`.
class Substrate {
 public:
  /// `step[i]` is the successor of state i; must be a bijection.
  Substrate(std::string name, StateSpace space, std::vector<StateId> step);

  /// Identity dynamics on `labels`.
  static Substrate with_identity(std::string name, std::vector<std::string> labels);
  /// States 0..n-1 labelled by number, step i -> (i + shift) mod n.
  static Substrate rotation(std::string name, std::size_t n, std::size_t shift);

  const std::string& name() const { return data_->name; }
  const StateSpace& space() const { return data_->space; }
  std::size_t size() const { return data_->space.size(); }
  std::span<const StateId> step_map() const { return data_->step; }
  StateId step(StateId s) const { return data_->step[s]; }
  StateId preimage(StateId s) const { return data_->inverse[s]; }

  bool is_composite() const { return !data_->children.empty(); }
  const Substrate& first() const;
  const Substrate& second() const;
  /// Non-empty for halt-defined composites such as timer brackets.
  const std::string& tag() const { return data_->tag; }

  /// Length of the step cycle through `s`.
  StepCount cycle_length(StateId s) const;
  /// Least common multiple of all cycle lengths.
  StepCount period() const { return data_->period; }
  const std::vector<std::vector<StateId>>& cycles() const { return data_->cycles; }

  /// Structurally identical copy with a fresh identity.
  Substrate instantiate() const;
  /// Same substrate but distinguished by `tag` (composites only).
  Substrate tagged(std::string tag) const;

  /// Instance identity: same atomic instances, same tags, same shape.
  bool same_instance(const Substrate& other) const;
  /// True if some atomic component instance appears in both.
  bool shares_atom(const Substrate& other) const;
  /// Stable key identifying the instance within a process.
  std::string key() const;

  std::string label(StateId s) const { return space().label(s); }
  StateId state(std::string_view label) const { return space().index_of(label); }

 private:
  struct Data {
    std::string name;
    StateSpace space;
    std::vector<StateId> step;
    std::vector<StateId> inverse;
    std::vector<std::vector<StateId>> cycles;
    std::vector<std::uint32_t> cycle_of;
    std::vector<std::uint32_t> position;
    StepCount period = 1;
    std::vector<Substrate> children;
    std::string tag;
    std::uint64_t serial = 0;
  };

  Substrate() = default;
  void finish(std::shared_ptr<Data> d);
  void collect_atoms(std::vector<std::uint64_t>& out) const;

  std::shared_ptr<const Data> data_;

  friend Substrate compose_substrates(const Substrate& a, const Substrate& b);
  friend StateId evolve(const Substrate& s, StateId state, StepCount n);
};

/// A named set of states of one substrate. Members are kept sorted.
class Attribute {
 public:
  Attribute(std::string name, Substrate substrate, std::vector<StateId> members);
  static Attribute from_labels(std::string name, const Substrate& substrate,
                               const std::vector<std::string>& labels);
  static Attribute full(const Substrate& substrate);

  const std::string& name() const { return name_; }
  const Substrate& substrate() const { return substrate_; }
  const std::vector<StateId>& members() const { return members_; }
  bool contains(StateId s) const { return mask_[s]; }
  bool empty() const { return members_.empty(); }
  std::size_t size() const { return members_.size(); }

  Attribute renamed(std::string name) const;
  /// The same member indices on another instance of an identical state space.
  Attribute rehomed(const Substrate& other) const;
  Attribute complement(std::string name) const;

  bool intersects(const Attribute& other) const;
  /// Same substrate instance and same members; names are ignored.
  bool same_set(const Attribute& other) const;

 private:
  std::string name_;
  Substrate substrate_;
  std::vector<StateId> members_;
  std::vector<bool> mask_;
};

/// A variable: disjoint attributes indexed by an integer parameter.
struct Variable {
  std::string name;
  Substrate substrate;
  std::map<std::int64_t, Attribute> entries;
  /// Entries allowed to be static (e.g. a stopped pointer).
  std::vector<std::int64_t> static_entries;

  /// Throws ModelError if entries overlap, live on another substrate or are
  /// static without being flagged.
  void validate() const;
  const Attribute& at(std::int64_t lambda) const;
  bool has(std::int64_t lambda) const { return entries.count(lambda) != 0; }
};

/// Product substrate a ⊕ b; rejects operands sharing an atomic instance.
Substrate compose_substrates(const Substrate& a, const Substrate& b);

/// Attribute (x, y) on composite = x.substrate ⊕ y.substrate.
Attribute pair_attributes(const Substrate& composite, const Attribute& x, const Attribute& y);

/// n-fold application of the step map. Model-internal; exported verdicts
/// never depend on a global time parameter.
StateId evolve(const Substrate& s, StateId state, StepCount n);
std::string evolve(const Substrate& s, std::string_view label, StepCount n);

/// Image of x under one step equals x.
bool is_static(const Attribute& x);

/// Every trajectory entering x stays in x for at least `horizon` more steps.
bool is_static_for_horizon(const Attribute& x, StepCount horizon);

/// Largest horizon for which is_static_for_horizon holds; nullopt if static.
std::optional<StepCount> static_horizon(const Attribute& x);

/// Pairwise disjoint. Throws PreconditionError for fewer than two attributes
/// or attributes on different substrates.
bool are_distinguishable(std::span<const Attribute> xs);

}  // namespace tasklaw
