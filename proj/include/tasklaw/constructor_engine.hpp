#pragma once

// Operational verification of possibility: constructor witnesses running on
// device ⊕ substrate, accuracy and reliability of approximate constructors,
// possible-in-the-limit checks and budgeted exhaustive witness search.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "tasklaw/core_model.hpp"
#include "tasklaw/task_algebra.hpp"
#include "tasklaw/timers.hpp"

namespace tasklaw {

/// Where the completion indication lives.
enum class FlagSite { Device, Substrate };

const char* to_string(FlagSite s);

/// A finite device together with its joint dynamics with a substrate.
///
/// Joint states are indexed `device * |substrate| + substrate`. A run starts
/// from every `ready` device state whose own halt flag is lowered, halts at
/// the first joint state inside the halt flag, and must then have the device
/// back in `ready`.
class ConstructorWitness {
 public:
  using JointStep = std::function<std::pair<StateId, StateId>(StateId device, StateId substrate)>;

  /// `halt_flag` lives on `device` or on `substrate`. Throws ModelError if the
  /// joint step is not a bijection or no start state exists.
  ConstructorWitness(Substrate device, Attribute ready, Attribute halt_flag, Substrate substrate,
                     const JointStep& joint_step, StepCount max_steps);

  const Substrate& device() const { return device_; }
  const Substrate& substrate() const { return substrate_; }
  const Attribute& ready() const { return ready_; }
  const Attribute& halt_flag() const { return halt_flag_; }
  FlagSite flag_site() const { return site_; }
  StepCount max_steps() const { return max_steps_; }
  std::size_t joint_size() const { return joint_.size(); }
  StateId joint(StateId s) const { return joint_[s]; }

  /// Device states a run may start from.
  std::vector<StateId> start_states() const;
  bool flag_raised(StateId joint_state) const;

  /// Short description used in reports.
  std::string describe() const;
  void set_description(std::string d) { description_ = std::move(d); }

 private:
  Substrate device_;
  Attribute ready_;
  Attribute halt_flag_;
  Substrate substrate_;
  FlagSite site_;
  std::vector<StateId> joint_;
  StepCount max_steps_;
  std::string description_;
};

enum class FailReason { Timeout, WrongOutput, CycleBroken };

const char* to_string(FailReason r);

struct HaltRecord {
  std::string device_start;
  std::string input;
  std::optional<StepCount> halt_step;
  std::string final_substrate;
  std::string final_device;
};

struct VerifyReport {
  bool performs = false;
  /// First failure in enumeration order.
  std::optional<FailReason> reason;
  std::string failing_state;
  std::vector<HaltRecord> runs;
  bool cycle_ok = true;
  FlagSite flag_site = FlagSite::Device;
};

/// Performs iff from every start and every input state the halt flag is
/// raised within max_steps with the substrate in the output and the device
/// back in ready.
VerifyReport verify_witness(const ConstructorWitness& w, const Task& t);
/// All clauses at once (e.g. both directions of a flip).
VerifyReport verify_witness(const ConstructorWitness& w, const std::vector<Task>& clauses);
/// The null task has no substrate: its constructor is a timer, checked as a
/// null constructor.
NullConstructorReport verify_null_constructor(const TimerSpec& timer);

/// A timer used as the device while the substrate evolves in isolation
/// beside it. Ready = 0 ∪ 1, so runs start in 0 and end with the flag raised.
ConstructorWitness timer_witness(const TimerSpec& timer, const Substrate& substrate,
                                 StepCount max_steps);

/// Normalized distance from a state to an attribute: undirected step-graph
/// distance divided by |states|, 1 if unreachable, 0 for members.
double state_distance(const Attribute& target, StateId s);

/// Worst-case distance of the halt state from the output over all runs.
/// nullopt if some run does not halt within max_steps.
std::optional<double> accuracy(const ConstructorWitness& w, const Task& t);

/// A witness family parametrised by an integer drift, deteriorating by a
/// deterministic per-reuse increment sequence (applied cyclically).
struct ApproximateConstructor {
  std::function<ConstructorWitness(std::int64_t offset)> build;
  std::vector<std::int64_t> drift{0};
};

/// Accuracy at each of n successive reuses.
std::vector<std::optional<double>> reliability(const ApproximateConstructor& a, const Task& t,
                                               std::size_t reuses);

struct WitnessFamily {
  /// Strictly increasing indices.
  std::vector<std::pair<std::int64_t, ApproximateConstructor>> members;
};

enum class LimitVerdict { PossibleInLimit, NotEstablished };

const char* to_string(LimitVerdict v);

struct LimitReport {
  LimitVerdict verdict = LimitVerdict::NotEstablished;
  std::vector<std::optional<double>> accuracies;
  std::string reason;
};

/// PossibleInLimit iff accuracies over the prefix are non-increasing, the
/// last is below tol, and entry k keeps within tol of its single-use accuracy
/// over max(1, index) reuses. Never reports impossibility. Throws
/// PreconditionError for prefixes shorter than 3 or non-increasing indices.
LimitReport check_possible_in_limit(const WitnessFamily& f, const Task& t, double tol);

// ------------------------------------------------------------------ search

inline constexpr std::size_t kMaxSearchSubstrate = 6;
inline constexpr std::size_t kMaxSearchDevice = 4;

struct SearchCertificate {
  std::size_t substrate_states = 0;
  std::size_t device_budget = 0;
  StepCount step_bound = 0;
  /// Candidates verified explicitly, per device size.
  std::vector<std::pair<std::size_t, std::uint64_t>> enumerated;
  /// Device sizes covered by the composition argument rather than enumeration.
  std::vector<std::size_t> reduced;
  /// Distinct net substrate permutations examined.
  std::uint64_t distinct_effects = 0;
};

struct SearchResult {
  std::optional<ConstructorWitness> witness;
  SearchCertificate certificate;
  bool found() const { return witness.has_value(); }
};

/// Exhaustive search over controller witnesses: a cyclic controller of d
/// states (1 <= d <= budget) applying a chosen substrate permutation in each
/// phase. Returns the first witness in (d, permutation ranks) order.
/// Throws PreconditionError beyond 6 substrate states or 4 device states.
SearchResult search_impossibility(const Task& t, std::size_t device_budget, StepCount step_bound);
SearchResult search_impossibility(const std::vector<Task>& clauses, std::size_t device_budget,
                                  StepCount step_bound);

/// The controller witness for a device size and per-phase permutations.
ConstructorWitness controller_witness(const Substrate& substrate, const Attribute& output_flag,
                                      const std::vector<std::vector<StateId>>& phases,
                                      StepCount max_steps);

// ---------------------------------------------------- uniform possibility

/// One member of a family: the clauses a constructor must effect on it.
struct MemberTask {
  std::string label;
  std::vector<Task> clauses;
};

enum class Uniformity { UniformlyPossible, PointwiseOnly, Impossible };

const char* to_string(Uniformity u);

struct UniformReport {
  Uniformity verdict = Uniformity::Impossible;
  std::optional<ConstructorWitness> witness;
  SearchCertificate certificate;
  std::vector<bool> member_possible;
};

/// Whether one uninformed witness performs every member's task. All members
/// must share the same state count. Verdicts are relative to the budget.
UniformReport check_uniform_possibility(const std::vector<MemberTask>& family,
                                        std::size_t device_budget, StepCount step_bound = 16);

}  // namespace tasklaw
