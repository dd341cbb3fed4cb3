#pragma once

// Timers: null constructors with starting (0), running (R) and completed (1)
// attributes plus a halt flag, and the duration relation between them.

#include <optional>
#include <string>
#include <vector>

#include "tasklaw/core_model.hpp"

namespace tasklaw {

enum class TimerKind { Counter, Particle, Custom, Composite };

const char* to_string(TimerKind k);

/// A substrate with the attribute structure of a null constructor.
///
/// The duration is derived: the step at which every starting state has
/// entered `one`. The horizon is how long `one` must hold after completion;
/// it defaults to the dwell of the run in `one`.
class TimerSpec {
 public:
  TimerSpec(std::string name, TimerKind kind, Attribute zero, Attribute running, Attribute one,
            Attribute halt, std::optional<StepCount> horizon = std::nullopt);

  const std::string& name() const { return name_; }
  TimerKind kind() const { return kind_; }
  const Substrate& substrate() const { return zero_.substrate(); }
  const Attribute& zero() const { return zero_; }
  const Attribute& running() const { return running_; }
  const Attribute& one() const { return one_; }
  const Attribute& halt() const { return halt_; }

  bool has_duration() const { return duration_.has_value(); }
  /// Throws PreconditionError if some starting state never completes.
  StepCount duration() const;
  StepCount horizon() const { return horizon_; }
  /// Duration of every starting state agrees.
  bool uniform_duration() const { return uniform_; }

  /// Same attribute choices on a fresh instance of the substrate.
  TimerSpec instantiate() const;
  TimerSpec renamed(std::string name) const;

  /// Human-readable parameters, e.g. "bits=4 threshold=5".
  const std::string& parameters() const { return parameters_; }
  void set_parameters(std::string p) { parameters_ = std::move(p); }

 private:
  std::string name_;
  TimerKind kind_;
  Attribute zero_, running_, one_, halt_;
  std::optional<StepCount> duration_;
  StepCount horizon_ = 0;
  bool uniform_ = false;
  std::string parameters_;
};

/// N-bit counter incrementing mod 2^N; 0 = {0}, R = {1..T-1}, 1 = {T..2^N-1}.
TimerSpec make_counter_timer(unsigned bits, StepCount threshold, std::string name = {});
/// The same, on an existing counter substrate (several attribute choices on
/// one substrate).
TimerSpec make_counter_timer_on(const Substrate& counter, StepCount threshold, std::string name = {});

/// Particle on a wrapping grid moving `velocity` cells per step; 0 = {0},
/// R = cells strictly between 0 and `target`, 1 = cells from `target` on.
TimerSpec make_particle_timer(std::size_t grid, std::size_t velocity, std::size_t target,
                              std::string name = {});

/// The composite c1 ⊕ c2 as a timer halting with c1: its completed attribute
/// is (1, R) when c1 is strictly shorter, (1, 1) when durations agree.
/// Requires duration(c1) <= duration(c2).
TimerSpec composite_timer(const TimerSpec& c1, const TimerSpec& c2, std::string name = {});

/// From every state of (0, 0) the composite halts (with c1) in (1, R) and
/// never in (1, 1). Throws PreconditionError for equal durations; false when
/// c1 is the longer timer.
bool check_staggered_halt(const TimerSpec& c1, const TimerSpec& c2);

/// From every state of (0, 0) both components enter 1 at the same step.
bool check_simultaneous_halt(const TimerSpec& c1, const TimerSpec& c2);

/// A duration class: timers that pairwise halt simultaneously.
struct TimerClass {
  StepCount duration = 0;
  std::vector<TimerSpec> members;
};

/// Partition of `catalog` by simultaneous halting, sorted by duration, members
/// sorted by name. Throws PreconditionError if a member fails validation.
std::vector<TimerClass> classify_timers(const std::vector<TimerSpec>& catalog);

/// Two isolated instances started on the diagonal stay on it up to the
/// recurrence horizon (or `horizon` if given).
bool check_synchrony(const TimerSpec& c, std::optional<StepCount> horizon = std::nullopt);
/// As above for an explicit pair; throws PreconditionError unless c2 is an
/// instance of the same timer.
bool check_synchrony(const TimerSpec& c1, const TimerSpec& c2,
                     std::optional<StepCount> horizon = std::nullopt);

/// Least k > 0 returning the first starting state to `zero`.
StepCount recurrence_horizon(const TimerSpec& c);

struct NullConstructorCheck {
  std::string name;
  bool ok = false;
  std::string detail;
};

struct NullConstructorReport {
  std::vector<NullConstructorCheck> checks;
  bool ok() const;
  /// Names of failed checks.
  std::vector<std::string> failures() const;
};

/// Checks the null-constructor attribute structure one property at a time.
NullConstructorReport validate_null_constructor(const TimerSpec& c);

}  // namespace tasklaw
