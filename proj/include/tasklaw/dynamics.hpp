#pragma once

// Rates of change of a variable read off timed transitions on
// substrate ⊕ timer, and their forward-difference limit.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tasklaw/core_model.hpp"
#include "tasklaw/timers.hpp"

namespace tasklaw {

/// A variable together with the numeric reading attached to each attribute.
struct TrajectoryModel {
  Variable variable;
  std::map<std::int64_t, double> values;

  const Substrate& substrate() const { return variable.substrate; }
  /// Throws ModelError if the variable is invalid or a reading is missing.
  void validate() const;
  double value(std::int64_t lambda) const;
};

struct TransitionCheck {
  bool holds = false;
  std::int64_t lambda = 0;
  std::int64_t delta = 0;
  std::string timer;
  /// First start state that misses the target, if any.
  std::string detail;
};

/// Every state of (x, 0) evolved in isolation on P ⊕ C is in (x2, 1) at the
/// step the timer raises its halt flag.
bool check_timed_transition(const Attribute& x, const Attribute& x2, const TimerSpec& timer);

/// The transition V(λ) -> V(λ + duration) timed by `timer`. Throws
/// PreconditionError if λ or λ + duration is outside the variable's domain.
TransitionCheck check_timed_transition(const TrajectoryModel& m, const TimerSpec& timer,
                                       std::int64_t lambda);

/// (v(λ + Δλ) - v(λ)) / Δλ with Δλ the timer's duration. Refuses (throws
/// PreconditionError) unless the timed transition holds.
double incremental_ratio(const TrajectoryModel& m, const TimerSpec& timer, std::int64_t lambda);

/// First timer of `catalog` by name with the given duration that passes
/// null-constructor validation. Throws PreconditionError if none.
const TimerSpec& timer_for_duration(const std::vector<TimerSpec>& catalog, StepCount duration);

struct DerivativeEstimate {
  std::int64_t lambda = 0;
  std::vector<std::int64_t> schedule;
  std::vector<std::string> timers;
  std::vector<double> ratios;
  /// Intercept L of the least-squares fit ratio ≈ L + slope·Δλ.
  double extrapolated = 0.0;
  double slope = 0.0;
  /// Slope of log|ratio - L| against log Δλ; nullopt when the residuals vanish.
  std::optional<double> order;
  double max_residual = 0.0;
};

/// Ratios over a strictly decreasing positive schedule (at least 3 points),
/// each timed by a cataloged timer. Throws PreconditionError on a bad
/// schedule or a failing transition, naming the failing (λ, Δλ).
DerivativeEstimate estimate_derivative(const TrajectoryModel& m, std::int64_t lambda,
                                       const std::vector<std::int64_t>& schedule,
                                       const std::vector<TimerSpec>& catalog);

/// "delta,ratio" rows, one per schedule point.
std::string to_csv(const DerivativeEstimate& e);

struct PointerEntry {
  std::int64_t lambda = 0;
  /// Duration of the shortest class timing V(0) -> V(λ); 0 at the origin.
  std::optional<StepCount> duration;
  /// First member of that class.
  std::string timer;
  /// Longer classes reaching the same reading after the pointer wrapped;
  /// at the origin, every class returning to it.
  std::vector<StepCount> aliases;
};

struct ClockPointer {
  std::vector<PointerEntry> entries;
  std::vector<std::int64_t> unmapped;
  /// Difference between a reading's first alias and its duration, if any wrap occurred.
  std::optional<StepCount> wrap_period;
};

/// Pointer readings of a clock variable in units of timer duration classes.
/// Requires λ = 0 in the domain.
ClockPointer recover_clock_pointer(const TrajectoryModel& m, const std::vector<TimerClass>& classes);

}  // namespace tasklaw
