#pragma once

// Small reference models built in code, shared by tests, the acceptance
// suite and the model generator.

#include <vector>

#include "tasklaw/constructor_engine.hpp"
#include "tasklaw/dynamics.hpp"
#include "tasklaw/task_algebra.hpp"
#include "tasklaw/timers.hpp"

namespace tasklaw::fixtures {

/// {a -> b} and {c -> d} on one 4-state substrate with b and c disjoint.
struct NullTaskLaws {
  Substrate substrate;
  Task first;
  Task second;
  LawSet laws;
};
NullTaskLaws null_task_laws();

/// Three states with identity dynamics; g1 and g2 are separated only by an
/// external device that swaps them.
struct DegeneratePair {
  Substrate substrate;
  Attribute x;
  Attribute y;
  ConstructorWitness witness;
};
DegeneratePair degenerate_pair();

/// Flip {a <-> b} and flip {b <-> c}, each on its own 3-state instance.
std::vector<MemberTask> flip_family();

/// Cell-indexed pointer on a rotating ring; readings from `reading`.
TrajectoryModel ring_pointer(const std::string& name, std::size_t cells, std::size_t velocity,
                             double (*reading)(std::int64_t));
/// 64 cells, one cell per step, v(λ) = sin(2πλ/64).
TrajectoryModel rotation_model();
/// 32 cells, one cell per step, v(λ) = λ.
TrajectoryModel linear_drift_model();
inline constexpr double kRotationOmega = 2.0 * 3.14159265358979323846 / 64.0;

/// counter(4, d) for d = 1..8.
std::vector<TimerSpec> duration_catalog(StepCount longest = 8);

/// A rotating dial of `size` cells and the task {0} -> {target} on it.
struct Dial {
  Substrate substrate;
  Task task;
};
Dial dial(std::size_t size, StateId target);

/// A counter of `bits` bits stopping the dial at `threshold + offset` cells.
ApproximateConstructor dial_constructor(const Dial& d, unsigned bits, StepCount threshold,
                                        std::vector<std::int64_t> drift = {0});

/// Members N = 2..6: thresholds at the multiple of 2^(8-N) nearest 85 on a
/// 256-cell dial.
WitnessFamily resolution_family(const Dial& d);
/// Every member stops at cell 64.
WitnessFamily constant_family(const Dial& d);

}  // namespace tasklaw::fixtures
