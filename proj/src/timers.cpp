#include "tasklaw/timers.hpp"

#include <algorithm>
#include <array>
#include <tuple>

namespace tasklaw {

namespace {

constexpr unsigned kMaxCounterBits = 20;

// First k in [0, bound] with the trajectory of s inside `target`.
std::optional<StepCount> first_entry(const Substrate& sub, StateId s, const Attribute& target,
                                     StepCount bound) {
  for (StepCount k = 0; k <= bound; ++k) {
    if (target.contains(s)) return k;
    s = sub.step(s);
  }
  return std::nullopt;
}

struct Run {
  StepCount completion = 0;
  StepCount dwell = 0;
};

// Completion step of a starting state and how long `one` then holds.
std::optional<Run> run_from(const Substrate& sub, StateId s, const Attribute& one) {
  const StepCount len = sub.cycle_length(s);
  auto k = first_entry(sub, s, one, len);
  if (!k) return std::nullopt;
  Run r{*k, 0};
  StateId t = evolve(sub, s, *k);
  for (StepCount i = 0; i < len; ++i) {
    t = sub.step(t);
    if (!one.contains(t)) break;
    ++r.dwell;
  }
  return r;
}

// Second timer on its own instance when both share a substrate.
TimerSpec separate(const TimerSpec& c1, const TimerSpec& c2) {
  return c1.substrate().shares_atom(c2.substrate()) ? c2.instantiate() : c2;
}

auto canonical_key(const TimerSpec& t) {
  return std::make_tuple(t.name(), static_cast<int>(t.kind()), t.parameters(),
                         t.has_duration() ? t.duration() : 0, t.substrate().size(),
                         t.zero().members(), t.running().members(), t.one().members(),
                         t.halt().members());
}

}  // namespace

const char* to_string(TimerKind k) {
  switch (k) {
    case TimerKind::Counter: return "counter";
    case TimerKind::Particle: return "particle";
    case TimerKind::Custom: return "custom";
    case TimerKind::Composite: return "composite";
  }
  return "custom";
}

// ----------------------------------------------------------------- TimerSpec

TimerSpec::TimerSpec(std::string name, TimerKind kind, Attribute zero, Attribute running,
                     Attribute one, Attribute halt, std::optional<StepCount> horizon)
    : name_(std::move(name)),
      kind_(kind),
      zero_(std::move(zero)),
      running_(std::move(running)),
      one_(std::move(one)),
      halt_(std::move(halt)) {
  const Substrate& sub = zero_.substrate();
  for (const Attribute* a : {&running_, &one_, &halt_}) {
    if (!a->substrate().same_instance(sub)) {
      throw ModelError("timer '" + name_ + "': attribute '" + a->name() +
                       "' is not on the timer substrate");
    }
  }

  std::optional<StepCount> longest;
  std::optional<StepCount> shortest_dwell;
  bool uniform = true;
  bool complete = !zero_.empty();
  for (StateId s : zero_.members()) {
    auto r = run_from(sub, s, one_);
    if (!r) {
      complete = false;
      break;
    }
    if (longest && *longest != r->completion) uniform = false;
    longest = std::max(longest.value_or(0), r->completion);
    shortest_dwell = std::min(shortest_dwell.value_or(r->dwell), r->dwell);
  }
  if (complete) {
    duration_ = longest;
    uniform_ = uniform;
  }
  horizon_ = horizon.value_or(shortest_dwell.value_or(0));
}

StepCount TimerSpec::duration() const {
  if (!duration_) {
    throw PreconditionError("timer '" + name_ + "' never completes from its starting attribute");
  }
  return *duration_;
}

TimerSpec TimerSpec::instantiate() const {
  const Substrate fresh = substrate().instantiate();
  TimerSpec out(name_, kind_, zero_.rehomed(fresh), running_.rehomed(fresh), one_.rehomed(fresh),
                halt_.rehomed(fresh), horizon_);
  out.parameters_ = parameters_;
  return out;
}

TimerSpec TimerSpec::renamed(std::string name) const {
  TimerSpec out = *this;
  out.name_ = std::move(name);
  return out;
}

// -------------------------------------------------------------- constructors

TimerSpec make_counter_timer(unsigned bits, StepCount threshold, std::string name) {
  if (bits < 1 || bits > kMaxCounterBits) {
    throw PreconditionError("counter bit count must be in [1, " +
                            std::to_string(kMaxCounterBits) + "], got " + std::to_string(bits));
  }
  const StepCount size = StepCount{1} << bits;
  if (threshold < 1 || threshold >= size) {
    throw PreconditionError("counter threshold " + std::to_string(threshold) +
                            " outside [1, " + std::to_string(size - 1) + "]");
  }
  if (name.empty()) {
    name = "counter(" + std::to_string(bits) + "," + std::to_string(threshold) + ")";
  }
  const Substrate sub = Substrate::rotation(name, size, 1);
  TimerSpec t = make_counter_timer_on(sub, threshold, name);
  t.set_parameters("bits=" + std::to_string(bits) + " threshold=" + std::to_string(threshold));
  return t;
}

TimerSpec make_counter_timer_on(const Substrate& counter, StepCount threshold, std::string name) {
  const StepCount size = counter.size();
  if (threshold < 1 || threshold >= size) {
    throw PreconditionError("counter threshold " + std::to_string(threshold) +
                            " outside [1, " + std::to_string(size - 1) + "]");
  }
  if (name.empty()) name = counter.name() + "@" + std::to_string(threshold);
  std::vector<StateId> running, one;
  for (StateId s = 1; s < threshold; ++s) running.push_back(s);
  for (StateId s = static_cast<StateId>(threshold); s < size; ++s) one.push_back(s);
  Attribute one_attr("1", counter, one);
  TimerSpec t(name, TimerKind::Counter, Attribute("0", counter, {0}),
              Attribute("R", counter, std::move(running)), one_attr, one_attr.renamed("halt"));
  t.set_parameters("threshold=" + std::to_string(threshold));
  return t;
}

TimerSpec make_particle_timer(std::size_t grid, std::size_t velocity, std::size_t target,
                              std::string name) {
  if (grid < 2 || grid > (std::size_t{1} << kMaxCounterBits)) {
    throw PreconditionError("particle grid size " + std::to_string(grid) + " out of range");
  }
  if (velocity < 1 || velocity >= grid) {
    throw PreconditionError("particle velocity must be in [1, grid)");
  }
  if (target < 1 || target >= grid) {
    throw PreconditionError("particle target must be in [1, grid)");
  }
  if (target % velocity != 0) {
    throw PreconditionError("target cell " + std::to_string(target) +
                            " is not reachable in whole steps at velocity " +
                            std::to_string(velocity));
  }
  if (name.empty()) {
    name = "particle(" + std::to_string(grid) + "," + std::to_string(velocity) + "," +
           std::to_string(target) + ")";
  }
  const Substrate sub = Substrate::rotation(name, grid, velocity);
  std::vector<StateId> running, one;
  for (StateId s = 1; s < target; ++s) running.push_back(s);
  for (StateId s = static_cast<StateId>(target); s < grid; ++s) one.push_back(s);
  Attribute one_attr("1", sub, one);
  TimerSpec t(name, TimerKind::Particle, Attribute("0", sub, {0}),
              Attribute("R", sub, std::move(running)), one_attr, one_attr.renamed("halt"));
  t.set_parameters("grid=" + std::to_string(grid) + " velocity=" + std::to_string(velocity) +
                   " target=" + std::to_string(target));
  return t;
}

TimerSpec composite_timer(const TimerSpec& c1, const TimerSpec& c2, std::string name) {
  if (c1.duration() > c2.duration()) {
    throw PreconditionError("composite timer needs duration('" + c1.name() +
                            "') <= duration('" + c2.name() + "')");
  }
  const TimerSpec second = separate(c1, c2);
  if (name.empty()) name = "[" + c1.name() + " + " + c2.name() + "]";
  const Substrate sub = compose_substrates(c1.substrate(), second.substrate()).tagged(name);
  const bool equal = c1.duration() == second.duration();
  const Attribute one = equal ? pair_attributes(sub, c1.one(), second.one())
                              : pair_attributes(sub, c1.one(), second.running());
  TimerSpec t(name, TimerKind::Composite, pair_attributes(sub, c1.zero(), second.zero()),
              pair_attributes(sub, c1.running(), second.running()), one,
              pair_attributes(sub, c1.halt(), Attribute::full(second.substrate())));
  t.set_parameters("first=" + c1.name() + " second=" + c2.name());
  return t;
}

// ----------------------------------------------------------- duration checks

bool check_staggered_halt(const TimerSpec& c1, const TimerSpec& c2) {
  const StepCount d1 = c1.duration();
  const StepCount d2 = c2.duration();
  if (d1 == d2) {
    throw PreconditionError("'" + c1.name() + "' and '" + c2.name() +
                            "' have equal durations; use check_simultaneous_halt");
  }
  if (d1 > d2) return false;
  const TimerSpec second = separate(c1, c2);
  const Substrate sub = compose_substrates(c1.substrate(), second.substrate());
  const std::size_t nb = second.substrate().size();
  for (StateId a : c1.zero().members()) {
    const StepCount bound = c1.substrate().cycle_length(a);
    for (StateId b : second.zero().members()) {
      StateId s = static_cast<StateId>(a * nb + b);
      bool halted = false;
      for (StepCount k = 0; k <= bound && !halted; ++k, s = sub.step(s)) {
        const StateId i = static_cast<StateId>(s / nb);
        const StateId j = static_cast<StateId>(s % nb);
        if (!c1.halt().contains(i)) continue;
        halted = true;
        if (!c1.one().contains(i) || !second.running().contains(j) || second.one().contains(j)) {
          return false;
        }
      }
      if (!halted) return false;
    }
  }
  return true;
}

bool check_simultaneous_halt(const TimerSpec& c1, const TimerSpec& c2) {
  const TimerSpec second = separate(c1, c2);
  const Substrate sub = compose_substrates(c1.substrate(), second.substrate());
  const std::size_t nb = second.substrate().size();
  if (c1.zero().empty() || second.zero().empty()) return false;
  for (StateId a : c1.zero().members()) {
    for (StateId b : second.zero().members()) {
      const StepCount bound =
          std::max(c1.substrate().cycle_length(a), second.substrate().cycle_length(b));
      std::optional<StepCount> k1, k2;
      StateId s = static_cast<StateId>(a * nb + b);
      for (StepCount k = 0; k <= bound && !(k1 && k2); ++k, s = sub.step(s)) {
        if (!k1 && c1.one().contains(static_cast<StateId>(s / nb))) k1 = k;
        if (!k2 && second.one().contains(static_cast<StateId>(s % nb))) k2 = k;
      }
      if (!k1 || !k2 || *k1 != *k2) return false;
    }
  }
  return true;
}

std::vector<TimerClass> classify_timers(const std::vector<TimerSpec>& catalog) {
  if (catalog.empty()) throw PreconditionError("cannot classify an empty catalog");
  for (const auto& t : catalog) {
    const auto report = validate_null_constructor(t);
    if (!report.ok()) {
      std::string why;
      for (const auto& f : report.failures()) why += (why.empty() ? "" : ", ") + f;
      throw PreconditionError("timer '" + t.name() + "' is not a valid timer: " + why);
    }
  }
  std::vector<TimerSpec> sorted = catalog;
  std::sort(sorted.begin(), sorted.end(), [](const TimerSpec& a, const TimerSpec& b) {
    return canonical_key(a) < canonical_key(b);
  });

  std::vector<TimerClass> classes;
  for (const auto& t : sorted) {
    auto home = std::find_if(classes.begin(), classes.end(), [&](const TimerClass& c) {
      return std::all_of(c.members.begin(), c.members.end(),
                         [&](const TimerSpec& m) { return check_simultaneous_halt(m, t); });
    });
    if (home == classes.end()) {
      classes.push_back(TimerClass{t.duration(), {t}});
    } else {
      home->members.push_back(t);
    }
  }
  std::stable_sort(classes.begin(), classes.end(),
                   [](const TimerClass& a, const TimerClass& b) { return a.duration < b.duration; });
  return classes;
}

// ------------------------------------------------------- synchrony, recurrence

bool check_synchrony(const TimerSpec& c, std::optional<StepCount> horizon) {
  return check_synchrony(c, c.instantiate(), horizon);
}

bool check_synchrony(const TimerSpec& c1, const TimerSpec& c2, std::optional<StepCount> horizon) {
  const auto same_structure = c1.substrate().space().labels() == c2.substrate().space().labels() &&
                              std::ranges::equal(c1.substrate().step_map(), c2.substrate().step_map()) &&
                              c1.zero().members() == c2.zero().members() &&
                              c1.running().members() == c2.running().members() &&
                              c1.one().members() == c2.one().members() &&
                              c1.halt().members() == c2.halt().members();
  if (!same_structure) {
    throw PreconditionError("synchrony needs two instances of one timer; '" + c1.name() +
                            "' and '" + c2.name() + "' differ");
  }
  const TimerSpec second = separate(c1, c2);
  const Substrate sub = compose_substrates(c1.substrate(), second.substrate());
  const std::size_t n = c1.substrate().size();
  const StepCount limit = horizon.value_or(recurrence_horizon(c1));
  for (StateId a = 0; a < n; ++a) {
    StateId s = static_cast<StateId>(a * n + a);
    for (StepCount k = 1; k <= limit; ++k) {
      s = sub.step(s);
      if (s / n != s % n) return false;
    }
  }
  return true;
}

StepCount recurrence_horizon(const TimerSpec& c) {
  if (c.zero().empty()) {
    throw PreconditionError("timer '" + c.name() + "' has an empty starting attribute");
  }
  const Substrate& sub = c.substrate();
  const StateId start = c.zero().members().front();
  StateId s = start;
  const StepCount len = sub.cycle_length(start);
  for (StepCount k = 1; k <= len; ++k) {
    s = sub.step(s);
    if (c.zero().contains(s)) return k;
  }
  return len;
}

// ------------------------------------------------------------ null constructor

bool NullConstructorReport::ok() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.ok; });
}

std::vector<std::string> NullConstructorReport::failures() const {
  std::vector<std::string> out;
  for (const auto& c : checks) {
    if (!c.ok) out.push_back(c.name);
  }
  return out;
}

NullConstructorReport validate_null_constructor(const TimerSpec& c) {
  NullConstructorReport r;
  auto add = [&](std::string name, bool ok, std::string detail) {
    r.checks.push_back({std::move(name), ok, std::move(detail)});
  };
  const Substrate& sub = c.substrate();

  add("zero_preparable", !c.zero().empty(),
      c.zero().empty() ? "starting attribute is empty" : "");
  add("zero_non_static", !is_static(c.zero()),
      is_static(c.zero()) ? "starting attribute is invariant under isolated evolution" : "");
  // A one-step timer passes straight from 0 to 1 and has no running states.
  const bool single_step = c.running().empty() && c.has_duration() && c.duration() == 1;
  const bool running_static = !single_step && is_static(c.running());
  add("running_non_static", !running_static,
      !running_static       ? ""
      : c.running().empty() ? "running attribute is empty"
                            : "running attribute is invariant under isolated evolution");
  {
    const std::array<Attribute, 3> parts{c.zero(), c.running(), c.one()};
    const bool disjoint = are_distinguishable(parts);
    add("attributes_disjoint", disjoint, disjoint ? "" : "0, R and 1 overlap");
  }
  {
    const bool raised = !c.halt().empty();
    const bool lowered = c.halt().size() < sub.size();
    add("halt_distinguishable", raised && lowered,
        !raised ? "halt flag is never raised" : !lowered ? "halt flag is always raised" : "");
  }
  add("completes", c.has_duration(),
      c.has_duration() ? "" : "some starting state never reaches the completed attribute");
  add("uniform_duration", c.has_duration() && c.uniform_duration(),
      c.has_duration() && !c.uniform_duration() ? "starting states complete at different steps"
                                                : "");
  if (!c.has_duration()) {
    add("one_static_for_horizon", false, "no completion");
    add("run_order", false, "no completion");
    add("halt_at_completion", false, "no completion");
    return r;
  }

  const StepCount h = c.horizon();
  bool holds = true, ordered = true, halt_ok = true;
  std::string holds_detail, order_detail, halt_detail;
  for (StateId start : c.zero().members()) {
    const auto run = run_from(sub, start, c.one());
    if (run->dwell < h) {
      holds = false;
      holds_detail = "completed attribute left after " + std::to_string(run->dwell) +
                     " steps, horizon is " + std::to_string(h);
    }
    StateId s = start;
    std::optional<StepCount> raised;
    for (StepCount k = 0; k <= run->completion + h; ++k, s = sub.step(s)) {
      const bool in_place = k == 0                  ? c.zero().contains(s)
                            : k < run->completion   ? c.running().contains(s)
                                                    : c.one().contains(s);
      if (!in_place && ordered) {
        ordered = false;
        order_detail = "state '" + sub.label(s) + "' at step " + std::to_string(k) +
                       " is outside the expected 0 -> R -> 1 progression";
      }
      if (!raised && c.halt().contains(s)) raised = k;
    }
    if (!raised || *raised != run->completion) {
      halt_ok = false;
      halt_detail = raised ? "halt flag raised at step " + std::to_string(*raised) +
                                 ", completion at step " + std::to_string(run->completion)
                           : "halt flag not raised by completion";
    }
  }
  add("one_static_for_horizon", holds, holds_detail);
  add("run_order", ordered, order_detail);
  add("halt_at_completion", halt_ok, halt_detail);
  return r;
}

}  // namespace tasklaw
