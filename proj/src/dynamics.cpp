#include "tasklaw/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <charconv>

namespace tasklaw {

namespace {

std::string lambda_text(std::int64_t lambda, std::int64_t delta) {
  return "(lambda=" + std::to_string(lambda) + ", delta=" + std::to_string(delta) + ")";
}

// Ordinary least squares y ≈ a + b x.
std::pair<double, double> fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  const double b = sxx == 0 ? 0.0 : sxy / sxx;
  return {my - b * mx, b};
}

}  // namespace

void TrajectoryModel::validate() const {
  variable.validate();
  for (const auto& [lambda, attr] : variable.entries) {
    if (!values.count(lambda)) {
      throw ModelError("variable '" + variable.name + "' has no reading at lambda=" +
                       std::to_string(lambda));
    }
  }
}

double TrajectoryModel::value(std::int64_t lambda) const {
  auto it = values.find(lambda);
  if (it == values.end()) {
    throw PreconditionError("variable '" + variable.name + "' has no reading at lambda=" +
                            std::to_string(lambda));
  }
  return it->second;
}

bool check_timed_transition(const Attribute& x, const Attribute& x2, const TimerSpec& timer) {
  if (!x.substrate().same_instance(x2.substrate())) {
    throw PreconditionError("'" + x.name() + "' and '" + x2.name() + "' are on different substrates");
  }
  const TimerSpec c = x.substrate().shares_atom(timer.substrate()) ? timer.instantiate() : timer;
  const Substrate& p = x.substrate();
  const Substrate& t = c.substrate();
  for (StateId z : c.zero().members()) {
    const StepCount bound = t.cycle_length(z);
    for (StateId s : x.members()) {
      StateId a = s, b = z;
      bool halted = false;
      for (StepCount k = 0; k <= bound; ++k) {
        if (c.halt().contains(b)) {
          halted = true;
          break;
        }
        a = p.step(a);
        b = t.step(b);
      }
      if (!halted || !x2.contains(a) || !c.one().contains(b)) return false;
    }
  }
  return !c.zero().empty() && !x.empty();
}

TransitionCheck check_timed_transition(const TrajectoryModel& m, const TimerSpec& timer,
                                       std::int64_t lambda) {
  const StepCount d = timer.duration();
  if (d == 0) throw PreconditionError("timer '" + timer.name() + "' has zero duration");
  const auto delta = static_cast<std::int64_t>(d);
  if (!m.variable.has(lambda) || !m.variable.has(lambda + delta)) {
    throw PreconditionError("variable '" + m.variable.name + "' is undefined at " +
                            lambda_text(lambda, delta));
  }
  TransitionCheck r;
  r.lambda = lambda;
  r.delta = delta;
  r.timer = timer.name();
  const Attribute& x = m.variable.at(lambda);
  const Attribute& x2 = m.variable.at(lambda + delta);
  r.holds = check_timed_transition(x, x2, timer);
  if (!r.holds) {
    r.detail = "'" + x.name() + "' does not reach '" + x2.name() + "' when '" + timer.name() +
               "' halts";
  }
  return r;
}

double incremental_ratio(const TrajectoryModel& m, const TimerSpec& timer, std::int64_t lambda) {
  const TransitionCheck c = check_timed_transition(m, timer, lambda);
  if (!c.holds) {
    throw PreconditionError("timed transition fails at " + lambda_text(lambda, c.delta) + ": " +
                            c.detail);
  }
  return (m.value(lambda + c.delta) - m.value(lambda)) / static_cast<double>(c.delta);
}

const TimerSpec& timer_for_duration(const std::vector<TimerSpec>& catalog, StepCount duration) {
  const TimerSpec* best = nullptr;
  for (const auto& t : catalog) {
    if (!t.has_duration() || t.duration() != duration) continue;
    if (best && best->name() <= t.name()) continue;
    if (!validate_null_constructor(t).ok()) continue;
    best = &t;
  }
  if (!best) {
    throw PreconditionError("no valid timer of duration " + std::to_string(duration) +
                            " in the catalog");
  }
  return *best;
}

DerivativeEstimate estimate_derivative(const TrajectoryModel& m, std::int64_t lambda,
                                       const std::vector<std::int64_t>& schedule,
                                       const std::vector<TimerSpec>& catalog) {
  if (schedule.size() < 3) {
    throw PreconditionError("a schedule needs at least 3 points, got " +
                            std::to_string(schedule.size()));
  }
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    if (schedule[i] <= 0) throw PreconditionError("schedule entries must be positive");
    if (i > 0 && schedule[i] >= schedule[i - 1]) {
      throw PreconditionError("schedule must be strictly decreasing");
    }
  }
  DerivativeEstimate e;
  e.lambda = lambda;
  e.schedule = schedule;
  std::vector<double> x;
  for (std::int64_t delta : schedule) {
    const TimerSpec& timer = timer_for_duration(catalog, static_cast<StepCount>(delta));
    e.timers.push_back(timer.name());
    e.ratios.push_back(incremental_ratio(m, timer, lambda));
    x.push_back(static_cast<double>(delta));
  }
  std::tie(e.extrapolated, e.slope) = fit_line(x, e.ratios);

  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = std::abs(e.ratios[i] - e.extrapolated);
    e.max_residual = std::max(e.max_residual, std::abs(e.ratios[i] - e.extrapolated - e.slope * x[i]));
    if (r > 1e-12 * std::max(1.0, std::abs(e.extrapolated))) {
      lx.push_back(std::log(x[i]));
      ly.push_back(std::log(r));
    }
  }
  if (lx.size() >= 2) e.order = fit_line(lx, ly).second;
  return e;
}

std::string to_csv(const DerivativeEstimate& e) {
  std::string out = "delta,ratio\n";
  for (std::size_t i = 0; i < e.schedule.size(); ++i) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, e.ratios[i]);
    out += std::to_string(e.schedule[i]) + ',' + std::string(buf, ec == std::errc() ? p : buf) + '\n';
  }
  return out;
}

ClockPointer recover_clock_pointer(const TrajectoryModel& m, const std::vector<TimerClass>& classes) {
  if (!m.variable.has(0)) {
    throw PreconditionError("clock variable '" + m.variable.name + "' has no reading at lambda=0");
  }
  std::vector<const TimerClass*> sorted;
  for (const auto& c : classes) {
    if (!c.members.empty()) sorted.push_back(&c);
  }
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const TimerClass* a, const TimerClass* b) { return a->duration < b->duration; });

  ClockPointer out;
  const Attribute& origin = m.variable.at(0);
  for (const auto& [lambda, attr] : m.variable.entries) {
    PointerEntry entry;
    entry.lambda = lambda;
    if (lambda == 0) entry.duration = 0;
    for (const TimerClass* c : sorted) {
      if (!check_timed_transition(origin, attr, c->members.front())) continue;
      if (!entry.duration) {
        entry.duration = c->duration;
        entry.timer = c->members.front().name();
      } else {
        entry.aliases.push_back(c->duration);
      }
    }
    if (!entry.duration) {
      out.unmapped.push_back(lambda);
      continue;
    }
    if (!entry.aliases.empty() && !out.wrap_period) {
      out.wrap_period = entry.aliases.front() - *entry.duration;
    }
    out.entries.push_back(std::move(entry));
  }
  return out;
}

}  // namespace tasklaw
