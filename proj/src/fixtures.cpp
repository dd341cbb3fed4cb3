#include "tasklaw/fixtures.hpp"

#include <cmath>

namespace tasklaw::fixtures {

NullTaskLaws null_task_laws() {
  const Substrate p = Substrate::with_identity("P", {"s0", "s1", "s2", "s3"});
  Task first(Attribute::from_labels("a", p, {"s0"}), Attribute::from_labels("b", p, {"s1"}));
  Task second(Attribute::from_labels("c", p, {"s2"}), Attribute::from_labels("d", p, {"s3"}));
  LawSet laws;
  laws.declare(first, Status::Possible, "a->b");
  laws.declare(second, Status::Possible, "c->d");
  return {p, first, second, laws};
}

DegeneratePair degenerate_pair() {
  const Substrate p = Substrate::with_identity("pair", {"g1", "g2", "e"});
  const Substrate device = Substrate::rotation("swapper", 2, 1);
  const StateId g1 = p.state("g1"), g2 = p.state("g2");
  ConstructorWitness w(
      device, Attribute("ready", device, {0, 1}), Attribute("done", device, {1}), p,
      [=](StateId d, StateId s) {
        if (d == 1) return std::make_pair(StateId{0}, s);
        const StateId t = s == g1 ? g2 : s == g2 ? g1 : s;
        return std::make_pair(StateId{1}, t);
      },
      4);
  w.set_description("swapper exchanging g1 and g2");
  return {p, Attribute::from_labels("x", p, {"g1"}), Attribute::from_labels("y", p, {"g2"}),
          std::move(w)};
}

std::vector<MemberTask> flip_family() {
  std::vector<MemberTask> out;
  auto flip = [&](const std::string& label, const std::string& u, const std::string& v) {
    const Substrate p = Substrate::with_identity(label, {"a", "b", "c"});
    const Attribute au = Attribute::from_labels(u, p, {u});
    const Attribute av = Attribute::from_labels(v, p, {v});
    out.push_back({label, {Task(au, av), Task(av, au)}});
  };
  flip("P1", "a", "b");
  flip("P2", "b", "c");
  return out;
}

TrajectoryModel ring_pointer(const std::string& name, std::size_t cells, std::size_t velocity,
                             double (*reading)(std::int64_t)) {
  const Substrate ring = Substrate::rotation(name, cells, velocity);
  TrajectoryModel m{Variable{"v", ring, {}, {}}, {}};
  for (std::size_t i = 0; i < cells; ++i) {
    const auto lambda = static_cast<std::int64_t>(i);
    m.variable.entries.emplace(
        lambda, Attribute("v" + std::to_string(i), ring, {static_cast<StateId>(i * velocity % cells)}));
    m.values[lambda] = reading(lambda);
  }
  m.validate();
  return m;
}

TrajectoryModel rotation_model() {
  return ring_pointer("rotor", 64, 1, [](std::int64_t l) {
    return std::sin(kRotationOmega * static_cast<double>(l));
  });
}

TrajectoryModel linear_drift_model() {
  return ring_pointer("drift", 32, 1, [](std::int64_t l) { return static_cast<double>(l); });
}

std::vector<TimerSpec> duration_catalog(StepCount longest) {
  std::vector<TimerSpec> out;
  for (StepCount d = 1; d <= longest; ++d) {
    unsigned bits = 1;
    while ((StepCount{1} << bits) <= d) ++bits;
    out.push_back(make_counter_timer(std::max(bits, 4u), d, "C" + std::to_string(d)));
  }
  return out;
}

Dial dial(std::size_t size, StateId target) {
  const Substrate s = Substrate::rotation("dial", size, 1);
  return {s, Task(Attribute("origin", s, {0}), Attribute("target", s, {target}))};
}

ApproximateConstructor dial_constructor(const Dial& d, unsigned bits, StepCount threshold,
                                        std::vector<std::int64_t> drift) {
  ApproximateConstructor a;
  const Substrate sub = d.substrate;
  a.build = [sub, bits, threshold](std::int64_t offset) {
    const auto t = static_cast<StepCount>(static_cast<std::int64_t>(threshold) + offset);
    return timer_witness(make_counter_timer(bits, t), sub, sub.size());
  };
  a.drift = std::move(drift);
  return a;
}

WitnessFamily resolution_family(const Dial& d) {
  WitnessFamily f;
  for (unsigned n = 2; n <= 6; ++n) {
    const StepCount grain = StepCount{1} << (8 - n);
    const StepCount q = (85 + grain / 2) / grain * grain;
    f.members.emplace_back(n, dial_constructor(d, 8, q));
  }
  return f;
}

WitnessFamily constant_family(const Dial& d) {
  WitnessFamily f;
  for (unsigned n = 2; n <= 6; ++n) f.members.emplace_back(n, dial_constructor(d, 8, 64));
  return f;
}

}  // namespace tasklaw::fixtures
