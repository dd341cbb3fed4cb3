#include "tasklaw/constructor_engine.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <set>

namespace tasklaw {

namespace {

constexpr std::uint64_t kExplicitCandidateLimit = 200000;

std::uint64_t saturating_pow(std::uint64_t base, std::size_t exp) {
  std::uint64_t r = 1;
  for (std::size_t i = 0; i < exp; ++i) {
    if (base != 0 && r > std::numeric_limits<std::uint64_t>::max() / base) {
      return std::numeric_limits<std::uint64_t>::max();
    }
    r *= base;
  }
  return r;
}

std::vector<std::vector<StateId>> all_permutations(std::size_t n) {
  std::vector<std::vector<StateId>> out;
  std::vector<StateId> p(n);
  std::iota(p.begin(), p.end(), StateId{0});
  do {
    out.push_back(p);
  } while (std::next_permutation(p.begin(), p.end()));
  return out;
}

}  // namespace

const char* to_string(FlagSite s) { return s == FlagSite::Device ? "device" : "substrate"; }

const char* to_string(FailReason r) {
  switch (r) {
    case FailReason::Timeout: return "timeout";
    case FailReason::WrongOutput: return "wrong output";
    case FailReason::CycleBroken: return "cycle broken";
  }
  return "timeout";
}

const char* to_string(LimitVerdict v) {
  return v == LimitVerdict::PossibleInLimit ? "possible in the limit" : "not established";
}

const char* to_string(Uniformity u) {
  switch (u) {
    case Uniformity::UniformlyPossible: return "uniformly possible";
    case Uniformity::PointwiseOnly: return "pointwise only";
    case Uniformity::Impossible: return "impossible";
  }
  return "impossible";
}

// -------------------------------------------------------- ConstructorWitness

ConstructorWitness::ConstructorWitness(Substrate device, Attribute ready, Attribute halt_flag,
                                       Substrate substrate, const JointStep& joint_step,
                                       StepCount max_steps)
    : device_(std::move(device)),
      ready_(std::move(ready)),
      halt_flag_(std::move(halt_flag)),
      substrate_(std::move(substrate)),
      max_steps_(max_steps) {
  if (!ready_.substrate().same_instance(device_)) {
    throw ModelError("ready attribute '" + ready_.name() + "' is not on the device");
  }
  if (ready_.empty()) throw ModelError("ready attribute is empty");
  if (halt_flag_.substrate().same_instance(device_)) {
    site_ = FlagSite::Device;
  } else if (halt_flag_.substrate().same_instance(substrate_)) {
    site_ = FlagSite::Substrate;
  } else {
    throw ModelError("halt flag '" + halt_flag_.name() + "' is on neither device nor substrate");
  }
  if (halt_flag_.empty()) throw ModelError("halt flag is never raised");

  const std::size_t nd = device_.size();
  const std::size_t ns = substrate_.size();
  if (nd > kMaxStates / ns) throw ModelError("joint space of the witness is too large");
  joint_.resize(nd * ns);
  std::vector<bool> hit(nd * ns, false);
  for (StateId d = 0; d < nd; ++d) {
    for (StateId s = 0; s < ns; ++s) {
      const auto [d2, s2] = joint_step(d, s);
      if (d2 >= nd || s2 >= ns) throw ModelError("joint step leaves the joint space");
      const StateId t = static_cast<StateId>(d2 * ns + s2);
      if (hit[t]) throw ModelError("joint step is not a bijection");
      hit[t] = true;
      joint_[d * ns + s] = t;
    }
  }
  if (start_states().empty()) {
    throw ModelError("every ready device state already shows a raised halt flag");
  }
}

std::vector<StateId> ConstructorWitness::start_states() const {
  std::vector<StateId> out;
  for (StateId d : ready_.members()) {
    if (site_ == FlagSite::Device && halt_flag_.contains(d)) continue;
    out.push_back(d);
  }
  return out;
}

bool ConstructorWitness::flag_raised(StateId joint_state) const {
  const std::size_t ns = substrate_.size();
  return site_ == FlagSite::Device ? halt_flag_.contains(static_cast<StateId>(joint_state / ns))
                                   : halt_flag_.contains(static_cast<StateId>(joint_state % ns));
}

std::string ConstructorWitness::describe() const {
  if (!description_.empty()) return description_;
  return "device '" + device_.name() + "' (" + std::to_string(device_.size()) +
         " states), flag on " + to_string(site_);
}

// ------------------------------------------------------------- verification

namespace {

struct Halt {
  std::optional<StepCount> step;
  StateId device = 0;
  StateId substrate = 0;
};

Halt run(const ConstructorWitness& w, StateId device, StateId input) {
  const std::size_t ns = w.substrate().size();
  StateId s = static_cast<StateId>(device * ns + input);
  for (StepCount k = 0; k <= w.max_steps(); ++k) {
    if (w.flag_raised(s)) {
      return {k, static_cast<StateId>(s / ns), static_cast<StateId>(s % ns)};
    }
    s = w.joint(s);
  }
  return {std::nullopt, static_cast<StateId>(s / ns), static_cast<StateId>(s % ns)};
}

void require_on_witness(const ConstructorWitness& w, const Task& t) {
  if (t.is_null()) {
    throw PreconditionError("the null task is verified with verify_null_constructor");
  }
  if (!t.substrate().same_instance(w.substrate())) {
    throw PreconditionError("task '" + t.describe() + "' is not on the witness substrate '" +
                            w.substrate().name() + "'");
  }
}

}  // namespace

VerifyReport verify_witness(const ConstructorWitness& w, const Task& t) {
  return verify_witness(w, std::vector<Task>{t});
}

VerifyReport verify_witness(const ConstructorWitness& w, const std::vector<Task>& clauses) {
  VerifyReport report;
  report.flag_site = w.flag_site();
  report.performs = true;
  for (const auto& t : clauses) require_on_witness(w, t);
  auto fail = [&](FailReason r, const std::string& state) {
    if (report.performs) {
      report.performs = false;
      report.reason = r;
      report.failing_state = state;
    }
  };
  for (const auto& t : clauses) {
    for (StateId d : w.start_states()) {
      for (StateId sigma : t.input().members()) {
        const Halt h = run(w, d, sigma);
        report.runs.push_back({w.device().label(d), w.substrate().label(sigma), h.step,
                               w.substrate().label(h.substrate), w.device().label(h.device)});
        if (!h.step) {
          fail(FailReason::Timeout, w.substrate().label(sigma));
          continue;
        }
        if (!w.ready().contains(h.device)) {
          report.cycle_ok = false;
          fail(FailReason::CycleBroken, w.substrate().label(sigma));
        }
        if (!t.output().contains(h.substrate)) {
          fail(FailReason::WrongOutput, w.substrate().label(sigma));
        }
      }
    }
  }
  return report;
}

NullConstructorReport verify_null_constructor(const TimerSpec& timer) {
  return validate_null_constructor(timer);
}

ConstructorWitness timer_witness(const TimerSpec& timer, const Substrate& substrate,
                                 StepCount max_steps) {
  const Substrate& device = timer.substrate();
  std::vector<StateId> ready = timer.zero().members();
  ready.insert(ready.end(), timer.one().members().begin(), timer.one().members().end());
  ConstructorWitness w(
      device, Attribute("ready", device, std::move(ready)), timer.halt(), substrate,
      [&](StateId d, StateId s) { return std::make_pair(device.step(d), substrate.step(s)); },
      max_steps);
  w.set_description("timer '" + timer.name() + "' beside '" + substrate.name() + "'");
  return w;
}

double state_distance(const Attribute& target, StateId s) {
  if (target.contains(s)) return 0.0;
  const Substrate& sub = target.substrate();
  std::vector<StepCount> dist(sub.size(), std::numeric_limits<StepCount>::max());
  std::deque<StateId> queue{s};
  dist[s] = 0;
  while (!queue.empty()) {
    const StateId u = queue.front();
    queue.pop_front();
    for (StateId v : {sub.step(u), sub.preimage(u)}) {
      if (dist[v] != std::numeric_limits<StepCount>::max()) continue;
      dist[v] = dist[u] + 1;
      if (target.contains(v)) return static_cast<double>(dist[v]) / static_cast<double>(sub.size());
      queue.push_back(v);
    }
  }
  return 1.0;
}

std::optional<double> accuracy(const ConstructorWitness& w, const Task& t) {
  require_on_witness(w, t);
  double worst = 0.0;
  for (StateId d : w.start_states()) {
    for (StateId sigma : t.input().members()) {
      const Halt h = run(w, d, sigma);
      if (!h.step) return std::nullopt;
      worst = std::max(worst, state_distance(t.output(), h.substrate));
    }
  }
  return worst;
}

std::vector<std::optional<double>> reliability(const ApproximateConstructor& a, const Task& t,
                                               std::size_t reuses) {
  if (reuses < 1) throw PreconditionError("reliability needs at least one use");
  if (a.drift.empty()) throw PreconditionError("deterioration sequence is empty");
  std::vector<std::optional<double>> out;
  std::int64_t offset = 0;
  for (std::size_t r = 0; r < reuses; ++r) {
    out.push_back(accuracy(a.build(offset), t));
    offset += a.drift[r % a.drift.size()];
  }
  return out;
}

LimitReport check_possible_in_limit(const WitnessFamily& f, const Task& t, double tol) {
  if (f.members.size() < 3) {
    throw PreconditionError("a witness family prefix needs at least 3 members");
  }
  for (std::size_t i = 1; i < f.members.size(); ++i) {
    if (f.members[i].first <= f.members[i - 1].first) {
      throw PreconditionError("witness family indices must be strictly increasing");
    }
  }
  LimitReport r;
  for (const auto& [index, member] : f.members) r.accuracies.push_back(accuracy(member.build(0), t));

  for (std::size_t i = 0; i < r.accuracies.size(); ++i) {
    if (!r.accuracies[i]) {
      r.reason = "member " + std::to_string(f.members[i].first) + " never halts";
      return r;
    }
    if (i > 0 && *r.accuracies[i] > *r.accuracies[i - 1]) {
      r.reason = "accuracy error increases at member " + std::to_string(f.members[i].first);
      return r;
    }
  }
  if (!(*r.accuracies.back() < tol)) {
    r.reason = "final accuracy error is not below the tolerance";
    return r;
  }
  for (std::size_t i = 0; i < f.members.size(); ++i) {
    const auto& [index, member] = f.members[i];
    const auto reuses = static_cast<std::size_t>(std::max<std::int64_t>(1, index));
    for (const auto& a : reliability(member, t, reuses)) {
      if (!a || std::abs(*a - *r.accuracies[i]) > tol) {
        r.reason = "member " + std::to_string(index) + " deteriorates beyond the tolerance";
        return r;
      }
    }
  }
  r.verdict = LimitVerdict::PossibleInLimit;
  return r;
}

// -------------------------------------------------------------------- search

ConstructorWitness controller_witness(const Substrate& substrate, const Attribute& output_flag,
                                      const std::vector<std::vector<StateId>>& phases,
                                      StepCount max_steps) {
  const std::size_t d = phases.size();
  if (d == 0) throw PreconditionError("a controller needs at least one phase");
  const Substrate device = Substrate::rotation("controller", d, 1);
  auto joint = [&](StateId delta, StateId sigma) {
    return std::make_pair(static_cast<StateId>((delta + 1) % d), phases[delta][sigma]);
  };
  if (d == 1) {
    return ConstructorWitness(device, Attribute("ready", device, {0}), output_flag, substrate,
                              joint, max_steps);
  }
  const StateId last = static_cast<StateId>(d - 1);
  return ConstructorWitness(device, Attribute("ready", device, {0, last}),
                            Attribute("done", device, {last}), substrate, joint, max_steps);
}

SearchResult search_impossibility(const Task& t, std::size_t device_budget, StepCount step_bound) {
  return search_impossibility(std::vector<Task>{t}, device_budget, step_bound);
}

SearchResult search_impossibility(const std::vector<Task>& clauses, std::size_t device_budget,
                                  StepCount step_bound) {
  if (clauses.empty()) throw PreconditionError("nothing to search for");
  for (const auto& c : clauses) {
    if (c.is_null()) throw PreconditionError("the null task has no witness search");
    if (!c.substrate().same_instance(clauses.front().substrate())) {
      throw PreconditionError("all clauses must be on one substrate");
    }
  }
  const Substrate& sub = clauses.front().substrate();
  const std::size_t n = sub.size();
  if (n > kMaxSearchSubstrate) {
    throw PreconditionError("witness search supports at most " +
                            std::to_string(kMaxSearchSubstrate) + " substrate states, got " +
                            std::to_string(n));
  }
  if (device_budget < 1 || device_budget > kMaxSearchDevice) {
    throw PreconditionError("device budget must be in [1, " + std::to_string(kMaxSearchDevice) +
                            "], got " + std::to_string(device_budget));
  }
  if (step_bound < 1) throw PreconditionError("step bound must be positive");

  std::vector<StateId> outputs;
  for (const auto& c : clauses) {
    outputs.insert(outputs.end(), c.output().members().begin(), c.output().members().end());
  }
  const Attribute output_flag("output", sub, outputs);

  SearchResult result;
  auto& cert = result.certificate;
  cert.substrate_states = n;
  cert.device_budget = device_budget;
  cert.step_bound = step_bound;

  const auto perms = all_permutations(n);
  const std::vector<StateId>& identity = perms.front();
  std::set<std::vector<StateId>> effects;

  for (std::size_t d = 1; d <= device_budget; ++d) {
    if (d >= 2 && d - 1 > step_bound) break;  // halts at step d - 1
    const std::size_t free = d == 1 ? 1 : d - 1;
    const std::uint64_t count = saturating_pow(perms.size(), free);
    if (count > kExplicitCandidateLimit) {
      cert.reduced.push_back(d);
      continue;
    }
    std::vector<std::size_t> digits(free, 0);
    std::uint64_t visited = 0;
    for (std::uint64_t c = 0; c < count; ++c) {
      std::vector<std::vector<StateId>> phases;
      for (std::size_t i = 0; i < free; ++i) phases.push_back(perms[digits[i]]);
      if (d >= 2) {
        phases.push_back(identity);
        std::vector<StateId> effect = identity;
        for (std::size_t i = 0; i < free; ++i) {
          for (auto& s : effect) s = phases[i][s];
        }
        effects.insert(std::move(effect));
      }
      ++visited;
      ConstructorWitness w = controller_witness(sub, output_flag, phases, step_bound);
      if (verify_witness(w, clauses).performs) {
        cert.enumerated.emplace_back(d, visited);
        cert.distinct_effects = effects.size();
        result.witness = std::move(w);
        return result;
      }
      // mixed-radix increment, most significant digit first
      for (std::size_t i = free; i-- > 0;) {
        if (++digits[i] < perms.size()) break;
        digits[i] = 0;
      }
    }
    cert.enumerated.emplace_back(d, visited);
  }
  cert.distinct_effects = effects.size();
  return result;
}

UniformReport check_uniform_possibility(const std::vector<MemberTask>& family,
                                        std::size_t device_budget, StepCount step_bound) {
  if (family.empty()) throw PreconditionError("uniform possibility needs a non-empty family");
  const Substrate canonical = family.front().clauses.at(0).substrate();
  std::vector<Task> all;
  UniformReport report;
  for (const auto& member : family) {
    if (member.clauses.empty()) {
      throw PreconditionError("family member '" + member.label + "' has no task");
    }
    for (const auto& c : member.clauses) {
      if (c.is_null() || c.substrate().size() != canonical.size()) {
        throw PreconditionError("family member '" + member.label +
                                "' is not on a substrate of the common state space");
      }
      all.emplace_back(c.input().rehomed(canonical), c.output().rehomed(canonical));
    }
    report.member_possible.push_back(
        search_impossibility(member.clauses, device_budget, step_bound).found());
  }
  SearchResult uniform = search_impossibility(all, device_budget, step_bound);
  report.certificate = uniform.certificate;
  const bool pointwise = std::all_of(report.member_possible.begin(), report.member_possible.end(),
                                     [](bool b) { return b; });
  if (uniform.found()) {
    report.verdict = Uniformity::UniformlyPossible;
    report.witness = std::move(uniform.witness);
  } else if (pointwise) {
    report.verdict = Uniformity::PointwiseOnly;
  } else {
    report.verdict = Uniformity::Impossible;
  }
  return report;
}

}  // namespace tasklaw
