#include "tasklaw/model.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace tasklaw {

using dsl::Diagnostic;
using dsl::Severity;
using dsl::Span;

namespace {

constexpr unsigned kMaxBits = 20;

struct Failed {};

class Builder {
 public:
  explicit Builder(const dsl::ModelDecl& decl) : decl_(decl) {}

  LoadResult run() {
    check_names();
    for (const auto& d : decl_.substrates) guarded([&] { substrate(d); });
    for (const auto& d : decl_.attributes) guarded([&] { attribute(d); });
    for (const auto& d : decl_.timers) guarded([&] { timer(d); });
    for (const auto& d : decl_.tasks) guarded([&] { task(d); });
    for (const auto& d : decl_.laws) guarded([&] { law(d); });
    for (const auto& d : decl_.variables) guarded([&] { variable(d); });
    LoadResult r;
    r.diagnostics = std::move(diags_);
    if (!dsl::has_errors(r.diagnostics)) r.model = std::move(m_);
    return r;
  }

 private:
  template <class F>
  void guarded(F&& f) {
    try {
      f();
    } catch (const Failed&) {
    }
  }

  void error(const Span& at, std::string message, std::string suggestion = {}) {
    diags_.push_back({Severity::Error, at, std::move(message), std::move(suggestion)});
  }
  [[noreturn]] void fail(const Span& at, std::string message, std::string suggestion = {}) {
    error(at, std::move(message), std::move(suggestion));
    throw Failed{};
  }

  // Engine errors become diagnostics at the declaration.
  template <class F>
  auto engine(const Span& at, F&& f) -> decltype(f()) {
    try {
      return f();
    } catch (const Error& e) {
      fail(at, e.what());
    }
  }

  void check_names() {
    std::map<std::string, Span> seen;
    auto add = [&](const std::string& name, const Span& at) {
      auto [it, fresh] = seen.emplace(name, at);
      if (!fresh) {
        error(at, "'" + name + "' is already declared at line " + std::to_string(it->second.line),
              "choose a distinct name");
      }
    };
    for (const auto& d : decl_.substrates) add(d.name, d.span);
    for (const auto& d : decl_.attributes) add(d.name, d.span);
    for (const auto& d : decl_.timers) add(d.name, d.span);
    for (const auto& d : decl_.tasks) add(d.name, d.span);
    for (const auto& d : decl_.variables) add(d.name, d.span);
  }

  std::string nearest(const std::string& name, const std::vector<std::string>& candidates) {
    // Cheapest hint: a candidate sharing the longest prefix.
    std::string best;
    std::size_t best_len = 0;
    for (const auto& c : candidates) {
      std::size_t k = 0;
      while (k < c.size() && k < name.size() && c[k] == name[k]) ++k;
      if (k > best_len) {
        best_len = k;
        best = c;
      }
    }
    return best.empty() ? "" : "did you mean '" + best + "'?";
  }

  template <class Map>
  std::vector<std::string> keys(const Map& m) {
    std::vector<std::string> out;
    for (const auto& [k, v] : m) out.push_back(k);
    return out;
  }

  const Substrate& substrate_ref(const std::string& name, const Span& at, bool allow_timer = true) {
    if (auto it = m_.substrates.find(name); it != m_.substrates.end()) return it->second;
    if (allow_timer) {
      if (const TimerSpec* t = m_.timer(name)) return t->substrate();
    }
    auto names = keys(m_.substrates);
    fail(at, "unknown substrate '" + name + "'", nearest(name, names));
  }

  StateId state_ref(const Substrate& s, const std::string& label, const Span& at) {
    if (!s.space().contains(label)) {
      fail(at, "'" + label + "' is not a state of '" + s.name() + "'", nearest(label, s.space().labels()));
    }
    return s.state(label);
  }

  std::vector<StateId> state_set(const Substrate& s, const std::vector<std::string>& labels,
                                 const Span& at, const std::string& what) {
    std::vector<StateId> out;
    std::set<StateId> seen;
    for (const auto& l : labels) {
      const StateId id = state_ref(s, l, at);
      if (!seen.insert(id).second) fail(at, "state '" + l + "' listed twice in " + what);
      out.push_back(id);
    }
    return out;
  }

  // ------------------------------------------------------------- substrates

  void substrate(const dsl::SubstrateDecl& d) {
    if (d.states.empty()) fail(d.span, "substrate '" + d.name + "' has no states");
    StateSpace space = engine(d.span, [&] { return StateSpace(d.name, d.states); });
    const std::size_t n = space.size();
    std::vector<StateId> step(n);
    switch (d.step) {
      case dsl::StepKind::Identity:
        for (StateId i = 0; i < n; ++i) step[i] = i;
        break;
      case dsl::StepKind::Shift: {
        const auto k = static_cast<std::uint64_t>(d.shift % static_cast<std::int64_t>(n));
        for (StateId i = 0; i < n; ++i) step[i] = static_cast<StateId>((i + k) % n);
        break;
      }
      case dsl::StepKind::Cycles: {
        std::vector<int> seen(n, 0);
        for (const auto& cycle : d.cycles) {
          if (cycle.empty()) fail(d.span, "empty cycle in the step map of '" + d.name + "'");
          for (std::size_t i = 0; i < cycle.size(); ++i) {
            const StateId a = state_ref_in(space, d, cycle[i]);
            const StateId b = state_ref_in(space, d, cycle[(i + 1) % cycle.size()]);
            if (seen[a]++) {
              fail(d.span, "step map of '" + d.name + "' is not a bijection: '" + cycle[i] +
                               "' appears in more than one place");
            }
            step[a] = b;
          }
        }
        for (StateId i = 0; i < n; ++i) {
          if (!seen[i]) {
            fail(d.span, "step map of '" + d.name + "' is not a bijection: state '" +
                             space.label(i) + "' has no successor",
                 "write fixed points as one-state cycles, e.g. (" + space.label(i) + ")");
          }
        }
        break;
      }
    }
    m_.substrates.emplace(d.name, engine(d.span, [&] { return Substrate(d.name, space, step); }));
  }

  StateId state_ref_in(const StateSpace& space, const dsl::SubstrateDecl& d, const std::string& l) {
    if (!space.contains(l)) {
      fail(d.span, "step map of '" + d.name + "' names unknown state '" + l + "'",
           nearest(l, space.labels()));
    }
    return space.index_of(l);
  }

  // ------------------------------------------------------------- attributes

  void attribute(const dsl::AttributeDecl& d) {
    const Substrate& s = substrate_ref(d.substrate, d.span);
    auto members = state_set(s, d.states, d.span, "attribute '" + d.name + "'");
    m_.attributes.emplace(d.name, Attribute(d.name, s, std::move(members)));
  }

  const Attribute& attribute_ref(const std::string& name, const Span& at) {
    if (auto it = m_.attributes.find(name); it != m_.attributes.end()) return it->second;
    if (m_.timer(name)) {
      fail(at, "'" + name + "' is a timer, not an attribute",
           "name one of its attributes: " + name + ".0, " + name + ".R, " + name + ".1 or " +
               name + ".halt");
    }
    fail(at, "unknown attribute '" + name + "'", nearest(name, keys(m_.attributes)));
  }

  // ----------------------------------------------------------------- timers

  std::int64_t positive(const std::optional<std::int64_t>& v, const std::string& field,
                        const Span& at, std::int64_t max) {
    if (!v || *v < 1 || *v > max) {
      fail(at, "'" + field + "' must be in [1, " + std::to_string(max) + "]");
    }
    return *v;
  }

  void timer(const dsl::TimerDecl& d) {
    std::optional<TimerSpec> t;
    switch (d.kind) {
      case dsl::TimerDeclKind::Counter: {
        const auto bits = positive(d.bits, "bits", d.span, kMaxBits);
        const auto threshold = positive(d.threshold, "threshold", d.span, (1 << bits) - 1);
        t = engine(d.span, [&] {
          return make_counter_timer(static_cast<unsigned>(bits), static_cast<StepCount>(threshold),
                                    d.name);
        });
        break;
      }
      case dsl::TimerDeclKind::Particle: {
        const auto max = static_cast<std::int64_t>(dsl::kMaxDeclaredStates);
        const auto grid = positive(d.grid, "grid", d.span, max);
        const auto velocity = positive(d.velocity, "velocity", d.span, max);
        const auto target = positive(d.target, "target", d.span, max);
        t = engine(d.span, [&] {
          return make_particle_timer(static_cast<std::size_t>(grid),
                                     static_cast<std::size_t>(velocity),
                                     static_cast<std::size_t>(target), d.name);
        });
        break;
      }
      case dsl::TimerDeclKind::Custom: {
        auto it = m_.substrates.find(d.on);
        if (it == m_.substrates.end()) {
          fail(d.span, "unknown substrate '" + d.on + "'", nearest(d.on, keys(m_.substrates)));
        }
        const Substrate& s = it->second;
        auto part = [&](const std::string& name) -> const Attribute& {
          const Attribute& a = attribute_ref(name, d.span);
          if (!a.substrate().same_instance(s)) {
            fail(d.span, "attribute '" + name + "' is not on '" + d.on + "'");
          }
          return a;
        };
        std::optional<StepCount> horizon;
        if (d.horizon) {
          if (*d.horizon < 0) fail(d.span, "horizon must not be negative");
          horizon = static_cast<StepCount>(*d.horizon);
        }
        const Attribute& zero = part(d.zero);
        const Attribute& running = part(d.running);
        const Attribute& one = part(d.one);
        const Attribute& halt = part(d.halt);
        t = engine(d.span, [&] {
          return TimerSpec(d.name, TimerKind::Custom, zero.renamed("0"), running.renamed("R"),
                           one.renamed("1"), halt.renamed("halt"), horizon);
        });
        t->set_parameters("on=" + d.on);
        break;
      }
      case dsl::TimerDeclKind::Composite: {
        const TimerSpec* a = m_.timer(d.first);
        const TimerSpec* b = m_.timer(d.second);
        for (auto [p, n] : {std::pair{a, &d.first}, std::pair{b, &d.second}}) {
          if (!p) {
            fail(d.span, "unknown timer '" + *n + "'",
                 "timers must be declared before composites that use them");
          }
        }
        if (!a->has_duration() || !b->has_duration()) {
          fail(d.span, "composite '" + d.name + "' needs components that complete");
        }
        t = engine(d.span, [&] { return composite_timer(*a, *b, d.name); });
        break;
      }
    }
    const auto report = validate_null_constructor(*t);
    for (const auto& c : report.checks) {
      if (c.ok) continue;
      error(d.span, "timer '" + d.name + "' violates null-constructor check '" + c.name + "'" +
                        (c.detail.empty() ? "" : ": " + c.detail));
    }
    m_.timers.push_back(std::move(*t));
  }

  // ------------------------------------------------------------------ tasks

  Attribute ref(const dsl::AttrRef& r) {
    if (r.is_pair()) {
      Attribute a = ref(r.pair[0]);
      Attribute b = ref(r.pair[1]);
      if (a.substrate().shares_atom(b.substrate())) {
        fail(r.span, "pairing uses '" + a.substrate().name() + "' on both sides",
             "a substrate cannot be composed with itself");
      }
      auto key = std::make_pair(a.substrate().key(), b.substrate().key());
      auto it = composites_.find(key);
      if (it == composites_.end()) {
        it = composites_
                 .emplace(key, engine(r.span, [&] {
                   return compose_substrates(a.substrate(), b.substrate());
                 }))
                 .first;
      }
      return engine(r.span, [&] { return pair_attributes(it->second, a, b); });
    }
    if (r.part.empty()) return attribute_ref(r.name, r.span);
    const TimerSpec* t = m_.timer(r.name);
    if (!t) fail(r.span, "unknown timer '" + r.name + "'", nearest(r.name, timer_names()));
    if (r.part == "0") return t->zero();
    if (r.part == "R") return t->running();
    if (r.part == "1") return t->one();
    if (r.part == "halt") return t->halt();
    fail(r.span, "timer '" + r.name + "' has no attribute '" + r.part + "'",
         "use 0, R, 1 or halt");
  }

  std::vector<std::string> timer_names() {
    std::vector<std::string> out;
    for (const auto& t : m_.timers) out.push_back(t.name());
    return out;
  }

  void task(const dsl::TaskDecl& d) {
    Attribute in = ref(d.input);
    Attribute out = ref(d.output);
    if (!in.substrate().same_instance(out.substrate())) {
      fail(d.span, "task '" + d.name + "' has input on '" + in.substrate().name() +
                       "' but output on '" + out.substrate().name() + "'");
    }
    m_.tasks.emplace(d.name, Task(in, out));
  }

  void law(const dsl::LawDecl& d) {
    if (d.null_task) {
      const std::size_t i = m_.laws.declare(Task::null(), d.status, "null");
      m_.declared_laws.push_back({d, i});
      return;
    }
    auto it = m_.tasks.find(d.task);
    if (it == m_.tasks.end()) {
      fail(d.task_span, "unknown task '" + d.task + "'",
           nearest(d.task, keys(m_.tasks)).empty() ? "declare it with 'task " + d.task + ": x -> y'"
                                                   : nearest(d.task, keys(m_.tasks)));
    }
    if (!d.on.empty()) {
      const Substrate& s = substrate_ref(d.on, d.on_span);
      if (!s.same_instance(it->second.substrate())) {
        fail(d.on_span, "task '" + d.task + "' is on '" + it->second.substrate().name() +
                         "', not '" + d.on + "'");
      }
    }
    const std::size_t i = m_.laws.declare(it->second, d.status, d.task);
    m_.declared_laws.push_back({d, i});
  }

  // -------------------------------------------------------------- variables

  void variable(const dsl::VariableDecl& d) {
    const Substrate& s = substrate_ref(d.substrate, d.span);
    if (d.entries.empty()) fail(d.span, "variable '" + d.name + "' has no entries");
    NamedVariable v{d.name, TrajectoryModel{Variable{d.name, s, {}, {}}, {}}};
    for (const auto& e : d.entries) {
      if (v.model.variable.has(e.lambda)) {
        fail(e.span, "variable '" + d.name + "' defines " + std::to_string(e.lambda) + " twice");
      }
      std::optional<Attribute> a;
      if (e.attribute.empty()) {
        const std::string name = d.name + "@" + std::to_string(e.lambda);
        a.emplace(name, s, state_set(s, e.states, e.span, "entry " + std::to_string(e.lambda)));
      } else {
        a = attribute_ref(e.attribute, e.span);
        if (!a->substrate().same_instance(s)) {
          fail(e.span, "attribute '" + e.attribute + "' is not on '" + d.substrate + "'");
        }
      }
      if (a->empty()) fail(e.span, "entry " + std::to_string(e.lambda) + " is an empty set");
      v.model.variable.entries.emplace(e.lambda, std::move(*a));
      v.model.values[e.lambda] = e.value;
      if (e.is_static) v.model.variable.static_entries.push_back(e.lambda);
    }
    engine(d.span, [&] {
      v.model.validate();
      return 0;
    });
    m_.variables.push_back(std::move(v));
  }

  const dsl::ModelDecl& decl_;
  Model m_;
  std::vector<Diagnostic> diags_;
  std::map<std::pair<std::string, std::string>, Substrate> composites_;
};

}  // namespace

const TimerSpec* Model::timer(const std::string& name) const {
  for (const auto& t : timers) {
    if (t.name() == name) return &t;
  }
  return nullptr;
}

const NamedVariable* Model::variable(const std::string& name) const {
  for (const auto& v : variables) {
    if (v.name == name) return &v;
  }
  return nullptr;
}

bool Model::on_timers(const Substrate& s) const {
  if (s.is_composite()) return on_timers(s.first()) && on_timers(s.second());
  for (const auto& t : timers) {
    std::vector<const Substrate*> todo{&t.substrate()};
    while (!todo.empty()) {
      const Substrate* u = todo.back();
      todo.pop_back();
      if (u->is_composite()) {
        todo.push_back(&u->first());
        todo.push_back(&u->second());
      } else if (u->same_instance(s)) {
        return true;
      }
    }
  }
  return false;
}

LoadResult build_model(const dsl::ModelDecl& decl) { return Builder(decl).run(); }

std::vector<Diagnostic> validate_model(const dsl::ModelDecl& decl) {
  return build_model(decl).diagnostics;
}

LoadResult load_model_text(std::string_view text) {
  auto parsed = dsl::parse_model(text);
  if (!parsed.ok()) return {std::nullopt, std::move(parsed.diagnostics)};
  LoadResult r = build_model(parsed.model);
  r.diagnostics.insert(r.diagnostics.begin(), parsed.diagnostics.begin(), parsed.diagnostics.end());
  return r;
}

LoadResult load_model_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    return {std::nullopt, {{Severity::Error, {}, "cannot read '" + path.string() + "'", ""}}};
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_model_text(buf.str());
}

}  // namespace tasklaw
