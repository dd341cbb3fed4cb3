#include "tasklaw/task_algebra.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace tasklaw {

namespace {

std::string members_key(const Attribute& a) {
  std::string out = "{";
  for (std::size_t i = 0; i < a.members().size(); ++i) {
    if (i) out += ',';
    out += std::to_string(a.members()[i]);
  }
  return out + "}";
}

bool same_members(const Attribute& a, const Attribute& b) { return a.members() == b.members(); }

}  // namespace

Task::Task(Attribute input, Attribute output) : input_(std::move(input)), output_(std::move(output)) {
  if (!input_->substrate().same_instance(output_->substrate())) {
    throw PreconditionError("task '" + input_->name() + " -> " + output_->name() +
                            "' mixes substrates");
  }
}

Task Task::null() { return Task(); }

const Attribute& Task::input() const {
  if (!input_) throw PreconditionError("the null task has no input");
  return *input_;
}

const Attribute& Task::output() const {
  if (!output_) throw PreconditionError("the null task has no output");
  return *output_;
}

std::string Task::key() const {
  if (is_null()) return "{}";
  return substrate().key() + ":" + members_key(*input_) + "->" + members_key(*output_);
}

std::string Task::describe() const {
  if (is_null()) return "{ }";
  return input_->name() + " -> " + output_->name() + " on " + substrate().name();
}

Task serial_compose(const Task& a, const Task& b) {
  if (a.is_null() || b.is_null()) return Task::null();
  if (!a.substrate().same_instance(b.substrate())) {
    throw PreconditionError("serial composition needs one substrate: '" + a.substrate().name() +
                            "' vs '" + b.substrate().name() + "'");
  }
  if (same_members(a.output(), b.input())) return Task(a.input(), b.output());
  if (!a.output().intersects(b.input())) return Task::null();
  throw CompositionUndefined("composition undefined: '" + a.output().name() + "' and '" +
                             b.input().name() + "' overlap partially");
}

Task parallel_compose(const Task& a, const Task& b) {
  if (a.is_null() || b.is_null()) {
    throw PreconditionError("the null task has no substrate to compose in parallel");
  }
  const Substrate composite = compose_substrates(a.substrate(), b.substrate());
  return Task(pair_attributes(composite, a.input(), b.input()),
              pair_attributes(composite, a.output(), b.output()));
}

const char* to_string(Status s) { return s == Status::Possible ? "possible" : "impossible"; }

// -------------------------------------------------------------------- LawSet

std::size_t LawSet::add(LawStatement s) {
  auto k = std::make_pair(s.task.key(), s.status);
  if (auto it = index_.find(k); it != index_.end()) return it->second;
  const std::size_t i = statements_.size();
  statements_.push_back(std::move(s));
  index_.emplace(std::move(k), i);
  closed_ = false;
  return i;
}

std::size_t LawSet::declare(Task task, Status status, std::string label) {
  return add(LawStatement{std::move(task), status, Provenance{}, std::move(label)});
}

std::optional<std::size_t> LawSet::find(const Task& task, Status status) const {
  auto it = index_.find({task.key(), status});
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::size_t> LawSet::declared_support(std::size_t i) const {
  std::set<std::size_t> out;
  std::vector<std::size_t> todo{i};
  std::set<std::size_t> seen;
  while (!todo.empty()) {
    const std::size_t j = todo.back();
    todo.pop_back();
    if (!seen.insert(j).second) continue;
    const auto& p = statements_.at(j).provenance;
    if (p.declared()) {
      out.insert(j);
    } else {
      todo.insert(todo.end(), p.premises.begin(), p.premises.end());
    }
  }
  return {out.begin(), out.end()};
}

std::vector<std::string> LawSet::trace(std::size_t i) const {
  std::vector<std::string> lines;
  auto walk = [&](auto&& self, std::size_t j, int depth) -> void {
    const auto& s = statements_.at(j);
    std::string line(static_cast<std::size_t>(depth) * 2, ' ');
    line += "[" + std::to_string(j) + "] (" + s.task.describe() + ") " + to_string(s.status);
    line += s.provenance.declared() ? " declared" : " by " + s.provenance.rule;
    if (!s.label.empty()) line += " '" + s.label + "'";
    lines.push_back(std::move(line));
    for (std::size_t p : s.provenance.premises) self(self, p, depth + 1);
  };
  walk(walk, i, 0);
  return lines;
}

LawSet deductive_closure(const LawSet& laws) {
  LawSet out = laws;

  // Substrates named by declared statements may be paired in parallel.
  std::vector<Substrate> base;
  for (const auto& s : laws.statements()) {
    if (!s.provenance.declared() || s.task.is_null()) continue;
    const Substrate& sub = s.task.substrate();
    if (std::none_of(base.begin(), base.end(),
                     [&](const Substrate& b) { return b.same_instance(sub); })) {
      base.push_back(sub);
    }
  }
  auto is_base = [&](const Substrate& sub) {
    return std::any_of(base.begin(), base.end(),
                       [&](const Substrate& b) { return b.same_instance(sub); });
  };

  // Composite substrates are cached so that equal pairings share an instance.
  std::map<std::pair<std::string, std::string>, Substrate> composites;
  auto composite_of = [&](const Substrate& a, const Substrate& b) -> const Substrate& {
    auto k = std::make_pair(a.key(), b.key());
    auto it = composites.find(k);
    if (it == composites.end()) it = composites.emplace(k, compose_substrates(a, b)).first;
    return it->second;
  };

  std::size_t rounds = 0;
  std::size_t done = 0;  // pairs within [0, done) were combined in earlier rounds
  while (true) {
    ++rounds;
    const std::size_t n = out.statements_.size();
    std::vector<LawStatement> fresh;
    auto consider = [&](std::size_t i, std::size_t j) {
      const auto& a = out.statements_[i];
      const auto& b = out.statements_[j];
      if (a.status != Status::Possible || b.status != Status::Possible) return;
      if (a.task.is_null() || b.task.is_null()) return;
      if (a.task.substrate().same_instance(b.task.substrate())) {
        try {
          fresh.push_back({serial_compose(a.task, b.task), Status::Possible,
                           Provenance{"serial", {i, j}}, {}});
        } catch (const CompositionUndefined&) {
        }
        return;
      }
      if (i < j && is_base(a.task.substrate()) && is_base(b.task.substrate()) &&
          !a.task.substrate().shares_atom(b.task.substrate())) {
        const Substrate& c = composite_of(a.task.substrate(), b.task.substrate());
        Task t(pair_attributes(c, a.task.input(), b.task.input()),
               pair_attributes(c, a.task.output(), b.task.output()));
        fresh.push_back({std::move(t), Status::Possible, Provenance{"parallel", {i, j}}, {}});
      }
    };
    // Distinct premises first, so a derivation names two statements when it can.
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j || (i < done && j < done)) continue;
        consider(i, j);
      }
    }
    for (std::size_t i = done; i < n; ++i) consider(i, i);
    bool grew = false;
    for (auto& f : fresh) {
      const std::size_t before = out.statements_.size();
      out.add(std::move(f));
      grew = grew || out.statements_.size() != before;
    }
    done = n;
    if (!grew) break;
  }
  out.closed_ = true;
  out.rounds_ = rounds;
  return out;
}

ConsistencyReport check_consistency(const LawSet& laws) {
  const LawSet closed = laws.closed() ? laws : deductive_closure(laws);
  ConsistencyReport report;
  for (std::size_t i = 0; i < closed.size(); ++i) {
    const auto& s = closed.at(i);
    if (s.status != Status::Possible) continue;
    if (auto j = closed.find(s.task, Status::Impossible)) {
      Contradiction c;
      c.task = s.task.describe();
      c.possible = i;
      c.impossible = *j;
      c.possible_trace = closed.trace(i);
      c.impossible_trace = closed.trace(*j);
      c.premises = closed.declared_support(i);
      report.contradictions.push_back(std::move(c));
    }
  }
  return report;
}

}  // namespace tasklaw
