#include "tasklaw/core_model.hpp"

#include <algorithm>
#include <atomic>
#include <limits>
#include <numeric>

namespace tasklaw {

namespace {

std::atomic<std::uint64_t> next_serial{1};

StepCount saturating_lcm(StepCount a, StepCount b) {
  const StepCount g = std::gcd(a, b);
  const StepCount q = a / g;
  if (q != 0 && b > std::numeric_limits<StepCount>::max() / q) {
    return std::numeric_limits<StepCount>::max();
  }
  return q * b;
}

}  // namespace

// ---------------------------------------------------------------- StateSpace

StateSpace::StateSpace(std::string id, std::vector<std::string> labels)
    : id_(std::move(id)), labels_(std::move(labels)) {
  if (labels_.empty()) {
    throw ModelError("state space '" + id_ + "' has no states");
  }
  if (labels_.size() > kMaxStates) {
    throw ModelError("state space '" + id_ + "' exceeds " + std::to_string(kMaxStates) +
                     " states");
  }
  index_.reserve(labels_.size());
  for (StateId i = 0; i < labels_.size(); ++i) {
    if (!index_.emplace(labels_[i], i).second) {
      throw ModelError("duplicate state label '" + labels_[i] + "' in '" + id_ + "'");
    }
  }
}

StateId StateSpace::index_of(std::string_view label) const {
  auto it = index_.find(std::string(label));
  if (it == index_.end()) {
    throw ModelError("unknown state '" + std::string(label) + "' in '" + id_ + "'");
  }
  return it->second;
}

bool StateSpace::contains(std::string_view label) const {
  return index_.count(std::string(label)) != 0;
}

// ----------------------------------------------------------------- Substrate

Substrate::Substrate(std::string name, StateSpace space, std::vector<StateId> step) {
  auto d = std::make_shared<Data>();
  d->name = std::move(name);
  d->space = std::move(space);
  d->step = std::move(step);
  finish(std::move(d));
}

Substrate Substrate::with_identity(std::string name, std::vector<std::string> labels) {
  std::vector<StateId> step(labels.size());
  std::iota(step.begin(), step.end(), StateId{0});
  StateSpace space(name, std::move(labels));
  return Substrate(std::move(name), std::move(space), std::move(step));
}

Substrate Substrate::rotation(std::string name, std::size_t n, std::size_t shift) {
  std::vector<std::string> labels(n);
  std::vector<StateId> step(n);
  for (std::size_t i = 0; i < n; ++i) {
    labels[i] = std::to_string(i);
    step[i] = static_cast<StateId>((i + shift) % n);
  }
  StateSpace space(name, std::move(labels));
  return Substrate(std::move(name), std::move(space), std::move(step));
}

void Substrate::finish(std::shared_ptr<Data> d) {
  const std::size_t n = d->space.size();
  if (n == 0) {
    throw ModelError("substrate '" + d->name + "' has no states");
  }
  if (d->step.size() != n) {
    throw ModelError("step map of '" + d->name + "' has " + std::to_string(d->step.size()) +
                     " entries for " + std::to_string(n) + " states");
  }
  constexpr StateId kUnset = std::numeric_limits<StateId>::max();
  d->inverse.assign(n, kUnset);
  for (StateId s = 0; s < n; ++s) {
    const StateId t = d->step[s];
    if (t >= n) {
      throw ModelError("step map of '" + d->name + "' leaves the state space");
    }
    if (d->inverse[t] != kUnset) {
      throw ModelError("step map of '" + d->name + "' is not a bijection (state '" +
                       d->space.label(t) + "' has two preimages)");
    }
    d->inverse[t] = s;
  }

  d->cycle_of.assign(n, 0);
  d->position.assign(n, 0);
  std::vector<bool> seen(n, false);
  for (StateId s = 0; s < n; ++s) {
    if (seen[s]) continue;
    std::vector<StateId> cycle;
    for (StateId t = s; !seen[t]; t = d->step[t]) {
      seen[t] = true;
      d->cycle_of[t] = static_cast<std::uint32_t>(d->cycles.size());
      d->position[t] = static_cast<std::uint32_t>(cycle.size());
      cycle.push_back(t);
    }
    d->period = saturating_lcm(d->period, cycle.size());
    d->cycles.push_back(std::move(cycle));
  }
  d->serial = next_serial.fetch_add(1);
  data_ = std::move(d);
}

const Substrate& Substrate::first() const {
  if (!is_composite()) throw PreconditionError("'" + name() + "' is not composite");
  return data_->children[0];
}

const Substrate& Substrate::second() const {
  if (!is_composite()) throw PreconditionError("'" + name() + "' is not composite");
  return data_->children[1];
}

StepCount Substrate::cycle_length(StateId s) const {
  return data_->cycles[data_->cycle_of.at(s)].size();
}

Substrate Substrate::instantiate() const {
  if (is_composite()) {
    Substrate c = compose_substrates(first().instantiate(), second().instantiate());
    return tag().empty() ? c : c.tagged(tag());
  }
  auto d = std::make_shared<Data>(*data_);
  d->serial = next_serial.fetch_add(1);
  Substrate out;
  out.data_ = std::move(d);
  return out;
}

Substrate Substrate::tagged(std::string tag) const {
  if (!is_composite()) throw PreconditionError("only composites can be tagged");
  auto d = std::make_shared<Data>(*data_);
  d->tag = std::move(tag);
  d->name = d->tag;
  d->serial = next_serial.fetch_add(1);
  Substrate out;
  out.data_ = std::move(d);
  return out;
}

bool Substrate::same_instance(const Substrate& other) const {
  if (data_ == other.data_) return true;
  if (is_composite() != other.is_composite()) return false;
  if (!is_composite()) return data_->serial == other.data_->serial;
  return tag() == other.tag() && first().same_instance(other.first()) &&
         second().same_instance(other.second());
}

void Substrate::collect_atoms(std::vector<std::uint64_t>& out) const {
  if (!is_composite()) {
    out.push_back(data_->serial);
    return;
  }
  first().collect_atoms(out);
  second().collect_atoms(out);
}

bool Substrate::shares_atom(const Substrate& other) const {
  std::vector<std::uint64_t> a, b;
  collect_atoms(a);
  other.collect_atoms(b);
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::vector<std::uint64_t> common;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(common));
  return !common.empty();
}

std::string Substrate::key() const {
  if (!is_composite()) return "#" + std::to_string(data_->serial);
  return tag() + "(" + first().key() + "+" + second().key() + ")";
}

Substrate compose_substrates(const Substrate& a, const Substrate& b) {
  if (a.shares_atom(b)) {
    throw PreconditionError("cannot compose '" + a.name() + "' with '" + b.name() +
                            "': they share a substrate instance");
  }
  const std::size_t na = a.size();
  const std::size_t nb = b.size();
  if (na > kMaxStates / nb) {
    throw ModelError("composite '" + a.name() + " + " + b.name() + "' is too large");
  }
  std::vector<std::string> labels;
  labels.reserve(na * nb);
  std::vector<StateId> step(na * nb);
  for (StateId i = 0; i < na; ++i) {
    for (StateId j = 0; j < nb; ++j) {
      labels.push_back("(" + a.label(i) + "," + b.label(j) + ")");
      step[i * nb + j] = static_cast<StateId>(a.step(i) * nb + b.step(j));
    }
  }
  auto d = std::make_shared<Substrate::Data>();
  d->name = a.name() + " + " + b.name();
  d->space = StateSpace(d->name, std::move(labels));
  d->step = std::move(step);
  d->children = {a, b};
  Substrate out;
  out.finish(std::move(d));
  return out;
}

StateId evolve(const Substrate& s, StateId state, StepCount n) {
  const auto& d = *s.data_;
  if (state >= d.step.size()) {
    throw ModelError("state index out of range for '" + d.name + "'");
  }
  const auto& cycle = d.cycles[d.cycle_of[state]];
  const StepCount pos = (d.position[state] + n % cycle.size()) % cycle.size();
  return cycle[pos];
}

std::string evolve(const Substrate& s, std::string_view label, StepCount n) {
  return s.label(evolve(s, s.state(label), n));
}

// ----------------------------------------------------------------- Attribute

Attribute::Attribute(std::string name, Substrate substrate, std::vector<StateId> members)
    : name_(std::move(name)), substrate_(std::move(substrate)), members_(std::move(members)) {
  std::sort(members_.begin(), members_.end());
  members_.erase(std::unique(members_.begin(), members_.end()), members_.end());
  if (!members_.empty() && members_.back() >= substrate_.size()) {
    throw ModelError("attribute '" + name_ + "' names a state outside '" + substrate_.name() +
                     "'");
  }
  mask_.assign(substrate_.size(), false);
  for (StateId s : members_) mask_[s] = true;
}

Attribute Attribute::from_labels(std::string name, const Substrate& substrate,
                                 const std::vector<std::string>& labels) {
  std::vector<StateId> members;
  members.reserve(labels.size());
  for (const auto& l : labels) members.push_back(substrate.state(l));
  return Attribute(std::move(name), substrate, std::move(members));
}

Attribute Attribute::full(const Substrate& substrate) {
  std::vector<StateId> all(substrate.size());
  std::iota(all.begin(), all.end(), StateId{0});
  return Attribute("*", substrate, std::move(all));
}

Attribute Attribute::renamed(std::string name) const {
  Attribute out = *this;
  out.name_ = std::move(name);
  return out;
}

Attribute Attribute::rehomed(const Substrate& other) const {
  if (other.size() != substrate_.size()) {
    throw PreconditionError("cannot move attribute '" + name_ + "' to a substrate of another size");
  }
  return Attribute(name_, other, members_);
}

Attribute Attribute::complement(std::string name) const {
  std::vector<StateId> rest;
  for (StateId s = 0; s < substrate_.size(); ++s) {
    if (!mask_[s]) rest.push_back(s);
  }
  return Attribute(std::move(name), substrate_, std::move(rest));
}

bool Attribute::intersects(const Attribute& other) const {
  for (StateId s : members_) {
    if (s < other.mask_.size() && other.mask_[s]) return true;
  }
  return false;
}

bool Attribute::same_set(const Attribute& other) const {
  return members_ == other.members_ && substrate_.same_instance(other.substrate_);
}

Attribute pair_attributes(const Substrate& composite, const Attribute& x, const Attribute& y) {
  if (!composite.is_composite() || !composite.first().same_instance(x.substrate()) ||
      !composite.second().same_instance(y.substrate())) {
    throw PreconditionError("attributes '" + x.name() + "', '" + y.name() +
                            "' do not match the components of '" + composite.name() + "'");
  }
  const std::size_t nb = y.substrate().size();
  std::vector<StateId> members;
  members.reserve(x.size() * y.size());
  for (StateId i : x.members()) {
    for (StateId j : y.members()) members.push_back(static_cast<StateId>(i * nb + j));
  }
  return Attribute("(" + x.name() + ", " + y.name() + ")", composite, std::move(members));
}

// ------------------------------------------------------------------ Variable

const Attribute& Variable::at(std::int64_t lambda) const {
  auto it = entries.find(lambda);
  if (it == entries.end()) {
    throw PreconditionError("variable '" + name + "' has no entry at " + std::to_string(lambda));
  }
  return it->second;
}

void Variable::validate() const {
  std::vector<bool> used(substrate.size(), false);
  for (const auto& [lambda, attr] : entries) {
    if (!attr.substrate().same_instance(substrate)) {
      throw ModelError("entry " + std::to_string(lambda) + " of variable '" + name +
                       "' is not on '" + substrate.name() + "'");
    }
    for (StateId s : attr.members()) {
      if (used[s]) {
        throw ModelError("entries of variable '" + name + "' overlap at state '" +
                         substrate.label(s) + "'");
      }
      used[s] = true;
    }
    const bool flagged = std::find(static_entries.begin(), static_entries.end(), lambda) !=
                         static_entries.end();
    if (!flagged && is_static(attr)) {
      throw ModelError("entry " + std::to_string(lambda) + " of variable '" + name +
                       "' is static");
    }
  }
}

// ----------------------------------------------------------------- staticity

bool is_static(const Attribute& x) {
  const Substrate& s = x.substrate();
  for (StateId m : x.members()) {
    if (!x.contains(s.step(m))) return false;
  }
  return true;
}

std::optional<StepCount> static_horizon(const Attribute& x) {
  const Substrate& s = x.substrate();
  std::optional<StepCount> best;
  for (StateId entry : x.members()) {
    if (x.contains(s.preimage(entry))) continue;
    // entry starts a maximal run of x along its cycle
    StepCount dwell = 0;
    for (StateId t = s.step(entry); x.contains(t); t = s.step(t)) ++dwell;
    if (!best || dwell < *best) best = dwell;
  }
  return best;
}

bool is_static_for_horizon(const Attribute& x, StepCount horizon) {
  const auto h = static_horizon(x);
  return !h || *h >= horizon;
}

bool are_distinguishable(std::span<const Attribute> xs) {
  if (xs.size() < 2) {
    throw PreconditionError("distinguishability needs at least two attributes");
  }
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!xs[i].substrate().same_instance(xs[0].substrate())) {
      throw PreconditionError("attributes '" + xs[0].name() + "' and '" + xs[i].name() +
                              "' are on different substrates");
    }
    for (std::size_t j = i + 1; j < xs.size(); ++j) {
      if (xs[i].intersects(xs[j])) return false;
    }
  }
  return true;
}

}  // namespace tasklaw
