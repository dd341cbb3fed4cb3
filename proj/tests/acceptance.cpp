// One PASS/FAIL line per acceptance criterion. Exit status is the number of
// failures.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "support/model_gen.hpp"
#include "tasklaw/fixtures.hpp"
#include "tasklaw/model.hpp"

using namespace tasklaw;
namespace fs = std::filesystem;

namespace {

const fs::path kModels = fs::path(TASKLAW_SOURCE_DIR) / "models";

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void criterion(int n, const char* title, double limit_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (limit_s > 0 && s >= limit_s) {
    o.pass = false;
    o.detail += " [over time limit " + std::to_string(limit_s) + " s]";
  }
  if (!o.pass) ++failures;
  std::printf("%s %2d %s: %s (%.3f s)\n", o.pass ? "PASS" : "FAIL", n, title, o.detail.c_str(), s);
  std::fflush(stdout);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<fs::path> shipped() {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(kModels)) {
    if (e.path().extension() == ".ctm") out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

Model load(const fs::path& p) {
  auto r = load_model_file(p);
  if (!r.ok()) throw std::runtime_error("cannot load " + p.string());
  return std::move(*r.model);
}

Outcome null_task() {
  const auto f = fixtures::null_task_laws();
  const LawSet closed = deductive_closure(f.laws);
  const auto i = closed.find(Task::null(), Status::Possible);
  if (!i) return {false, "null task not derived"};
  const auto& p = closed.at(*i).provenance;
  const bool ok = p.premises.size() == 2 && closed.declared_support(*i) == std::vector<std::size_t>{0, 1};
  return {ok, "derived by " + p.rule + " from " + std::to_string(p.premises.size()) + " premises"};
}

Outcome truth_table() {
  std::vector<std::pair<StepCount, TimerSpec>> timers;
  for (unsigned n = 3; n <= 6; ++n) {
    for (StepCount t = 2; t <= 10 && t < (StepCount{1} << n); ++t) {
      timers.emplace_back(t, make_counter_timer(n, t));
    }
  }
  std::size_t pairs = 0, wrong = 0;
  for (const auto& [t1, c1] : timers) {
    for (const auto& [t2, c2] : timers) {
      ++pairs;
      const TimerSpec other = c2.instantiate();
      bool staggered_ok;
      if (t1 == t2) {
        try {
          check_staggered_halt(c1, other);
          staggered_ok = false;
        } catch (const PreconditionError&) {
          staggered_ok = true;
        }
      } else {
        staggered_ok = check_staggered_halt(c1, other) == (t1 < t2);
      }
      const bool simultaneous_ok = check_simultaneous_halt(c1, other) == (t1 == t2);
      if (!staggered_ok || !simultaneous_ok) ++wrong;
    }
  }
  return {wrong == 0, std::to_string(pairs) + " ordered pairs over " + std::to_string(timers.size()) +
                          " counters, " + std::to_string(wrong) + " mismatches"};
}

Outcome equivalence_classes() {
  auto r = gen::rng(12);
  std::vector<TimerSpec> catalog;
  for (int i = 0; i < 12; ++i) catalog.push_back(gen::timer(r, "T" + std::to_string(i)));
  bool rel[12][12];
  for (std::size_t i = 0; i < 12; ++i) {
    for (std::size_t j = 0; j < 12; ++j) {
      rel[i][j] = check_simultaneous_halt(catalog[i], catalog[j].instantiate());
    }
  }
  std::size_t violations = 0;
  for (std::size_t i = 0; i < 12; ++i) {
    if (!rel[i][i]) ++violations;
    for (std::size_t j = 0; j < 12; ++j) {
      if (rel[i][j] != rel[j][i]) ++violations;
      for (std::size_t k = 0; k < 12; ++k) {
        if (rel[i][j] && rel[j][k] && !rel[i][k]) ++violations;
      }
    }
  }
  auto signature = [](const std::vector<TimerClass>& cs) {
    std::vector<std::vector<std::string>> out;
    for (const auto& c : cs) {
      out.emplace_back();
      for (const auto& m : c.members) out.back().push_back(m.name());
    }
    return out;
  };
  const auto classes = classify_timers(catalog);
  const auto base = signature(classes);
  std::set<std::string> seen;
  std::size_t members = 0;
  for (const auto& c : base) {
    members += c.size();
    seen.insert(c.begin(), c.end());
    for (const auto& a : c) {
      for (const auto& b : c) {
        const auto ia = std::stoul(a.substr(1)), ib = std::stoul(b.substr(1));
        if (!rel[ia][ib]) ++violations;
      }
    }
  }
  if (members != 12 || seen.size() != 12) ++violations;
  std::size_t order_changes = 0;
  auto shuffled = catalog;
  for (int s = 0; s < 100; ++s) {
    std::shuffle(shuffled.begin(), shuffled.end(), r);
    if (signature(classify_timers(shuffled)) != base) ++order_changes;
  }
  return {violations == 0 && order_changes == 0,
          std::to_string(classes.size()) + " classes, " + std::to_string(violations) +
              " relation violations, " + std::to_string(order_changes) + "/100 shuffles changed the result"};
}

Outcome flip_family() {
  const auto family = fixtures::flip_family();
  const auto u = check_uniform_possibility(family, 2);
  bool members_ok = true;
  for (const auto& m : family) members_ok = members_ok && search_impossibility(m.clauses, 2, 16).found();
  const bool ok = u.verdict == Uniformity::PointwiseOnly && members_ok && u.certificate.distinct_effects == 6 &&
                  !u.certificate.enumerated.empty() && u.certificate.enumerated.front().second == 6;
  return {ok, std::string(to_string(u.verdict)) + ", " + std::to_string(u.certificate.distinct_effects) +
                  " bijections examined, members " + (members_ok ? "each witnessed" : "NOT witnessed")};
}

Outcome degenerate_pair() {
  const auto f = fixtures::degenerate_pair();
  const auto r = verify_witness(f.witness, Task(f.x, f.y));
  const bool ok = is_static(f.x) && r.performs;
  return {ok, std::string("x static: ") + (is_static(f.x) ? "yes" : "no") +
                  ", external constructor performs x -> y: " + (r.performs ? "yes" : "no")};
}

Outcome recurrence() {
  std::size_t checked = 0, wrong = 0;
  for (unsigned n = 3; n <= 8; ++n) {
    const StepCount size = StepCount{1} << n;
    for (StepCount t = 1; t < size; ++t) {
      const auto c = make_counter_timer(n, t);
      ++checked;
      const auto h = static_horizon(c.one());
      if (recurrence_horizon(c) != size || !h || *h != size - t - 1) ++wrong;
    }
  }
  return {wrong == 0, std::to_string(checked) + " counters, " + std::to_string(wrong) + " mismatches"};
}

Outcome synchrony() {
  std::size_t timers = 0, violations = 0;
  for (const auto& p : shipped()) {
    for (const auto& t : load(p).timers) {
      ++timers;
      if (!check_synchrony(t)) ++violations;
    }
  }
  return {timers > 0 && violations == 0,
          std::to_string(timers) + " shipped timers, " + std::to_string(violations) + " violations"};
}

Outcome dynamics() {
  const Model rot = load(kModels / "rotation.ctm");
  const auto* v = rot.variable("v");
  if (!v) return {false, "rotation model has no variable v"};
  const auto e = estimate_derivative(v->model, 0, {8, 4, 2, 1}, rot.timers);
  const double omega = 2.0 * std::acos(-1.0) / 64.0;
  const double rel = std::abs(e.extrapolated - omega) / omega;
  const bool order_ok = e.order && *e.order >= 0.8 && *e.order <= 1.2;

  const Model drift = load(kModels / "drift.ctm");
  const auto* x = drift.variable("x");
  if (!x) return {false, "drift model has no variable x"};
  bool constant = true;
  for (std::int64_t lambda = 0; lambda + 8 < 32; ++lambda) {
    const auto d = estimate_derivative(x->model, lambda, {8, 4, 2, 1}, drift.timers);
    for (double r : d.ratios) constant = constant && r == d.ratios.front();
  }
  char buf[160];
  std::snprintf(buf, sizeof buf, "estimate %.6f vs %.6f (%.2f%%), order %.3f, linear ratios %s",
                e.extrapolated, omega, 100 * rel, e.order.value_or(NAN), constant ? "constant" : "vary");
  return {rel < 0.05 && order_ok && constant, buf};
}

Outcome limit() {
  const auto d = fixtures::dial(256, 85);
  const auto family = fixtures::resolution_family(d);
  const auto good = check_possible_in_limit(family, d.task, 1e-2);
  bool decreasing = true;
  std::string errors;
  for (std::size_t i = 0; i < good.accuracies.size(); ++i) {
    if (!good.accuracies[i]) return {false, "member without accuracy"};
    errors += (i ? "," : "") + std::to_string(static_cast<int>(std::lround(*good.accuracies[i] * 256)));
    if (i > 0 && !(*good.accuracies[i] < *good.accuracies[i - 1])) decreasing = false;
  }
  const auto flat = check_possible_in_limit(fixtures::constant_family(d), d.task, 1e-2);
  const bool ok = decreasing && good.verdict == LimitVerdict::PossibleInLimit &&
                  flat.verdict == LimitVerdict::NotEstablished;
  return {ok, "errors " + errors + " /256, " + to_string(good.verdict) + "; constant family " +
                  to_string(flat.verdict)};
}

Outcome model_text() {
  std::size_t mismatches = 0;
  std::vector<std::string> seeds;
  for (const auto& p : shipped()) {
    const std::string text = slurp(p);
    seeds.push_back(text);
    const auto parsed = dsl::parse_model(text);
    const auto printed = dsl::pretty_print(parsed.model);
    const auto back = dsl::parse_model(printed);
    if (!parsed.ok() || !back.ok() || !(back.model == parsed.model) || dsl::pretty_print(back.model) != printed) {
      ++mismatches;
    }
  }
  auto r = gen::rng(10);
  for (int i = 0; i < 1000; ++i) {
    const auto m = gen::model(r);
    const auto printed = dsl::pretty_print(m);
    const auto back = dsl::parse_model(printed);
    if (!back.ok() || !(back.model == m) || dsl::pretty_print(back.model) != printed) ++mismatches;
  }
  std::size_t crashes = 0, bad_spans = 0;
  for (int i = 0; i < 100000; ++i) {
    std::string text;
    if (i % 4 == 0) {
      text.resize(gen::between(r, 0, 200));
      for (auto& ch : text) ch = static_cast<char>(gen::between(r, 0, 255));
    } else {
      text = gen::mutate(r, seeds[gen::between(r, 0, seeds.size() - 1)]);
    }
    try {
      const auto loaded = load_model_text(text);
      const auto lines = static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')) + 1;
      for (const auto& d : loaded.diagnostics) {
        if (d.span.line < 1 || d.span.line > lines || d.span.column < 1) ++bad_spans;
      }
    } catch (...) {
      ++crashes;
    }
  }
  return {mismatches == 0 && crashes == 0 && bad_spans == 0,
          std::to_string(seeds.size()) + " shipped + 1000 generated round-trips, " +
              std::to_string(mismatches) + " mismatches; 100000 fuzz inputs, " + std::to_string(crashes) +
              " crashes, " + std::to_string(bad_spans) + " spans outside input"};
}

}  // namespace

int main() {
  criterion(1, "null-task derivation", 1.0, null_task);
  criterion(2, "staggered/simultaneous halt truth table", 10.0, truth_table);
  criterion(3, "duration equivalence classes", 0, equivalence_classes);
  criterion(4, "flip family is pointwise-only", 1.0, flip_family);
  criterion(5, "static attribute with an external constructor", 0, degenerate_pair);
  criterion(6, "counter recurrence and static horizon", 0, recurrence);
  criterion(7, "synchrony of shipped timers", 0, synchrony);
  criterion(8, "derivative recovery", 5.0, dynamics);
  criterion(9, "possible in the limit", 0, limit);
  criterion(10, "model text round-trip and fuzzing", 0, model_text);
  std::printf("%d/10 criteria passed\n", 10 - failures);
  return failures;
}
