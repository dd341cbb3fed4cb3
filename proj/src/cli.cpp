#include "tasklaw/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <ostream>
#include <sstream>

#include "tasklaw/constructor_engine.hpp"
#include "tasklaw/dynamics.hpp"
#include "tasklaw/model.hpp"

namespace tasklaw::cli {

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

struct Options {
  std::vector<std::string> files;
  std::string format = "json";
  std::size_t budget = 3;
  std::optional<StepCount> horizon;
  double tol = 1e-2;
  std::string schedule = "8,4,2,1";
  std::string variable;
  std::int64_t lambda = 0;
  std::string csv;
  bool timing = false;
};

struct InputError {
  std::string message;
};

fs::path resolve(const std::string& file) {
  const fs::path p(file);
  if (fs::exists(p)) return p;
  if (const char* root = std::getenv("TASKLAW_MODELS"); root && *root && p.is_relative()) {
    const fs::path q = fs::path(root) / p;
    if (fs::exists(q)) return q;
  }
  return p;
}

json header(const std::string& command, const Options& o) {
  json j;
  j["schema"] = kSchema;
  j["engine"] = std::string("tasklaw ") + kEngineVersion;
  j["command"] = command;
  j["inputs"] = o.files;
  return j;
}

json diagnostics_json(const std::vector<dsl::Diagnostic>& ds) {
  json out = json::array();
  for (const auto& d : ds) {
    json j;
    j["severity"] = d.severity == dsl::Severity::Error ? "error" : "warning";
    j["line"] = d.span.line;
    j["column"] = d.span.column;
    j["message"] = d.message;
    if (!d.suggestion.empty()) j["suggestion"] = d.suggestion;
    out.push_back(std::move(j));
  }
  return out;
}

// Loads every file; diagnostics go to `err`. Nullopt entries failed.
std::vector<std::optional<Model>> load_all(const Options& o, std::ostream& err, json& report) {
  std::vector<std::optional<Model>> out;
  json diags = json::object();
  for (const auto& f : o.files) {
    LoadResult r = load_model_file(resolve(f));
    for (const auto& d : r.diagnostics) err << d.format(f) << '\n';
    if (!r.diagnostics.empty()) diags[f] = diagnostics_json(r.diagnostics);
    out.push_back(std::move(r.model));
  }
  if (!diags.empty()) report["diagnostics"] = std::move(diags);
  return out;
}

double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

// ------------------------------------------------------------------ check

// Halt flag of a substrate built from timers: a timer's own flag, or the
// first component's flag on a pairing (the composite halts with it).
std::optional<Attribute> halt_of(const Model& m, const Substrate& s) {
  for (const auto& t : m.timers) {
    if (t.substrate().same_instance(s)) return t.halt();
  }
  if (!s.is_composite()) return std::nullopt;
  auto first = halt_of(m, s.first());
  if (!first) return std::nullopt;
  return pair_attributes(s, *first, Attribute::full(s.second()));
}

// Every input state evolved in isolation is in the output when the flag rises.
bool isolated_performs(const Task& t, const Attribute& halt) {
  const Substrate& s = t.substrate();
  for (StateId start : t.input().members()) {
    StateId x = start;
    const StepCount bound = s.cycle_length(start);
    bool halted = false;
    for (StepCount k = 0; k <= bound; ++k, x = s.step(x)) {
      if (halt.contains(x)) {
        halted = true;
        break;
      }
    }
    if (!halted || !t.output().contains(x)) return false;
  }
  return true;
}

struct Operational {
  std::string outcome;  // confirmed, refuted, bounded, unchecked
  std::string evidence;
};

Operational check_law(const Model& m, const LawStatement& law, const Options& o) {
  const bool possible = law.status == Status::Possible;
  if (law.task.is_null()) {
    for (const auto& t : m.timers) {
      if (validate_null_constructor(t).ok()) {
        return {possible ? "confirmed" : "refuted",
                "timer '" + t.name() + "' is a null constructor"};
      }
    }
    return {"unchecked", "no timer declared"};
  }
  const Task& task = law.task;
  const Substrate& s = task.substrate();
  if (m.on_timers(s)) {
    const auto halt = halt_of(m, s);
    if (halt) {
      const bool performs = isolated_performs(task, *halt);
      return {possible == performs ? "confirmed" : "refuted",
              performs ? "isolated evolution performs the task when the halt flag rises"
                       : "isolated evolution misses the output when the halt flag rises"};
    }
  }
  if (s.size() <= kMaxSearchSubstrate) {
    const std::size_t budget = std::clamp<std::size_t>(o.budget, 1, kMaxSearchDevice);
    const SearchResult r = search_impossibility(task, budget, o.horizon.value_or(16));
    if (r.found()) {
      return {possible ? "confirmed" : "refuted",
              "witness: controller with " + std::to_string(r.witness->device().size()) +
                  " state(s)"};
    }
    return {"bounded", "no witness with at most " + std::to_string(budget) + " device states"};
  }
  return {"unchecked", "substrate too large for witness search"};
}

json timer_json(const TimerSpec& t, const Options& o) {
  json j;
  j["name"] = t.name();
  j["kind"] = to_string(t.kind());
  j["parameters"] = t.parameters();
  j["states"] = t.substrate().size();
  const auto report = validate_null_constructor(t);
  j["valid"] = report.ok();
  if (t.has_duration()) {
    j["duration"] = t.duration();
    j["horizon"] = t.horizon();
  }
  j["recurrence"] = recurrence_horizon(t);
  j["synchrony"] = check_synchrony(t, o.horizon);
  return j;
}

json check_model(const Model& m, const std::string& file, const Options& o, int& exit) {
  const auto start = std::chrono::steady_clock::now();
  json j;
  j["file"] = file;

  const LawSet closed = deductive_closure(m.laws);
  const ConsistencyReport consistency = check_consistency(closed);

  bool refuted = false;
  json laws = json::array();
  for (const auto& d : m.declared_laws) {
    const auto& s = closed.at(d.statement);
    const Operational op = check_law(m, s, o);
    refuted = refuted || op.outcome == "refuted";
    json l;
    l["index"] = d.statement;
    l["task"] = d.decl.null_task ? "null" : d.decl.task;
    l["describe"] = s.task.describe();
    l["status"] = to_string(s.status);
    l["operational"] = op.outcome;
    l["evidence"] = op.evidence;
    laws.push_back(std::move(l));
  }
  j["laws"] = std::move(laws);

  json derived = json::array();
  for (std::size_t i = 0; i < closed.size(); ++i) {
    const auto& s = closed.at(i);
    if (s.provenance.declared()) continue;
    json d;
    d["index"] = i;
    d["task"] = s.task.describe();
    d["status"] = to_string(s.status);
    d["rule"] = s.provenance.rule;
    d["premises"] = s.provenance.premises;
    d["declared_support"] = closed.declared_support(i);
    d["trace"] = closed.trace(i);
    derived.push_back(std::move(d));
  }
  j["derived"] = std::move(derived);
  j["closure_rounds"] = closed.rounds();

  json contradictions = json::array();
  for (const auto& c : consistency.contradictions) {
    json x;
    x["task"] = c.task;
    x["possible"] = c.possible;
    x["impossible"] = c.impossible;
    x["premises"] = c.premises;
    x["possible_trace"] = c.possible_trace;
    x["impossible_trace"] = c.impossible_trace;
    contradictions.push_back(std::move(x));
  }
  j["contradictions"] = std::move(contradictions);

  json timers = json::array();
  bool timers_ok = true;
  for (const auto& t : m.timers) {
    json tj = timer_json(t, o);
    timers_ok = timers_ok && tj["synchrony"].get<bool>();
    timers.push_back(std::move(tj));
  }
  j["timers"] = std::move(timers);

  json relations = json::array();
  for (std::size_t a = 0; a < m.timers.size(); ++a) {
    for (std::size_t b = a + 1; b < m.timers.size(); ++b) {
      const TimerSpec* c1 = &m.timers[a];
      const TimerSpec* c2 = &m.timers[b];
      if (c1->duration() > c2->duration()) std::swap(c1, c2);
      json r;
      r["first"] = c1->name();
      r["second"] = c2->name();
      bool holds;
      if (c1->duration() == c2->duration()) {
        r["relation"] = "simultaneous";
        holds = check_simultaneous_halt(*c1, *c2);
      } else {
        r["relation"] = "staggered";
        holds = check_staggered_halt(*c1, *c2) && !check_simultaneous_halt(*c1, *c2);
      }
      r["holds"] = holds;
      timers_ok = timers_ok && holds;
      relations.push_back(std::move(r));
    }
  }
  j["timer_relations"] = std::move(relations);

  std::string verdict = "consistent";
  if (!timers_ok || refuted) verdict = "refuted";
  if (!consistency.consistent()) verdict = "contradiction";
  j["verdict"] = verdict;
  if (verdict != "consistent") exit = std::max<int>(exit, kRefuted);
  if (o.timing) j["timing_ms"] = elapsed_ms(start);
  return j;
}

void check_text(const json& report, std::ostream& out) {
  for (const auto& m : report["models"]) {
    out << m["file"].get<std::string>() << ": " << m["verdict"].get<std::string>() << '\n';
    for (const auto& l : m["laws"]) {
      out << "  law " << l["status"].get<std::string>() << " (" << l["describe"].get<std::string>()
          << "): " << l["operational"].get<std::string>() << " - " << l["evidence"].get<std::string>()
          << '\n';
    }
    for (const auto& d : m["derived"]) {
      out << "  derived " << d["status"].get<std::string>() << " (" << d["task"].get<std::string>()
          << ") by " << d["rule"].get<std::string>() << '\n';
    }
    for (const auto& c : m["contradictions"]) {
      out << "  contradiction on (" << c["task"].get<std::string>() << ")\n";
      for (const auto& line : c["possible_trace"]) out << "    " << line.get<std::string>() << '\n';
      for (const auto& line : c["impossible_trace"]) out << "    " << line.get<std::string>() << '\n';
    }
    for (const auto& t : m["timers"]) {
      out << "  timer " << t["name"].get<std::string>() << " (" << t["kind"].get<std::string>()
          << ")";
      if (t.contains("duration")) out << " duration " << t["duration"].get<StepCount>();
      out << " recurrence " << t["recurrence"].get<StepCount>()
          << (t["synchrony"].get<bool>() ? " synchronous" : " NOT synchronous") << '\n';
    }
    for (const auto& r : m["timer_relations"]) {
      out << "  " << r["first"].get<std::string>() << " / " << r["second"].get<std::string>()
          << ": " << r["relation"].get<std::string>()
          << (r["holds"].get<bool>() ? " halt confirmed" : " halt REFUTED") << '\n';
    }
  }
}

// --------------------------------------------------------------- classify

json classify_model(const Model& m, const std::string& file, int& exit) {
  json j;
  j["file"] = file;
  if (m.timers.empty()) {
    exit = std::max<int>(exit, kInputError);
    j["error"] = "no timers declared";
    return j;
  }
  json classes = json::array();
  for (const auto& c : classify_timers(m.timers)) {
    json x;
    x["duration"] = c.duration;
    json members = json::array();
    for (const auto& t : c.members) members.push_back(t.name());
    x["members"] = std::move(members);
    classes.push_back(std::move(x));
  }
  j["classes"] = std::move(classes);
  return j;
}

void classify_text(const json& report, std::ostream& out) {
  for (const auto& m : report["models"]) {
    out << m["file"].get<std::string>() << ":";
    if (m.contains("error")) {
      out << " " << m["error"].get<std::string>() << '\n';
      continue;
    }
    out << " " << m["classes"].size() << " class(es)\n";
    for (const auto& c : m["classes"]) {
      out << "  duration " << c["duration"].get<StepCount>() << ":";
      for (const auto& n : c["members"]) out << ' ' << n.get<std::string>();
      out << '\n';
    }
  }
}

// --------------------------------------------------------------- dynamics

std::vector<std::int64_t> parse_schedule(const std::string& text) {
  std::vector<std::int64_t> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::int64_t v = 0;
    const char* b = item.data();
    const char* e = b + item.size();
    while (b < e && *b == ' ') ++b;
    auto [p, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || p != e) throw InputError{"bad schedule entry '" + item + "'"};
    out.push_back(v);
  }
  if (out.size() < 3) {
    throw InputError{"a schedule needs at least 3 points, got " + std::to_string(out.size())};
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i] <= 0) throw InputError{"schedule entries must be positive"};
    if (i && out[i] >= out[i - 1]) throw InputError{"schedule must be strictly decreasing"};
  }
  return out;
}

int dynamics(const Options& o, std::ostream& out, std::ostream& err) {
  json report = header("dynamics", o);
  auto finish = [&](int code) {
    report["exit_status"] = code;
    if (o.format == "json") {
      out << report.dump(2) << '\n';
    }
    return code;
  };
  if (o.files.size() != 1) {
    err << "dynamics takes exactly one model file\n";
    return finish(kInputError);
  }
  const auto models = load_all(o, err, report);
  if (!models[0]) return finish(kInputError);
  const Model& m = *models[0];

  std::vector<std::int64_t> schedule;
  const NamedVariable* v = nullptr;
  std::vector<const TimerSpec*> timers;
  try {
    schedule = parse_schedule(o.schedule);
    if (o.variable.empty()) {
      if (m.variables.size() != 1) {
        throw InputError{"the model declares " + std::to_string(m.variables.size()) +
                         " variables; choose one with --variable"};
      }
      v = &m.variables.front();
    } else {
      v = m.variable(o.variable);
      if (!v) throw InputError{"unknown variable '" + o.variable + "'"};
    }
    for (std::int64_t d : schedule) {
      try {
        timers.push_back(&timer_for_duration(m.timers, static_cast<StepCount>(d)));
      } catch (const PreconditionError& e) {
        throw InputError{e.what()};
      }
      if (!v->model.variable.has(o.lambda) || !v->model.variable.has(o.lambda + d)) {
        throw InputError{"variable '" + v->name + "' is undefined at (lambda=" +
                         std::to_string(o.lambda) + ", delta=" + std::to_string(d) + ")"};
      }
    }
  } catch (const InputError& e) {
    err << "error: " << e.message << '\n';
    report["error"] = e.message;
    return finish(kInputError);
  }
  report["flags"] = {{"variable", v->name},
                     {"lambda", o.lambda},
                     {"schedule", schedule},
                     {"tol", o.tol}};

  json checks = json::array();
  bool all_hold = true;
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    const TransitionCheck c = check_timed_transition(v->model, *timers[i], o.lambda);
    checks.push_back({{"lambda", c.lambda},
                      {"delta", c.delta},
                      {"timer", c.timer},
                      {"holds", c.holds}});
    if (!c.holds) {
      all_hold = false;
      err << "timed transition fails at (lambda=" << c.lambda << ", delta=" << c.delta
          << "): " << c.detail << '\n';
    }
  }
  report["transitions"] = std::move(checks);
  if (!all_hold) return finish(kRefuted);

  const DerivativeEstimate e = estimate_derivative(v->model, o.lambda, schedule, m.timers);
  json est;
  est["lambda"] = e.lambda;
  est["schedule"] = e.schedule;
  est["timers"] = e.timers;
  est["ratios"] = e.ratios;
  est["extrapolated"] = e.extrapolated;
  est["slope"] = e.slope;
  est["order"] = e.order ? json(*e.order) : json(nullptr);
  est["max_residual"] = e.max_residual;
  const double gap = std::abs(e.ratios.back() - e.extrapolated);
  est["last_ratio_within_tol"] = gap <= o.tol * std::max(1.0, std::abs(e.extrapolated));
  report["estimate"] = std::move(est);

  if (!o.csv.empty()) {
    std::ofstream f(o.csv);
    if (!f) {
      err << "error: cannot write '" << o.csv << "'\n";
      return finish(kInputError);
    }
    f << to_csv(e);
    report["csv"] = o.csv;
  }
  if (o.format == "text") {
    out << "variable " << v->name << " at lambda " << e.lambda << '\n';
    for (std::size_t i = 0; i < e.schedule.size(); ++i) {
      out << "  delta " << e.schedule[i] << " (" << e.timers[i]
          << "): ratio " << dsl::format_real(e.ratios[i]) << '\n';
    }
    out << "  extrapolated " << dsl::format_real(e.extrapolated);
    if (e.order) out << ", order " << dsl::format_real(*e.order);
    out << '\n';
  }
  return finish(kOk);
}

// ----------------------------------------------------------- dispatchers

int models_command(const std::string& command, const Options& o, std::ostream& out,
                   std::ostream& err) {
  json report = header(command, o);
  if (command == "check") {
    report["flags"] = {{"budget", o.budget},
                       {"horizon", o.horizon ? json(*o.horizon) : json(nullptr)}};
  }
  int exit = kOk;
  const auto models = load_all(o, err, report);
  json list = json::array();
  for (std::size_t i = 0; i < models.size(); ++i) {
    if (!models[i]) {
      exit = kInputError;
      continue;
    }
    list.push_back(command == "check" ? check_model(*models[i], o.files[i], o, exit)
                                      : classify_model(*models[i], o.files[i], exit));
  }
  report["models"] = std::move(list);
  report["exit_status"] = exit;
  if (o.format == "json") {
    out << report.dump(2) << '\n';
  } else if (command == "check") {
    check_text(report, out);
  } else {
    classify_text(report, out);
  }
  return exit;
}

int fmt(const Options& o, std::ostream& out, std::ostream& err) {
  int exit = kOk;
  for (const auto& f : o.files) {
    std::ifstream in(resolve(f), std::ios::binary);
    if (!in) {
      err << f << ": error: cannot read file\n";
      exit = kInputError;
      continue;
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    const auto parsed = dsl::parse_model(buf.str());
    for (const auto& d : parsed.diagnostics) err << d.format(f) << '\n';
    if (!parsed.ok()) {
      exit = kInputError;
      continue;
    }
    out << dsl::pretty_print(parsed.model);
  }
  return exit;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Check task-law models, classify timers and recover dynamics", "tasklaw"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("files", o.files, "Model files (.ctm)")->required();
    sub->add_option("--format", o.format, "Report format")
        ->check(CLI::IsMember({"json", "text"}));
  };
  auto* check = app.add_subcommand("check", "Close the law set and run operational checks");
  add_common(check);
  check->add_option("--budget", o.budget, "Device states for witness search")
      ->check(CLI::Range(std::size_t{1}, kMaxSearchDevice));
  check->add_option("--horizon", o.horizon, "Synchrony horizon and witness step bound");
  check->add_flag("--timing", o.timing, "Include wall-clock timings");

  auto* classify = app.add_subcommand("classify", "Partition the declared timers by duration");
  add_common(classify);

  auto* dyn = app.add_subcommand("dynamics", "Estimate the derivative of a variable");
  add_common(dyn);
  dyn->add_option("--variable", o.variable, "Variable name");
  dyn->add_option("--lambda", o.lambda, "Parameter value");
  dyn->add_option("--schedule", o.schedule, "Strictly decreasing durations, e.g. 8,4,2,1");
  dyn->add_option("--tol", o.tol, "Relative agreement of the last ratio with the limit");
  dyn->add_option("--csv", o.csv, "Write (delta, ratio) rows here");

  auto* fmt_cmd = app.add_subcommand("fmt", "Print models in canonical form");
  fmt_cmd->add_option("files", o.files, "Model files (.ctm)")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  }

  try {
    if (check->parsed()) return models_command("check", o, out, err);
    if (classify->parsed()) return models_command("classify", o, out, err);
    if (dyn->parsed()) return dynamics(o, out, err);
    return fmt(o, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  }
}

}  // namespace tasklaw::cli
