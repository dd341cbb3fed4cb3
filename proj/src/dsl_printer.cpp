#include <charconv>
#include <sstream>

#include "tasklaw/dsl.hpp"

namespace tasklaw::dsl {

namespace {

std::optional<std::int64_t> canonical_int(const std::string& s) {
  if (s.empty() || s.size() > 18) return std::nullopt;
  if (s.size() > 1 && s[0] == '0') return std::nullopt;
  std::int64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
  return v;
}

// Runs of three or more consecutive integers collapse to `lo..hi`.
std::string items(const std::vector<std::string>& labels) {
  std::string out;
  auto emit = [&](const std::string& s) {
    if (!out.empty()) out += ' ';
    out += s;
  };
  std::size_t i = 0;
  while (i < labels.size()) {
    const auto lo = canonical_int(labels[i]);
    std::size_t j = i + 1;
    if (lo) {
      while (j < labels.size()) {
        const auto v = canonical_int(labels[j]);
        if (!v || *v != *lo + static_cast<std::int64_t>(j - i)) break;
        ++j;
      }
    }
    if (lo && j - i >= 3) {
      emit(labels[i] + ".." + labels[j - 1]);
      i = j;
    } else {
      emit(labels[i]);
      ++i;
    }
  }
  return out;
}

std::string ref(const AttrRef& r) {
  if (r.is_pair()) return "(" + ref(r.pair[0]) + ", " + ref(r.pair[1]) + ")";
  return r.part.empty() ? r.name : r.name + "." + r.part;
}

}  // namespace

std::string format_real(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return ec == std::errc() ? std::string(buf, p) : "0";
}

std::string pretty_print(const ModelDecl& m) {
  std::ostringstream out;
  bool first_section = true;
  auto section = [&] {
    if (!first_section) out << '\n';
    first_section = false;
  };

  if (!m.substrates.empty()) section();
  for (const auto& s : m.substrates) {
    out << "substrate " << s.name << " {\n";
    out << "  states " << items(s.states) << '\n';
    out << "  step";
    switch (s.step) {
      case StepKind::Identity: out << " identity"; break;
      case StepKind::Shift: out << " shift " << s.shift; break;
      case StepKind::Cycles:
        for (const auto& c : s.cycles) out << " (" << items(c) << ')';
        break;
    }
    out << "\n}\n";
  }

  if (!m.attributes.empty()) section();
  for (const auto& a : m.attributes) {
    out << "attribute " << a.name << " on " << a.substrate << " { " << items(a.states)
        << (a.states.empty() ? "}" : " }") << '\n';
  }

  if (!m.timers.empty()) section();
  for (const auto& t : m.timers) {
    out << "timer ";
    switch (t.kind) {
      case TimerDeclKind::Counter:
        out << "counter " << t.name << " { bits " << *t.bits << "; threshold " << *t.threshold
            << " }";
        break;
      case TimerDeclKind::Particle:
        out << "particle " << t.name << " { grid " << *t.grid << "; velocity " << *t.velocity
            << "; target " << *t.target << " }";
        break;
      case TimerDeclKind::Custom:
        out << "custom " << t.name << " on " << t.on << " { zero " << t.zero << "; running "
            << t.running << "; one " << t.one << "; halt " << t.halt;
        if (t.horizon) out << "; horizon " << *t.horizon;
        out << " }";
        break;
      case TimerDeclKind::Composite:
        out << "composite " << t.name << " = " << t.first << " + " << t.second;
        break;
    }
    out << '\n';
  }

  if (!m.tasks.empty()) section();
  for (const auto& t : m.tasks) {
    out << "task " << t.name << ": " << ref(t.input) << " -> " << ref(t.output) << '\n';
  }

  if (!m.laws.empty()) section();
  for (const auto& l : m.laws) {
    out << "law " << to_string(l.status);
    if (l.null_task) {
      out << " null";
    } else {
      out << " task " << l.task;
      if (!l.on.empty()) out << " on " << l.on;
    }
    out << '\n';
  }

  if (!m.variables.empty()) section();
  for (const auto& v : m.variables) {
    out << "variable " << v.name << " on " << v.substrate << " {\n";
    for (const auto& e : v.entries) {
      out << "  " << e.lambda << ": ";
      if (e.attribute.empty()) {
        out << "{ " << items(e.states) << (e.states.empty() ? "}" : " }");
      } else {
        out << e.attribute;
      }
      out << " = " << format_real(e.value);
      if (e.is_static) out << " static";
      out << '\n';
    }
    out << "}\n";
  }
  return out.str();
}

}  // namespace tasklaw::dsl
