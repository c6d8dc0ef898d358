#include "lrt/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>
#include <vector>

namespace lrt {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(const std::string& key, const std::string& v) {
  T out{};
  const char* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end)
    throw ConfigError("bad value '" + v + "' for " + key);
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("bad boolean '" + v + "' for " + key);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

DtRule parse_dt_rule(const std::string& s) {
  for (DtRule r : {DtRule::manufactured, DtRule::variable_scattering, DtRule::lattice})
    if (to_string(r) == s) return r;
  throw ConfigError("unknown dt_rule '" + s + "'");
}

TreeKind parse_tree(const std::string& s) {
  if (s == "unsplit") return TreeKind::unsplit;
  if (s == "split") return TreeKind::split;
  throw ConfigError("unknown tree '" + s + "'");
}

struct Knob {
  const char* name;
  std::function<void(ProblemConfig&, const std::string&)> set;
  std::function<std::string(const ProblemConfig&)> get;  // empty: not written
};

#define LRT_DOUBLE(field)                                                                   \
  Knob{#field, [](ProblemConfig& c, const std::string& v) { c.field = parse_number<double>(#field, v); }, \
       [](const ProblemConfig& c) { return fmt(c.field); }}
#define LRT_INT(field)                                                                    \
  Knob{#field, [](ProblemConfig& c, const std::string& v) { c.field = parse_number<int>(#field, v); }, \
       [](const ProblemConfig& c) { return std::to_string(c.field); }}
#define LRT_BOOL(field)                                                                    \
  Knob{#field, [](ProblemConfig& c, const std::string& v) { c.field = parse_bool(#field, v); }, \
       [](const ProblemConfig& c) { return std::string(c.field ? "true" : "false"); }}

const std::vector<Knob>& problem_knobs() {
  static const std::vector<Knob> knobs = {
      Knob{"n",
           [](ProblemConfig& c, const std::string& v) { c.nx = c.ny = parse_number<int>("n", v); },
           {}},
      LRT_INT(nx),
      LRT_INT(ny),
      LRT_DOUBLE(x0),
      LRT_DOUBLE(x1),
      LRT_DOUBLE(y0),
      LRT_DOUBLE(y1),
      LRT_INT(order),
      LRT_DOUBLE(eps),
      LRT_DOUBLE(t_final),
      LRT_INT(steps),
      Knob{"dt_rule", [](ProblemConfig& c, const std::string& v) { c.dt_rule = parse_dt_rule(v); },
           [](const ProblemConfig& c) { return to_string(c.dt_rule); }},
      LRT_DOUBLE(zeta),
      Knob{"tableau", [](ProblemConfig& c, const std::string& v) { c.tableau = v; },
           [](const ProblemConfig& c) { return c.tableau; }},
      LRT_DOUBLE(rel_tol_g),
      LRT_DOUBLE(rel_tol_rho),
      Knob{"max_rank",
           [](ProblemConfig& c, const std::string& v) { c.max_rank = parse_number<Index>("max_rank", v); },
           [](const ProblemConfig& c) { return std::to_string(c.max_rank); }},
      LRT_BOOL(mass_projection),
      LRT_BOOL(zero_density_projection),
      LRT_BOOL(well_prepared),
      LRT_DOUBLE(absorber_sigma_a),
      LRT_DOUBLE(background_sigma_s),
      LRT_DOUBLE(source_strength),
      LRT_DOUBLE(uniform_sigma_a),
  };
  return knobs;
}

#undef LRT_DOUBLE
#undef LRT_INT
#undef LRT_BOOL

const Knob* find_knob(const std::string& key) {
  for (const auto& k : problem_knobs())
    if (key == k.name) return &k;
  return nullptr;
}

bool is_problem_name(const std::string& s) {
  try {
    parse_problem_kind(s);
    return true;
  } catch (const ConfigError&) {
    return false;
  }
}

void apply_run_key(RunConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "solver") {
    cfg.solver = parse_solver_kind(value);
    if (cfg.solver == SolverKind::lowrank_unsplit) cfg.problem.tree = TreeKind::unsplit;
    if (cfg.solver == SolverKind::lowrank_split) cfg.problem.tree = TreeKind::split;
  } else if (key == "tree") {
    cfg.problem.tree = parse_tree(value);
  } else if (key == "scheme") {
    // each spatial scheme comes with its time integrator; a tableau key
    // in the problem section still overrides this
    cfg.problem.scheme = parse_scheme(value);
    cfg.problem.tableau = cfg.problem.scheme == Scheme::muscl2 ? "imex111" : "ars443";
  } else if (key == "output") {
    if (value.empty()) throw ConfigError("empty output directory");
    cfg.output = value;
  } else if (key == "slice_y") {
    cfg.slice_y = parse_number<double>(key, value);
  } else if (const Knob* k = find_knob(key)) {
    k->set(cfg.problem, value);
  } else {
    throw ConfigError("unknown key '" + key + "'");
  }
}

struct Entry {
  int line;
  std::string section, key, value;
};

}  // namespace

std::string to_string(SolverKind s) {
  switch (s) {
    case SolverKind::lowrank_unsplit: return "lowrank-unsplit";
    case SolverKind::lowrank_split: return "lowrank-split";
    case SolverKind::fullgrid: return "fullgrid";
  }
  return "?";
}

ProblemKind parse_problem_kind(const std::string& s) {
  for (ProblemKind k : {ProblemKind::manufactured, ProblemKind::variable_scattering, ProblemKind::lattice,
                        ProblemKind::gaussian_diffusion})
    if (to_string(k) == s) return k;
  throw ConfigError("unknown problem '" + s + "'");
}

SolverKind parse_solver_kind(const std::string& s) {
  for (SolverKind k : {SolverKind::lowrank_unsplit, SolverKind::lowrank_split, SolverKind::fullgrid})
    if (to_string(k) == s) return k;
  throw ConfigError("unknown solver '" + s + "'");
}

Scheme parse_scheme(const std::string& s) {
  if (s == "high-order" || s == "weno5") return Scheme::weno5;
  if (s == "low-order" || s == "muscl2") return Scheme::muscl2;
  throw ConfigError("unknown scheme '" + s + "'");
}

void RunConfig::validate() const {
  if (solver == SolverKind::lowrank_unsplit && problem.tree != TreeKind::unsplit)
    throw ConfigError("solver lowrank-unsplit needs tree = unsplit");
  if (solver == SolverKind::lowrank_split && problem.tree != TreeKind::split)
    throw ConfigError("solver lowrank-split needs tree = split");
  if (output.empty()) throw ConfigError("empty output directory");
  try {
    problem.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (slice_y && !(*slice_y >= problem.y0 && *slice_y <= problem.y1))
    throw ConfigError("slice_y outside the domain");
}

void apply_key(RunConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "problem") {
    const TreeKind tree = cfg.problem.tree;
    const Scheme scheme = cfg.problem.scheme;
    cfg.problem = default_problem(parse_problem_kind(value));
    cfg.problem.tree = tree;
    cfg.problem.scheme = scheme;
    return;
  }
  apply_run_key(cfg, key, value);
}

RunConfig parse_config(std::istream& in) {
  std::vector<Entry> entries;
  std::vector<std::string> sections;
  std::string section, raw;
  for (int line = 1; std::getline(in, raw); ++line) {
    const auto hash = raw.find('#');
    const std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (s.empty()) continue;
    const std::string where = "line " + std::to_string(line) + ": ";
    if (s.front() == '[') {
      if (s.back() != ']') throw ConfigError(where + "unterminated section");
      section = trim(s.substr(1, s.size() - 2));
      if (section != "record" && !is_problem_name(section))
        throw ConfigError(where + "unknown section '" + section + "'");
      sections.push_back(section);
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected key = value");
    entries.push_back({line, section, trim(s.substr(0, eq)), trim(s.substr(eq + 1))});
    if (entries.back().key.empty()) throw ConfigError(where + "empty key");
  }

  auto located = [](const Entry& e, const std::function<void()>& f) {
    try {
      f();
    } catch (const std::exception& ex) {
      throw ConfigError("line " + std::to_string(e.line) + ": " + ex.what());
    }
  };

  // the problem: explicit key, else the only problem section, else the default
  std::string problem;
  for (const auto& e : entries)
    if (e.section.empty() && e.key == "problem") located(e, [&] { parse_problem_kind(problem = e.value); });
  if (problem.empty()) {
    std::vector<std::string> named;
    for (const auto& s : sections)
      if (s != "record" && std::find(named.begin(), named.end(), s) == named.end()) named.push_back(s);
    if (named.size() > 1) throw ConfigError("several problem sections and no 'problem' key");
    problem = named.empty() ? to_string(ProblemKind::manufactured) : named.front();
  }

  RunConfig cfg;
  cfg.problem = default_problem(parse_problem_kind(problem));
  for (const auto& e : entries) {
    if (!e.section.empty() || e.key == "problem") continue;
    located(e, [&] { apply_run_key(cfg, e.key, e.value); });
  }
  for (const auto& e : entries) {
    if (e.section.empty() || e.section == "record") continue;
    const Knob* k = find_knob(e.key);
    if (!k) throw ConfigError("line " + std::to_string(e.line) + ": unknown key '" + e.key + "' in [" + e.section + "]");
    if (e.section == problem) {
      located(e, [&] { k->set(cfg.problem, e.value); });
    } else {
      ProblemConfig scratch = default_problem(parse_problem_kind(e.section));
      located(e, [&] { k->set(scratch, e.value); });
    }
  }
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  return parse_config(in);
}

void write_config(const RunConfig& cfg, std::ostream& out) {
  out << "problem = " << to_string(cfg.problem.kind) << "\n";
  out << "solver = " << to_string(cfg.solver) << "\n";
  out << "tree = " << to_string(cfg.problem.tree) << "\n";
  out << "scheme = " << (cfg.problem.scheme == Scheme::weno5 ? "high-order" : "low-order") << "\n";
  out << "output = " << cfg.output << "\n";
  if (cfg.slice_y) out << "slice_y = " << fmt(*cfg.slice_y) << "\n";
  out << "\n[" << to_string(cfg.problem.kind) << "]\n";
  for (const auto& k : problem_knobs())
    if (k.get) out << k.name << " = " << k.get(cfg.problem) << "\n";
}

}  // namespace lrt
