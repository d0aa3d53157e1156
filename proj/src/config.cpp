#include "fsi/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <map>
#include <sstream>
#include <vector>

#include "fsi/io.hpp"

namespace fsi {

namespace {

struct Entry {
  std::string value;
  int line = 0;
  bool consumed = false;
};

using Section = std::map<std::string, Entry>;

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// raw tokenization: sections of key = value entries, duplicate keys rejected
std::map<std::string, Section> tokenize(const std::string& text) {
  std::map<std::string, Section> out;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("line " + std::to_string(lineno) + ": unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty())
        throw ConfigError("line " + std::to_string(lineno) + ": empty section name");
      out[section];  // a section may legitimately stay empty
      continue;
    }
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    if (section.empty())
      throw ConfigError("line " + std::to_string(lineno) + ": entry before any [section]");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    auto [it, fresh] = out[section].emplace(key, Entry{value, lineno, false});
    if (!fresh)
      throw ConfigError("duplicate key '" + section + "." + key + "' (lines " +
                        std::to_string(it->second.line) + " and " + std::to_string(lineno) + ")");
  }
  return out;
}

struct Reader {
  std::map<std::string, Section>& secs;

  Entry* find(const std::string& sec, const std::string& key) {
    auto si = secs.find(sec);
    if (si == secs.end()) return nullptr;
    auto ki = si->second.find(key);
    if (ki == si->second.end()) return nullptr;
    ki->second.consumed = true;
    return &ki->second;
  }
  Entry& require(const std::string& sec, const std::string& key) {
    Entry* e = find(sec, key);
    if (!e) throw ConfigError("missing required key '" + sec + "." + key + "'");
    return *e;
  }

  double to_double(const std::string& sec, const std::string& key, const Entry& e) {
    const char* s = e.value.c_str();
    char* end = nullptr;
    double v = std::strtod(s, &end);
    if (end == s || *end != '\0')
      throw ConfigError("line " + std::to_string(e.line) + ": '" + sec + "." + key +
                        "' is not a number: '" + e.value + "'");
    return v;
  }
  long to_int(const std::string& sec, const std::string& key, const Entry& e) {
    const char* s = e.value.c_str();
    char* end = nullptr;
    long v = std::strtol(s, &end, 10);
    if (end == s || *end != '\0')
      throw ConfigError("line " + std::to_string(e.line) + ": '" + sec + "." + key +
                        "' is not an integer: '" + e.value + "'");
    return v;
  }
  bool to_bool(const std::string& sec, const std::string& key, const Entry& e) {
    if (e.value == "true") return true;
    if (e.value == "false") return false;
    throw ConfigError("line " + std::to_string(e.line) + ": '" + sec + "." + key +
                      "' must be true or false, got '" + e.value + "'");
  }
  Vec to_vec(const std::string& sec, const std::string& key, const Entry& e, int dim) {
    std::istringstream in(e.value);
    Vec v;
    v[0] = v[1] = v[2] = 0;
    for (int i = 0; i < dim; ++i)
      if (!(in >> v[i]))
        throw ConfigError("line " + std::to_string(e.line) + ": '" + sec + "." + key +
                          "' needs " + std::to_string(dim) + " numbers: '" + e.value + "'");
    std::string rest;
    if (in >> rest)
      throw ConfigError("line " + std::to_string(e.line) + ": '" + sec + "." + key +
                        "' has trailing content: '" + rest + "'");
    return v;
  }

  void opt_double(const std::string& sec, const std::string& key, double& dst) {
    if (Entry* e = find(sec, key)) dst = to_double(sec, key, *e);
  }
  void opt_int(const std::string& sec, const std::string& key, int& dst) {
    if (Entry* e = find(sec, key)) dst = int(to_int(sec, key, *e));
  }
  void opt_bool(const std::string& sec, const std::string& key, bool& dst) {
    if (Entry* e = find(sec, key)) dst = to_bool(sec, key, *e);
  }
  void opt_string(const std::string& sec, const std::string& key, std::string& dst) {
    if (Entry* e = find(sec, key)) dst = e->value;
  }
};

std::string vec_str(const Vec& v, int dim) {
  std::string s = format_double(v[0]);
  for (int i = 1; i < dim; ++i) s += " " + format_double(v[i]);
  return s;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  std::map<std::string, Section> secs = tokenize(text);
  Reader rd{secs};
  RunConfig c;

  long dim = rd.to_int("domain", "dim", rd.require("domain", "dim"));
  if (dim != 2 && dim != 3) throw ConfigError("domain.dim must be 2 or 3");
  c.geometry.dim = int(dim);

  c.geometry.container.lo =
      rd.to_vec("domain", "lo", rd.require("domain", "lo"), c.geometry.dim);
  c.geometry.container.hi =
      rd.to_vec("domain", "hi", rd.require("domain", "hi"), c.geometry.dim);
  c.geometry.h = rd.to_double("domain", "h", rd.require("domain", "h"));

  // solid1..solidN, consecutively numbered from 1
  for (int k = 1;; ++k) {
    std::string name = "solid" + std::to_string(k);
    if (secs.find(name) == secs.end()) {
      for (const auto& [sec, entries] : secs) {
        (void)entries;
        if (sec.size() > 5 && sec.compare(0, 5, "solid") == 0) {
          int n = std::atoi(sec.c_str() + 5);
          if (n >= k)
            throw ConfigError("section [" + sec + "] given but [solid" + std::to_string(k) +
                              "] is missing");
        }
      }
      break;
    }
    Box b;
    b.lo = rd.to_vec(name, "lo", rd.require(name, "lo"), c.geometry.dim);
    b.hi = rd.to_vec(name, "hi", rd.require(name, "hi"), c.geometry.dim);
    c.geometry.solids.push_back(b);
  }

  rd.opt_double("solver", "nu", c.solver.nu);
  rd.opt_double("solver", "lambda", c.solver.lambda);
  rd.opt_double("solver", "mu", c.solver.mu);
  rd.opt_double("solver", "kappa", c.solver.kappa);
  rd.opt_double("solver", "eps", c.solver.eps);
  rd.opt_double("solver", "dt", c.solver.dt);
  rd.opt_bool("solver", "include_hg", c.solver.include_hg);
  rd.opt_double("solver", "newton_tol", c.solver.newton.tol);
  rd.opt_int("solver", "newton_maxit", c.solver.newton.maxit);
  rd.opt_double("solver", "det_floor", c.solver.det_floor);
  rd.opt_double("solver", "z_ceiling", c.solver.z_ceiling);

  rd.opt_double("run", "t_end", c.t_end);
  rd.opt_int("run", "record_every", c.record_every);
  rd.opt_string("run", "initial", c.initial);
  rd.opt_double("run", "amplitude", c.amplitude);
  rd.opt_string("run", "forcing", c.forcing);
  rd.opt_double("run", "forcing_amplitude", c.forcing_amplitude);
  rd.opt_bool("run", "use_hierarchy", c.use_hierarchy);

  for (const auto& [sec, entries] : secs) {
    bool solid = sec.size() > 5 && sec.compare(0, 5, "solid") == 0;
    if (sec != "domain" && sec != "solver" && sec != "run" && !solid)
      throw ConfigError("unknown section [" + sec + "]");
    for (const auto& [key, e] : entries)
      if (!e.consumed)
        throw ConfigError("line " + std::to_string(e.line) + ": unknown key '" + sec + "." + key +
                          "'");
  }
  return c;
}

std::string emit_config(const RunConfig& c) {
  const int d = c.geometry.dim;
  std::string s;
  s += "[domain]\n";
  s += "dim = " + std::to_string(d) + "\n";
  s += "lo = " + vec_str(c.geometry.container.lo, d) + "\n";
  s += "hi = " + vec_str(c.geometry.container.hi, d) + "\n";
  s += "h = " + format_double(c.geometry.h) + "\n";
  for (size_t k = 0; k < c.geometry.solids.size(); ++k) {
    s += "\n[solid" + std::to_string(k + 1) + "]\n";
    s += "lo = " + vec_str(c.geometry.solids[k].lo, d) + "\n";
    s += "hi = " + vec_str(c.geometry.solids[k].hi, d) + "\n";
  }
  s += "\n[solver]\n";
  s += "nu = " + format_double(c.solver.nu) + "\n";
  s += "lambda = " + format_double(c.solver.lambda) + "\n";
  s += "mu = " + format_double(c.solver.mu) + "\n";
  s += "kappa = " + format_double(c.solver.kappa) + "\n";
  s += "eps = " + format_double(c.solver.eps) + "\n";
  s += "dt = " + format_double(c.solver.dt) + "\n";
  s += "include_hg = " + std::string(c.solver.include_hg ? "true" : "false") + "\n";
  s += "newton_tol = " + format_double(c.solver.newton.tol) + "\n";
  s += "newton_maxit = " + std::to_string(c.solver.newton.maxit) + "\n";
  s += "det_floor = " + format_double(c.solver.det_floor) + "\n";
  s += "z_ceiling = " + format_double(c.solver.z_ceiling) + "\n";
  s += "\n[run]\n";
  s += "t_end = " + format_double(c.t_end) + "\n";
  s += "record_every = " + std::to_string(c.record_every) + "\n";
  s += "initial = " + c.initial + "\n";
  s += "amplitude = " + format_double(c.amplitude) + "\n";
  s += "forcing = " + c.forcing + "\n";
  s += "forcing_amplitude = " + format_double(c.forcing_amplitude) + "\n";
  s += "use_hierarchy = " + std::string(c.use_hierarchy ? "true" : "false") + "\n";
  return s;
}

bool operator==(const RunConfig& a, const RunConfig& b) {
  auto veq = [&](const Vec& x, const Vec& y) {
    for (int i = 0; i < a.geometry.dim; ++i)
      if (x[i] != y[i]) return false;
    return true;
  };
  if (a.geometry.dim != b.geometry.dim || a.geometry.h != b.geometry.h) return false;
  if (!veq(a.geometry.container.lo, b.geometry.container.lo) ||
      !veq(a.geometry.container.hi, b.geometry.container.hi))
    return false;
  if (a.geometry.solids.size() != b.geometry.solids.size()) return false;
  for (size_t k = 0; k < a.geometry.solids.size(); ++k)
    if (!veq(a.geometry.solids[k].lo, b.geometry.solids[k].lo) ||
        !veq(a.geometry.solids[k].hi, b.geometry.solids[k].hi))
      return false;
  return a.solver.nu == b.solver.nu && a.solver.lambda == b.solver.lambda &&
         a.solver.mu == b.solver.mu && a.solver.kappa == b.solver.kappa &&
         a.solver.eps == b.solver.eps && a.solver.dt == b.solver.dt &&
         a.solver.include_hg == b.solver.include_hg &&
         a.solver.newton.tol == b.solver.newton.tol &&
         a.solver.newton.maxit == b.solver.newton.maxit &&
         a.solver.det_floor == b.solver.det_floor && a.solver.z_ceiling == b.solver.z_ceiling &&
         a.t_end == b.t_end && a.record_every == b.record_every && a.initial == b.initial &&
         a.amplitude == b.amplitude && a.forcing == b.forcing &&
         a.forcing_amplitude == b.forcing_amplitude && a.use_hierarchy == b.use_hierarchy;
}

}  // namespace fsi
