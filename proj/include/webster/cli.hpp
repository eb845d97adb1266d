#ifndef WEBSTER_CLI_HPP
#define WEBSTER_CLI_HPP

// Experiment orchestration behind the `webster` command: a small
// `[section] key = value` configuration format, the figure presets, station
// runs (RG fields, numerical march, invariant solution), comparison metrics
// and CSV output with 17 significant digits.

#include <webster/error.hpp>
#include <webster/invariant.hpp>
#include <webster/kernel.hpp>
#include <webster/params.hpp>
#include <webster/profiles.hpp>
#include <webster/rg.hpp>
#include <webster/solver.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace webster::cli {

inline const std::vector<std::string>& field_names() {
  static const std::vector<std::string> names{"q0", "q1", "qpt", "qnum", "invariant"};
  return names;
}

// ---------------------------------------------------------------- config file

/// Parsed `[section]` / `key = value` text. Keys before any header belong to
/// section "run". `#` starts a comment.
class ConfigText {
 public:
  static ConfigText parse(std::istream& in, const std::string& origin) {
    ConfigText c;
    c.origin_ = origin;
    std::string line, section = "run";
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      line = trim(line);
      if (line.empty()) continue;
      const std::string where = origin + ":" + std::to_string(lineno);
      if (line.front() == '[') {
        if (line.back() != ']') throw ConfigError(where + ": unterminated section header");
        section = trim(line.substr(1, line.size() - 2));
        if (section.empty()) throw ConfigError(where + ": empty section name");
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
      const std::string key = trim(line.substr(0, eq));
      if (key.empty()) throw ConfigError(where + ": empty key");
      auto& slot = c.values_[section][key];
      if (slot.has_value()) throw ConfigError(where + ": duplicate key '" + key + "'");
      slot = Entry{trim(line.substr(eq + 1)), where};
    }
    return c;
  }

  static ConfigText load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    auto c = parse(in, path);
    c.base_ = std::filesystem::path(path).parent_path();
    return c;
  }

  bool has(const std::string& section, const std::string& key) const {
    auto s = values_.find(section);
    return s != values_.end() && s->second.count(key) != 0;
  }

  std::string text(const std::string& section, const std::string& key,
                   const std::string& fallback) const {
    const Entry* e = find(section, key);
    return e ? e->value : fallback;
  }

  double number(const std::string& section, const std::string& key, double fallback) const {
    const Entry* e = find(section, key);
    if (!e) return fallback;
    double v;
    if (!io::parse_double(e->value, v) || !std::isfinite(v))
      throw ConfigError(e->where + ": '" + key + "' is not a finite number");
    return v;
  }

  std::vector<double> numbers(const std::string& section, const std::string& key) const {
    const Entry* e = find(section, key);
    std::vector<double> out;
    if (!e) return out;
    for (const auto& f : io::split_fields(e->value)) {
      double v;
      if (!io::parse_double(f, v) || !std::isfinite(v))
        throw ConfigError(e->where + ": '" + f + "' in '" + key + "' is not a number");
      out.push_back(v);
    }
    return out;
  }

  std::vector<std::string> words(const std::string& section, const std::string& key) const {
    const Entry* e = find(section, key);
    return e ? io::split_fields(e->value) : std::vector<std::string>{};
  }

  /// File path relative to the config file's directory.
  std::string path(const std::string& section, const std::string& key) const {
    const Entry* e = find(section, key);
    if (!e) return {};
    std::filesystem::path p(e->value);
    if (p.is_relative() && !base_.empty()) p = base_ / p;
    if (!std::filesystem::exists(p))
      throw ConfigError(e->where + ": file '" + p.string() + "' does not exist");
    return p.string();
  }

  /// Rejects sections and keys outside `known` (catches typos).
  void check_known(const std::map<std::string, std::set<std::string>>& known) const {
    for (const auto& [section, keys] : values_) {
      auto s = known.find(section);
      if (s == known.end()) throw ConfigError(origin_ + ": unknown section [" + section + "]");
      for (const auto& [key, entry] : keys) {
        if (!s->second.count(key))
          throw ConfigError(entry->where + ": unknown key '" + key + "' in [" + section + "]");
      }
    }
  }

 private:
  struct Entry {
    std::string value;
    std::string where;
  };

  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  }

  const Entry* find(const std::string& section, const std::string& key) const {
    auto s = values_.find(section);
    if (s == values_.end()) return nullptr;
    auto k = s->second.find(key);
    return k == s->second.end() ? nullptr : &*k->second;
  }

  std::string origin_;
  std::filesystem::path base_;
  std::map<std::string, std::map<std::string, std::optional<Entry>>> values_;
};

// ---------------------------------------------------------------- run config

struct RunConfig {
  std::string name = "run";
  PhysParams phys;
  ProfileSpec profile;
  std::string ic_file;            // empty: W = cos(tau)
  std::string ic_column = "W";
  std::vector<double> stations;   // nu * x
  std::size_t n = 256;
  double solver_tol = 1e-8;
  double rg_tol = 1e-6;
  Breakdown breakdown = Breakdown::kThrow;
  std::vector<std::string> outputs;
  std::vector<std::pair<std::string, std::string>> comparisons;  // (field, reference)
  std::string out = "out";
  std::size_t profile_samples = 101;
  // invariant solution
  double W0 = 0.0, dW0 = 0.0;
  bool periodic_orbit = false;
  double C0 = 0.0, C1 = 0.0;
  std::optional<std::pair<double, double>> tau_window;

  bool wants(const std::string& f) const {
    return std::find(outputs.begin(), outputs.end(), f) != outputs.end();
  }

  const BetaParams* betas() const {
    return std::get_if<shape::BetaFamily>(&profile.shape)
               ? &std::get<shape::BetaFamily>(profile.shape).betas
               : nullptr;
  }

  InvariantConfig invariant() const {
    InvariantConfig c;
    if (betas()) c.betas = *betas();
    c.phys = phys;
    c.W0 = W0;
    c.dW0 = dW0;
    return c;
  }

  InitialCondition initial() const {
    return ic_file.empty() ? InitialCondition::harmonic()
                           : read_initial_condition(ic_file, ic_column);
  }

  TauGrid grid() const {
    if (tau_window) return TauGrid::window(tau_window->first, tau_window->second, n);
    return TauGrid::periodic(n);
  }

  void validate() const {
    phys.validate();
    if (stations.empty()) throw ConfigError("stations list is empty");
    for (std::size_t i = 0; i < stations.size(); ++i) {
      if (!(stations[i] >= 0.0)) throw ConfigError("stations must be >= 0");
      if (i > 0 && !(stations[i] > stations[i - 1]))
        throw ConfigError("stations must be strictly increasing");
    }
    if (outputs.empty()) throw ConfigError("no outputs requested");
    for (const auto& f : outputs) {
      if (std::find(field_names().begin(), field_names().end(), f) == field_names().end())
        throw ConfigError("unknown output '" + f + "'");
    }
    if (!(solver_tol > 0.0) || !(rg_tol > 0.0)) throw ConfigError("tolerances must be > 0");
    if (tau_window) {
      if (outputs != std::vector<std::string>{"invariant"})
        throw ConfigError("a tau window (tau_lo, tau_hi) is only valid for the invariant output");
      if (n < 3) throw ConfigError("tau window needs n >= 3");
    } else if (n < 16 || !num::is_power_of_two(n)) {
      throw ConfigError("grid size n must be a power of two >= 16");
    }
    if (wants("invariant")) {
      if (!betas()) throw ConfigError("the invariant output needs [profile] kind = beta");
      if (!(phys.a > 0.0)) throw ConfigError("the invariant output needs a > 0");
      if (periodic_orbit) {
        const auto& b = *betas();
        if (b.beta2 != 0.0 || b.beta1 != -b.M)
          throw ConfigError("w = orbit needs beta2 = 0 and beta1 = -M");
      }
    }
    for (const auto& [f, ref] : comparisons) {
      if (!wants(f) || !wants(ref))
        throw ConfigError("comparison " + f + ":" + ref + " needs both fields as outputs");
    }
  }
};

/// Builds a RunConfig from parsed text.
inline RunConfig make_run_config(const ConfigText& t) {
  t.check_known({
      {"physics", {"a", "nu"}},
      {"profile",
       {"kind", "alpha", "radius", "beta0", "beta1", "beta2", "M", "zeta_max", "file",
        "x_max"}},
      {"initial", {"kind", "file", "column"}},
      {"run",
       {"name", "stations", "n", "outputs", "compare", "tol", "rg_tol", "breakdown", "out",
        "samples", "tau_lo", "tau_hi"}},
      {"invariant", {"W0", "dW0", "w", "C0", "C1"}},
  });
  RunConfig c;
  c.name = t.text("run", "name", c.name);
  c.phys.a = t.number("physics", "a", c.phys.a);
  c.phys.nu = t.number("physics", "nu", c.phys.nu);

  const std::string kind = t.text("profile", "kind", "constant");
  if (kind == "constant") {
    c.profile.shape = shape::Constant{};
  } else if (kind == "exponential") {
    c.profile.shape = shape::Exponential{t.number("profile", "alpha", 0.0)};
  } else if (kind == "spherical") {
    c.profile.shape = shape::Spherical{t.number("profile", "radius", 1.0)};
  } else if (kind == "powerlaw") {
    c.profile.shape = shape::PowerLaw{t.number("profile", "beta0", 1.0),
                                      t.number("profile", "beta1", 1.0),
                                      t.number("profile", "M", 1.0)};
  } else if (kind == "beta") {
    BetaParams b{t.number("profile", "beta0", 1.0), t.number("profile", "beta1", 0.0),
                 t.number("profile", "beta2", 0.0), t.number("profile", "M", 1.0)};
    c.profile.shape = shape::BetaFamily{b, t.number("profile", "zeta_max", 1.0)};
  } else if (kind == "tabulated") {
    if (!t.has("profile", "file")) throw ConfigError("tabulated profile needs file = <path>");
    c.profile.shape = read_profile_table(t.path("profile", "file"));
  } else {
    throw ConfigError("unknown profile kind '" + kind + "'");
  }
  if (t.has("profile", "x_max")) c.profile.x_max = t.number("profile", "x_max", 0.0);

  const std::string ic = t.text("initial", "kind", t.has("initial", "file") ? "file" : "harmonic");
  if (ic == "file") {
    if (!t.has("initial", "file")) throw ConfigError("initial kind = file needs file = <path>");
    c.ic_file = t.path("initial", "file");
    c.ic_column = t.text("initial", "column", "W");
  } else if (ic != "harmonic") {
    throw ConfigError("unknown initial kind '" + ic + "'");
  }

  c.stations = t.numbers("run", "stations");
  const double n = t.number("run", "n", 256.0);
  if (!(n >= 1.0) || n != std::floor(n)) throw ConfigError("n must be a positive integer");
  c.n = static_cast<std::size_t>(n);
  c.solver_tol = t.number("run", "tol", c.solver_tol);
  c.rg_tol = t.number("run", "rg_tol", c.rg_tol);
  const std::string br = t.text("run", "breakdown", "throw");
  if (br == "mask") {
    c.breakdown = Breakdown::kMask;
  } else if (br != "throw") {
    throw ConfigError("breakdown must be 'throw' or 'mask'");
  }
  c.outputs = t.words("run", "outputs");
  for (const auto& w : t.words("run", "compare")) {
    const auto colon = w.find(':');
    if (colon == std::string::npos) throw ConfigError("compare entries look like q1:qnum");
    c.comparisons.emplace_back(w.substr(0, colon), w.substr(colon + 1));
  }
  c.out = t.text("run", "out", c.out);
  const double samples = t.number("run", "samples", 101.0);
  if (!(samples >= 2.0) || samples != std::floor(samples))
    throw ConfigError("samples must be an integer >= 2");
  c.profile_samples = static_cast<std::size_t>(samples);
  if (t.has("run", "tau_lo") || t.has("run", "tau_hi")) {
    c.tau_window = {t.number("run", "tau_lo", -num::kPi), t.number("run", "tau_hi", num::kPi)};
    if (!(c.tau_window->second > c.tau_window->first))
      throw ConfigError("tau_lo must be below tau_hi");
  }

  c.W0 = t.number("invariant", "W0", 0.0);
  c.dW0 = t.number("invariant", "dW0", 0.0);
  const std::string w = t.text("invariant", "w", "ode");
  if (w == "orbit") {
    c.periodic_orbit = true;
  } else if (w != "ode") {
    throw ConfigError("invariant w must be 'ode' or 'orbit'");
  }
  c.C0 = t.number("invariant", "C0", 0.0);
  c.C1 = t.number("invariant", "C1", 0.0);
  return c;
}

/// Figure presets: W = cos, mu/nu = exp(alpha x) with alpha/nu = -0.1.
inline RunConfig preset(const std::string& name) {
  RunConfig c;
  c.name = name;
  c.phys = {1.0, 1.0};
  c.profile.shape = shape::Exponential{-0.1};
  c.out = name;
  if (name == "fig1") {
    c.stations = {0.0, 0.2, 0.5, 1.0, 2.0, 4.0};
    c.outputs = {"q0", "q1", "qpt", "qnum"};
    c.comparisons = {{"q1", "qnum"}, {"q0", "qnum"}};
  } else if (name == "fig1b") {
    c.phys.a = 10.0;
    c.stations = {0.0, 0.08, 0.2, 0.5, 1.0, 2.0};
    c.outputs = {"q0", "q1", "qnum"};
    c.comparisons = {{"q1", "qnum"}};
    c.breakdown = Breakdown::kMask;
  } else if (name == "fig2") {
    c.phys.a = 10.0;
    c.stations = {0.2, 0.5, 1.0, 2.0};
    c.outputs = {"q0", "q1", "qnum"};
    c.comparisons = {{"q1", "qnum"}, {"q0", "qnum"}};
  } else {
    throw ConfigError("unknown preset '" + name + "'");
  }
  return c;
}

// ---------------------------------------------------------------- results

struct StationResult {
  double nu_x = 0.0, x = 0.0, zeta = 0.0, mu = 0.0;
  std::vector<double> tau;
  std::map<std::string, std::vector<double>> fields;
  std::size_t invalid_q0 = 0, invalid_q1 = 0, inner_breakdown_nodes = 0, panels = 0;
};

struct ComparisonRow {
  std::string field, reference;
  double nu_x = 0.0;
  double max_rel = 0.0, l2_rel = 0.0;
  std::size_t skipped = 0;  // points where either value is nan
};

struct ComparisonReport {
  std::vector<ComparisonRow> rows;

  /// Largest max-relative difference of one pair over all stations.
  double worst(const std::string& field, const std::string& reference) const {
    double w = 0.0;
    for (const auto& r : rows)
      if (r.field == field && r.reference == reference) w = std::max(w, r.max_rel);
    return w;
  }
  const ComparisonRow* at(const std::string& field, const std::string& reference,
                          double nu_x) const {
    for (const auto& r : rows)
      if (r.field == field && r.reference == reference && r.nu_x == nu_x) return &r;
    return nullptr;
  }
};

struct RunResult {
  RunConfig config;
  std::vector<StationResult> stations;
  ComparisonReport report;
  std::size_t solver_steps = 0, solver_rejected = 0;
};

/// max|A - B| / max|B| and sqrt(mean (A - B)^2) / max|B|, skipping nan pairs.
inline ComparisonRow compare_fields(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw ConfigError("compared fields differ in size");
  ComparisonRow r;
  double ref = 0.0, worst = 0.0, sq = 0.0;
  std::size_t used = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::isnan(a[i]) || std::isnan(b[i])) {
      ++r.skipped;
      continue;
    }
    ref = std::max(ref, std::abs(b[i]));
    const double d = std::abs(a[i] - b[i]);
    worst = std::max(worst, d);
    sq += d * d;
    ++used;
  }
  if (used == 0) {
    r.max_rel = r.l2_rel = std::numeric_limits<double>::quiet_NaN();
    return r;
  }
  const double l2 = std::sqrt(sq / static_cast<double>(used));
  if (ref > 0.0) {
    r.max_rel = worst / ref;
    r.l2_rel = l2 / ref;
  } else {
    r.max_rel = worst == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    r.l2_rel = l2 == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  }
  return r;
}

inline ComparisonReport compare(const std::vector<StationResult>& stations,
                                const std::string& field, const std::string& reference) {
  ComparisonReport rep;
  for (const auto& s : stations) {
    auto a = s.fields.find(field), b = s.fields.find(reference);
    if (a == s.fields.end() || b == s.fields.end())
      throw ConfigError("comparison needs fields '" + field + "' and '" + reference + "'");
    ComparisonRow r = compare_fields(a->second, b->second);
    r.field = field;
    r.reference = reference;
    r.nu_x = s.nu_x;
    rep.rows.push_back(r);
  }
  return rep;
}

namespace detail {

/// Runs tasks on up to `jobs` threads; rethrows the first failure in task
/// order, so errors do not depend on scheduling.
inline void run_tasks(const std::vector<std::function<void()>>& tasks, std::size_t jobs) {
  std::vector<std::exception_ptr> errors(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < tasks.size();) {
      try {
        tasks[i]();
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  jobs = std::max<std::size_t>(1, std::min(jobs, tasks.size()));
  std::vector<std::thread> pool;
  for (std::size_t j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

template <class Table>
void fill_invariant(const RunConfig& c, std::vector<StationResult>& out,
                    const Table& w, const NestedIntegralCache* cache, std::size_t jobs) {
  const auto ic = c.invariant();
  const auto grid = c.grid();
  std::vector<std::function<void()>> tasks;
  for (auto& s : out) {
    tasks.push_back([&, zeta = s.zeta] {
      s.fields["invariant"] = assemble_invariant_q(ic, zeta, grid, w, cache);
    });
  }
  run_tasks(tasks, jobs);
}

}  // namespace detail

/// Computes every requested field at every station.
inline RunResult run(const RunConfig& c, std::size_t jobs = 1) {
  c.validate();
  RunResult res;
  res.config = c;
  const Profile profile(c.profile);
  const double nu = c.phys.nu;
  const TauGrid grid = c.grid();
  for (double s : c.stations) {
    StationResult st;
    st.nu_x = s;
    st.x = s / nu;
    if (st.x > profile.x_max()) throw DomainError("station beyond the profile domain");
    st.zeta = profile.zeta_of_x(st.x);
    st.mu = profile.mu_of_x(nu, st.x);
    st.tau = grid.points();
    res.stations.push_back(std::move(st));
  }

  const bool rg = c.wants("q0") || c.wants("q1") || c.wants("qpt");
  std::vector<std::function<void()>> tasks;
  std::optional<RGSolver> solver;
  std::optional<InitialCondition> ic;
  if (rg || c.wants("qnum")) ic = c.initial();
  if (rg) {
    RGOptions opt;
    opt.rel_tol = c.rg_tol;
    opt.breakdown = c.breakdown;
    solver.emplace(c.phys, profile, *ic, grid, opt);
    for (auto& st : res.stations) {
      tasks.push_back([&] {
        const RGSolution s = solver->solve(st.x, c.wants("q1"), c.wants("qpt"));
        if (c.wants("q0")) st.fields["q0"] = s.q0;
        if (c.wants("q1")) st.fields["q1"] = s.q1;
        if (c.wants("qpt")) st.fields["qpt"] = s.qpt;
        st.invalid_q0 = static_cast<std::size_t>(std::count(s.valid0.begin(), s.valid0.end(), 0));
        st.invalid_q1 = static_cast<std::size_t>(std::count(s.valid1.begin(), s.valid1.end(), 0));
        st.inner_breakdown_nodes = s.inner_breakdown_nodes;
        st.panels = s.panels;
      });
    }
  }
  if (c.wants("qnum")) {
    tasks.push_back([&] {
      SolverConfig sc;
      sc.n = c.n;
      sc.tol = c.solver_tol;
      for (const auto& st : res.stations) sc.stations.push_back(st.x);
      const SolverResult r = solve(*ic, c.phys, profile, sc);
      for (std::size_t i = 0; i < res.stations.size(); ++i)
        res.stations[i].fields["qnum"] = r.fields[i];
      res.solver_steps = r.steps;
      res.solver_rejected = r.rejected;
    });
  }
  detail::run_tasks(tasks, jobs);

  if (c.wants("invariant")) {
    const auto inv = c.invariant();
    if (c.periodic_orbit) {
      PeriodicOrbit orbit(inv.betas.M, c.phys, c.C0, c.C1);
      detail::fill_invariant(c, res.stations, orbit, nullptr, jobs);
    } else {
      double lo = 0.0, hi = 0.0;
      for (const auto& st : res.stations) {
        const double scale = similarity_vars(inv.betas, st.zeta, 1.0).lambda;
        lo = std::min(lo, grid.lo() * scale);
        hi = std::max(hi, grid[grid.size() - 1] * scale);
      }
      const double pad = 1e-9 * std::max(1.0, hi - lo);
      auto w = integrate_factor_ode(inv, lo - (lo < 0.0 ? pad : 0.0), hi + pad);
      std::optional<NestedIntegralCache> cache;
      if (inv.betas.beta2 != 0.0 && res.stations.back().zeta > 0.0)
        cache.emplace(inv.betas, res.stations.back().zeta);
      detail::fill_invariant(c, res.stations, w, cache ? &*cache : nullptr, jobs);
    }
  }

  for (const auto& [f, ref] : c.comparisons) {
    auto part = compare(res.stations, f, ref);
    res.report.rows.insert(res.report.rows.end(), part.rows.begin(), part.rows.end());
  }
  return res;
}

// ---------------------------------------------------------------- output

inline std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string station_file(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "station_%02zu.csv", i);
  return buf;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw ConfigError("write failed for '" + path.string() + "'");
}

inline std::string station_csv(const StationResult& s) {
  std::vector<std::string> cols;
  for (const auto& f : field_names())
    if (s.fields.count(f)) cols.push_back(f);
  std::ostringstream o;
  o << "tau";
  for (const auto& f : cols) o << ',' << f;
  o << '\n';
  for (std::size_t i = 0; i < s.tau.size(); ++i) {
    o << fmt(s.tau[i]);
    for (const auto& f : cols) o << ',' << fmt(s.fields.at(f)[i]);
    o << '\n';
  }
  return o.str();
}

inline std::string report_csv(const ComparisonReport& rep) {
  std::ostringstream o;
  o << "field,reference,nu_x,max_rel,l2_rel,skipped\n";
  for (const auto& r : rep.rows) {
    o << r.field << ',' << r.reference << ',' << fmt(r.nu_x) << ',' << fmt(r.max_rel) << ','
      << fmt(r.l2_rel) << ',' << r.skipped << '\n';
  }
  return o.str();
}

/// One CSV per station, summary.csv and (with comparisons) compare.csv.
inline std::vector<std::filesystem::path> write(const RunResult& r,
                                                const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> files;
  std::ostringstream sum;
  sum << "station,nu_x,x,zeta,mu,file,invalid_q0,invalid_q1,inner_breakdown_nodes,panels\n";
  for (std::size_t i = 0; i < r.stations.size(); ++i) {
    const auto& s = r.stations[i];
    const auto name = station_file(i);
    write_text(dir / name, station_csv(s));
    files.push_back(dir / name);
    sum << i << ',' << fmt(s.nu_x) << ',' << fmt(s.x) << ',' << fmt(s.zeta) << ','
        << fmt(s.mu) << ',' << name << ',' << s.invalid_q0 << ',' << s.invalid_q1 << ','
        << s.inner_breakdown_nodes << ',' << s.panels << '\n';
  }
  write_text(dir / "summary.csv", sum.str());
  files.push_back(dir / "summary.csv");
  if (!r.report.rows.empty()) {
    write_text(dir / "compare.csv", report_csv(r.report));
    files.push_back(dir / "compare.csv");
  }
  return files;
}

/// x, S, zeta, mu, d = ln(mu/nu) on a uniform x grid up to the last station.
inline std::string profile_csv(const RunConfig& c) {
  c.phys.validate();
  if (c.stations.empty()) throw ConfigError("stations list is empty");
  const Profile profile(c.profile);
  const double x_end = c.stations.back() / c.phys.nu;
  if (x_end > profile.x_max()) throw DomainError("station beyond the profile domain");
  std::ostringstream o;
  o << "x,S,zeta,mu,d\n";
  const std::size_t m = c.profile_samples;
  for (std::size_t i = 0; i < m; ++i) {
    const double x = x_end * static_cast<double>(i) / static_cast<double>(m - 1);
    const double mu = profile.mu_of_x(c.phys.nu, x);
    o << fmt(x) << ',' << fmt(profile.area(x)) << ',' << fmt(profile.zeta_of_x(x)) << ','
      << fmt(mu) << ',' << fmt(std::log(mu / c.phys.nu)) << '\n';
  }
  return o.str();
}

}  // namespace webster::cli

#endif  // WEBSTER_CLI_HPP
