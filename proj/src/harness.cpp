#include "rdafront/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

namespace rdafront {

namespace {

using Clock = std::chrono::steady_clock;

constexpr double kFastpathTolerance = 0.05;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string fmt(double v, const char* spec = "%.6g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string time_tag(double t) { return fmt(t, "%.3f"); }

[[noreturn]] void config_error(const std::string& where, const std::string& msg) {
  throw Error(ErrorKind::Config, "harness.load_config", where + ": " + msg);
}

double parse_real(const std::string& v, const std::string& where) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size() || !std::isfinite(d)) config_error(where, "expected a number, got '" + v + "'");
    return d;
  } catch (const std::logic_error&) {
    config_error(where, "expected a number, got '" + v + "'");
  }
}

int parse_int(const std::string& v, const std::string& where) {
  const double d = parse_real(v, where);
  if (d != std::floor(d) || std::fabs(d) > 1e9) config_error(where, "expected an integer, got '" + v + "'");
  return static_cast<int>(d);
}

bool parse_bool(const std::string& v, const std::string& where) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  config_error(where, "expected a boolean, got '" + v + "'");
}

std::vector<double> parse_reals(const std::string& v, const std::string& where) {
  std::vector<double> out;
  for (const auto& item : split_list(v)) out.push_back(parse_real(item, where));
  return out;
}

Expr parse_expr_value(const std::string& v, const std::string& where) {
  try {
    return parse(v);
  } catch (const Error& e) {
    config_error(where, e.what());
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "harness.write_report", "cannot open " + path.string());
  out << text;
  if (!out) throw Error(ErrorKind::Io, "harness.write_report", "write failed for " + path.string());
}

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::Io, "harness.output", "cannot create " + dir.string() + ": " + ec.message());
}

FieldFile surface_file(const FrontSurface& s) {
  FieldFile f;
  f.nx = s.nx();
  f.ny = s.ny();
  f.nz = 1;
  f.x0 = s.x0();
  f.L = s.L();
  f.y0 = s.y0();
  f.M = s.M();
  f.a = 0.0;
  f.t = s.t();
  f.values = s.h();
  return f;
}

void export_all(const RunConfig& cfg, const ScalarField3D& field, const std::string& stem, double t) {
  for (ExportFormat fmt_tag : cfg.formats) {
    export_field(field, fmt_tag, cfg.out_dir / (stem + extension(fmt_tag)), t);
  }
}

Grid3D comparison_grid(const RunConfig& cfg) {
  const ProblemSpec& p = cfg.problem;
  return Grid3D(cfg.grid.nx, cfg.grid.ny, cfg.grid.nz, p.x0, p.L, p.y0, p.M, p.a);
}

ReferenceOptions reference_options(const RunConfig& cfg) {
  ReferenceOptions o;
  o.safety = cfg.safety;
  o.scheme = cfg.scheme;
  return o;
}

}  // namespace

void RunConfig::validate() const {
  const char* stage = "harness.RunConfig";
  try {
    problem.validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::Config, stage, e.what());
  }
  const GridConfig& g = grid;
  for (int n : {g.nx, g.ny, g.nz, g.outer_nx, g.outer_ny, g.outer_nz, g.front_nx, g.front_ny}) {
    if (n < 8) throw Error(ErrorKind::Config, stage, "grid resolutions must be at least 8 per axis");
  }
  if (output_times.empty()) throw Error(ErrorKind::Config, stage, "no output times");
  for (std::size_t i = 0; i < output_times.size(); ++i) {
    const double t = output_times[i];
    if (!(t >= 0.0 && t <= problem.T)) {
      throw Error(ErrorKind::Config, stage, "output time " + fmt(t) + " outside [0, T = " + fmt(problem.T) + "]");
    }
    if (i > 0 && t <= output_times[i - 1]) throw Error(ErrorKind::Config, stage, "output times must increase");
  }
  if (order != 0 && order != 1) throw Error(ErrorKind::Config, stage, "order must be 0 or 1");
  if (!(safety > 0.0 && safety <= 1.0)) throw Error(ErrorKind::Config, stage, "safety must lie in (0, 1]");
  if (!(char_step > 0.0)) throw Error(ErrorKind::Config, stage, "char_step must be positive");
  if (fan < 4) throw Error(ErrorKind::Config, stage, "fan must be at least 4");
  if (!(front_monitor_dt > 0.0)) throw Error(ErrorKind::Config, stage, "front_monitor_dt must be positive");
  if (formats.empty()) throw Error(ErrorKind::Config, stage, "no export formats");
}

RunConfig default_config(const std::string& problem_name) {
  RunConfig cfg;
  try {
    cfg.problem = registry_problem(problem_name);
  } catch (const Error& e) {
    throw Error(ErrorKind::Config, "harness.registry", e.what());
  }
  cfg.output_times.erase(std::remove_if(cfg.output_times.begin(), cfg.output_times.end(),
                                        [&](double t) { return t > cfg.problem.T; }),
                         cfg.output_times.end());
  if (cfg.output_times.empty()) cfg.output_times.push_back(cfg.problem.T);
  return cfg;
}

RunConfig parse_config(const std::string& text, const std::string& source) {
  struct Entry {
    std::string value;
    int line;
  };
  static const std::map<std::string, std::set<std::string>> kKeys = {
      {"problem", {"name", "A", "B", "F", "u0", "ua", "h_init", "u_init", "x0", "y0", "L", "M", "a", "T", "mu"}},
      {"grid", {"nx", "ny", "nz", "outer_nx", "outer_ny", "outer_nz", "front_nx", "front_ny"}},
      {"numerics", {"order", "fastpath", "safety", "scheme", "char_step", "fan", "seed", "mu_list", "front_monitor_dt"}},
      {"output", {"dir", "times", "formats"}},
  };
  std::map<std::string, std::map<std::string, Entry>> sections;
  std::string current;
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const std::string where = source + ":" + std::to_string(lineno);
    std::string line = raw;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') config_error(where, "malformed section header");
      current = trim(line.substr(1, line.size() - 2));
      if (!kKeys.count(current)) config_error(where, "unknown section [" + current + "]");
      if (sections.count(current)) config_error(where, "duplicate section [" + current + "]");
      sections[current];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) config_error(where, "expected key = value");
    if (current.empty()) config_error(where, "key outside of any section");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!kKeys.at(current).count(key)) config_error(where, "unknown key '" + key + "' in [" + current + "]");
    if (value.empty()) config_error(where, "empty value for '" + key + "'");
    if (sections[current].count(key)) config_error(where, "duplicate key '" + key + "'");
    sections[current][key] = Entry{value, lineno};
  }
  if (!sections.count("problem")) {
    throw Error(ErrorKind::Config, "harness.load_config", source + ": missing required section [problem]");
  }
  auto where_of = [&](const Entry& e) { return source + ":" + std::to_string(e.line); };

  auto& prob = sections["problem"];
  RunConfig cfg;
  if (prob.count("name")) {
    try {
      cfg = default_config(prob["name"].value);
    } catch (const Error& e) {
      config_error(where_of(prob["name"]), e.what());
    }
  } else {
    for (const char* req : {"A", "B", "F", "u0", "ua", "h_init"}) {
      if (!prob.count(req)) {
        throw Error(ErrorKind::Config, "harness.load_config",
                    source + ": [problem] needs either name or the expression '" + req + "'");
      }
    }
    cfg.problem.name = "custom";
  }
  ProblemSpec& p = cfg.problem;
  for (auto& [key, e] : prob) {
    const std::string w = where_of(e);
    if (key == "name") continue;
    if (key == "A") p.A = parse_expr_value(e.value, w);
    else if (key == "B") p.B = parse_expr_value(e.value, w);
    else if (key == "F") p.F = parse_expr_value(e.value, w);
    else if (key == "u0") p.u0 = parse_expr_value(e.value, w);
    else if (key == "ua") p.ua = parse_expr_value(e.value, w);
    else if (key == "h_init") p.h_init = parse_expr_value(e.value, w);
    else if (key == "u_init") p.u_init = parse_expr_value(e.value, w);
    else if (key == "x0") p.x0 = parse_real(e.value, w);
    else if (key == "y0") p.y0 = parse_real(e.value, w);
    else if (key == "L") p.L = parse_real(e.value, w);
    else if (key == "M") p.M = parse_real(e.value, w);
    else if (key == "a") p.a = parse_real(e.value, w);
    else if (key == "T") p.T = parse_real(e.value, w);
    else if (key == "mu") p.mu = parse_real(e.value, w);
  }
  for (auto& [key, e] : sections["grid"]) {
    const int v = parse_int(e.value, where_of(e));
    GridConfig& g = cfg.grid;
    if (key == "nx") g.nx = v;
    else if (key == "ny") g.ny = v;
    else if (key == "nz") g.nz = v;
    else if (key == "outer_nx") g.outer_nx = v;
    else if (key == "outer_ny") g.outer_ny = v;
    else if (key == "outer_nz") g.outer_nz = v;
    else if (key == "front_nx") g.front_nx = v;
    else if (key == "front_ny") g.front_ny = v;
  }
  for (auto& [key, e] : sections["numerics"]) {
    const std::string w = where_of(e);
    if (key == "order") cfg.order = parse_int(e.value, w);
    else if (key == "fastpath") cfg.fastpath = parse_bool(e.value, w);
    else if (key == "safety") cfg.safety = parse_real(e.value, w);
    else if (key == "char_step") cfg.char_step = parse_real(e.value, w);
    else if (key == "fan") cfg.fan = parse_int(e.value, w);
    else if (key == "front_monitor_dt") cfg.front_monitor_dt = parse_real(e.value, w);
    else if (key == "mu_list") cfg.mu_list = parse_reals(e.value, w);
    else if (key == "seed") {
      const double s = parse_real(e.value, w);
      if (s < 0 || s != std::floor(s)) config_error(w, "seed must be a non-negative integer");
      cfg.seed = static_cast<std::uint64_t>(s);
    } else if (key == "scheme") {
      if (e.value == "midpoint") cfg.scheme = TimeScheme::Midpoint;
      else if (e.value == "heun") cfg.scheme = TimeScheme::Heun;
      else config_error(w, "scheme must be midpoint or heun");
    }
  }
  for (auto& [key, e] : sections["output"]) {
    const std::string w = where_of(e);
    if (key == "dir") cfg.out_dir = e.value;
    else if (key == "times") cfg.output_times = parse_reals(e.value, w);
    else if (key == "formats") {
      cfg.formats.clear();
      for (const auto& tag : split_list(e.value)) {
        try {
          cfg.formats.push_back(parse_export_format(tag));
        } catch (const Error& err) {
          config_error(w, err.what());
        }
      }
    }
  }
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Config, "harness.load_config", "cannot open config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string());
}

void set_mu(RunConfig& cfg, double mu) {
  if (!(mu > 0.0) || !std::isfinite(mu)) throw Error(ErrorKind::Config, "harness.RunConfig", "mu must be positive");
  cfg.problem.mu = mu;
  cfg.validate();
}

DegenerateResult run_degenerate(const RunConfig& cfg) {
  const ProblemSpec& p = cfg.problem;
  const Grid3D grid(cfg.grid.outer_nx, cfg.grid.outer_ny, cfg.grid.outer_nz, p.x0, p.L, p.y0, p.M, p.a);
  OuterOptions opt;
  opt.fan = FanDensity{cfg.fan, cfg.fan};
  opt.solve.step = cfg.char_step;
  DegenerateResult r;
  r.minus = build_outer(p, Branch::Minus, grid, opt);
  r.plus = build_outer(p, Branch::Plus, grid, opt);
  r.lipschitz_minus = check_lipschitz_sampling(p, r.minus, 200, cfg.seed);
  r.lipschitz_plus = check_lipschitz_sampling(p, r.plus, 200, cfg.seed + 1);
  return r;
}

std::vector<double> front_times(const RunConfig& cfg) {
  std::vector<double> t{0.0};
  const double T = cfg.problem.T;
  const int n = static_cast<int>(std::floor(T / cfg.front_monitor_dt + 1e-9));
  for (int i = 1; i <= n; ++i) t.push_back(i * cfg.front_monitor_dt);
  t.push_back(T);
  t.insert(t.end(), cfg.output_times.begin(), cfg.output_times.end());
  std::sort(t.begin(), t.end());
  std::vector<double> out;
  for (double v : t) {
    if (out.empty() || v - out.back() > 1e-9) out.push_back(v);
  }
  return out;
}

FrontEvolution run_front(const RunConfig& cfg, const DegenerateResult& outer) {
  FrontOptions opt;
  opt.nx = cfg.grid.front_nx;
  opt.ny = cfg.grid.front_ny;
  opt.step = cfg.char_step;
  return solve_h0(cfg.problem, outer.minus.phi, outer.plus.phi, front_times(cfg), opt);
}

FrontConfinement check_front_confinement(const FrontEvolution& evo, double a) {
  FrontConfinement c;
  c.h_min = std::numeric_limits<double>::infinity();
  c.h_max = -c.h_min;
  c.inside = true;
  c.monotone = true;
  for (std::size_t s = 0; s < evo.snapshots.size(); ++s) {
    const FrontSurface& f = evo.snapshots[s];
    c.h_min = std::min(c.h_min, f.min_h());
    c.h_max = std::max(c.h_max, f.max_h());
    // the initial front may sit on the boundary; later snapshots must be strictly inside
    if (f.t() > 0.0 && (f.min_h() <= 0.0 || f.max_h() >= a)) c.inside = false;
    if (f.t() == 0.0 && (f.min_h() < 0.0 || f.max_h() > a)) c.inside = false;
    if (s > 0) {
      const FrontSurface& prev = evo.snapshots[s - 1];
      for (std::size_t k = 0; k < f.h().size(); ++k) {
        if (!(f.h()[k] > prev.h()[k])) c.monotone = false;
      }
    }
  }
  return c;
}

std::vector<double> level_set_heights(const ScalarField3D& field, const std::vector<double>& level) {
  const Grid3D& g = field.grid();
  std::vector<double> out(static_cast<std::size_t>(g.nx()) * g.ny(), std::numeric_limits<double>::quiet_NaN());
  for (int j = 0; j < g.ny(); ++j) {
    for (int i = 0; i < g.nx(); ++i) {
      const std::size_t col = static_cast<std::size_t>(i) + static_cast<std::size_t>(g.nx()) * j;
      const double c = level[col];
      for (int k = 0; k + 1 < g.nz(); ++k) {
        const double d0 = field.at(i, j, k) - c, d1 = field.at(i, j, k + 1) - c;
        if (d0 == 0.0) {
          out[col] = g.z(k);
          break;
        }
        if ((d0 < 0.0) != (d1 < 0.0)) {
          out[col] = g.z(k) + (g.z(k + 1) - g.z(k)) * d0 / (d0 - d1);
          break;
        }
      }
    }
  }
  return out;
}

LevelSetAgreement level_set_agreement(const ScalarField3D& field, const FrontSurface& h0, const OuterBranch& minus,
                                      const OuterBranch& plus, double tol) {
  const Grid3D& g = field.grid();
  std::vector<double> level(static_cast<std::size_t>(g.nx()) * g.ny()), front(level.size());
  for (int j = 0; j < g.ny(); ++j) {
    for (int i = 0; i < g.nx(); ++i) {
      const std::size_t col = static_cast<std::size_t>(i) + static_cast<std::size_t>(g.nx()) * j;
      const double h = std::clamp(h0.height(g.x(i), g.y(j)), 0.0, g.a());
      const Point3 s{g.x(i), g.y(j), h};
      level[col] = 0.5 * (trilinear_sample(minus.phi, s) + trilinear_sample(plus.phi, s));
      front[col] = h;
    }
  }
  const std::vector<double> z = level_set_heights(field, level);
  LevelSetAgreement r;
  std::size_t hits = 0;
  for (std::size_t c = 0; c < z.size(); ++c) {
    if (std::isnan(z[c])) {
      ++r.missing;
      continue;
    }
    const double d = std::fabs(z[c] - front[c]);
    r.max_deviation = std::max(r.max_deviation, d);
    if (d <= tol) ++hits;
  }
  r.fraction = static_cast<double>(hits) / static_cast<double>(z.size());
  return r;
}

ComparisonReport run_compare(const RunConfig& cfg, bool write_outputs) {
  cfg.validate();
  ComparisonReport rep;
  rep.problem = cfg.problem.name;
  rep.mu = cfg.problem.mu;
  rep.grid = cfg.grid;
  if (write_outputs) ensure_dir(cfg.out_dir);

  auto t0 = Clock::now();
  const DegenerateResult outer = run_degenerate(cfg);
  rep.timings.emplace_back("degenerate", seconds_since(t0));

  t0 = Clock::now();
  const FrontEvolution evo = run_front(cfg, outer);
  std::optional<FrontEvolution> h1;
  if (cfg.order == 1) h1 = solve_h1(cfg.problem, outer.minus, outer.plus, evo, cfg.output_times);
  rep.timings.emplace_back("front", seconds_since(t0));

  const Grid3D grid = comparison_grid(cfg);
  t0 = Clock::now();
  std::vector<AsymptoticSolution> u0, u1;
  std::vector<double> gaps;
  for (double t : cfg.output_times) {
    const FrontSurface& front = evo.at(t);
    const AssemblyMode mode = cfg.fastpath ? AssemblyMode::ExampleFastpath : AssemblyMode::General;
    const AssemblyMode other = cfg.fastpath ? AssemblyMode::General : AssemblyMode::ExampleFastpath;
    u0.push_back(assemble_U0(cfg.problem, outer.minus, outer.plus, front, grid, mode));
    const AsymptoticSolution alt = assemble_U0(cfg.problem, outer.minus, outer.plus, front, grid, other);
    gaps.push_back(relative_l2_error(cfg.fastpath ? u0.back().field : alt.field,
                                     cfg.fastpath ? alt.field : u0.back().field));
    if (h1) u1.push_back(assemble_U1(cfg.problem, outer.minus, outer.plus, front, h1->at(t), grid));
  }
  rep.timings.emplace_back("asymptotic", seconds_since(t0));

  t0 = Clock::now();
  SolveLog log;
  const std::vector<ScalarField3D> ref =
      solve_reference(cfg.problem, grid, cfg.output_times, reference_options(cfg), &log);
  rep.timings.emplace_back("reference", seconds_since(t0));

  const CompiledExpr u0e(cfg.problem.u0), uae(cfg.problem.ua);
  bool faces_exact = true;
  for (std::size_t s = 0; s < cfg.output_times.size(); ++s) {
    const double t = cfg.output_times[s];
    const FrontSurface& front = evo.at(t);
    TimeReport tr;
    tr.t = t;
    tr.err_u0 = relative_l2_error(u0[s].field, ref[s]);
    if (h1) tr.err_u1 = relative_l2_error(u1[s].field, ref[s]);
    tr.h_min = front.min_h();
    tr.h_max = front.max_h();
    double sum = 0.0;
    for (double v : front.h()) sum += v;
    tr.h_mean = sum / static_cast<double>(front.h().size());
    tr.level = level_set_agreement(ref[s], front, outer.minus, outer.plus, 5.0 * cfg.problem.mu);
    tr.outer_only_nodes = u0[s].outer_only_nodes;
    tr.fastpath_gap = gaps[s];
    rep.times.push_back(tr);

    for (int j = 0; j < grid.ny(); ++j) {
      for (int i = 0; i < grid.nx(); ++i) {
        if (ref[s].at(i, j, 0) != u0e(grid.x(i), grid.y(j), 0.0) ||
            ref[s].at(i, j, grid.nz() - 1) != uae(grid.x(i), grid.y(j), grid.a())) {
          faces_exact = false;
        }
      }
    }
    if (write_outputs) {
      const std::string tag = time_tag(t);
      export_all(cfg, u0[s].field, "U0_t" + tag, t);
      if (h1) export_all(cfg, u1[s].field, "U1_t" + tag, t);
      export_all(cfg, ref[s], "reference_t" + tag, t);
      write_fld1(cfg.out_dir / ("h0_t" + tag + extension(ExportFormat::Fld1)), surface_file(front));
    }
  }

  const FrontConfinement conf = check_front_confinement(evo, cfg.problem.a);
  rep.checks.push_back({"front_inside_domain", conf.inside,
                        "h0 range [" + fmt(conf.h_min) + ", " + fmt(conf.h_max) + "]"});
  rep.checks.push_back({"front_monotone_in_t", conf.monotone, std::to_string(evo.snapshots.size()) + " snapshots"});
  rep.checks.push_back({"dirichlet_faces_exact", faces_exact, "reference snapshots"});
  rep.checks.push_back({"lipschitz_stable", !outer.lipschitz_minus.flagged && !outer.lipschitz_plus.flagged,
                        "K_A- " + fmt(outer.lipschitz_minus.K_A) + ", K_B- " + fmt(outer.lipschitz_minus.K_B) +
                            ", K_A+ " + fmt(outer.lipschitz_plus.K_A) + ", K_B+ " + fmt(outer.lipschitz_plus.K_B)});
  double max_gap = 0.0;
  for (double g : gaps) max_gap = std::max(max_gap, g);
  rep.checks.push_back({"fastpath_agrees_with_general", max_gap <= kFastpathTolerance,
                        "max relative gap " + fmt(max_gap) + ", tolerance " + fmt(kFastpathTolerance)});
  rep.checks.push_back({"reference_resolves_layer", !log.under_resolved,
                        "hz " + fmt(grid.hz()) + " vs mu/2 " + fmt(0.5 * cfg.problem.mu)});
  return rep;
}

void write_report(const ComparisonReport& r, const std::filesystem::path& dir) {
  ensure_dir(dir);
  std::ostringstream txt;
  txt << "problem " << r.problem << "\n";
  txt << "mu " << fmt(r.mu, "%.17g") << "\n";
  txt << "grid " << r.grid.nx << "x" << r.grid.ny << "x" << r.grid.nz << " outer " << r.grid.outer_nx << "x"
      << r.grid.outer_ny << "x" << r.grid.outer_nz << " front " << r.grid.front_nx << "x" << r.grid.front_ny << "\n\n";
  txt << "errors (relative L2 against the reference)\n";
  for (const TimeReport& t : r.times) {
    txt << "  t " << fmt(t.t, "%.4f") << "  U0 " << fmt(t.err_u0, "%.6f");
    if (t.err_u1) txt << "  U1 " << fmt(*t.err_u1, "%.6f");
    txt << "\n";
  }
  txt << "\nclosed-form vs general U0 (relative L2 gap)\n";
  for (const TimeReport& t : r.times) txt << "  t " << fmt(t.t, "%.4f") << "  " << fmt(t.fastpath_gap, "%.6f") << "\n";
  txt << "\nfront table\n";
  txt << "  t        h0_min    h0_max    h0_mean   level_within_5mu  level_max_dev  missing  outer_only\n";
  for (const TimeReport& t : r.times) {
    char line[256];
    std::snprintf(line, sizeof line, "  %-8.4f %-9.5f %-9.5f %-9.5f %-17.4f %-14.5f %-8zu %zu\n", t.t, t.h_min, t.h_max,
                  t.h_mean, t.level.fraction, t.level.max_deviation, t.level.missing, t.outer_only_nodes);
    txt << line;
  }
  txt << "\nchecks\n";
  for (const InvariantCheck& c : r.checks) {
    txt << "  " << (c.pass ? "ok   " : "FAIL ") << c.name << "  (" << c.detail << ")\n";
  }
  write_text(dir / "report.txt", txt.str());

  std::ostringstream csv;
  csv << "t,err_u0,err_u1,h0_min,h0_max,h0_mean,level_fraction,level_max_dev,level_missing,outer_only_nodes,fastpath_gap\n";
  for (const TimeReport& t : r.times) {
    csv << fmt(t.t, "%.17g") << "," << fmt(t.err_u0, "%.17g") << "," << (t.err_u1 ? fmt(*t.err_u1, "%.17g") : "")
        << "," << fmt(t.h_min, "%.17g") << "," << fmt(t.h_max, "%.17g") << "," << fmt(t.h_mean, "%.17g") << ","
        << fmt(t.level.fraction, "%.17g") << "," << fmt(t.level.max_deviation, "%.17g") << "," << t.level.missing
        << "," << t.outer_only_nodes << "," << fmt(t.fastpath_gap, "%.17g") << "\n";
  }
  write_text(dir / "report.csv", csv.str());

  std::ostringstream tim;
  for (const auto& [stage, s] : r.timings) tim << stage << " " << fmt(s, "%.3f") << "\n";
  write_text(dir / "timings.txt", tim.str());
}

int sweep_nz(double mu, double a) { return static_cast<int>(std::ceil(2.56 * a / mu - 1e-9)) + 1; }

double loglog_slope(const std::vector<double>& mu, const std::vector<double>& err) {
  const std::size_t n = mu.size();
  if (n < 2 || err.size() != n) {
    throw Error(ErrorKind::InvalidArgument, "harness.run_mu_sweep", "slope needs at least two points");
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = std::log(mu[i]), y = std::log(err[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double den = n * sxx - sx * sx;
  if (den == 0.0) throw Error(ErrorKind::InvalidArgument, "harness.run_mu_sweep", "degenerate mu list");
  return (n * sxy - sx * sy) / den;
}

SweepReport run_mu_sweep(const RunConfig& cfg, const std::vector<double>& mu_list) {
  if (mu_list.empty()) throw Error(ErrorKind::InvalidArgument, "harness.run_mu_sweep", "empty mu list");
  for (std::size_t i = 0; i < mu_list.size(); ++i) {
    if (!(mu_list[i] > 0.0)) throw Error(ErrorKind::InvalidArgument, "harness.run_mu_sweep", "mu values must be positive");
    if (i > 0 && !(mu_list[i] < mu_list[i - 1])) {
      throw Error(ErrorKind::InvalidArgument, "harness.run_mu_sweep", "mu values must be strictly descending");
    }
  }
  cfg.validate();
  SweepReport rep;
  rep.problem = cfg.problem.name;
  rep.t = cfg.output_times.front();

  // outer solution and front do not depend on mu
  const DegenerateResult outer = run_degenerate(cfg);
  RunConfig fcfg = cfg;
  fcfg.output_times = {rep.t};
  fcfg.problem.T = rep.t;
  const FrontEvolution evo = run_front(fcfg, outer);
  const FrontSurface& front = evo.at(rep.t);

  std::vector<double> mus, errs;
  for (double mu : mu_list) {
    RunConfig c = cfg;
    c.problem.mu = mu;
    c.grid.nz = sweep_nz(mu, cfg.problem.a);
    const Grid3D grid = comparison_grid(c);
    const AsymptoticSolution U = assemble_U0(c.problem, outer.minus, outer.plus, front, grid,
                                             c.fastpath ? AssemblyMode::ExampleFastpath : AssemblyMode::General);
    const auto ref = solve_reference(c.problem, grid, {rep.t}, reference_options(c));
    SweepRow row{mu, c.grid.nz, relative_l2_error(U.field, ref.front())};
    rep.rows.push_back(row);
    mus.push_back(mu);
    errs.push_back(row.error);
  }
  rep.strictly_decreasing = true;
  for (std::size_t i = 1; i < errs.size(); ++i) {
    if (!(errs[i] < errs[i - 1])) rep.strictly_decreasing = false;
  }
  if (mus.size() >= 2) rep.slope = loglog_slope(mus, errs);
  return rep;
}

void write_sweep_report(const SweepReport& r, const std::filesystem::path& dir) {
  ensure_dir(dir);
  std::ostringstream txt, csv;
  txt << "problem " << r.problem << "\n";
  txt << "t " << fmt(r.t, "%.4f") << "\n";
  csv << "mu,nz,err_u0\n";
  for (const SweepRow& row : r.rows) {
    txt << "  mu " << fmt(row.mu, "%.6g") << "  nz " << row.nz << "  U0 " << fmt(row.error, "%.6f") << "\n";
    csv << fmt(row.mu, "%.17g") << "," << row.nz << "," << fmt(row.error, "%.17g") << "\n";
  }
  txt << "strictly decreasing " << (r.strictly_decreasing ? "yes" : "no") << "\n";
  txt << "log-log slope " << (r.slope ? fmt(*r.slope, "%.4f") : std::string("n/a")) << "\n";
  write_text(dir / "sweep.txt", txt.str());
  write_text(dir / "sweep.csv", csv.str());
}

int exit_code_for(const Error& e) {
  if (e.kind() == ErrorKind::Config) return 2;
  const std::string& s = e.stage();
  const std::string module = s.substr(0, s.find('.'));
  if (module == "harness") return e.kind() == ErrorKind::InvalidArgument ? 2 : 18;
  static const std::map<std::string, int> codes = {
      {"expr", 10}, {"core", 11}, {"characteristics", 12}, {"outer", 13},
      {"front", 14}, {"inner", 15}, {"assembler", 16}, {"reference", 17},
  };
  const auto it = codes.find(module);
  return it == codes.end() ? 18 : it->second;
}

}  // namespace rdafront
