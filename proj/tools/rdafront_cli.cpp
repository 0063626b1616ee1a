#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "rdafront/harness.hpp"

using namespace rdafront;

namespace {

struct CommonFlags {
  std::string config, problem, out, times;
  double mu = 0.0;
  int order = -1;
  bool fastpath = false;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config, "Config file (sections [problem], [grid], [numerics], [output])");
  cmd->add_option("--problem", f.problem, "Built-in problem name");
  cmd->add_option("--out", f.out, "Output directory");
  cmd->add_option("--mu", f.mu, "Override the diffusion coefficient")->check(CLI::PositiveNumber);
  cmd->add_option("--order", f.order, "Asymptotic order")->check(CLI::IsMember({0, 1}));
  cmd->add_flag("--fastpath", f.fastpath, "Closed-form leading-order assembly");
  cmd->add_option("--times", f.times, "Comma-separated output times");
}

RunConfig build_config(const CommonFlags& f) {
  if (!f.config.empty() && !f.problem.empty()) {
    throw Error(ErrorKind::Config, "harness.cli", "--config and --problem are mutually exclusive");
  }
  RunConfig cfg = f.config.empty() ? default_config(f.problem.empty() ? "paper-example" : f.problem)
                                   : load_config(f.config);
  if (!f.out.empty()) cfg.out_dir = f.out;
  if (f.mu > 0.0) set_mu(cfg, f.mu);
  if (f.order >= 0) cfg.order = f.order;
  if (f.fastpath) cfg.fastpath = true;
  if (!f.times.empty()) {
    cfg.output_times.clear();
    std::stringstream ss(f.times);
    std::string item;
    while (std::getline(ss, item, ',')) {
      try {
        cfg.output_times.push_back(std::stod(item));
      } catch (const std::logic_error&) {
        throw Error(ErrorKind::Config, "harness.cli", "bad time '" + item + "'");
      }
    }
  }
  cfg.validate();
  return cfg;
}

void export_all(const RunConfig& cfg, const ScalarField3D& f, const std::string& stem, double t) {
  for (ExportFormat e : cfg.formats) export_field(f, e, cfg.out_dir / (stem + extension(e)), t);
}

std::string tag(double t) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", t);
  return buf;
}

void ensure_out(const RunConfig& cfg) {
  std::error_code ec;
  std::filesystem::create_directories(cfg.out_dir, ec);
  if (ec) throw Error(ErrorKind::Io, "harness.output", "cannot create " + cfg.out_dir.string());
}

void print_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::cout << in.rdbuf();
}

int cmd_degenerate(const RunConfig& cfg) {
  ensure_out(cfg);
  const DegenerateResult r = run_degenerate(cfg);
  export_all(cfg, r.minus.phi, "phi_minus", 0.0);
  export_all(cfg, r.plus.phi, "phi_plus", 0.0);
  export_all(cfg, r.minus.u1, "u1_minus", 0.0);
  export_all(cfg, r.plus.u1, "u1_plus", 0.0);
  auto range = [](const ScalarField3D& f) {
    const auto v = f.values();
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    return std::make_pair(*lo, *hi);
  };
  const auto [m0, m1] = range(r.minus.phi);
  const auto [p0, p1] = range(r.plus.phi);
  std::printf("phi-  range [%.6f, %.6f]\n", m0, m1);
  std::printf("phi+  range [%.6f, %.6f]\n", p0, p1);
  std::printf("lipschitz minus K_A %.4g K_B %.4g%s\n", r.lipschitz_minus.K_A, r.lipschitz_minus.K_B,
              r.lipschitz_minus.flagged ? " (flagged)" : "");
  std::printf("lipschitz plus  K_A %.4g K_B %.4g%s\n", r.lipschitz_plus.K_A, r.lipschitz_plus.K_B,
              r.lipschitz_plus.flagged ? " (flagged)" : "");
  return 0;
}

int cmd_front(const RunConfig& cfg) {
  ensure_out(cfg);
  const DegenerateResult r = run_degenerate(cfg);
  const FrontEvolution evo = run_front(cfg, r);
  std::ofstream csv(cfg.out_dir / "front.csv");
  csv << "t,h0_min,h0_max,h0_mean\n";
  std::printf("t        h0_min    h0_max    h0_mean\n");
  for (const FrontSurface& f : evo.snapshots) {
    double sum = 0.0;
    for (double v : f.h()) sum += v;
    const double mean = sum / static_cast<double>(f.h().size());
    std::printf("%-8.4f %-9.5f %-9.5f %-9.5f\n", f.t(), f.min_h(), f.max_h(), mean);
    char line[160];
    std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g,%.17g\n", f.t(), f.min_h(), f.max_h(), mean);
    csv << line;
    FieldFile ff;
    ff.nx = f.nx();
    ff.ny = f.ny();
    ff.nz = 1;
    ff.x0 = f.x0();
    ff.L = f.L();
    ff.y0 = f.y0();
    ff.M = f.M();
    ff.t = f.t();
    ff.values = f.h();
    write_fld1(cfg.out_dir / ("h0_t" + tag(f.t()) + extension(ExportFormat::Fld1)), ff);
  }
  const FrontConfinement c = check_front_confinement(evo, cfg.problem.a);
  std::printf("confined %s, monotone %s\n", c.inside ? "yes" : "no", c.monotone ? "yes" : "no");
  return 0;
}

int cmd_asymptotic(const RunConfig& cfg) {
  ensure_out(cfg);
  const DegenerateResult r = run_degenerate(cfg);
  const FrontEvolution evo = run_front(cfg, r);
  const ProblemSpec& p = cfg.problem;
  const Grid3D grid(cfg.grid.nx, cfg.grid.ny, cfg.grid.nz, p.x0, p.L, p.y0, p.M, p.a);
  std::optional<FrontEvolution> h1;
  if (cfg.order == 1) h1 = solve_h1(p, r.minus, r.plus, evo, cfg.output_times);
  for (double t : cfg.output_times) {
    if (h1) {
      const AsymptoticSolution s = assemble_U1(p, r.minus, r.plus, evo.at(t), h1->at(t), grid);
      export_all(cfg, s.field, "U1_t" + tag(t), t);
    } else {
      const AsymptoticSolution s = assemble_U0(p, r.minus, r.plus, evo.at(t), grid,
                                               cfg.fastpath ? AssemblyMode::ExampleFastpath : AssemblyMode::General);
      export_all(cfg, s.field, "U0_t" + tag(t), t);
    }
    std::printf("t %.4f assembled\n", t);
  }
  return 0;
}

int cmd_reference(const RunConfig& cfg) {
  ensure_out(cfg);
  const ProblemSpec& p = cfg.problem;
  const Grid3D grid(cfg.grid.nx, cfg.grid.ny, cfg.grid.nz, p.x0, p.L, p.y0, p.M, p.a);
  ReferenceOptions opt;
  opt.safety = cfg.safety;
  opt.scheme = cfg.scheme;
  SolveLog log;
  const auto snaps = solve_reference(p, grid, cfg.output_times, opt, &log);
  for (std::size_t i = 0; i < snaps.size(); ++i) export_all(cfg, snaps[i], "reference_t" + tag(cfg.output_times[i]), cfg.output_times[i]);
  std::printf("steps %ld, dt in [%.4g, %.4g]\n", log.steps, log.dt_min, log.dt_max);
  return 0;
}

int cmd_compare(const RunConfig& cfg) {
  const ComparisonReport rep = run_compare(cfg, true);
  write_report(rep, cfg.out_dir);
  print_file(cfg.out_dir / "report.txt");
  return 0;
}

int cmd_sweep(RunConfig cfg, const std::string& list) {
  std::vector<double> mus = cfg.mu_list;
  if (!list.empty()) {
    mus.clear();
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ',')) {
      try {
        mus.push_back(std::stod(item));
      } catch (const std::logic_error&) {
        throw Error(ErrorKind::InvalidArgument, "harness.cli", "bad mu '" + item + "'");
      }
    }
  }
  if (mus.empty()) mus = {0.04, 0.02, 0.01};
  const SweepReport rep = run_mu_sweep(cfg, mus);
  write_sweep_report(rep, cfg.out_dir);
  print_file(cfg.out_dir / "sweep.txt");
  return 0;
}

int cmd_export(const std::string& in, const std::string& format, const std::string& out) {
  const ExportFormat f = parse_export_format(format);
  const FieldFile file = read_fld1(in);
  if (file.nz < 2) throw Error(ErrorKind::InvalidArgument, "harness.cli", "export needs a volume field");
  std::filesystem::path dest = out.empty() ? std::filesystem::path(in).parent_path() : std::filesystem::path(out);
  std::error_code ec;
  if (!dest.empty()) std::filesystem::create_directories(dest, ec);
  dest /= std::filesystem::path(in).stem().string() + extension(f);
  export_field(from_field_file(file), f, dest, file.t);
  std::printf("%s\n", dest.string().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Moving-front asymptotics and reference solver"};
  app.require_subcommand(1);
  CommonFlags flags;
  std::string mu_list, in_path, format = "vtk";

  std::vector<std::pair<std::string, std::string>> specs = {
      {"degenerate", "Outer solutions of the degenerate problem"},
      {"front", "Leading-order front evolution"},
      {"asymptotic", "Assemble the asymptotic approximation"},
      {"reference", "Run the finite-difference reference solver"},
      {"compare", "Full pipeline with error report"},
      {"sweep-mu", "Errors against mu on mu-resolved grids"},
  };
  std::map<std::string, CLI::App*> cmds;
  for (const auto& [name, help] : specs) {
    CLI::App* c = app.add_subcommand(name, help);
    add_common(c, flags);
    cmds[name] = c;
  }
  cmds["sweep-mu"]->add_option("--mu-list", mu_list, "Comma-separated, strictly descending");
  CLI::App* exp = app.add_subcommand("export", "Convert an FLD1 field to csv, vtk or fld1");
  exp->add_option("--in", in_path, "FLD1 input")->required();
  exp->add_option("--format", format, "csv, vtk or fld1");
  exp->add_option("--out", flags.out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (exp->parsed()) return cmd_export(in_path, format, flags.out);
    const RunConfig cfg = build_config(flags);
    if (cmds["degenerate"]->parsed()) return cmd_degenerate(cfg);
    if (cmds["front"]->parsed()) return cmd_front(cfg);
    if (cmds["asymptotic"]->parsed()) return cmd_asymptotic(cfg);
    if (cmds["reference"]->parsed()) return cmd_reference(cfg);
    if (cmds["compare"]->parsed()) return cmd_compare(cfg);
    if (cmds["sweep-mu"]->parsed()) return cmd_sweep(cfg, mu_list);
  } catch (const Error& e) {
    std::fprintf(stderr, "error [%s]: %s\n", to_string(e.kind()), e.what());
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 18;
  }
  return 0;
}
