#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rdafront/assembler.hpp"
#include "rdafront/error.hpp"
#include "rdafront/field_io.hpp"
#include "rdafront/front.hpp"
#include "rdafront/outer.hpp"
#include "rdafront/problem.hpp"
#include "rdafront/reference.hpp"

namespace rdafront {

struct GridConfig {
  /// Comparison grid shared by the asymptotic and reference solutions.
  int nx = 64, ny = 64, nz = 257;
  /// Grid for the outer characteristics solve; sampled trilinearly afterwards.
  int outer_nx = 32, outer_ny = 32, outer_nz = 33;
  /// Front surface sampling.
  int front_nx = 64, front_ny = 64;
};

struct RunConfig {
  ProblemSpec problem;
  GridConfig grid;
  std::vector<double> output_times{0.2, 0.6};
  /// Times at which front confinement is monitored, in addition to output_times.
  double front_monitor_dt = 0.05;
  bool fastpath = false;
  int order = 0;
  double safety = 0.4;
  TimeScheme scheme = TimeScheme::Midpoint;
  double char_step = 0.01;
  int fan = 32;
  std::vector<double> mu_list;
  std::vector<ExportFormat> formats{ExportFormat::Fld1};
  std::filesystem::path out_dir = "out";
  std::uint64_t seed = 7;

  /// Throws Config errors (stage harness.RunConfig) on violated invariants.
  void validate() const;
};

/// Defaults around a registry problem.
RunConfig default_config(const std::string& problem_name = "paper-example");

/// Sectioned key = value text; see docs/config.md. `source` labels error messages.
RunConfig parse_config(const std::string& text, const std::string& source = "<string>");
RunConfig load_config(const std::filesystem::path& path);

/// Applies a mu override and re-validates.
void set_mu(RunConfig& cfg, double mu);

struct DegenerateResult {
  OuterBranch minus, plus;
  LipschitzEstimate lipschitz_minus, lipschitz_plus;
};

DegenerateResult run_degenerate(const RunConfig& cfg);

/// Sorted union of 0, the output times and the monitoring times up to T.
std::vector<double> front_times(const RunConfig& cfg);

FrontEvolution run_front(const RunConfig& cfg, const DegenerateResult& outer);

struct FrontConfinement {
  double h_min = 0.0, h_max = 0.0;
  bool inside = false;
  bool monotone = false;
};

FrontConfinement check_front_confinement(const FrontEvolution& evo, double a);

/// z of the first crossing of `level(x, y)` in each column (NaN when absent).
std::vector<double> level_set_heights(const ScalarField3D& field, const std::vector<double>& level);

struct LevelSetAgreement {
  double fraction = 0.0;
  double max_deviation = 0.0;
  std::size_t missing = 0;
};

/// Fraction of columns whose u = phi* crossing lies within `tol` of h0 in z.
LevelSetAgreement level_set_agreement(const ScalarField3D& field, const FrontSurface& h0, const OuterBranch& minus,
                                      const OuterBranch& plus, double tol);

struct InvariantCheck {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct TimeReport {
  double t = 0.0;
  double err_u0 = 0.0;
  std::optional<double> err_u1;
  double h_min = 0.0, h_max = 0.0, h_mean = 0.0;
  LevelSetAgreement level;
  std::size_t outer_only_nodes = 0;
  /// Relative L2 difference between the closed-form and general U0 assemblies.
  double fastpath_gap = 0.0;
};

struct ComparisonReport {
  std::string problem;
  double mu = 0.0;
  GridConfig grid;
  std::vector<TimeReport> times;
  std::vector<InvariantCheck> checks;
  std::vector<std::pair<std::string, double>> timings;
};

/// Full pipeline: outer, front, asymptotic assembly, reference solve, errors.
/// Writes fields when `write_outputs` is set.
ComparisonReport run_compare(const RunConfig& cfg, bool write_outputs = true);

/// report.txt and report.csv in `dir`; wall times go to timings.txt so the reports stay deterministic.
void write_report(const ComparisonReport& report, const std::filesystem::path& dir);

struct SweepRow {
  double mu = 0.0;
  int nz = 0;
  double error = 0.0;
};

struct SweepReport {
  std::string problem;
  double t = 0.0;
  std::vector<SweepRow> rows;
  bool strictly_decreasing = false;
  /// Least-squares slope of log error against log mu; empty with a single mu.
  std::optional<double> slope;
};

/// z resolution used for a given mu: nz - 1 = ceil(2.56 a / mu).
int sweep_nz(double mu, double a);

/// Errors of U0 against the reference at the first output time. mu_list must be strictly descending.
SweepReport run_mu_sweep(const RunConfig& cfg, const std::vector<double>& mu_list);
void write_sweep_report(const SweepReport& report, const std::filesystem::path& dir);
double loglog_slope(const std::vector<double>& mu, const std::vector<double>& err);

/// 0 success, 2 config/argument, 10 expr, 11 core, 12 characteristics, 13 outer,
/// 14 front, 15 inner, 16 assembler, 17 reference, 18 harness / io.
int exit_code_for(const Error& e);

}  // namespace rdafront
