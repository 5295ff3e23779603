#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "dcomp/compound_spectrum.hpp"
#include "dcomp/config.hpp"
#include "dcomp/frequency_sweep.hpp"

namespace dcomp {

struct OutputOptions {
  std::string dir = "out";
  bool csv = true;
  bool json = true;
};

struct SpectrumOutcome {
  Preset preset;
  SpectrumReport report;
  double s_bound = 0.0;  // growth bound handed to the Laplace route
  std::vector<std::string> notes;
};

SpectrumOutcome spectrum_pipeline(const RunConfig& cfg);

struct VerifyOutcome {
  SpectrumOutcome spectrum;
  SweepConfig sweep_config;
  SweepReport report;
  bool lambda_auto = false;
  bool omega_max_auto = false;
  std::vector<std::string> header;  // resolved settings, echoed in every report
  std::vector<std::string> conclusions;
  int exit_code = 2;
};

VerifyOutcome verify_pipeline(const RunConfig& cfg);

struct OracleRow {
  std::string check;
  double measured = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::string detail;
};

std::vector<OracleRow> oracle_battery(const RunConfig& cfg);

struct StructuralRow {
  double h = 0.0;
  int n = 0;
  double residual = 0.0;
  double relative_residual = 0.0;
};

struct StructuralOutcome {
  std::vector<StructuralRow> rows;
  double order = 0.0;  // least squares slope of log residual against log h
};

StructuralOutcome structural_pipeline(const RunConfig& cfg);
double fitted_order(const std::vector<double>& h, const std::vector<double>& err);

// CSV text exactly as written by the subcommands
std::string sweep_csv(const SweepReport& r);
std::string spectrum_csv(const SpectrumReport& r);

int run_spectrum(const RunConfig& cfg, const OutputOptions& out, std::ostream& log);
int run_verify(const RunConfig& cfg, const OutputOptions& out, std::ostream& log);
int run_sweep(const RunConfig& cfg, const OutputOptions& out, std::ostream& log);
int run_simulate(const RunConfig& cfg, const OutputOptions& out, std::ostream& log);
int run_structural(const RunConfig& cfg, const OutputOptions& out, std::ostream& log);
int run_oracle(const RunConfig& cfg, const OutputOptions& out, std::ostream& log);
int list_models(std::ostream& log);

// entry point of the dcomp executable; returns the process exit code
int run_cli(int argc, char** argv);

}  // namespace dcomp
