#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dcomp/dde_semigroup.hpp"

namespace dcomp {

struct ModelSection {
  std::string preset = "mackey-glass";
  std::map<std::string, double> params;
  // raw kernels, used when preset is "raw"
  double tau = 1.0;
  StieltjesKernel alpha;
  StieltjesKernel c_kernel;
  double b = 1.0;
  double lambda = 0.0;
};

struct RunConfig {
  std::string source = "<config>";
  ModelSection model;
  int grid_n = 100;
  std::optional<double> dt;
  int m = 2;

  Rect region{-4.0, 2.0, -60.0, 60.0};
  Rect window{-4.0, 2.0, -60.0, 60.0};
  double nu0_floor = -1.0;

  std::optional<double> nu0 = 0.05;     // empty means "auto"
  std::optional<double> lambda;         // empty means "auto-from-preset"
  double omega_max = 0.0;               // 0 means default window
  double d_omega = 0.05;
  int n_u = 8;
  int n_m = 8;
  double T = 120.0;
  double lipschitz_safety = 2.0;
  int max_refinements = 0;

  double sim_t_end = 50.0;
  std::string sim_initial = "constant";  // constant | cos
  double sim_value = 0.5;
  bool sim_with_gain = true;

  std::vector<int> structural_divisors{50, 100, 200};
  double structural_nu = 0.1;
  double structural_horizon = 2.0;  // in units of tau

  int oracle_grid_n = 64;
  bool oracle_break_trace = false;

  std::string out_dir = "out";
  int jobs = 0;
  unsigned seed = 1;
};

RunConfig parse_config(const std::string& text, const std::string& source = "<config>");
RunConfig load_config(const std::string& path);

std::vector<std::string> preset_names();
Preset build_model(const RunConfig& cfg);

}  // namespace dcomp
