#pragma once

#include <complex>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dcomp/hilbert_delay.hpp"

namespace dcomp {

using cplx = std::complex<double>;
using GainFn = std::function<Eigen::MatrixXd(double)>;

// x'(t) = alpha(x_t) + b_tilde * gain(t) * c(x_t)
struct LinearDelayModel {
  std::string name;
  int n = 1;
  double tau = 1.0;
  StieltjesKernel alpha;
  Eigen::MatrixXd b_tilde;
  StieltjesKernel c_kernel;
  double lambda_gain = 0.0;
  GainFn gain;  // may be empty

  int r1() const { return static_cast<int>(b_tilde.cols()); }
  int r2() const { return c_kernel.out_dim; }
  // throws ShapeError / ConfigError
  void validate() const;
};

// Solution path sampled on the grid. Column j of path is x((j - N) h); columns < N
// hold the initial history body, column N holds the initial head.
struct Trajectory {
  Grid grid;
  double dt = 0.0;
  int substeps = 1;  // h / dt
  int steps = 0;     // number of grid steps of length h
  HistoryElement initial;
  Eigen::MatrixXd path;

  double t_end() const { return steps * grid.h(); }
  // segment x_t at t = k h
  HistoryElement snapshot(int k) const;
  Eigen::VectorXd value(int k) const { return path.col(grid.N + k); }
};

Trajectory solve_linear(const LinearDelayModel& model, const HistoryElement& phi0, double t_end, double dt,
                        bool with_gain = false, double t_start = 0.0);

HistoryElement semigroup_apply(const LinearDelayModel& model, const HistoryElement& phi0, double t,
                               std::optional<double> dt = std::nullopt);

HistoryElement cocycle_apply(const LinearDelayModel& model, const HistoryElement& phi0, double t,
                             double t_start = 0.0, std::optional<double> dt = std::nullopt);

// alpha' = alpha + b_tilde D c, gain' = gain - D
LinearDelayModel shift_feedback(const LinearDelayModel& model, const Eigen::MatrixXd& D, double new_lambda);

Eigen::MatrixXcd characteristic_matrix(const LinearDelayModel& model, cplx lambda);
Eigen::MatrixXcd characteristic_matrix(const StieltjesKernel& alpha, cplx lambda);

struct Rect {
  double re_min, re_max, im_min, im_max;
};

struct Root {
  cplx value;
  int multiplicity = 1;
  double residual = 0.0;  // |det Delta| / scale
};

std::vector<Root> characteristic_roots(const StieltjesKernel& alpha, const Rect& region, int max_roots = 64);
std::vector<Root> characteristic_roots(const LinearDelayModel& model, const Rect& region, int max_roots = 64);

// winding number of det Delta around the rectangle; min_samples is the initial samples per edge
int winding_number(const StieltjesKernel& alpha, const Rect& region, int min_samples = 16);

cplx newton_root(const StieltjesKernel& alpha, cplx start, int multiplicity = 1, int max_iter = 60);

struct LocalizationReport {
  std::vector<double> equilibria;
  double x_star = 0.0;
  double fprime_star = 0.0;
  double x_max = 0.0;
  double lambda = 0.0;
  double shift = 0.0;
  bool trivially_stable = false;
  bool inside_stable_region = false;
  std::vector<std::string> notes;
};

struct Preset {
  LinearDelayModel model;
  LocalizationReport report;
};

Preset build_mackey_glass(double gamma, double beta, double kappa, double tau);
// x_max <= 0 selects the default sqrt(1 + alpha)
Preset build_suarez_schopf(double alpha, double tau, double x_max = -1.0);
Preset build_delay_decay(double tau = 1.0, double lambda = 0.1);
Preset build_ode_decay(double lambda = 0.5);

struct CrossingResult {
  double tau = 0.0;
  cplx root;
  double tau_lo = 0.0, tau_hi = 0.0;  // bracket from the scan
};

// First tau in [tau_lo, tau_hi] where the rightmost characteristic root crosses Re = 0.
CrossingResult stability_crossing(const std::function<StieltjesKernel(double)>& kernel_at, double tau_lo,
                                  double tau_hi, int scan_steps, const Rect& region);

}  // namespace dcomp
