#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dcomp/transfer_operator.hpp"

namespace dcomp {

struct SweepConfig {
  double nu0 = 0.05;
  double omega_max = 0.0;  // 0 selects default_omega_max
  double d_omega = 0.1;
  int n_u = 8;
  int n_m = 8;
  int grid_n = 100;
  int m = 2;
  double T = 120.0;
  double lambda = 0.0;
  double s_bound = 0.0;  // growth bound handed to the Laplace route
  double lipschitz_safety = 2.0;
  int max_refinements = 0;  // halve d_omega while inconclusive
  int jobs = 0;             // 0 keeps the OpenMP default
};

enum class Verdict { verified, violated, inconclusive };
std::string to_string(Verdict v);

struct SweepReport {
  std::vector<double> omega;
  std::vector<double> alpha;  // NaN where the node failed
  std::vector<std::string> failures;
  double sup = 0.0;
  double omega_at_sup = 0.0;
  double lipschitz = 0.0;
  double margin = 0.0;  // 1/lambda - sup, +inf when lambda = 0
  double threshold = 0.0;
  double d_omega = 0.0;
  double max_remainder = 0.0;
  double tail_ratio = 0.0;  // max over the last tenth of the window / sup
  int tail_oscillations = 0;
  Verdict verdict = Verdict::inconclusive;
  bool window_limited = true;
  double seconds = 0.0;
  int jobs = 1;
  int refinements = 0;
  std::vector<std::string> notes;
};

double largest_singular_value(const Eigen::MatrixXcd& M);

double alpha_N(const TransferCache& cache, double omega, double nu0);
double alpha_N(const LinearDelayModel& model, double omega, const SweepConfig& cfg);

double default_omega_max(double s, double tau);

TransferCache make_sweep_cache(const LinearDelayModel& model, const SweepConfig& cfg);

SweepReport sweep(const TransferCache& cache, const SweepConfig& cfg);
SweepReport sweep_serial(const TransferCache& cache, const SweepConfig& cfg);
SweepReport sweep(const LinearDelayModel& model, const SweepConfig& cfg);

double lipschitz_estimate(const std::vector<double>& omega, const std::vector<double>& alpha, double safety = 2.0);
double lipschitz_estimate(const SweepReport& report, double safety = 2.0);

struct VerdictResult {
  Verdict verdict = Verdict::inconclusive;
  double margin = 0.0;
};
VerdictResult verdict(const SweepReport& report, double lambda);

}  // namespace dcomp
