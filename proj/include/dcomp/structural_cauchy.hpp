#pragma once

#include <functional>
#include <vector>

#include "dcomp/exterior_space.hpp"

namespace dcomp {

inline double rho_nu(double nu, double t) { return std::exp(nu * t); }
inline double rho_zero(double nu, double tau) { return std::max(1.0, std::exp(nu * tau)); }

// X on the prism over a k-face: the cube part plus, for every time node t and slot
// position l, the layer X(theta + t) over the face theta_l = 0 (a (k-1)-face grid).
// boundary[0][l] is the theta_l = 0 row of the cube.
struct AdornedSource {
  int k = 1;
  Grid grid;
  double nu = 0.0;
  int ncomp = 1;
  FaceGrid initial;
  std::vector<std::vector<FaceGrid>> boundary;

  int steps() const { return static_cast<int>(boundary.size()) - 1; }
};

// rho(t) X(. + t) at t = t_idx * h
FaceGrid adorn(const AdornedSource& X, int t_idx);
// sqrt of |X on the cube|^2 + sum_l int |rho X| over the boundary layers
double adorned_norm(const AdornedSource& X);

struct TwistedSource {
  int k = 1;
  Grid grid;
  double nu = 0.0;
  int ncomp = 1;
  int steps = 0;
  std::function<FaceGrid(int)> y;  // Y at time node s
};

// rho(t) int_0^t T(t - s) Y(s) ds; the trapezoid rule runs over the part of [0, t] where
// the shifted point stays inside the cube, with half weight at its lower end
FaceGrid twist(const TwistedSource& Y, int t_idx);
// sqrt int |rho(t) Y(t)|^2 dt
double twisted_norm(const TwistedSource& Y);

double face_norm(const FaceGrid& f, const Grid& g);

// Decomposable data for the compound problem; n = 1 only.
struct DecomposableData {
  std::vector<HistoryElement> factors;
  bool antisymmetric = false;
};

// eta_nu(t) = profile(t) * (factors combined as tensor or wedge)
struct DecomposableForcing {
  DecomposableData data;
  std::function<double(double)> profile;
};

struct FaceDecomposition {
  FaceIndex face = 0;
  AdornedSource X;
  TwistedSource Y;
  std::vector<double> residual;           // at the check steps
  std::vector<double> relative_residual;  // residual / |R Phi(t)|
  double adorned_norm = 0.0;
  double twisted_norm = 0.0;
  double c_ratio = 0.0;  // (adorned^2 + twisted^2) / rhs, filled when norms are requested
};

struct DecompositionOptions {
  int checks = 4;  // evenly spaced check steps ending at T
  bool with_norms = false;
  double trace_tol = 1e-8;
};

struct Decomposition {
  int m = 1;
  Grid grid;
  double nu = 0.0;
  int steps = 0;
  std::vector<int> check_steps;
  std::vector<FaceDecomposition> faces;  // every face with k >= 1
  double max_residual = 0.0;
  double max_relative_residual = 0.0;
  double rhs = 0.0;  // |Phi(0)|^2 + int |Phi|^2 + int |eta|^2 when norms are requested
};

// Solves Phi' = (A + nu) Phi + eta_nu through the Duhamel form and splits every face
// restriction into its adorned and twisted parts.
Decomposition decompose_solution(const LinearDelayModel& model, const DecomposableData& phi0,
                                 const DecomposableForcing& eta, double nu, double T,
                                 const DecompositionOptions& opt = {});

// Scalar kernel applied along one coordinate (position `slot` within the face) of each
// grid in the series. Atoms at theta = 0 read `lower` when given, otherwise the face row.
std::vector<FaceGrid> pointwise_measure_series(const std::vector<FaceGrid>& series, const StieltjesKernel& gamma,
                                               const Grid& g, int slot,
                                               const std::vector<FaceGrid>* lower = nullptr);

// Var(gamma) max(kappa(rho), rho0 tau^{1/2}) for rho = e^{nu t}
double pointwise_measure_bound(const StieltjesKernel& gamma, double nu, double tau);

// L2 norm in time of a series of face grids sampled every h
double series_norm(const std::vector<FaceGrid>& series, const Grid& g, double h);

// max |DFT(measure(series)) - measure(DFT(series))| / max |DFT(measure(series))|, time axis
// zero padded to the next power of two above pad * length
double fourier_commutation_residual(const std::vector<FaceGrid>& series, const StieltjesKernel& gamma,
                                    const Grid& g, int slot, const std::vector<FaceGrid>* lower = nullptr,
                                    int pad = 2);

struct UniquenessReport {
  int unknowns = 0;
  int rank = 0;
  double sigma_min = 0.0;
  double sigma_max = 0.0;
  double recovery_error = 0.0;  // relative, least squares refit of a random pair
  double zero_fit_norm = 0.0;   // least squares fit of the zero function
};

// Linear map (X, Y) -> adorn(X) + twist(Y) on a 1-face over `steps` time nodes, with Y
// polynomial of degree y_degree in time and free on the grid nodes below theta = 0 (the top node
// belongs to the lower face).
UniquenessReport uniqueness_check(const Grid& g, int steps, double nu, int y_degree, unsigned seed = 7);

}  // namespace dcomp
