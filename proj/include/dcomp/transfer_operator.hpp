#pragma once

#include <optional>
#include <vector>

#include "dcomp/dde_semigroup.hpp"
#include "dcomp/exterior_space.hpp"

namespace dcomp {

struct WedgeTerm {
  cplx coef = 1.0;
  std::vector<HistoryElement> factors;
};
using WedgeSum = std::vector<WedgeTerm>;

CompoundGridFunction to_grid(const WedgeSum& w);

// L functions on the grid, orthonormal in the trapezoid inner product and nested in L
struct OrthoFamily {
  Grid grid;
  Eigen::MatrixXd e;  // L x (N+1)
  int size() const { return static_cast<int>(e.rows()); }
};

OrthoFamily legendre_family(const Grid& g, int L);

// first `count` subsets of size r, ordered by largest element then lexicographically
std::vector<std::vector<int>> nested_index_sets(int r, int count);

// Element i is sqrt(m!) psi_{k_1} ^ ... ^ psi_{k_{m-1}} ^ psi_inf with psi_k = (0, e_k) and
// psi_inf = (b, 0). Only n = r1 = 1 is supported.
struct ControlBasis {
  int m = 2;
  double b = 1.0;
  OrthoFamily family;
  std::vector<std::vector<int>> sets;
  int size() const { return static_cast<int>(sets.size()); }
};

// Element K: on each (m-1)-face, +-det[e_{k_a}(theta_l)] / sqrt((m-1)! m)
struct MeasurementBasis {
  int m = 2;
  OrthoFamily family;
  std::vector<std::vector<int>> sets;
  int size() const { return static_cast<int>(sets.size()); }
};

ControlBasis make_control_basis(const LinearDelayModel& model, const Grid& g, int m, int count);
MeasurementBasis make_measurement_basis(const LinearDelayModel& model, const Grid& g, int m, int count);

WedgeTerm control_factors(const ControlBasis& basis, int i);
CompoundGridFunction control_embed(const ControlBasis& basis, int i);
Eigen::VectorXcd measurement_project(const CompoundGridFunction& phi, const StieltjesKernel& c,
                                     const MeasurementBasis& basis);

struct LaplaceResult {
  CompoundGridFunction value;  // approximates -(A - p)^{-1} phi
  double T = 0.0;
  double kappa = 0.0;
  double m_kappa = 0.0;
  double remainder = 0.0;
  std::vector<double> integrand_norm;  // |e^{-pt}| ||G(t) phi|| at the quadrature nodes
};

// s_bound is the growth bound used for the validity check and the remainder estimate
LaplaceResult resolvent_laplace(const LinearDelayModel& model, const WedgeSum& phi, cplx p, double T, double s_bound,
                                std::optional<double> dt = std::nullopt);
LaplaceResult resolvent_laplace_serial(const LinearDelayModel& model, const WedgeSum& phi, cplx p, double T,
                                       double s_bound, std::optional<double> dt = std::nullopt);

struct DenseResult {
  CompoundGridFunction value;  // (A_h - p)^{-1} psi on the antisymmetric part of psi
  double residual = 0.0;       // relative, on the unknowns
  double antisym_violation = 0.0;
  double gain = 0.0;  // ||value|| / ||psi||
};

DenseResult dense_resolvent_solve(const GeneratorMatrix& gen, const CompoundGridFunction& psi, cplx p);
DenseResult dense_resolvent_solve(const LinearDelayModel& model, const CompoundGridFunction& psi, cplx p);

struct TransferMatrix {
  Eigen::MatrixXcd W;  // N_M x N_U
  cplx p;
  double T = 0.0;
  double remainder = 0.0;
};

// Trajectories of the control factors and their measured/projected traces, computed once;
// W(p) is then a weighted sum over the stored quadrature nodes.
class TransferCache {
 public:
  TransferCache(const LinearDelayModel& model, const ControlBasis& control, const MeasurementBasis& measurement,
                double T, double s_bound, std::optional<double> dt = std::nullopt);

  TransferMatrix evaluate(cplx p) const;
  int rows() const { return nm_; }
  int cols() const { return nu_; }
  double T() const { return T_; }
  double s_bound() const { return s_; }

 private:
  int nm_ = 0, nu_ = 0, K_ = 0;
  double h_ = 0.0, T_ = 0.0, s_ = 0.0;
  Eigen::MatrixXd Q_;  // (nm * nu) x (K + 1), column k is Q(t_k) stored column-major in (row, col)
  Eigen::VectorXd qnorm_;
};

TransferMatrix transfer_matrix(const TransferCache& cache, cplx p);
TransferMatrix transfer_matrix(const LinearDelayModel& model, cplx p, const ControlBasis& control,
                               const MeasurementBasis& measurement, double T, double s_bound);
// column-by-column route through control_embed, resolvent_laplace and measurement_project
TransferMatrix transfer_matrix_full(const LinearDelayModel& model, cplx p, const ControlBasis& control,
                                    const MeasurementBasis& measurement, double T, double s_bound);

}  // namespace dcomp
