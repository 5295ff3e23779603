#pragma once

#include <Eigen/Dense>
#include <functional>
#include <utility>
#include <vector>

namespace dcomp {

// Uniform grid on [-tau, 0]. Node i sits at -tau + i*h, i = 0..N, node N is theta = 0.
struct Grid {
  double tau = 1.0;
  int N = 100;

  double h() const { return tau / N; }
  double node(int i) const { return i == N ? 0.0 : -tau + i * h(); }
  int size() const { return N + 1; }
  // trapezoid weights over the N+1 nodes
  std::vector<double> weights() const;
  bool operator==(const Grid& o) const { return tau == o.tau && N == o.N; }
  bool operator!=(const Grid& o) const { return !(*this == o); }
};

// Element of L2([-tau,0]; Leb + delta_0; R^n). head is the delta_0 part,
// body holds the Lebesgue part sampled at the grid nodes (column i = node i).
struct HistoryElement {
  int n = 1;
  Grid grid;
  Eigen::VectorXd head;
  Eigen::MatrixXd body;

  HistoryElement() = default;
  HistoryElement(int n, Grid g);

  static HistoryElement zero(int n, Grid g) { return HistoryElement(n, g); }
  static HistoryElement unit_head(int n, Grid g, int component = 0);

  HistoryElement& operator+=(const HistoryElement& o);
  HistoryElement& operator*=(double s);
  friend HistoryElement operator+(HistoryElement a, const HistoryElement& b) { return a += b; }
  friend HistoryElement operator-(HistoryElement a, const HistoryElement& b) {
    HistoryElement nb = b;
    nb *= -1.0;
    return a += nb;
  }
  friend HistoryElement operator*(double s, HistoryElement a) { return a *= s; }

  bool all_finite() const;
};

double inner_product(const HistoryElement& phi, const HistoryElement& psi);
double norm(const HistoryElement& phi);

HistoryElement embed_continuous(const std::function<Eigen::VectorXd(double)>& f, int n, Grid g);
HistoryElement embed_continuous(const std::function<double(double)>& f, Grid g);

struct Atom {
  double theta = 0.0;
  Eigen::MatrixXd mat;
};

// piecewise-constant density on [from, to]
struct DensityPiece {
  double from = 0.0;
  double to = 0.0;
  Eigen::MatrixXd mat;
};

// Matrix-valued measure on [-tau, 0]: atoms plus a piecewise-constant density.
struct StieltjesKernel {
  int out_dim = 1;
  int in_dim = 1;
  std::vector<Atom> atoms;
  std::vector<DensityPiece> density;

  static StieltjesKernel zero(int out_dim, int in_dim);
  static StieltjesKernel atom(double theta, const Eigen::MatrixXd& m);
  static StieltjesKernel scalar_atom(double theta, double v);
  static StieltjesKernel scalar_density(double from, double to, double v);

  bool is_zero() const { return atoms.empty() && density.empty(); }
  // density value at theta; at a jump the two one-sided limits are averaged
  Eigen::MatrixXd density_at(double theta, double tau) const;

  StieltjesKernel& operator+=(const StieltjesKernel& o);
  friend StieltjesKernel operator+(StieltjesKernel a, const StieltjesKernel& b) { return a += b; }
};

// M * k, i.e. the kernel composed with a matrix on the output side
StieltjesKernel left_multiply(const Eigen::MatrixXd& m, const StieltjesKernel& k);

// Kernel pinned to a grid: atoms snapped to nodes, density pre-multiplied by trapezoid weights.
struct ResolvedKernel {
  int out_dim = 1;
  int in_dim = 1;
  Grid grid;
  std::vector<std::pair<int, Eigen::MatrixXd>> atoms;
  std::vector<Eigen::MatrixXd> wdens;  // empty when the density vanishes

  bool has_density() const { return !wdens.empty(); }
};

ResolvedKernel resolve(const StieltjesKernel& k, const Grid& g);

Eigen::VectorXd stieltjes_apply(const StieltjesKernel& k, const HistoryElement& phi);
Eigen::VectorXd stieltjes_apply(const ResolvedKernel& k, const HistoryElement& phi);

// spectral norm of atoms plus integral of the spectral norm of the density
double total_variation(const StieltjesKernel& k);

}  // namespace dcomp
