#pragma once

#include <Eigen/Sparse>
#include <complex>
#include <string>
#include <vector>

#include "dcomp/dde_semigroup.hpp"
#include "dcomp/hilbert_delay.hpp"

namespace dcomp {

// Subset of slots {0..m-1} as a bitmask; bit l set means slot l lies in the body.
using FaceIndex = unsigned;

inline int face_size(FaceIndex J) { return __builtin_popcount(J); }
std::vector<int> face_slots(FaceIndex J, int m);

// Grid of one k-face: (N+1)^k points, last coordinate fastest, ncomp = n^m values per point.
struct FaceGrid {
  int k = 0;
  int N = 0;
  int ncomp = 1;
  std::vector<cplx> data;

  FaceGrid() = default;
  FaceGrid(int k, int N, int ncomp);
  size_t points() const { return data.size() / ncomp; }
  cplx& operator()(size_t point, int comp) { return data[point * ncomp + comp]; }
  cplx operator()(size_t point, int comp) const { return data[point * ncomp + comp]; }
};

size_t point_index(const int* coords, int k, int N);

struct CompoundGridFunction {
  int m = 1;
  int n = 1;
  Grid grid;
  bool antisymmetric = false;
  bool is_complex = false;
  std::vector<FaceGrid> faces;  // indexed by FaceIndex

  CompoundGridFunction() = default;
  CompoundGridFunction(int m, int n, Grid g);

  int ncomp() const;
  FaceGrid& face(FaceIndex J) { return faces[J]; }
  const FaceGrid& face(FaceIndex J) const { return faces[J]; }

  CompoundGridFunction& operator+=(const CompoundGridFunction& o);
  CompoundGridFunction& operator*=(cplx s);
  friend CompoundGridFunction operator+(CompoundGridFunction a, const CompoundGridFunction& b) { return a += b; }
  friend CompoundGridFunction operator-(CompoundGridFunction a, const CompoundGridFunction& b) {
    CompoundGridFunction nb = b;
    nb *= -1.0;
    return a += nb;
  }
  friend CompoundGridFunction operator*(cplx s, CompoundGridFunction a) { return a *= s; }
  double max_abs() const;
};

CompoundGridFunction wedge(const std::vector<HistoryElement>& factors);
// plain tensor product, no antisymmetrization
CompoundGridFunction tensor(const std::vector<HistoryElement>& factors);

// sum over faces of trapezoid inner products, conjugate-linear in the first argument
cplx compound_inner(const CompoundGridFunction& a, const CompoundGridFunction& b);
double compound_norm(const CompoundGridFunction& a);

struct AntisymmetryReport {
  double top_face = 0.0;   // k = m relations
  double face_sign = 0.0;  // k = m-1 relations
  double improper = 0.0;   // k <= m-2: relations (n > 1) or nonzero entries (n = 1)
  std::vector<std::string> flags;
  double max() const { return std::max({top_face, face_sign, improper}); }
};

// violations are relative to max(1, max |entry|)
AntisymmetryReport check_antisymmetry(const CompoundGridFunction& phi, double tol = 1e-12);

// (P_pi Phi)(theta) = Phi(theta o pi) with tensor slots permuted alike
CompoundGridFunction permute_slots(const CompoundGridFunction& phi, const std::vector<int>& pi);
CompoundGridFunction antisymmetrize(const CompoundGridFunction& phi);

// shift by d nodes along the main diagonal, zero fill
FaceGrid diagonal_shift(const FaceGrid& a, int d);
FaceGrid diagonal_shift(const FaceGrid& a, double t, double h);

CompoundGridFunction compound_semigroup_apply(const LinearDelayModel& model, const std::vector<HistoryElement>& phis,
                                              double t);

// Discrete additive compound on the interior unknowns of every face. Nodes with a
// coordinate at theta = 0 alias to the lower face with that slot dropped.
struct GeneratorMatrix {
  int m = 1;
  int n = 1;
  Grid grid;
  std::vector<long> offset;  // first unknown of each face
  long size = 0;
  Eigen::SparseMatrix<double> A;

  int ncomp() const;
  long index(FaceIndex J, const int* coords, int comp) const;
  Eigen::VectorXcd gather(const CompoundGridFunction& phi) const;
  CompoundGridFunction scatter(const Eigen::VectorXcd& v) const;
};

GeneratorMatrix assemble_generator(const StieltjesKernel& alpha, const Grid& g, int m);

// max relative mismatch between theta = 0 rows and the lower faces
double trace_mismatch(const CompoundGridFunction& phi);

CompoundGridFunction compound_generator_apply(const LinearDelayModel& model, const CompoundGridFunction& phi,
                                              double trace_tol = 1e-8);
CompoundGridFunction compound_generator_apply(const GeneratorMatrix& gen, const CompoundGridFunction& phi,
                                              double trace_tol = 1e-8);

}  // namespace dcomp
