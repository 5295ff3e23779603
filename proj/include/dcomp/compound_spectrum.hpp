#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "dcomp/dde_semigroup.hpp"

namespace dcomp {

struct CompoundEigenvalue {
  cplx value;
  // each decomposition is a nondecreasing list of indices into the base root list
  std::vector<std::vector<int>> decompositions;
  long tensor_mult = 0;
  long antisym_mult = 0;
};

std::vector<CompoundEigenvalue> compound_spectrum_sums(const std::vector<Root>& roots, int m, const Rect& window,
                                                       double merge_tol = 1e-9);

// entries (eigenvalue, eigenspace dimension), repeated eigenvalues listed repeatedly
long antisym_multiplicity(const std::vector<std::pair<cplx, int>>& decomposition, double tol = 1e-9);

long binomial(long n, long k);

struct SpectralBound {
  double s_antisym = -std::numeric_limits<double>::infinity();  // -inf when the antisymmetric spectrum is empty
  double s_tensor = -std::numeric_limits<double>::infinity();
  bool growth_equals_spectral = true;  // assumed from eventual compactness
  double effective() const { return std::isfinite(s_antisym) ? s_antisym : s_tensor; }
};

SpectralBound spectral_bound(const std::vector<CompoundEigenvalue>& eigs);

struct Clearance {
  long j = 0;
  double min_distance = std::numeric_limits<double>::infinity();
};

// counts eigenvalues right of Re = -nu0; throws SpectrumError when the line hits the spectrum
Clearance line_clearance(const std::vector<CompoundEigenvalue>& eigs, double nu0, bool tensor_level = false,
                         double tol = 1e-9);

// midpoint of the widest gap among real parts >= floor together with 0; uses the
// antisymmetric spectrum, or the tensor spectrum when the former is empty
double suggest_nu0(const std::vector<CompoundEigenvalue>& eigs, double floor);

struct SpectrumReport {
  int m = 2;
  std::vector<Root> base_roots;
  std::vector<CompoundEigenvalue> eigenvalues;
  SpectralBound bound;
  double nu0 = 0.0;
  bool nu0_auto = false;
  Clearance antisym;
  Clearance tensor;
  bool line_hits_antisym = false;
  bool line_hits_tensor = false;
  double required_root_floor = 0.0;  // base roots right of this value are needed for completeness
  std::vector<std::string> notes;
};

SpectrumReport build_spectrum_report(const std::vector<Root>& roots, int m, const Rect& root_region, const Rect& window,
                                     std::optional<double> nu0, double floor);

}  // namespace dcomp
