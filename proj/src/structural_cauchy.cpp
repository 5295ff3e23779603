#include "dcomp/structural_cauchy.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <random>

#include <Eigen/SVD>
#include <unsupported/Eigen/FFT>

#include "dcomp/errors.hpp"

namespace dcomp {

namespace {

void decode(size_t p, int k, int N, int* x) {
  for (int a = k - 1; a >= 0; --a) {
    x[a] = static_cast<int>(p % (N + 1));
    p /= (N + 1);
  }
}

// index offset of a unit step along the main diagonal
size_t diag_stride(int k, int N) {
  size_t s = 0, b = 1;
  for (int a = 0; a < k; ++a) {
    s += b;
    b *= (N + 1);
  }
  return s;
}

std::vector<double> trapezoid(int K, double h) {
  std::vector<double> w(K + 1, h);
  if (K == 0) return {0.0};
  w[0] = w[K] = 0.5 * h;
  return w;
}

struct Perm {
  std::vector<int> sigma;
  double coef;
};

std::vector<Perm> permutations(int m, bool antisymmetric) {
  std::vector<int> s(m);
  std::iota(s.begin(), s.end(), 0);
  if (!antisymmetric) return {{s, 1.0}};
  double fact = 1.0;
  for (int i = 2; i <= m; ++i) fact *= i;
  std::vector<Perm> out;
  do {
    int inv = 0;
    for (int a = 0; a < m; ++a)
      for (int b = a + 1; b < m; ++b)
        if (s[a] > s[b]) ++inv;
    out.push_back({s, (inv % 2 ? -1.0 : 1.0) / fact});
  } while (std::next_permutation(s.begin(), s.end()));
  return out;
}

struct Ref {
  int traj = 0;
  int step = 0;
  bool measured = false;
};

struct Term {
  double coef = 1.0;
  std::vector<Ref> f;
};

// Linear combination of tensor products of trajectory snapshots, evaluated face by face.
struct LazyTensor {
  const std::vector<Trajectory>* tr = nullptr;
  const std::vector<Eigen::VectorXd>* meas = nullptr;
  std::vector<double> w;  // grid trapezoid weights
  int N = 0;
  int m = 1;

  double body(const Ref& r, int i) const {
    const auto& T = (*tr)[r.traj];
    return r.step == 0 ? T.initial.body(0, i) : T.path(0, r.step + i);
  }
  double head(const Ref& r) const {
    if (r.measured) return (*meas)[r.traj](r.step);
    const auto& T = (*tr)[r.traj];
    return r.step == 0 ? T.initial.head(0) : T.path(0, N + r.step);
  }
  double inner(const Ref& a, const Ref& b) const {
    double s = head(a) * head(b);
    for (int i = 0; i <= N; ++i) s += w[i] * body(a, i) * body(b, i);
    return s;
  }

  FaceGrid eval(const std::vector<Term>& terms, FaceIndex J) const {
    auto slots = face_slots(J, m);
    const int k = static_cast<int>(slots.size());
    FaceGrid out(k, N, 1);
    std::vector<double> acc(out.points(), 0.0);
    std::vector<Eigen::VectorXd> v(k, Eigen::VectorXd(N + 1));
    std::vector<int> x(k);
    for (const auto& t : terms) {
      double c = t.coef;
      for (int l = 0; l < m && c != 0.0; ++l)
        if (!(J >> l & 1u)) c *= head(t.f[l]);
      if (c == 0.0) continue;
      for (int a = 0; a < k; ++a)
        for (int i = 0; i <= N; ++i) v[a](i) = body(t.f[slots[a]], i);
      if (k == 0) {
        acc[0] += c;
      } else if (k == 1) {
        for (int i = 0; i <= N; ++i) acc[i] += c * v[0](i);
      } else if (k == 2) {
        for (int i = 0; i <= N; ++i) {
          const double ci = c * v[0](i);
          double* row = acc.data() + static_cast<size_t>(i) * (N + 1);
          for (int j = 0; j <= N; ++j) row[j] += ci * v[1](j);
        }
      } else {
        for (size_t p = 0; p < acc.size(); ++p) {
          decode(p, k, N, x.data());
          double prod = c;
          for (int a = 0; a < k; ++a) prod *= v[a](x[a]);
          acc[p] += prod;
        }
      }
    }
    for (size_t p = 0; p < acc.size(); ++p) out.data[p] = acc[p];
    return out;
  }

  double norm2(const std::vector<Term>& terms) const {
    double s = 0.0;
    for (size_t a = 0; a < terms.size(); ++a)
      for (size_t b = a; b < terms.size(); ++b) {
        double g = terms[a].coef * terms[b].coef;
        for (int l = 0; l < m && g != 0.0; ++l) g *= inner(terms[a].f[l], terms[b].f[l]);
        s += (a == b ? 1.0 : 2.0) * g;
      }
    return s;
  }
};

FaceGrid scaled(FaceGrid f, double s) {
  for (auto& v : f.data) v *= s;
  return f;
}

void axpy(FaceGrid& y, double a, const FaceGrid& x) {
  for (size_t i = 0; i < y.data.size(); ++i) y.data[i] += a * x.data[i];
}

}  // namespace

double face_norm(const FaceGrid& f, const Grid& g) {
  auto w = g.weights();
  std::vector<int> x(f.k);
  double s = 0.0;
  for (size_t p = 0; p < f.points(); ++p) {
    decode(p, f.k, f.N, x.data());
    double wp = 1.0;
    for (int a = 0; a < f.k; ++a) wp *= w[x[a]];
    for (int c = 0; c < f.ncomp; ++c) s += wp * std::norm(f(p, c));
  }
  return std::sqrt(s);
}

FaceGrid adorn(const AdornedSource& X, int t) {
  if (t < 0) throw DomainError("negative time index");
  if (X.k < 1) throw ShapeError("adorned sources live on faces of dimension >= 1");
  const int N = X.grid.N, k = X.k;
  FaceGrid out(k, N, X.ncomp);
  const double r = rho_nu(X.nu, t * X.grid.h());
  const size_t ds = diag_stride(k, N);
  std::vector<int> x(k), y(std::max(k - 1, 0));
  for (size_t p = 0; p < out.points(); ++p) {
    decode(p, k, N, x.data());
    int l = 0;
    for (int a = 1; a < k; ++a)
      if (x[a] > x[l]) l = a;
    if (x[l] + t <= N) {
      for (int c = 0; c < X.ncomp; ++c) out(p, c) = r * X.initial(p + t * ds, c);
      continue;
    }
    const int tp = t - (N - x[l]);
    if (tp >= static_cast<int>(X.boundary.size())) throw DomainError("adorned source does not reach this time");
    for (int a = 0, b = 0; a < k; ++a)
      if (a != l) y[b++] = x[a] + (N - x[l]);
    const FaceGrid& B = X.boundary[tp][l];
    size_t q = point_index(y.data(), k - 1, N);
    for (int c = 0; c < X.ncomp; ++c) out(p, c) = r * B(q, c);
  }
  return out;
}

double adorned_norm(const AdornedSource& X) {
  double s = std::pow(face_norm(X.initial, X.grid), 2);
  const int K = X.steps();
  auto wt = trapezoid(K, X.grid.h());
  Grid g = X.grid;
  for (int t = 0; t <= K; ++t) {
    const double r = rho_nu(X.nu, t * g.h());
    for (const auto& B : X.boundary[t]) s += wt[t] * r * r * std::pow(face_norm(B, g), 2);
  }
  return std::sqrt(s);
}

FaceGrid twist(const TwistedSource& Y, int t) {
  if (t < 0 || t > Y.steps) throw DomainError("time index outside the twisted source");
  if (Y.k < 1) throw ShapeError("twisted sources live on faces of dimension >= 1");
  const int N = Y.grid.N, k = Y.k;
  const double h = Y.grid.h();
  FaceGrid out(k, N, Y.ncomp);
  if (t == 0) return out;
  std::vector<FaceGrid> ys;
  ys.reserve(t + 1);
  for (int s = 0; s <= t; ++s) {
    ys.push_back(Y.y(s));
    if (ys.back().k != k || ys.back().N != N) throw ShapeError("twisted source has the wrong face shape");
  }
  const double r = rho_nu(Y.nu, t * h);
  const size_t ds = diag_stride(k, N);
  std::vector<int> x(k);
  for (size_t p = 0; p < out.points(); ++p) {
    decode(p, k, N, x.data());
    const int M = *std::max_element(x.begin(), x.end());
    const int smin = std::max(0, t - (N - M));
    if (smin == t) continue;
    for (int c = 0; c < Y.ncomp; ++c) {
      cplx acc = 0.0;
      for (int s = smin; s <= t; ++s) {
        const double w = (s == smin || s == t) ? 0.5 * h : h;
        acc += w * ys[s](p + (t - s) * ds, c);
      }
      out(p, c) = r * acc;
    }
  }
  return out;
}

double twisted_norm(const TwistedSource& Y) {
  auto wt = trapezoid(Y.steps, Y.grid.h());
  double s = 0.0;
  for (int t = 0; t <= Y.steps; ++t) {
    const double r = rho_nu(Y.nu, t * Y.grid.h());
    s += wt[t] * r * r * std::pow(face_norm(Y.y(t), Y.grid), 2);
  }
  return std::sqrt(s);
}

Decomposition decompose_solution(const LinearDelayModel& model, const DecomposableData& phi0,
                                 const DecomposableForcing& eta, double nu, double T,
                                 const DecompositionOptions& opt) {
  if (model.n != 1) throw ShapeError("structural decomposition supports n = 1 only");
  const int m = static_cast<int>(phi0.factors.size());
  if (m < 1) throw ShapeError("initial data needs at least one factor");
  if (static_cast<int>(eta.data.factors.size()) != m) throw ShapeError("forcing order differs from initial data");
  if (!eta.profile) throw ConfigError("forcing profile missing");
  if (!std::isfinite(nu)) throw ConfigError("nu must be finite");
  const Grid g = phi0.factors[0].grid;
  for (const auto* list : {&phi0.factors, &eta.data.factors})
    for (const auto& f : *list)
      if (f.n != 1 || f.grid != g) throw ShapeError("factors must be scalar and share one grid");
  {
    auto cgf = phi0.antisymmetric ? wedge(phi0.factors) : tensor(phi0.factors);
    double mis = trace_mismatch(cgf);
    if (mis > opt.trace_tol)
      throw DomainError("initial data violates the face trace coupling (mismatch " + std::to_string(mis) + ")");
  }
  const int N = g.N;
  const double h = g.h();
  const int K = static_cast<int>(std::lround(T / h));
  if (K < 1 || std::abs(K * h - T) > 1e-9 * std::max(1.0, T)) throw DomainError("T must be a positive multiple of h");

  std::vector<Trajectory> tr;
  for (const auto& f : phi0.factors) tr.push_back(solve_linear(model, f, K * h, h));
  for (const auto& f : eta.data.factors) tr.push_back(solve_linear(model, f, K * h, h));
  ResolvedKernel ra = resolve(model.alpha, g);
  std::vector<Eigen::VectorXd> meas(tr.size(), Eigen::VectorXd(K + 1));
  for (size_t a = 0; a < tr.size(); ++a)
    for (int k = 0; k <= K; ++k) meas[a](k) = stieltjes_apply(ra, tr[a].snapshot(k))(0);

  LazyTensor lz;
  lz.tr = &tr;
  lz.meas = &meas;
  lz.w = g.weights();
  lz.N = N;
  lz.m = m;

  const auto perm0 = permutations(m, phi0.antisymmetric);
  const auto perm1 = permutations(m, eta.data.antisymmetric);
  auto wt = trapezoid(K, h);
  std::vector<double> prof(K + 1);
  for (int s = 0; s <= K; ++s) prof[s] = eta.profile(s * h);

  auto truth_terms = [&](int t) {
    std::vector<Term> out;
    for (const auto& p : perm0) {
      Term tm{p.coef * rho_nu(nu, t * h), {}};
      for (int l = 0; l < m; ++l) tm.f.push_back({p.sigma[l], t, false});
      out.push_back(tm);
    }
    if (t == 0) return out;
    for (int s = 0; s <= t; ++s) {
      const double w = (s == 0 || s == t) ? 0.5 * h : h;
      const double c = w * rho_nu(nu, (t - s) * h) * prof[s];
      if (c == 0.0) continue;
      for (const auto& p : perm1) {
        Term tm{p.coef * c, {}};
        for (int l = 0; l < m; ++l) tm.f.push_back({m + p.sigma[l], t - s, false});
        out.push_back(tm);
      }
    }
    return out;
  };
  std::vector<Term> forcing_shape;
  for (const auto& p : perm1) {
    Term tm{p.coef, {}};
    for (int l = 0; l < m; ++l) tm.f.push_back({m + p.sigma[l], 0, false});
    forcing_shape.push_back(tm);
  }

  const FaceIndex full = (1u << m) - 1;
  // lower-face restrictions of the solution and stored sources for faces below the top
  std::vector<std::vector<FaceGrid>> low(K + 1, std::vector<FaceGrid>(full + 1));
  auto ystore = std::make_shared<std::vector<std::vector<FaceGrid>>>(full + 1);
  std::vector<FaceGrid> eta_face(full + 1);
  for (FaceIndex J = 0; J <= full; ++J) eta_face[J] = lz.eval(forcing_shape, J);
  Decomposition dec;
  dec.m = m;
  dec.grid = g;
  dec.nu = nu;
  dec.steps = K;
  double sol_l2 = 0.0;
  for (int t = 0; t <= K; ++t) {
    auto terms = truth_terms(t);
    for (FaceIndex J = 0; J < full; ++J) {
      low[t][J] = lz.eval(terms, J);
      if (face_size(J) == 0) continue;
      FaceGrid y = scaled(eta_face[J], prof[t]);
      for (int j = 0; j < m; ++j) {
        if (J >> j & 1u) continue;
        auto mt = terms;
        for (auto& tm : mt) tm.f[j].measured = true;
        axpy(y, 1.0, lz.eval(mt, J));
      }
      (*ystore)[J].push_back(scaled(std::move(y), 1.0 / rho_nu(nu, t * h)));
    }
    if (opt.with_norms) sol_l2 += wt[t] * lz.norm2(terms);
  }
  if (opt.with_norms) {
    double eta2 = lz.norm2(forcing_shape), eta_l2 = 0.0;
    for (int t = 0; t <= K; ++t) eta_l2 += wt[t] * prof[t] * prof[t] * eta2;
    dec.rhs = lz.norm2(truth_terms(0)) + sol_l2 + eta_l2;
  }

  const int nchk = std::max(1, opt.checks);
  for (int c = 1; c <= nchk; ++c) {
    int s = static_cast<int>(std::lround(static_cast<double>(c) * K / nchk));
    if (dec.check_steps.empty() || s != dec.check_steps.back()) dec.check_steps.push_back(s);
  }
  std::vector<std::vector<FaceGrid>> truth_at(dec.check_steps.size());
  for (size_t c = 0; c < dec.check_steps.size(); ++c) {
    auto terms = truth_terms(dec.check_steps[c]);
    truth_at[c].resize(full + 1);
    for (FaceIndex J = 1; J <= full; ++J) truth_at[c][J] = lz.eval(terms, J);
  }

  auto init_terms = truth_terms(0);
  const int nfaces = static_cast<int>(full);
  dec.faces.resize(nfaces);
#pragma omp parallel for schedule(dynamic)
  for (int fi = 0; fi < nfaces; ++fi) {
    const FaceIndex J = static_cast<FaceIndex>(fi + 1);
    auto slots = face_slots(J, m);
    const int k = static_cast<int>(slots.size());
    FaceDecomposition& fd = dec.faces[fi];
    fd.face = J;

    fd.X.k = k;
    fd.X.grid = g;
    fd.X.nu = nu;
    fd.X.initial = lz.eval(init_terms, J);
    fd.X.boundary.resize(K + 1);
    for (int t = 0; t <= K; ++t)
      for (int a = 0; a < k; ++a)
        fd.X.boundary[t].push_back(scaled(low[t][J & ~(1u << slots[a])], 1.0 / rho_nu(nu, t * h)));

    fd.Y.k = k;
    fd.Y.grid = g;
    fd.Y.nu = nu;
    fd.Y.steps = K;
    if (J == full) {
      auto shape = std::make_shared<FaceGrid>(eta_face[J]);
      auto pr = std::make_shared<std::vector<double>>(prof);
      fd.Y.y = [shape, pr, nu, h](int s) { return scaled(*shape, (*pr)[s] / rho_nu(nu, s * h)); };
    } else {
      fd.Y.y = [ystore, J](int s) { return (*ystore)[J][s]; };
    }

    // V(t) = int_0^t T(t - s) Y(s) ds along characteristics
    const size_t ds = diag_stride(k, N);
    FaceGrid V(k, N, 1), Yprev = fd.Y.y(0);
    std::vector<char> edge(V.points());
    std::vector<int> x(k);
    for (size_t p = 0; p < V.points(); ++p) {
      decode(p, k, N, x.data());
      edge[p] = *std::max_element(x.begin(), x.end()) == N;
    }
    size_t next = 0;
    for (int t = 0; t <= K; ++t) {
      if (t > 0) {
        FaceGrid Ycur = fd.Y.y(t);
        FaceGrid Vn(k, N, 1);
        for (size_t p = 0; p < V.points(); ++p)
          if (!edge[p]) Vn.data[p] = V.data[p + ds] + 0.5 * h * (Yprev.data[p + ds] + Ycur.data[p]);
        V = std::move(Vn);
        Yprev = std::move(Ycur);
      }
      if (next < dec.check_steps.size() && dec.check_steps[next] == t) {
        FaceGrid r = truth_at[next][J];
        axpy(r, -1.0, adorn(fd.X, t));
        axpy(r, -rho_nu(nu, t * h), V);
        double rn = face_norm(r, g), tn = face_norm(truth_at[next][J], g);
        fd.residual.push_back(rn);
        fd.relative_residual.push_back(tn > 0 ? rn / tn : rn);
        ++next;
      }
    }
    if (opt.with_norms) {
      fd.adorned_norm = adorned_norm(fd.X);
      fd.twisted_norm = twisted_norm(fd.Y);
      fd.c_ratio = dec.rhs > 0 ? (fd.adorned_norm * fd.adorned_norm + fd.twisted_norm * fd.twisted_norm) / dec.rhs
                               : 0.0;
    }
  }
  for (const auto& fd : dec.faces)
    for (size_t c = 0; c < fd.residual.size(); ++c) {
      dec.max_residual = std::max(dec.max_residual, fd.residual[c]);
      dec.max_relative_residual = std::max(dec.max_relative_residual, fd.relative_residual[c]);
    }
  return dec;
}

std::vector<FaceGrid> pointwise_measure_series(const std::vector<FaceGrid>& series, const StieltjesKernel& gamma,
                                               const Grid& g, int slot, const std::vector<FaceGrid>* lower) {
  if (gamma.out_dim != 1 || gamma.in_dim != 1) throw ShapeError("pointwise measurement takes a scalar kernel");
  if (lower && lower->size() != series.size()) throw ShapeError("lower series has the wrong length");
  ResolvedKernel rk = resolve(gamma, g);
  const int N = g.N;
  std::vector<FaceGrid> out;
  out.reserve(series.size());
  for (size_t t = 0; t < series.size(); ++t) {
    const FaceGrid& F = series[t];
    const int k = F.k;
    if (k < 1 || F.N != N) throw ShapeError("series grid does not match");
    if (slot < 0 || slot >= k) throw ShapeError("slot outside the face");
    FaceGrid O(k - 1, N, F.ncomp);
    const FaceGrid* L = lower ? &(*lower)[t] : nullptr;
    if (L && (L->k != k - 1 || L->ncomp != F.ncomp)) throw ShapeError("lower series has the wrong shape");
    std::vector<int> y(std::max(k - 1, 0)), x(k);
    for (size_t q = 0; q < O.points(); ++q) {
      decode(q, k - 1, N, y.data());
      for (int a = 0, b = 0; a < k; ++a)
        if (a != slot) x[a] = y[b++];
      auto at = [&](int node, int c) {
        x[slot] = node;
        return F(point_index(x.data(), k, N), c);
      };
      for (int c = 0; c < F.ncomp; ++c) {
        cplx acc = 0.0;
        for (const auto& [node, mat] : rk.atoms) acc += mat(0, 0) * ((node == N && L) ? (*L)(q, c) : at(node, c));
        if (rk.has_density())
          for (int i = 0; i <= N; ++i) acc += rk.wdens[i](0, 0) * at(i, c);
        O(q, c) = acc;
      }
    }
    out.push_back(std::move(O));
  }
  return out;
}

double pointwise_measure_bound(const StieltjesKernel& gamma, double nu, double tau) {
  const double r0 = rho_zero(nu, tau);
  return total_variation(gamma) * std::max(r0, r0 * std::sqrt(tau));
}

double series_norm(const std::vector<FaceGrid>& series, const Grid& g, double h) {
  auto wt = trapezoid(static_cast<int>(series.size()) - 1, h);
  double s = 0.0;
  for (size_t t = 0; t < series.size(); ++t) s += wt[t] * std::pow(face_norm(series[t], g), 2);
  return std::sqrt(s);
}

namespace {

std::vector<FaceGrid> dft_series(const std::vector<FaceGrid>& series, int L) {
  Eigen::FFT<double> fft;
  const FaceGrid& f0 = series.front();
  std::vector<FaceGrid> out(L, FaceGrid(f0.k, f0.N, f0.ncomp));
  std::vector<cplx> in(L), res;
  for (size_t idx = 0; idx < f0.data.size(); ++idx) {
    std::fill(in.begin(), in.end(), cplx(0.0));
    for (size_t t = 0; t < series.size(); ++t) in[t] = series[t].data[idx];
    fft.fwd(res, in);
    for (int w = 0; w < L; ++w) out[w].data[idx] = res[w];
  }
  return out;
}

}  // namespace

double fourier_commutation_residual(const std::vector<FaceGrid>& series, const StieltjesKernel& gamma,
                                    const Grid& g, int slot, const std::vector<FaceGrid>* lower, int pad) {
  if (series.empty()) throw ShapeError("empty series");
  int L = 1;
  while (L < std::max(1, pad) * static_cast<int>(series.size())) L *= 2;
  auto A = dft_series(pointwise_measure_series(series, gamma, g, slot, lower), L);
  std::vector<FaceGrid> Bs = dft_series(series, L), Bl;
  if (lower) Bl = dft_series(*lower, L);
  auto B = pointwise_measure_series(Bs, gamma, g, slot, lower ? &Bl : nullptr);
  double num = 0.0, den = 0.0;
  for (int w = 0; w < L; ++w)
    for (size_t i = 0; i < A[w].data.size(); ++i) {
      num = std::max(num, std::abs(A[w].data[i] - B[w].data[i]));
      den = std::max(den, std::abs(A[w].data[i]));
    }
  return den > 0 ? num / den : num;
}

UniquenessReport uniqueness_check(const Grid& g, int steps, double nu, int y_degree, unsigned seed) {
  if (steps < 1 || y_degree < 0) throw ConfigError("uniqueness check needs steps >= 1 and degree >= 0");
  const int N = g.N, K = steps, D = y_degree + 1;
  const int nx = (N + 1) + K, ny = D * N, nz = nx + ny;
  const double Th = K * g.h();
  Eigen::MatrixXd P(D, K + 1);
  for (int q = 0; q < D; ++q)
    for (int s = 0; s <= K; ++s) P(q, s) = std::legendre(q, 2.0 * s * g.h() / Th - 1.0);

  auto apply = [&](const Eigen::VectorXd& z) {
    AdornedSource X;
    X.k = 1;
    X.grid = g;
    X.nu = nu;
    X.initial = FaceGrid(1, N, 1);
    for (int i = 0; i <= N; ++i) X.initial.data[i] = z(i);
    X.boundary.assign(K + 1, std::vector<FaceGrid>(1, FaceGrid(0, N, 1)));
    X.boundary[0][0].data[0] = z(N);
    for (int t = 1; t <= K; ++t) X.boundary[t][0].data[0] = z(N + t);
    auto ys = std::make_shared<std::vector<FaceGrid>>(K + 1, FaceGrid(1, N, 1));
    for (int s = 0; s <= K; ++s)
      for (int i = 0; i < N; ++i) {
        double v = 0.0;
        for (int q = 0; q < D; ++q) v += P(q, s) * z(nx + q * N + i);
        (*ys)[s].data[i] = v;
      }
    TwistedSource Y;
    Y.k = 1;
    Y.grid = g;
    Y.nu = nu;
    Y.steps = K;
    Y.y = [ys](int s) { return (*ys)[s]; };
    Eigen::VectorXd out((K + 1) * (N + 1));
    for (int t = 0; t <= K; ++t) {
      FaceGrid a = adorn(X, t), b = twist(Y, t);
      for (int i = 0; i <= N; ++i) out(t * (N + 1) + i) = (a.data[i] + b.data[i]).real();
    }
    return out;
  };

  Eigen::MatrixXd A((K + 1) * (N + 1), nz);
  for (int c = 0; c < nz; ++c) A.col(c) = apply(Eigen::VectorXd::Unit(nz, c));
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  UniquenessReport r;
  r.unknowns = nz;
  r.sigma_max = sv(0);
  r.sigma_min = sv(sv.size() - 1);
  svd.setThreshold(1e-10);
  r.rank = static_cast<int>(svd.rank());
  std::mt19937 gen(seed);
  std::normal_distribution<double> nd;
  Eigen::VectorXd z0(nz);
  for (int i = 0; i < nz; ++i) z0(i) = nd(gen);
  Eigen::VectorXd z = svd.solve(A * z0);
  r.recovery_error = (z - z0).norm() / z0.norm();
  r.zero_fit_norm = svd.solve(Eigen::VectorXd::Zero(A.rows())).norm();
  return r;
}

}  // namespace dcomp
