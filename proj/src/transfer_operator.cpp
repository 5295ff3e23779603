#include "dcomp/transfer_operator.hpp"

#include <spdlog/spdlog.h>

#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "dcomp/errors.hpp"

namespace dcomp {

namespace {

double factorial(int m) {
  double f = 1;
  for (int i = 2; i <= m; ++i) f *= i;
  return f;
}

struct SignedPerm {
  std::vector<int> p;
  int sign;
};

std::vector<SignedPerm> perms_of(int m) {
  std::vector<int> p(m);
  std::iota(p.begin(), p.end(), 0);
  std::vector<SignedPerm> out;
  do {
    int inv = 0;
    for (int a = 0; a < m; ++a)
      for (int b = a + 1; b < m; ++b)
        if (p[a] > p[b]) ++inv;
    out.push_back({p, inv % 2 ? -1 : 1});
  } while (std::next_permutation(p.begin(), p.end()));
  return out;
}

void require_scalar(const LinearDelayModel& model) {
  if (model.n != 1 || model.r1() != 1 || model.r2() != 1)
    throw ShapeError("control and measurement bases are available for n = r1 = r2 = 1 only");
}

void check_wedge_sum(const WedgeSum& w) {
  if (w.empty() || w[0].factors.empty()) throw ShapeError("empty wedge sum");
  for (const auto& t : w) {
    if (t.factors.size() != w[0].factors.size()) throw ShapeError("wedge terms of different order");
    for (const auto& f : t.factors)
      if (f.grid != w[0].factors[0].grid || f.n != w[0].factors[0].n) throw ShapeError("wedge factors differ in shape");
  }
}

int snap_steps(const Grid& g, double T) {
  int K = static_cast<int>(std::lround(T / g.h()));
  if (K < 1) throw DomainError("Laplace horizon shorter than one grid step");
  return K;
}

double det_small(Eigen::MatrixXd& a) {
  if (a.rows() == 0) return 1.0;
  if (a.rows() == 1) return a(0, 0);
  if (a.rows() == 2) return a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
  return a.determinant();
}

std::vector<double> trap_weights(int K, double h) {
  std::vector<double> w(K + 1, h);
  w.front() *= 0.5;
  w.back() *= 0.5;
  return w;
}

// |e^{-pt}| * ||sum_a coef_a wedge(v^a(t))|| by the Gram determinant formula
double gram_norm(const WedgeSum& terms, const std::vector<std::vector<HistoryElement>>& snaps) {
  const int m = static_cast<int>(terms[0].factors.size());
  cplx acc = 0.0;
  Eigen::MatrixXd G(m, m);
  for (size_t a = 0; a < terms.size(); ++a)
    for (size_t b = 0; b < terms.size(); ++b) {
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) G(i, j) = inner_product(snaps[a][i], snaps[b][j]);
      acc += std::conj(terms[a].coef) * terms[b].coef * det_small(G);
    }
  return std::sqrt(std::max(0.0, acc.real() / factorial(m)));
}

struct Advanced {
  std::vector<std::vector<Trajectory>> traj;  // [term][factor]
  int K = 0;
};

Advanced advance(const LinearDelayModel& model, const WedgeSum& phi, double T, std::optional<double> dt) {
  Advanced A;
  const Grid& g = phi[0].factors[0].grid;
  A.K = snap_steps(g, T);
  for (const auto& t : phi) {
    std::vector<Trajectory> row;
    for (const auto& f : t.factors) row.push_back(solve_linear(model, f, A.K * g.h(), dt.value_or(g.h()), false));
    A.traj.push_back(std::move(row));
  }
  return A;
}

void finish_remainder(LaplaceResult& r, cplx p, double s_bound, double h) {
  r.kappa = 0.5 * (p.real() - s_bound);
  const int K = static_cast<int>(r.integrand_norm.size()) - 1;
  double M = 0.0;
  for (int k = K / 2; k <= K; ++k) M = std::max(M, r.integrand_norm[k] * std::exp(r.kappa * k * h));
  r.m_kappa = M;
  r.remainder = M == 0.0 ? 0.0 : M * std::exp(-r.kappa * r.T) / r.kappa;
}

void check_route(cplx p, double s_bound) {
  if (!std::isfinite(s_bound)) throw ConfigError("growth bound for the Laplace route must be finite");
  if (!(p.real() > s_bound))
    throw LaplaceRouteError("Laplace route invalid: Re p = " + std::to_string(p.real()) +
                            " does not exceed the growth bound " + std::to_string(s_bound) + ", use the dense oracle");
}

std::vector<double> integrand_norms(const WedgeSum& phi, const Advanced& A, cplx p, double h) {
  std::vector<double> out(A.K + 1);
  std::vector<std::vector<HistoryElement>> snaps(phi.size());
  for (int k = 0; k <= A.K; ++k) {
    for (size_t a = 0; a < phi.size(); ++a) {
      snaps[a].clear();
      for (const auto& tr : A.traj[a]) snaps[a].push_back(tr.snapshot(k));
    }
    out[k] = std::exp(-p.real() * k * h) * gram_norm(phi, snaps);
  }
  return out;
}

}  // namespace

CompoundGridFunction to_grid(const WedgeSum& w) {
  check_wedge_sum(w);
  CompoundGridFunction out = w[0].coef * wedge(w[0].factors);
  for (size_t i = 1; i < w.size(); ++i) out += w[i].coef * wedge(w[i].factors);
  out.antisymmetric = true;
  return out;
}

OrthoFamily legendre_family(const Grid& g, int L) {
  if (L < 1) throw InputError("basis size must be positive");
  if (L > g.N) throw InputError("basis size exceeds the grid resolution");
  OrthoFamily f;
  f.grid = g;
  f.e.resize(L, g.N + 1);
  auto w = g.weights();
  Eigen::Map<const Eigen::VectorXd> wv(w.data(), w.size());
  for (int j = 0; j < L; ++j) {
    for (int i = 0; i <= g.N; ++i) {
      double x = 2.0 * (g.node(i) + g.tau) / g.tau - 1.0;
      f.e(j, i) = std::legendre(j, std::clamp(x, -1.0, 1.0));
    }
    for (int pass = 0; pass < 2; ++pass)
      for (int q = 0; q < j; ++q) {
        double c = (f.e.row(j).array() * f.e.row(q).array() * wv.transpose().array()).sum();
        f.e.row(j) -= c * f.e.row(q);
      }
    double nrm = std::sqrt((f.e.row(j).array().square() * wv.transpose().array()).sum());
    f.e.row(j) /= nrm;
  }
  return f;
}

std::vector<std::vector<int>> nested_index_sets(int r, int count) {
  std::vector<std::vector<int>> out;
  if (count < 1) throw InputError("basis size must be positive");
  if (r == 0) {
    out.emplace_back();
    return out;
  }
  for (int top = r - 1; static_cast<int>(out.size()) < count; ++top) {
    // subsets of {0..top-1} of size r-1 in lexicographic order, then append top
    std::vector<int> s(r - 1);
    std::iota(s.begin(), s.end(), 0);
    while (true) {
      auto full = s;
      full.push_back(top);
      out.push_back(full);
      if (static_cast<int>(out.size()) == count) break;
      int i = r - 2;
      while (i >= 0 && s[i] == top - (r - 1) + i) --i;
      if (i < 0) break;
      ++s[i];
      for (int j = i + 1; j < r - 1; ++j) s[j] = s[j - 1] + 1;
    }
  }
  return out;
}

static int family_size(const std::vector<std::vector<int>>& sets) {
  int L = 1;
  for (const auto& s : sets)
    for (int k : s) L = std::max(L, k + 1);
  return L;
}

ControlBasis make_control_basis(const LinearDelayModel& model, const Grid& g, int m, int count) {
  require_scalar(model);
  ControlBasis b;
  b.m = m;
  b.b = model.b_tilde(0, 0);
  if (m == 1 && count > 1) spdlog::info("order 1 control space is one-dimensional, using one basis element");
  b.sets = nested_index_sets(m - 1, m == 1 ? 1 : count);
  b.family = legendre_family(g, family_size(b.sets));
  return b;
}

MeasurementBasis make_measurement_basis(const LinearDelayModel& model, const Grid& g, int m, int count) {
  require_scalar(model);
  MeasurementBasis b;
  b.m = m;
  if (m == 1 && count > 1) spdlog::info("order 1 measurement space is one-dimensional, using one basis element");
  b.sets = nested_index_sets(m - 1, m == 1 ? 1 : count);
  b.family = legendre_family(g, family_size(b.sets));
  return b;
}

WedgeTerm control_factors(const ControlBasis& basis, int i) {
  if (i < 0 || i >= basis.size()) throw InputError("control index out of range");
  const Grid& g = basis.family.grid;
  WedgeTerm t;
  t.coef = std::sqrt(factorial(basis.m));
  for (int k : basis.sets[i]) {
    HistoryElement e(1, g);
    e.body.row(0) = basis.family.e.row(k);
    t.factors.push_back(e);
  }
  HistoryElement inf(1, g);
  inf.head(0) = basis.b;
  t.factors.push_back(inf);
  return t;
}

CompoundGridFunction control_embed(const ControlBasis& basis, int i) { return to_grid({control_factors(basis, i)}); }

Eigen::VectorXcd measurement_project(const CompoundGridFunction& phi, const StieltjesKernel& c,
                                     const MeasurementBasis& basis) {
  if (phi.n != 1 || c.out_dim != 1 || c.in_dim != 1) throw ShapeError("measurement projection needs n = r2 = 1");
  if (phi.m != basis.m || phi.grid != basis.family.grid) throw ShapeError("basis and function differ in shape");
  const int m = phi.m, N = phi.grid.N, k = m - 1;
  ResolvedKernel rk = resolve(c, phi.grid);
  std::vector<std::pair<int, double>> taps;
  for (const auto& [idx, M] : rk.atoms) taps.emplace_back(idx, M(0, 0));
  if (rk.has_density())
    for (int i = 0; i <= N; ++i)
      if (rk.wdens[i](0, 0) != 0.0) taps.emplace_back(i, rk.wdens[i](0, 0));
  const FaceIndex free_face = (1u << k) - 1, top = (1u << m) - 1;
  const auto& F = phi.faces[free_face];
  const auto& T = phi.faces[top];
  const size_t pts = F.points();
  std::vector<cplx> M(pts, 0.0);
  for (size_t x = 0; x < pts; ++x) {
    cplx s = 0.0;
    for (const auto& [node, v] : taps) s += v * (node == N ? F(x, 0) : T(x * (N + 1) + node, 0));
    M[x] = s;
  }
  auto w = phi.grid.weights();
  const double norm = std::sqrt(double(m)) / std::sqrt(factorial(k));
  Eigen::VectorXcd out(basis.size());
  std::vector<int> coords(k);
  Eigen::MatrixXd E(k, k);
  for (int b = 0; b < basis.size(); ++b) {
    const auto& K = basis.sets[b];
    cplx acc = 0.0;
    for (size_t x = 0; x < pts; ++x) {
      size_t q = x;
      double wt = 1.0;
      for (int l = k - 1; l >= 0; --l) {
        coords[l] = static_cast<int>(q % (N + 1));
        q /= (N + 1);
        wt *= w[coords[l]];
      }
      for (int a = 0; a < k; ++a)
        for (int l = 0; l < k; ++l) E(a, l) = basis.family.e(K[a], coords[l]);
      acc += wt * det_small(E) * M[x];
    }
    out(b) = norm * acc;
  }
  return out;
}

LaplaceResult resolvent_laplace(const LinearDelayModel& model, const WedgeSum& phi, cplx p, double T, double s_bound,
                                std::optional<double> dt) {
  check_wedge_sum(phi);
  check_route(p, s_bound);
  const int m = static_cast<int>(phi[0].factors.size());
  const int n = phi[0].factors[0].n;
  const Grid g = phi[0].factors[0].grid;
  const int N = g.N;
  const double h = g.h();
  Advanced A = advance(model, phi, T, dt);
  const int K = A.K;
  auto w = trap_weights(K, h);
  std::vector<double> Er(K + 1), Ei(K + 1);
  for (int k = 0; k <= K; ++k) {
    cplx e = w[k] * std::exp(-p * (k * h));
    Er[k] = e.real();
    Ei[k] = e.imag();
  }

  LaplaceResult res;
  res.T = K * h;
  // node t = 0 from the exact initial wedge (body at theta = 0 differs from the head there)
  res.value = cplx(Er[0], Ei[0]) * to_grid(phi);
  res.value.is_complex = true;
  res.value.antisymmetric = true;

  const auto perms = perms_of(m);
  const double inv_fact = 1.0 / factorial(m);
  const int nc = res.value.ncomp();
  std::vector<size_t> face_start(1u << m, 0);
  size_t total = 0;
  for (FaceIndex J = 0; J < (1u << m); ++J) {
    face_start[J] = total;
    total += res.value.faces[J].points();
  }

#pragma omp parallel
  {
    std::vector<int> x(m), offs(m), cs(m);
    std::vector<const double*> ptr(m);
#pragma omp for schedule(static)
    for (long task = 0; task < static_cast<long>(total); ++task) {
      FaceIndex J = 0;
      while (J + 1 < (1u << m) && face_start[J + 1] <= static_cast<size_t>(task)) ++J;
      size_t pnt = task - face_start[J];
      size_t q = pnt;
      for (int l = m - 1; l >= 0; --l) {
        if (J >> l & 1u) {
          x[l] = static_cast<int>(q % (N + 1));
          q /= (N + 1);
        }
        offs[l] = (J >> l & 1u) ? x[l] : N;
      }
      for (int c = 0; c < nc; ++c) {
        int cc = c;
        for (int l = m - 1; l >= 0; --l) {
          cs[l] = cc % n;
          cc /= n;
        }
        cplx acc = 0.0;
        for (size_t a = 0; a < phi.size(); ++a) {
          for (const auto& sp : perms) {
            for (int l = 0; l < m; ++l)
              ptr[l] = A.traj[a][sp.p[l]].path.data() + static_cast<long>(offs[l]) * n + cs[l];
            double sr = 0.0, si = 0.0;
            if (m == 1) {
              const double* p0 = ptr[0];
              for (int k = 1; k <= K; ++k) {
                double v = p0[static_cast<long>(k) * n];
                sr += Er[k] * v;
                si += Ei[k] * v;
              }
            } else if (m == 2) {
              const double *p0 = ptr[0], *p1 = ptr[1];
              for (int k = 1; k <= K; ++k) {
                double v = p0[static_cast<long>(k) * n] * p1[static_cast<long>(k) * n];
                sr += Er[k] * v;
                si += Ei[k] * v;
              }
            } else {
              for (int k = 1; k <= K; ++k) {
                double v = 1.0;
                for (int l = 0; l < m; ++l) v *= ptr[l][static_cast<long>(k) * n];
                sr += Er[k] * v;
                si += Ei[k] * v;
              }
            }
            acc += double(sp.sign) * phi[a].coef * cplx(sr, si);
          }
        }
        res.value.faces[J](pnt, c) += inv_fact * acc;
      }
    }
  }
  res.integrand_norm = integrand_norms(phi, A, p, h);
  finish_remainder(res, p, s_bound, h);
  return res;
}

LaplaceResult resolvent_laplace_serial(const LinearDelayModel& model, const WedgeSum& phi, cplx p, double T,
                                       double s_bound, std::optional<double> dt) {
  check_wedge_sum(phi);
  check_route(p, s_bound);
  const Grid g = phi[0].factors[0].grid;
  const double h = g.h();
  Advanced A = advance(model, phi, T, dt);
  const int K = A.K;
  auto w = trap_weights(K, h);
  LaplaceResult res;
  res.T = K * h;
  res.value = CompoundGridFunction(static_cast<int>(phi[0].factors.size()), phi[0].factors[0].n, g);
  for (int k = 0; k <= K; ++k) {
    cplx e = w[k] * std::exp(-p * (k * h));
    for (size_t a = 0; a < phi.size(); ++a) {
      std::vector<HistoryElement> snaps;
      for (const auto& tr : A.traj[a]) snaps.push_back(tr.snapshot(k));
      res.value += (e * phi[a].coef) * wedge(snaps);
    }
  }
  res.value.is_complex = true;
  res.value.antisymmetric = true;
  res.integrand_norm = integrand_norms(phi, A, p, h);
  finish_remainder(res, p, s_bound, h);
  return res;
}

DenseResult dense_resolvent_solve(const GeneratorMatrix& gen, const CompoundGridFunction& psi, cplx p) {
  CompoundGridFunction anti = antisymmetrize(psi);
  Eigen::VectorXcd rhs = gen.gather(anti);
  Eigen::SparseMatrix<cplx> M = gen.A.cast<cplx>();
  for (long i = 0; i < gen.size; ++i) M.coeffRef(i, i) -= p;
  M.makeCompressed();
  Eigen::SparseLU<Eigen::SparseMatrix<cplx>, Eigen::COLAMDOrdering<int>> lu;
  lu.analyzePattern(M);
  lu.factorize(M);
  if (lu.info() != Eigen::Success) throw ConditioningError("dense resolvent: factorization failed (p on the spectrum)", 0.0);
  Eigen::VectorXcd x = lu.solve(rhs);
  if (lu.info() != Eigen::Success || !x.allFinite())
    throw ConditioningError("dense resolvent: solve failed", 0.0);
  DenseResult r;
  double rn = rhs.norm();
  r.residual = rn > 0 ? (M * x - rhs).norm() / rn : (M * x).norm();
  r.value = gen.scatter(x);
  r.value.antisymmetric = true;
  double pn = compound_norm(anti);
  r.gain = pn > 0 ? compound_norm(r.value) / pn : 0.0;
  if (r.gain > 1e10) throw ConditioningError("dense resolvent: p too close to the discrete spectrum", 1.0 / r.gain);
  r.antisym_violation = check_antisymmetry(r.value).max();
  return r;
}

DenseResult dense_resolvent_solve(const LinearDelayModel& model, const CompoundGridFunction& psi, cplx p) {
  return dense_resolvent_solve(assemble_generator(model.alpha, psi.grid, psi.m), psi, p);
}

TransferCache::TransferCache(const LinearDelayModel& model, const ControlBasis& control,
                             const MeasurementBasis& measurement, double T, double s_bound, std::optional<double> dt) {
  require_scalar(model);
  if (control.m != measurement.m) throw ShapeError("control and measurement bases differ in order");
  if (control.family.grid != measurement.family.grid) throw ShapeError("bases live on different grids");
  if (!std::isfinite(s_bound)) throw ConfigError("growth bound for the Laplace route must be finite");
  const Grid g = control.family.grid;
  const int m = control.m, N = g.N;
  h_ = g.h();
  K_ = snap_steps(g, T);
  T_ = K_ * h_;
  s_ = s_bound;
  nm_ = measurement.size();
  nu_ = control.size();

  // trajectory index Lc is psi_inf
  const int Lc = control.family.size(), LM = measurement.family.size();
  std::vector<Trajectory> traj;
  for (int a = 0; a <= Lc; ++a) {
    HistoryElement e(1, g);
    if (a < Lc)
      e.body.row(0) = control.family.e.row(a);
    else
      e.head(0) = control.b;
    traj.push_back(solve_linear(model, e, T_, dt.value_or(h_), false));
  }
  ResolvedKernel rk = resolve(model.c_kernel, g);
  auto w = g.weights();
  Eigen::MatrixXd WE(N + 1, LM);
  for (int i = 0; i <= N; ++i)
    for (int a = 0; a < LM; ++a) WE(i, a) = w[i] * measurement.family.e(a, i);

  std::vector<Eigen::VectorXd> C(Lc + 1, Eigen::VectorXd(K_ + 1));
  std::vector<Eigen::MatrixXd> Gm(Lc + 1);  // (K+1) x LM
  for (int r = 0; r <= Lc; ++r) {
    Eigen::MatrixXd S(K_ + 1, N + 1);
    for (int k = 0; k <= K_; ++k) {
      HistoryElement sn = traj[r].snapshot(k);
      S.row(k) = sn.body.row(0);
      C[r](k) = stieltjes_apply(rk, sn)(0);
    }
    Gm[r] = S * WE;
  }

  Q_.resize(static_cast<long>(nm_) * nu_, K_ + 1);
  Eigen::MatrixXd D(m - 1, m - 1);
  for (int i = 0; i < nu_; ++i) {
    std::vector<int> Y = control.sets[i];
    Y.push_back(Lc);
    for (int ip = 0; ip < nm_; ++ip) {
      const auto& Kp = measurement.sets[ip];
      long row = ip + static_cast<long>(nm_) * i;
      for (int k = 0; k <= K_; ++k) {
        double q = 0.0;
        for (int r = 0; r < m; ++r) {
          int rr = 0;
          for (int r2 = 0; r2 < m; ++r2) {
            if (r2 == r) continue;
            for (int a = 0; a < m - 1; ++a) D(rr, a) = Gm[Y[r2]](k, Kp[a]);
            ++rr;
          }
          double sign = ((m + r + 1) % 2 == 0) ? 1.0 : -1.0;
          q += sign * C[Y[r]](k) * det_small(D);
        }
        Q_(row, k) = q;
      }
    }
  }
  qnorm_.resize(K_ + 1);
  for (int k = 0; k <= K_; ++k) qnorm_(k) = Q_.col(k).norm();
}

TransferMatrix TransferCache::evaluate(cplx p) const {
  check_route(p, s_);
  auto w = trap_weights(K_, h_);
  Eigen::VectorXd er(K_ + 1), ei(K_ + 1);
  for (int k = 0; k <= K_; ++k) {
    cplx e = w[k] * std::exp(-p * (k * h_));
    er(k) = e.real();
    ei(k) = e.imag();
  }
  Eigen::VectorXd vr = -(Q_ * er), vi = -(Q_ * ei);
  TransferMatrix tm;
  tm.p = p;
  tm.T = T_;
  tm.W.resize(nm_, nu_);
  for (int i = 0; i < nu_; ++i)
    for (int ip = 0; ip < nm_; ++ip) {
      long row = ip + static_cast<long>(nm_) * i;
      tm.W(ip, i) = cplx(vr(row), vi(row));
    }
  double kappa = 0.5 * (p.real() - s_);
  double M = 0.0;
  for (int k = K_ / 2; k <= K_; ++k) M = std::max(M, qnorm_(k) * std::exp((kappa - p.real()) * k * h_));
  tm.remainder = M == 0.0 ? 0.0 : M * std::exp(-kappa * T_) / kappa;
  return tm;
}

TransferMatrix transfer_matrix(const TransferCache& cache, cplx p) { return cache.evaluate(p); }

TransferMatrix transfer_matrix(const LinearDelayModel& model, cplx p, const ControlBasis& control,
                               const MeasurementBasis& measurement, double T, double s_bound) {
  return TransferCache(model, control, measurement, T, s_bound).evaluate(p);
}

TransferMatrix transfer_matrix_full(const LinearDelayModel& model, cplx p, const ControlBasis& control,
                                    const MeasurementBasis& measurement, double T, double s_bound) {
  TransferMatrix tm;
  tm.p = p;
  tm.W.resize(measurement.size(), control.size());
  for (int i = 0; i < control.size(); ++i) {
    WedgeTerm t = control_factors(control, i);
    t.coef = -t.coef;
    LaplaceResult L = resolvent_laplace(model, {t}, p, T, s_bound);
    tm.W.col(i) = measurement_project(L.value, model.c_kernel, measurement);
    tm.T = L.T;
    tm.remainder = std::max(tm.remainder, L.remainder * total_variation(model.c_kernel));
  }
  return tm;
}

}  // namespace dcomp
