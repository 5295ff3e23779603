#include "dcomp/exterior_space.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dcomp/errors.hpp"

namespace dcomp {

namespace {

struct SignedPerm {
  std::vector<int> p;
  int sign;
};

std::vector<SignedPerm> all_perms(int m) {
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

double factorial(int m) {
  double f = 1;
  for (int i = 2; i <= m; ++i) f *= i;
  return f;
}

int ipow(int b, int e) {
  int r = 1;
  while (e-- > 0) r *= b;
  return r;
}

// coords[slot] for the slots of J from a point index with base B
void decode_point(size_t p, const std::vector<int>& slots, int B, int* coords) {
  for (int a = static_cast<int>(slots.size()) - 1; a >= 0; --a) {
    coords[slots[a]] = static_cast<int>(p % B);
    p /= B;
  }
}

void decode_comp(int c, int m, int n, int* cs) {
  for (int l = m - 1; l >= 0; --l) {
    cs[l] = c % n;
    c /= n;
  }
}

int encode_comp(const int* cs, int m, int n) {
  int c = 0;
  for (int l = 0; l < m; ++l) c = c * n + cs[l];
  return c;
}

void check_factors(const std::vector<HistoryElement>& f) {
  if (f.empty()) throw ShapeError("need at least one factor");
  for (const auto& e : f)
    if (e.n != f[0].n || e.grid != f[0].grid) throw ShapeError("factors live on different grids");
}

CompoundGridFunction product(const std::vector<HistoryElement>& f, bool anti) {
  check_factors(f);
  const int m = static_cast<int>(f.size()), n = f[0].n, N = f[0].grid.N;
  CompoundGridFunction out(m, n, f[0].grid);
  out.antisymmetric = anti;
  auto perms = anti ? all_perms(m) : std::vector<SignedPerm>{};
  if (!anti) {
    std::vector<int> id(m);
    std::iota(id.begin(), id.end(), 0);
    perms.push_back({id, 1});
  }
  const double scale = anti ? 1.0 / factorial(m) : 1.0;
  const int nc = out.ncomp();
  std::vector<int> coords(m), cs(m);
  std::vector<const double*> val(m * m);  // val[a*m + l]: factor a in slot l
  for (FaceIndex J = 0; J < (1u << m); ++J) {
    auto slots = face_slots(J, m);
    FaceGrid& F = out.faces[J];
    for (size_t p = 0; p < F.points(); ++p) {
      decode_point(p, slots, N + 1, coords.data());
      for (int a = 0; a < m; ++a)
        for (int l = 0; l < m; ++l)
          val[a * m + l] = (J >> l & 1u) ? f[a].body.col(coords[l]).data() : f[a].head.data();
      for (int c = 0; c < nc; ++c) {
        decode_comp(c, m, n, cs.data());
        double sum = 0.0;
        for (const auto& sp : perms) {
          double prod = sp.sign;
          for (int l = 0; l < m; ++l) prod *= val[sp.p[l] * m + l][cs[l]];
          sum += prod;
        }
        F(p, c) = scale * sum;
      }
    }
  }
  return out;
}

std::vector<double> axis_weights(const Grid& g) { return g.weights(); }

}  // namespace

std::vector<int> face_slots(FaceIndex J, int m) {
  std::vector<int> s;
  for (int l = 0; l < m; ++l)
    if (J >> l & 1u) s.push_back(l);
  return s;
}

size_t point_index(const int* coords, int k, int N) {
  size_t p = 0;
  for (int a = 0; a < k; ++a) p = p * (N + 1) + coords[a];
  return p;
}

FaceGrid::FaceGrid(int k_, int N_, int ncomp_) : k(k_), N(N_), ncomp(ncomp_) {
  size_t pts = 1;
  for (int a = 0; a < k; ++a) pts *= (N + 1);
  data.assign(pts * ncomp, cplx(0.0));
}

CompoundGridFunction::CompoundGridFunction(int m_, int n_, Grid g) : m(m_), n(n_), grid(g) {
  if (m < 1 || m > 6) throw ShapeError("compound order out of range");
  faces.reserve(1u << m);
  for (FaceIndex J = 0; J < (1u << m); ++J) faces.emplace_back(face_size(J), g.N, ncomp());
}

int CompoundGridFunction::ncomp() const { return ipow(n, m); }

CompoundGridFunction& CompoundGridFunction::operator+=(const CompoundGridFunction& o) {
  if (o.m != m || o.n != n || o.grid != grid) throw ShapeError("compound functions differ in shape");
  for (size_t J = 0; J < faces.size(); ++J) {
    auto& a = faces[J].data;
    const auto& b = o.faces[J].data;
    for (size_t i = 0; i < a.size(); ++i) a[i] += b[i];
  }
  antisymmetric = antisymmetric && o.antisymmetric;
  is_complex = is_complex || o.is_complex;
  return *this;
}

CompoundGridFunction& CompoundGridFunction::operator*=(cplx s) {
  for (auto& F : faces)
    for (auto& v : F.data) v *= s;
  if (s.imag() != 0.0) is_complex = true;
  return *this;
}

double CompoundGridFunction::max_abs() const {
  double mx = 0.0;
  for (const auto& F : faces)
    for (const auto& v : F.data) mx = std::max(mx, std::abs(v));
  return mx;
}

CompoundGridFunction wedge(const std::vector<HistoryElement>& factors) { return product(factors, true); }

CompoundGridFunction tensor(const std::vector<HistoryElement>& factors) { return product(factors, false); }

cplx compound_inner(const CompoundGridFunction& a, const CompoundGridFunction& b) {
  if (a.m != b.m || a.n != b.n || a.grid != b.grid) throw ShapeError("compound functions differ in shape");
  const int m = a.m, N = a.grid.N, nc = a.ncomp();
  auto w = axis_weights(a.grid);
  std::vector<int> coords(m);
  cplx total = 0.0;
  for (FaceIndex J = 0; J < (1u << m); ++J) {
    auto slots = face_slots(J, m);
    const auto& A = a.faces[J];
    const auto& B = b.faces[J];
    cplx s = 0.0;
    for (size_t p = 0; p < A.points(); ++p) {
      decode_point(p, slots, N + 1, coords.data());
      double wt = 1.0;
      for (int l : slots) wt *= w[coords[l]];
      cplx acc = 0.0;
      for (int c = 0; c < nc; ++c) acc += std::conj(A(p, c)) * B(p, c);
      s += wt * acc;
    }
    total += s;
  }
  return total;
}

double compound_norm(const CompoundGridFunction& a) { return std::sqrt(std::max(0.0, compound_inner(a, a).real())); }

CompoundGridFunction permute_slots(const CompoundGridFunction& phi, const std::vector<int>& pi) {
  const int m = phi.m, n = phi.n, N = phi.grid.N, nc = phi.ncomp();
  if (static_cast<int>(pi.size()) != m) throw ShapeError("permutation has wrong length");
  CompoundGridFunction out(m, n, phi.grid);
  out.is_complex = phi.is_complex;
  std::vector<int> x(m), src(m), cs(m), csrc(m);
  for (FaceIndex Jo = 0; Jo < (1u << m); ++Jo) {
    auto slots = face_slots(Jo, m);
    FaceIndex Js = 0;
    for (int l = 0; l < m; ++l)
      if (Jo >> pi[l] & 1u) Js |= 1u << l;
    auto sslots = face_slots(Js, m);
    auto& O = out.faces[Jo];
    const auto& S = phi.faces[Js];
    for (size_t p = 0; p < O.points(); ++p) {
      decode_point(p, slots, N + 1, x.data());
      for (int l : sslots) src[l] = x[pi[l]];
      std::vector<int> sc;
      sc.reserve(sslots.size());
      for (int l : sslots) sc.push_back(src[l]);
      size_t sp = point_index(sc.data(), static_cast<int>(sc.size()), N);
      for (int c = 0; c < nc; ++c) {
        decode_comp(c, m, n, cs.data());
        for (int l = 0; l < m; ++l) csrc[l] = cs[pi[l]];
        O(p, c) = S(sp, encode_comp(csrc.data(), m, n));
      }
    }
  }
  return out;
}

AntisymmetryReport check_antisymmetry(const CompoundGridFunction& phi, double tol) {
  AntisymmetryReport r;
  const int m = phi.m;
  const double scale = std::max(1.0, phi.max_abs());
  for (const auto& sp : all_perms(m)) {
    if (sp.sign == 1 && std::is_sorted(sp.p.begin(), sp.p.end())) continue;
    auto P = permute_slots(phi, sp.p);
    for (FaceIndex J = 0; J < (1u << m); ++J) {
      double mx = 0.0;
      const auto& a = P.faces[J].data;
      const auto& b = phi.faces[J].data;
      for (size_t i = 0; i < a.size(); ++i) mx = std::max(mx, std::abs(a[i] - double(sp.sign) * b[i]));
      mx /= scale;
      int k = face_size(J);
      if (k == m)
        r.top_face = std::max(r.top_face, mx);
      else if (k == m - 1)
        r.face_sign = std::max(r.face_sign, mx);
      else
        r.improper = std::max(r.improper, mx);
    }
  }
  if (phi.n == 1) {
    for (FaceIndex J = 0; J < (1u << m); ++J) {
      if (face_size(J) > m - 2) continue;
      double mx = 0.0;
      for (const auto& v : phi.faces[J].data) mx = std::max(mx, std::abs(v));
      r.improper = std::max(r.improper, mx / scale);
    }
  }
  if (r.top_face > tol) r.flags.push_back("top face not antisymmetric");
  if (r.face_sign > tol) r.flags.push_back("face sign relation violated");
  if (r.improper > tol) r.flags.push_back(phi.n == 1 ? "improper face nonzero" : "lower face relation violated");
  return r;
}

CompoundGridFunction antisymmetrize(const CompoundGridFunction& phi) {
  CompoundGridFunction out(phi.m, phi.n, phi.grid);
  for (const auto& sp : all_perms(phi.m)) {
    auto P = permute_slots(phi, sp.p);
    P *= double(sp.sign);
    out += P;
  }
  out *= 1.0 / factorial(phi.m);
  out.antisymmetric = true;
  out.is_complex = phi.is_complex;
  return out;
}

FaceGrid diagonal_shift(const FaceGrid& a, int d) {
  if (d < 0) throw DomainError("negative shift");
  if (a.k == 0 || d == 0) return a;
  FaceGrid out(a.k, a.N, a.ncomp);
  if (d > a.N) return out;
  const int N = a.N, k = a.k;
  std::vector<int> x(k);
  for (size_t p = 0; p < out.points(); ++p) {
    size_t q = p;
    bool inside = true;
    for (int i = k - 1; i >= 0; --i) {
      x[i] = static_cast<int>(q % (N + 1)) + d;
      q /= (N + 1);
      if (x[i] > N) inside = false;
    }
    if (!inside) continue;
    size_t sp = point_index(x.data(), k, N);
    for (int c = 0; c < a.ncomp; ++c) out(p, c) = a(sp, c);
  }
  return out;
}

FaceGrid diagonal_shift(const FaceGrid& a, double t, double h) {
  if (t < 0) throw DomainError("negative shift time");
  return diagonal_shift(a, static_cast<int>(std::lround(t / h)));
}

CompoundGridFunction compound_semigroup_apply(const LinearDelayModel& model, const std::vector<HistoryElement>& phis,
                                              double t) {
  std::vector<HistoryElement> moved;
  moved.reserve(phis.size());
  for (const auto& p : phis) moved.push_back(semigroup_apply(model, p, t));
  return wedge(moved);
}

int GeneratorMatrix::ncomp() const { return ipow(n, m); }

long GeneratorMatrix::index(FaceIndex J, const int* coords, int comp) const {
  const int N = grid.N;
  long p = 0;
  FaceIndex Jr = 0;
  for (int l = 0; l < m; ++l) {
    if (!(J >> l & 1u) || coords[l] >= N) continue;
    Jr |= 1u << l;
    p = p * N + coords[l];
  }
  return offset[Jr] + p * ncomp() + comp;
}

Eigen::VectorXcd GeneratorMatrix::gather(const CompoundGridFunction& phi) const {
  if (phi.m != m || phi.n != n || phi.grid != grid) throw ShapeError("generator and function differ in shape");
  Eigen::VectorXcd v(size);
  const int N = grid.N, nc = ncomp();
  std::vector<int> x(m);
  for (FaceIndex J = 0; J < (1u << m); ++J) {
    auto slots = face_slots(J, m);
    const auto& F = phi.faces[J];
    for (size_t p = 0; p < F.points(); ++p) {
      decode_point(p, slots, N + 1, x.data());
      bool interior = true;
      for (int l : slots) interior = interior && x[l] < N;
      if (!interior) continue;
      for (int c = 0; c < nc; ++c) v(index(J, x.data(), c)) = F(p, c);
    }
  }
  return v;
}

CompoundGridFunction GeneratorMatrix::scatter(const Eigen::VectorXcd& v) const {
  CompoundGridFunction out(m, n, grid);
  const int N = grid.N, nc = ncomp();
  std::vector<int> x(m);
  for (FaceIndex J = 0; J < (1u << m); ++J) {
    auto slots = face_slots(J, m);
    auto& F = out.faces[J];
    for (size_t p = 0; p < F.points(); ++p) {
      decode_point(p, slots, N + 1, x.data());
      for (int c = 0; c < nc; ++c) F(p, c) = v(index(J, x.data(), c));
    }
  }
  out.is_complex = true;
  return out;
}

GeneratorMatrix assemble_generator(const StieltjesKernel& alpha, const Grid& g, int m) {
  if (alpha.out_dim != alpha.in_dim) throw ShapeError("generator needs a square kernel");
  GeneratorMatrix G;
  G.m = m;
  G.n = alpha.out_dim;
  G.grid = g;
  const int N = g.N, n = G.n, nc = G.ncomp();
  const double h = g.h();
  G.offset.resize(1u << m);
  long off = 0;
  for (FaceIndex J = 0; J < (1u << m); ++J) {
    G.offset[J] = off;
    off += static_cast<long>(std::pow(N, face_size(J))) * nc;
  }
  G.size = off;
  ResolvedKernel rk = resolve(alpha, g);
  // couplings as (node, matrix) with node N meaning the theta = 0 read
  std::vector<std::pair<int, Eigen::MatrixXd>> taps = rk.atoms;
  if (rk.has_density())
    for (int i = 0; i <= N; ++i)
      if (!rk.wdens[i].isZero(0.0)) taps.emplace_back(i, rk.wdens[i]);

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<size_t>(G.size) * (2 + taps.size() * m));
  std::vector<int> x(m), x2(m), cs(m);
  for (FaceIndex J = 0; J < (1u << m); ++J) {
    auto slots = face_slots(J, m);
    const int k = static_cast<int>(slots.size());
    size_t pts = static_cast<size_t>(std::pow(N, k));
    for (size_t p = 0; p < pts; ++p) {
      decode_point(p, slots, N, x.data());
      for (int c = 0; c < nc; ++c) {
        long row = G.index(J, x.data(), c);
        if (k > 0) {
          x2 = x;
          for (int l : slots) ++x2[l];
          trip.emplace_back(row, G.index(J, x2.data(), c), 1.0 / h);
          trip.emplace_back(row, row, -1.0 / h);
        }
        decode_comp(c, m, n, cs.data());
        for (int j = 0; j < m; ++j) {
          if (J >> j & 1u) continue;
          for (const auto& [node, M] : taps) {
            x2 = x;
            FaceIndex Js = J;
            if (node < N) {
              Js |= 1u << j;
              x2[j] = node;
            }
            int keep = cs[j];
            for (int cp = 0; cp < n; ++cp) {
              double v = M(keep, cp);
              if (v == 0.0) continue;
              cs[j] = cp;
              trip.emplace_back(row, G.index(Js, x2.data(), encode_comp(cs.data(), m, n)), v);
            }
            cs[j] = keep;
          }
        }
      }
    }
  }
  G.A.resize(G.size, G.size);
  G.A.setFromTriplets(trip.begin(), trip.end());
  G.A.makeCompressed();
  return G;
}

double trace_mismatch(const CompoundGridFunction& phi) {
  const int m = phi.m, N = phi.grid.N, nc = phi.ncomp();
  double scale = phi.max_abs();
  if (scale == 0.0) return 0.0;
  double mx = 0.0;
  std::vector<int> x(m), low;
  for (FaceIndex J = 0; J < (1u << m); ++J) {
    auto slots = face_slots(J, m);
    const auto& F = phi.faces[J];
    for (size_t p = 0; p < F.points(); ++p) {
      decode_point(p, slots, N + 1, x.data());
      FaceIndex Jr = 0;
      low.clear();
      for (int l : slots)
        if (x[l] < N) {
          Jr |= 1u << l;
          low.push_back(x[l]);
        }
      if (Jr == J) continue;
      size_t q = point_index(low.data(), static_cast<int>(low.size()), N);
      for (int c = 0; c < nc; ++c) mx = std::max(mx, std::abs(F(p, c) - phi.faces[Jr](q, c)));
    }
  }
  return mx / scale;
}

CompoundGridFunction compound_generator_apply(const GeneratorMatrix& gen, const CompoundGridFunction& phi,
                                              double trace_tol) {
  double mis = trace_mismatch(phi);
  if (mis > trace_tol)
    throw DomainError("trace incompatibility: theta=0 rows differ from lower faces by " + std::to_string(mis));
  Eigen::VectorXcd v = gen.gather(phi);
  Eigen::VectorXcd w = gen.A * v;
  auto out = gen.scatter(w);
  out.antisymmetric = phi.antisymmetric;
  out.is_complex = phi.is_complex;
  return out;
}

CompoundGridFunction compound_generator_apply(const LinearDelayModel& model, const CompoundGridFunction& phi,
                                              double trace_tol) {
  return compound_generator_apply(assemble_generator(model.alpha, phi.grid, phi.m), phi, trace_tol);
}

}  // namespace dcomp
