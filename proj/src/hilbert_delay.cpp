#include "dcomp/hilbert_delay.hpp"

#include <spdlog/spdlog.h>

#include <cmath>
#include <map>

#include "dcomp/errors.hpp"

namespace dcomp {

std::vector<double> Grid::weights() const {
  std::vector<double> w(N + 1, h());
  w.front() *= 0.5;
  w.back() *= 0.5;
  return w;
}

HistoryElement::HistoryElement(int n_, Grid g)
    : n(n_), grid(g), head(Eigen::VectorXd::Zero(n_)), body(Eigen::MatrixXd::Zero(n_, g.N + 1)) {}

HistoryElement HistoryElement::unit_head(int n, Grid g, int component) {
  HistoryElement e(n, g);
  e.head(component) = 1.0;
  return e;
}

static void check_same(const HistoryElement& a, const HistoryElement& b) {
  if (a.n != b.n || a.grid != b.grid) throw ShapeError("history elements live on different grids");
}

HistoryElement& HistoryElement::operator+=(const HistoryElement& o) {
  check_same(*this, o);
  head += o.head;
  body += o.body;
  return *this;
}

HistoryElement& HistoryElement::operator*=(double s) {
  head *= s;
  body *= s;
  return *this;
}

bool HistoryElement::all_finite() const { return head.allFinite() && body.allFinite(); }

double inner_product(const HistoryElement& phi, const HistoryElement& psi) {
  check_same(phi, psi);
  auto w = phi.grid.weights();
  double s = phi.head.dot(psi.head);
  for (int i = 0; i <= phi.grid.N; ++i) s += w[i] * phi.body.col(i).dot(psi.body.col(i));
  return s;
}

double norm(const HistoryElement& phi) { return std::sqrt(inner_product(phi, phi)); }

HistoryElement embed_continuous(const std::function<Eigen::VectorXd(double)>& f, int n, Grid g) {
  HistoryElement e(n, g);
  for (int i = 0; i <= g.N; ++i) {
    Eigen::VectorXd v = f(g.node(i));
    if (v.size() != n) throw ShapeError("sample has wrong dimension");
    e.body.col(i) = v;
  }
  e.head = f(0.0);
  if (!e.all_finite()) throw InputError("non-finite sample in embed_continuous");
  return e;
}

HistoryElement embed_continuous(const std::function<double(double)>& f, Grid g) {
  return embed_continuous([&](double t) { return Eigen::VectorXd::Constant(1, f(t)); }, 1, g);
}

StieltjesKernel StieltjesKernel::zero(int out_dim, int in_dim) {
  StieltjesKernel k;
  k.out_dim = out_dim;
  k.in_dim = in_dim;
  return k;
}

StieltjesKernel StieltjesKernel::atom(double theta, const Eigen::MatrixXd& m) {
  StieltjesKernel k = zero(m.rows(), m.cols());
  k.atoms.push_back({theta, m});
  return k;
}

StieltjesKernel StieltjesKernel::scalar_atom(double theta, double v) {
  return atom(theta, Eigen::MatrixXd::Constant(1, 1, v));
}

StieltjesKernel StieltjesKernel::scalar_density(double from, double to, double v) {
  StieltjesKernel k = zero(1, 1);
  k.density.push_back({from, to, Eigen::MatrixXd::Constant(1, 1, v)});
  return k;
}

Eigen::MatrixXd StieltjesKernel::density_at(double theta, double tau) const {
  const double eps = 1e-12 * tau;
  Eigen::MatrixXd left = Eigen::MatrixXd::Zero(out_dim, in_dim);
  Eigen::MatrixXd right = left;
  for (const auto& p : density) {
    // left limit: theta in (from, to]; right limit: theta in [from, to)
    if (theta > p.from + eps && theta <= p.to + eps) left += p.mat;
    if (theta >= p.from - eps && theta < p.to - eps) right += p.mat;
  }
  if (theta <= -tau + eps) return right;
  if (theta >= -eps) return left;
  return 0.5 * (left + right);
}

StieltjesKernel& StieltjesKernel::operator+=(const StieltjesKernel& o) {
  if (is_zero() && atoms.empty()) {
    out_dim = o.out_dim;
    in_dim = o.in_dim;
  }
  if (o.out_dim != out_dim || o.in_dim != in_dim) throw ShapeError("kernel dimensions differ");
  atoms.insert(atoms.end(), o.atoms.begin(), o.atoms.end());
  density.insert(density.end(), o.density.begin(), o.density.end());
  return *this;
}

StieltjesKernel left_multiply(const Eigen::MatrixXd& m, const StieltjesKernel& k) {
  if (m.cols() != k.out_dim) throw ShapeError("left_multiply: inner dimensions differ");
  StieltjesKernel r = StieltjesKernel::zero(m.rows(), k.in_dim);
  for (const auto& a : k.atoms) r.atoms.push_back({a.theta, m * a.mat});
  for (const auto& p : k.density) r.density.push_back({p.from, p.to, m * p.mat});
  return r;
}

ResolvedKernel resolve(const StieltjesKernel& k, const Grid& g) {
  ResolvedKernel r;
  r.out_dim = k.out_dim;
  r.in_dim = k.in_dim;
  r.grid = g;
  const double h = g.h();
  std::map<int, Eigen::MatrixXd> merged;
  for (const auto& a : k.atoms) {
    if (a.theta < -g.tau - 0.5 * h || a.theta > 0.5 * h)
      throw ConfigError("atom at theta=" + std::to_string(a.theta) + " lies outside [-tau, 0]");
    int idx = static_cast<int>(std::lround((a.theta + g.tau) / h));
    idx = std::clamp(idx, 0, g.N);
    double dist = std::abs(a.theta - g.node(idx));
    if (dist > 1e-9 * h)
      spdlog::warn("atom at theta={} snapped to grid node {} (distance {:.3g}, h={:.3g})", a.theta,
                   g.node(idx), dist, h);
    auto it = merged.find(idx);
    if (it == merged.end())
      merged.emplace(idx, a.mat);
    else
      it->second += a.mat;
  }
  for (auto& [idx, m] : merged) r.atoms.emplace_back(idx, m);
  if (!k.density.empty()) {
    auto w = g.weights();
    r.wdens.resize(g.N + 1);
    for (int i = 0; i <= g.N; ++i) r.wdens[i] = w[i] * k.density_at(g.node(i), g.tau);
  }
  return r;
}

Eigen::VectorXd stieltjes_apply(const ResolvedKernel& k, const HistoryElement& phi) {
  if (phi.n != k.in_dim) throw ShapeError("stieltjes_apply: kernel input dimension differs from n");
  if (phi.grid != k.grid) throw ShapeError("stieltjes_apply: kernel resolved on another grid");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(k.out_dim);
  const int N = phi.grid.N;
  for (const auto& [idx, m] : k.atoms) out += m * (idx == N ? phi.head : Eigen::VectorXd(phi.body.col(idx)));
  if (k.has_density())
    for (int i = 0; i <= N; ++i) out += k.wdens[i] * phi.body.col(i);
  return out;
}

Eigen::VectorXd stieltjes_apply(const StieltjesKernel& k, const HistoryElement& phi) {
  return stieltjes_apply(resolve(k, phi.grid), phi);
}

static double spectral_norm(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  if (m.size() == 1) return std::abs(m(0, 0));
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  return svd.singularValues()(0);
}

double total_variation(const StieltjesKernel& k) {
  double tv = 0.0;
  for (const auto& a : k.atoms) tv += spectral_norm(a.mat);
  for (const auto& p : k.density) tv += spectral_norm(p.mat) * std::abs(p.to - p.from);
  return tv;
}

}  // namespace dcomp
