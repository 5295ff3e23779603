#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "dcomp/dde_semigroup.hpp"
#include "dcomp/errors.hpp"

namespace dcomp {

namespace {

constexpr double kPi = std::numbers::pi;

// int_a^b theta^p e^{lambda theta} d theta for p = 0, 1
cplx exp_moment(int p, cplx lambda, double a, double b) {
  double L = std::max(std::abs(a), std::abs(b));
  if (std::abs(lambda) * L < 1e-2) {
    cplx sum = 0.0, lk = 1.0;
    double fact = 1.0;
    for (int k = 0; k < 12; ++k) {
      if (k > 0) {
        lk *= lambda;
        fact *= k;
      }
      sum += lk / fact * (std::pow(b, k + p + 1) - std::pow(a, k + p + 1)) / double(k + p + 1);
    }
    return sum;
  }
  auto ea = std::exp(lambda * a), eb = std::exp(lambda * b);
  if (p == 0) return (eb - ea) / lambda;
  return eb * (b / lambda - 1.0 / (lambda * lambda)) - ea * (a / lambda - 1.0 / (lambda * lambda));
}

double opnorm(const Eigen::MatrixXd& m) {
  if (m.size() == 1) return std::abs(m(0, 0));
  return Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues()(0);
}

Eigen::MatrixXcd delta_prime(const StieltjesKernel& alpha, cplx lambda) {
  const int n = alpha.out_dim;
  Eigen::MatrixXcd d = Eigen::MatrixXcd::Identity(n, n);
  for (const auto& a : alpha.atoms) d -= (a.theta * std::exp(lambda * a.theta)) * a.mat.cast<cplx>();
  for (const auto& p : alpha.density) d -= exp_moment(1, lambda, p.from, p.to) * p.mat.cast<cplx>();
  return d;
}

double det_scale(const StieltjesKernel& alpha, cplx lambda) {
  double s = std::abs(lambda);
  for (const auto& a : alpha.atoms) s += opnorm(a.mat) * std::exp(lambda.real() * a.theta);
  for (const auto& p : alpha.density) s += opnorm(p.mat) * std::abs(exp_moment(0, lambda.real(), p.from, p.to));
  return std::pow(std::max(1.0, s), alpha.out_dim);
}

cplx det_delta(const StieltjesKernel& alpha, cplx lambda) {
  auto d = characteristic_matrix(alpha, lambda);
  return d.rows() == 1 ? d(0, 0) : d.determinant();
}

double rel_det(const StieltjesKernel& alpha, cplx lambda) {
  return std::abs(det_delta(alpha, lambda)) / det_scale(alpha, lambda);
}

// accumulated arg change of det Delta along the segment [z0, z1]
double edge_arg(const StieltjesKernel& alpha, cplx z0, cplx z1, int samples) {
  struct S {
    cplx z, d;
  };
  auto eval = [&](cplx z) {
    cplx d = det_delta(alpha, z);
    if (std::abs(d) < 1e-9 * det_scale(alpha, z)) throw RegionError("rectangle boundary passes too close to a root");
    return S{z, d};
  };
  double total = 0.0;
  std::function<void(const S&, const S&, int)> walk = [&](const S& a, const S& b, int depth) {
    double da = std::arg(b.d / a.d);
    if (std::abs(da) < kPi / 3) {
      total += da;
      return;
    }
    if (depth > 40) throw RegionError("argument increment not resolved on the rectangle boundary");
    S mid = eval(0.5 * (a.z + b.z));
    walk(a, mid, depth + 1);
    walk(mid, b, depth + 1);
  };
  S prev = eval(z0);
  for (int i = 1; i <= samples; ++i) {
    S cur = eval(z0 + (z1 - z0) * (double(i) / samples));
    walk(prev, cur, 0);
    prev = cur;
  }
  return total;
}

struct Finder {
  const StieltjesKernel& alpha;
  int samples;
  std::vector<Root> out;

  int count(const Rect& r) const { return winding_number(alpha, r, samples); }

  bool try_newton(const Rect& r, int mult) {
    cplx c(0.5 * (r.re_min + r.re_max), 0.5 * (r.im_min + r.im_max));
    cplx z;
    try {
      z = newton_root(alpha, c, mult);
    } catch (const DomainError&) {
      return false;
    }
    double slack = 1e-9 * (1 + std::abs(z));
    if (z.real() < r.re_min - slack || z.real() > r.re_max + slack || z.imag() < r.im_min - slack ||
        z.imag() > r.im_max + slack)
      return false;
    out.push_back({z, mult, rel_det(alpha, z)});
    return true;
  }

  void isolate(const Rect& r, int cnt, int depth) {
    if (cnt <= 0) return;
    double w = r.re_max - r.re_min, hgt = r.im_max - r.im_min;
    double diam = std::max(w, hgt);
    double cen = std::abs(cplx(0.5 * (r.re_min + r.re_max), 0.5 * (r.im_min + r.im_max)));
    if (cnt == 1 && (diam < 0.5 || depth > 6) && try_newton(r, 1)) return;
    if (diam < 1e-7 * (1 + cen) || depth > 80) {
      if (!try_newton(r, cnt)) throw RegionError("failed to refine a root cluster");
      return;
    }
    static const double fracs[] = {0.5, 0.4731, 0.5269, 0.4412, 0.5588, 0.3917};
    for (double f : fracs) {
      Rect a = r, b = r;
      if (w >= hgt) {
        a.re_max = b.re_min = r.re_min + f * w;
      } else {
        a.im_max = b.im_min = r.im_min + f * hgt;
      }
      int ca, cb;
      try {
        ca = count(a);
        cb = count(b);
      } catch (const RegionError&) {
        continue;
      }
      if (ca + cb != cnt) continue;
      isolate(a, ca, depth + 1);
      isolate(b, cb, depth + 1);
      return;
    }
    throw RegionError("could not split a root-search rectangle");
  }
};

}  // namespace

Eigen::MatrixXcd characteristic_matrix(const StieltjesKernel& alpha, cplx lambda) {
  if (alpha.out_dim != alpha.in_dim) throw ShapeError("characteristic matrix needs a square kernel");
  const int n = alpha.out_dim;
  Eigen::MatrixXcd d = lambda * Eigen::MatrixXcd::Identity(n, n);
  for (const auto& a : alpha.atoms) d -= std::exp(lambda * a.theta) * a.mat.cast<cplx>();
  for (const auto& p : alpha.density) d -= exp_moment(0, lambda, p.from, p.to) * p.mat.cast<cplx>();
  return d;
}

Eigen::MatrixXcd characteristic_matrix(const LinearDelayModel& model, cplx lambda) {
  return characteristic_matrix(model.alpha, lambda);
}

int winding_number(const StieltjesKernel& alpha, const Rect& r, int min_samples) {
  cplx c0(r.re_min, r.im_min), c1(r.re_max, r.im_min), c2(r.re_max, r.im_max), c3(r.re_min, r.im_max);
  double total = edge_arg(alpha, c0, c1, min_samples) + edge_arg(alpha, c1, c2, min_samples) +
                 edge_arg(alpha, c2, c3, min_samples) + edge_arg(alpha, c3, c0, min_samples);
  double w = total / (2 * kPi);
  long k = std::lround(w);
  if (std::abs(w - k) > 0.1) throw RegionError("winding number not close to an integer");
  return static_cast<int>(k);
}

cplx newton_root(const StieltjesKernel& alpha, cplx z, int multiplicity, int max_iter) {
  for (int it = 0; it < max_iter; ++it) {
    auto D = characteristic_matrix(alpha, z);
    auto Dp = delta_prime(alpha, z);
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(D);
    if (std::abs(lu.determinant()) == 0.0) return z;
    cplx tr = lu.solve(Dp).trace();
    if (tr == 0.0 || !std::isfinite(std::abs(tr))) throw DomainError("newton: vanishing log-derivative");
    cplx step = double(multiplicity) / tr;
    z -= step;
    if (!std::isfinite(std::abs(z))) throw DomainError("newton diverged");
    if (std::abs(step) < 1e-15 * (1 + std::abs(z))) return z;
  }
  if (rel_det(alpha, z) > 1e-10) throw DomainError("newton did not converge");
  return z;
}

std::vector<Root> characteristic_roots(const StieltjesKernel& alpha, const Rect& region, int max_roots) {
  if (!(region.re_max > region.re_min && region.im_max > region.im_min)) throw ConfigError("empty search rectangle");
  Rect r = region;
  const double wid = region.re_max - region.re_min, hgt = region.im_max - region.im_min;
  for (int attempt = 0; attempt < 6; ++attempt) {
    try {
      Finder f{alpha, 16, {}};
      int total = f.count(r);
      f.isolate(r, total, 0);
      auto roots = std::move(f.out);
      for (const auto& rt : roots)
        if (rt.residual > 1e-10) throw RegionError("root residual above tolerance");
      std::sort(roots.begin(), roots.end(), [](const Root& a, const Root& b) {
        if (a.value.real() != b.value.real()) return a.value.real() > b.value.real();
        return a.value.imag() > b.value.imag();
      });
      if (static_cast<int>(roots.size()) > max_roots) {
        spdlog::warn("{} roots in window, keeping the {} rightmost", roots.size(), max_roots);
        roots.resize(max_roots);
      }
      return roots;
    } catch (const RegionError& e) {
      double eps = 1e-3 * (attempt + 1) * (attempt % 2 ? -1 : 1);
      r = {region.re_min - eps * wid * 0.731, region.re_max + eps * wid * 0.613, region.im_min - eps * hgt * 0.577,
           region.im_max + eps * hgt * 0.691};
      spdlog::debug("root search retry with perturbed rectangle: {}", e.what());
    }
  }
  throw RegionError("root search failed: boundary keeps hitting roots");
}

std::vector<Root> characteristic_roots(const LinearDelayModel& model, const Rect& region, int max_roots) {
  return characteristic_roots(model.alpha, region, max_roots);
}

CrossingResult stability_crossing(const std::function<StieltjesKernel(double)>& kernel_at, double tau_lo,
                                  double tau_hi, int scan_steps, const Rect& region) {
  auto rightmost = [&](double tau) -> std::optional<cplx> {
    auto roots = characteristic_roots(kernel_at(tau), region);
    if (roots.empty()) return std::nullopt;
    cplx best = roots.front().value;
    for (const auto& r : roots)
      if (std::abs(r.value.real() - best.real()) < 1e-12 && r.value.imag() > best.imag()) best = r.value;
    return best;
  };
  double ta = tau_lo;
  auto ra = rightmost(ta);
  for (int k = 1; k <= scan_steps; ++k) {
    double tb = tau_lo + (tau_hi - tau_lo) * k / scan_steps;
    auto rb = rightmost(tb);
    if (ra && rb && (ra->real() < 0) != (rb->real() < 0)) {
      CrossingResult res;
      res.tau_lo = ta;
      res.tau_hi = tb;
      // Illinois iteration on Re lambda(tau), lambda tracked by Newton
      double fa = ra->real(), fb = rb->real();
      cplx za = *ra, zb = *rb;
      int side = 0;
      double tc = ta;
      cplx zc = za;
      for (int it = 0; it < 200; ++it) {
        tc = (ta * fb - tb * fa) / (fb - fa);
        double u = (tc - ta) / (tb - ta);
        zc = newton_root(kernel_at(tc), za + u * (zb - za));
        double fc = zc.real();
        if (fc == 0.0 || std::abs(tb - ta) < 1e-14 * tb) break;
        if ((fc < 0) == (fa < 0)) {
          ta = tc;
          fa = fc;
          za = zc;
          if (side == -1) fb *= 0.5;
          side = -1;
        } else {
          tb = tc;
          fb = fc;
          zb = zc;
          if (side == 1) fa *= 0.5;
          side = 1;
        }
        if (std::abs(fc) < 1e-15) break;
      }
      res.tau = tc;
      res.root = zc;
      return res;
    }
    ta = tb;
    ra = rb;
  }
  throw DomainError("no stability crossing found in the scanned interval");
}

}  // namespace dcomp
