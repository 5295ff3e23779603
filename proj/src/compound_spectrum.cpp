#include "dcomp/compound_spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "dcomp/errors.hpp"

namespace dcomp {

long binomial(long n, long k) {
  if (k < 0 || k > n) return 0;
  long r = 1;
  for (long i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

long antisym_multiplicity(const std::vector<std::pair<cplx, int>>& dec, double tol) {
  std::vector<std::pair<cplx, int>> distinct;
  std::vector<int> count;
  for (const auto& [lam, dim] : dec) {
    if (dim < 0) throw InputError("negative eigenspace dimension");
    bool found = false;
    for (size_t i = 0; i < distinct.size(); ++i)
      if (std::abs(distinct[i].first - lam) <= tol) {
        ++count[i];
        found = true;
        break;
      }
    if (!found) {
      distinct.emplace_back(lam, dim);
      count.push_back(1);
    }
  }
  long r = 1;
  for (size_t i = 0; i < distinct.size(); ++i) r *= binomial(distinct[i].second, count[i]);
  return r;
}

std::vector<CompoundEigenvalue> compound_spectrum_sums(const std::vector<Root>& roots, int m, const Rect& window,
                                                       double merge_tol) {
  if (m < 1) throw InputError("compound order must be positive");
  const int R = static_cast<int>(roots.size());
  std::vector<CompoundEigenvalue> out;
  std::vector<int> idx(m, 0);
  auto inside = [&](cplx z) {
    return z.real() >= window.re_min && z.real() <= window.re_max && z.imag() >= window.im_min &&
           z.imag() <= window.im_max;
  };
  std::function<void(int, int, cplx)> rec = [&](int pos, int start, cplx partial) {
    if (pos == m) {
      if (!inside(partial)) return;
      CompoundEigenvalue* target = nullptr;
      for (auto& e : out)
        if (std::abs(e.value - partial) <= merge_tol) {
          target = &e;
          break;
        }
      if (!target) {
        out.push_back({partial, {}, 0, 0});
        target = &out.back();
      }
      target->decompositions.push_back(idx);
      return;
    }
    for (int r = start; r < R; ++r) {
      idx[pos] = r;
      rec(pos + 1, r, partial + roots[r].value);
    }
  };
  if (R > 0) rec(0, 0, 0.0);

  for (auto& e : out) {
    for (const auto& d : e.decompositions) {
      // ordered tuples realising this multiset times the product of multiplicities
      std::vector<int> cnt;
      long tmult = 1;
      std::vector<std::pair<cplx, int>> dec;
      for (size_t a = 0; a < d.size();) {
        size_t b = a;
        while (b < d.size() && d[b] == d[a]) ++b;
        cnt.push_back(static_cast<int>(b - a));
        for (size_t c = a; c < b; ++c) {
          tmult *= roots[d[a]].multiplicity;
          dec.emplace_back(roots[d[a]].value, roots[d[a]].multiplicity);
        }
        a = b;
      }
      long arr = 1;
      int used = 0;
      for (int c : cnt) {
        arr *= binomial(m - used, c);
        used += c;
      }
      e.tensor_mult += arr * tmult;
      e.antisym_mult += antisym_multiplicity(dec, 0.0);
    }
  }
  std::sort(out.begin(), out.end(), [](const CompoundEigenvalue& a, const CompoundEigenvalue& b) {
    if (a.value.real() != b.value.real()) return a.value.real() > b.value.real();
    return a.value.imag() > b.value.imag();
  });
  return out;
}

SpectralBound spectral_bound(const std::vector<CompoundEigenvalue>& eigs) {
  SpectralBound s;
  for (const auto& e : eigs) {
    if (e.tensor_mult > 0) s.s_tensor = std::max(s.s_tensor, e.value.real());
    if (e.antisym_mult > 0) s.s_antisym = std::max(s.s_antisym, e.value.real());
  }
  return s;
}

Clearance line_clearance(const std::vector<CompoundEigenvalue>& eigs, double nu0, bool tensor_level, double tol) {
  Clearance c;
  for (const auto& e : eigs) {
    long mult = tensor_level ? e.tensor_mult : e.antisym_mult;
    if (mult <= 0) continue;
    double d = e.value.real() + nu0;
    c.min_distance = std::min(c.min_distance, std::abs(d));
    if (d > 0) c.j += mult;
  }
  if (c.min_distance < tol) throw SpectrumError("line Re = -nu0 hits the compound spectrum");
  return c;
}

double suggest_nu0(const std::vector<CompoundEigenvalue>& eigs, double floor) {
  bool any_anti = false;
  for (const auto& e : eigs) any_anti = any_anti || e.antisym_mult > 0;
  std::vector<double> re{0.0};
  for (const auto& e : eigs) {
    long mult = any_anti ? e.antisym_mult : e.tensor_mult;
    if (mult > 0 && e.value.real() >= floor) re.push_back(e.value.real());
  }
  std::sort(re.begin(), re.end());
  re.erase(std::unique(re.begin(), re.end(), [](double a, double b) { return std::abs(a - b) < 1e-9; }), re.end());
  if (re.size() == 1) re.insert(re.begin(), floor);
  double best = -1.0, mid = 0.0;
  for (size_t i = 0; i + 1 < re.size(); ++i)
    if (re[i + 1] - re[i] > best) {
      best = re[i + 1] - re[i];
      mid = 0.5 * (re[i] + re[i + 1]);
    }
  if (!(best > 1e-9)) throw SpectrumError("no clear spectral gap for an automatic nu0");
  return -mid;
}

SpectrumReport build_spectrum_report(const std::vector<Root>& roots, int m, const Rect& root_region, const Rect& window,
                                     std::optional<double> nu0, double floor) {
  SpectrumReport r;
  r.m = m;
  r.base_roots = roots;
  r.eigenvalues = compound_spectrum_sums(roots, m, window);
  r.bound = spectral_bound(r.eigenvalues);
  double top = roots.empty() ? 0.0 : roots.front().value.real();
  for (const auto& rt : roots) top = std::max(top, rt.value.real());
  r.required_root_floor = window.re_min - (m - 1) * top;
  if (root_region.re_min > r.required_root_floor)
    r.notes.push_back("root search depth above the completeness floor; sums near the window edge may be missing");
  for (const auto& rt : roots)
    if (rt.multiplicity > 1) r.notes.push_back("nonsimple base root: eigenspace dimension assumed equal to multiplicity");
  if (!std::isfinite(r.bound.s_antisym))
    r.notes.push_back("antisymmetric spectrum empty in the window; tensor-level bound used for growth estimates");
  r.nu0_auto = !nu0.has_value();
  r.nu0 = nu0 ? *nu0 : suggest_nu0(r.eigenvalues, floor);
  try {
    r.antisym = line_clearance(r.eigenvalues, r.nu0, false);
  } catch (const SpectrumError&) {
    r.line_hits_antisym = true;
  }
  try {
    r.tensor = line_clearance(r.eigenvalues, r.nu0, true);
  } catch (const SpectrumError&) {
    r.line_hits_tensor = true;
  }
  return r;
}

}  // namespace dcomp
