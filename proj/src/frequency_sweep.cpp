#include "dcomp/frequency_sweep.hpp"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include <Eigen/SVD>

#include "dcomp/errors.hpp"

namespace dcomp {

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::verified:
      return "verified(window)";
    case Verdict::violated:
      return "violated";
    default:
      return "inconclusive";
  }
}

double largest_singular_value(const Eigen::MatrixXcd& M) {
  if (M.size() == 0) return 0.0;
  if (std::min(M.rows(), M.cols()) <= 64) {
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(M);
    return svd.singularValues()(0);
  }
  Eigen::MatrixXcd G = M.adjoint() * M;
  Eigen::VectorXcd v = Eigen::VectorXcd::Ones(G.cols()).normalized();
  double lam = 0.0;
  for (int it = 0; it < 2000; ++it) {
    Eigen::VectorXcd w = G * v;
    double nw = w.norm();
    if (nw == 0.0) return 0.0;
    v = w / nw;
    if (std::abs(nw - lam) <= 1e-14 * nw) {
      lam = nw;
      break;
    }
    lam = nw;
  }
  return std::sqrt(lam);
}

double alpha_N(const TransferCache& cache, double omega, double nu0) {
  return largest_singular_value(cache.evaluate(cplx(-nu0, omega)).W);
}

double default_omega_max(double s, double tau) {
  return 20.0 * std::max({1.0, std::abs(s), 2.0 * M_PI / tau});
}

static void validate(const SweepConfig& c) {
  if (!(c.d_omega > 0)) throw ConfigError("sweep step must be positive");
  if (c.omega_max != 0.0 && !(c.omega_max >= c.d_omega)) throw ConfigError("omega_max must be at least the step");
  if (c.n_u < 1 || c.n_m < 1) throw ConfigError("basis sizes must be at least 1");
  if (!(c.T > 0)) throw ConfigError("Laplace horizon must be positive");
  if (!(c.lambda >= 0)) throw ConfigError("gain bound must be nonnegative");
  if (!(c.lipschitz_safety >= 1)) throw ConfigError("Lipschitz safety factor must be at least 1");
}

TransferCache make_sweep_cache(const LinearDelayModel& model, const SweepConfig& cfg) {
  validate(cfg);
  Grid g{model.tau, cfg.grid_n};
  auto cb = make_control_basis(model, g, cfg.m, cfg.n_u);
  auto mb = make_measurement_basis(model, g, cfg.m, cfg.n_m);
  return TransferCache(model, cb, mb, cfg.T, cfg.s_bound);
}

double alpha_N(const LinearDelayModel& model, double omega, const SweepConfig& cfg) {
  return alpha_N(make_sweep_cache(model, cfg), omega, cfg.nu0);
}

double lipschitz_estimate(const std::vector<double>& omega, const std::vector<double>& alpha, double safety) {
  double L = 0.0;
  for (size_t i = 0; i + 1 < alpha.size(); ++i) {
    if (!std::isfinite(alpha[i]) || !std::isfinite(alpha[i + 1])) continue;
    L = std::max(L, std::abs(alpha[i + 1] - alpha[i]) / (omega[i + 1] - omega[i]));
  }
  return safety * L;
}

double lipschitz_estimate(const SweepReport& r, double safety) { return lipschitz_estimate(r.omega, r.alpha, safety); }

VerdictResult verdict(const SweepReport& r, double lambda) {
  VerdictResult v;
  if (lambda == 0.0) {
    v.verdict = Verdict::verified;
    v.margin = std::numeric_limits<double>::infinity();
    return v;
  }
  const double thr = 1.0 / lambda;
  v.margin = thr - r.sup;
  for (double a : r.alpha)
    if (std::isfinite(a) && a >= thr) {
      v.verdict = Verdict::violated;
      return v;
    }
  bool complete = std::all_of(r.alpha.begin(), r.alpha.end(), [](double a) { return std::isfinite(a); });
  if (complete && r.sup + 0.5 * r.lipschitz * r.d_omega < thr) v.verdict = Verdict::verified;
  return v;
}

namespace {

struct NodeOut {
  double alpha = std::numeric_limits<double>::quiet_NaN();
  double remainder = 0.0;
  std::string error;
};

NodeOut eval_node(const TransferCache& cache, double omega, double nu0) {
  NodeOut o;
  try {
    auto tm = cache.evaluate(cplx(-nu0, omega));
    o.alpha = largest_singular_value(tm.W);
    o.remainder = tm.remainder;
    if (!std::isfinite(o.alpha)) {
      o.error = "non-finite transfer matrix";
      o.alpha = std::numeric_limits<double>::quiet_NaN();
    }
  } catch (const std::exception& e) {
    o.error = e.what();
  }
  return o;
}

SweepReport assemble(const std::vector<double>& omega, const std::vector<NodeOut>& out, const SweepConfig& cfg,
                     double d_omega) {
  SweepReport r;
  r.omega = omega;
  r.d_omega = d_omega;
  int failed = 0;
  r.sup = 0.0;
  for (size_t i = 0; i < out.size(); ++i) {
    r.alpha.push_back(out[i].alpha);
    r.max_remainder = std::max(r.max_remainder, out[i].remainder);
    if (!out[i].error.empty()) {
      ++failed;
      r.failures.push_back("omega=" + std::to_string(omega[i]) + ": " + out[i].error);
      continue;
    }
    if (out[i].alpha > r.sup) {
      r.sup = out[i].alpha;
      r.omega_at_sup = omega[i];
    }
  }
  if (failed * 10 > static_cast<int>(out.size()))
    throw DomainError("sweep failed at " + std::to_string(failed) + " of " + std::to_string(out.size()) +
                      " frequency nodes; first: " + r.failures.front());
  r.lipschitz = lipschitz_estimate(r, cfg.lipschitz_safety);
  r.threshold = cfg.lambda > 0 ? 1.0 / cfg.lambda : std::numeric_limits<double>::infinity();
  auto v = verdict(r, cfg.lambda);
  r.verdict = v.verdict;
  r.margin = v.margin;

  // tail diagnostics over the last tenth of the window
  const size_t n = r.alpha.size();
  const size_t start = n - std::max<size_t>(2, n / 10);
  double tail = 0.0;
  int turns = 0;
  for (size_t i = start; i < n; ++i) {
    if (std::isfinite(r.alpha[i])) tail = std::max(tail, r.alpha[i]);
    if (i >= start + 2 && i < n) {
      double d1 = r.alpha[i - 1] - r.alpha[i - 2], d2 = r.alpha[i] - r.alpha[i - 1];
      if (d1 * d2 < 0) ++turns;
    }
  }
  r.tail_ratio = r.sup > 0 ? tail / r.sup : 0.0;
  r.tail_oscillations = turns;
  r.notes.push_back("verdict covers omega in [0, " + std::to_string(omega.back()) +
                    "] only; the tail beyond the window is not certified");
  if (r.tail_ratio > 0.5) r.notes.push_back("alpha has not decayed at the window edge; consider a larger omega_max");
  if (turns > 0)
    r.notes.push_back("tail oscillates (" + std::to_string(turns) + " turning points in the last tenth of the window)");
  if (r.max_remainder > 1e-3 * std::max(r.sup, 1e-300))
    r.notes.push_back("Laplace truncation remainder is not small relative to sup alpha; consider a larger T");
  return r;
}

std::vector<double> omega_grid(double omega_max, double d) {
  const int n = static_cast<int>(std::floor(omega_max / d + 1e-9));
  std::vector<double> w(n + 1);
  for (int i = 0; i <= n; ++i) w[i] = i * d;
  return w;
}

template <bool Parallel>
SweepReport run(const TransferCache& cache, const SweepConfig& cfg) {
  validate(cfg);
  if (!(cfg.omega_max > 0)) throw ConfigError("omega_max must be resolved before sweeping");
  auto t0 = std::chrono::steady_clock::now();
  double d = cfg.d_omega;
  SweepReport r;
  for (int ref = 0;; ++ref) {
    auto omega = omega_grid(cfg.omega_max, d);
    std::vector<NodeOut> out(omega.size());
    const int n = static_cast<int>(omega.size());
    int jobs = 1;
    if constexpr (Parallel) {
      jobs = cfg.jobs > 0 ? cfg.jobs : omp_get_max_threads();
#pragma omp parallel for schedule(static) num_threads(jobs)
      for (int i = 0; i < n; ++i) out[i] = eval_node(cache, omega[i], cfg.nu0);
    } else {
      for (int i = 0; i < n; ++i) out[i] = eval_node(cache, omega[i], cfg.nu0);
    }
    r = assemble(omega, out, cfg, d);
    r.jobs = jobs;
    r.refinements = ref;
    if (r.verdict != Verdict::inconclusive || ref >= cfg.max_refinements) break;
    d *= 0.5;
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

}  // namespace

SweepReport sweep(const TransferCache& cache, const SweepConfig& cfg) { return run<true>(cache, cfg); }
SweepReport sweep_serial(const TransferCache& cache, const SweepConfig& cfg) { return run<false>(cache, cfg); }

SweepReport sweep(const LinearDelayModel& model, const SweepConfig& cfg) {
  SweepConfig c = cfg;
  if (c.omega_max == 0.0) c.omega_max = default_omega_max(c.s_bound, model.tau);
  return sweep(make_sweep_cache(model, c), c);
}

}  // namespace dcomp
