#include "dcomp/dde_semigroup.hpp"

#include <spdlog/spdlog.h>

#include <cmath>

#include "dcomp/errors.hpp"

namespace dcomp {

void LinearDelayModel::validate() const {
  if (n < 1) throw ShapeError("model dimension must be positive");
  if (!(tau > 0.0)) throw ConfigError("tau must be positive");
  if (alpha.out_dim != n || alpha.in_dim != n) throw ShapeError("alpha must be n x n");
  if (b_tilde.rows() != n) throw ShapeError("b_tilde must have n rows");
  if (c_kernel.in_dim != n) throw ShapeError("measurement kernel must have n columns");
  if (lambda_gain < 0.0) throw ConfigError("gain bound must be nonnegative");
  auto check = [&](const StieltjesKernel& k) {
    for (const auto& a : k.atoms)
      if (a.theta < -tau * (1 + 1e-12) || a.theta > 1e-12 * tau)
        throw ConfigError("kernel atom outside [-tau, 0]");
  };
  check(alpha);
  check(c_kernel);
}

HistoryElement Trajectory::snapshot(int k) const {
  if (k < 0 || k > steps) throw DomainError("snapshot index out of range");
  if (k == 0) return initial;
  HistoryElement e(initial.n, grid);
  e.body = path.middleCols(k, grid.N + 1);
  e.head = path.col(grid.N + k);
  return e;
}

namespace {

// Values of the solution at half-steps of the fine grid. Query index q counts half-steps
// of dt relative to t = 0.
class PathInterp {
 public:
  PathInterp(const HistoryElement& phi, int substeps, long fine_steps, double dt)
      : phi_(phi), s_(substeps), dt_(dt), h_(phi.grid.h()), N_(phi.grid.N) {
    X_.resize(phi.n, fine_steps + 1);
    F_.resize(phi.n, fine_steps + 1);
    X_.col(0) = phi.head;
    hist_d_.resize(phi.n, N_ + 1);
    const auto& b = phi.body;
    if (N_ == 1) {
      hist_d_.col(0) = hist_d_.col(1) = (b.col(1) - b.col(0)) / h_;
    } else {
      for (int i = 1; i < N_; ++i) hist_d_.col(i) = (b.col(i + 1) - b.col(i - 1)) / (2 * h_);
      hist_d_.col(0) = (-3 * b.col(0) + 4 * b.col(1) - b.col(2)) / (2 * h_);
      hist_d_.col(N_) = (3 * b.col(N_) - 4 * b.col(N_ - 1) + b.col(N_ - 2)) / (2 * h_);
    }
  }

  Eigen::MatrixXd& X() { return X_; }
  Eigen::MatrixXd& F() { return F_; }

  Eigen::VectorXd at(long q) const {
    if (q >= 0) {
      long j = q / 2;
      if (q % 2 == 0) return X_.col(j);
      return 0.5 * (X_.col(j) + X_.col(j + 1)) + dt_ * (F_.col(j) - F_.col(j + 1)) / 8.0;
    }
    // history: position in units of h
    long total = 2L * N_ * s_ + q;
    if (total < 0) throw DomainError("query before -tau");
    long denom = 2L * s_;
    long i = total / denom;
    if (i >= N_) i = N_ - 1;
    double u = static_cast<double>(total - i * denom) / denom;
    return hermite(phi_.body.col(i), phi_.body.col(i + 1), hist_d_.col(i), hist_d_.col(i + 1), h_, u);
  }

 private:
  static Eigen::VectorXd hermite(const Eigen::VectorXd& y0, const Eigen::VectorXd& y1, const Eigen::VectorXd& d0,
                                 const Eigen::VectorXd& d1, double len, double u) {
    if (u == 0.0) return y0;
    double u2 = u * u, u3 = u2 * u;
    double h00 = 2 * u3 - 3 * u2 + 1, h10 = u3 - 2 * u2 + u, h01 = -2 * u3 + 3 * u2, h11 = u3 - u2;
    return h00 * y0 + h10 * len * d0 + h01 * y1 + h11 * len * d1;
  }

  const HistoryElement& phi_;
  int s_;
  double dt_, h_;
  int N_;
  Eigen::MatrixXd X_, F_, hist_d_;
};

}  // namespace

Trajectory solve_linear(const LinearDelayModel& model, const HistoryElement& phi0, double t_end, double dt,
                        bool with_gain, double t_start) {
  model.validate();
  if (phi0.n != model.n) throw ShapeError("initial history has wrong dimension");
  if (std::abs(phi0.grid.tau - model.tau) > 1e-12 * model.tau) throw ShapeError("grid tau differs from model tau");
  if (!(t_end > 0.0)) throw DomainError("t_end must be positive");
  if (with_gain && !model.gain) throw ConfigError("with_gain requested but the model has no gain");
  if (!phi0.all_finite()) throw InputError("initial history is not finite");

  const Grid& g = phi0.grid;
  const int N = g.N;
  const double h = g.h();
  const int s = static_cast<int>(std::lround(h / dt));
  if (s < 1 || std::abs(s * dt - h) > 1e-9 * h) throw ConfigError("dt must be h / integer");
  const int K = static_cast<int>(std::ceil(t_end / h - 1e-9));
  const long M = static_cast<long>(K) * s;
  const double dtx = h / s;

  ResolvedKernel alpha = resolve(model.alpha, g);
  ResolvedKernel ck;
  Eigen::MatrixXd B = model.b_tilde;
  if (with_gain) ck = resolve(model.c_kernel, g);

  PathInterp P(phi0, s, M, dtx);
  auto& X = P.X();
  auto& F = P.F();

  auto apply_kernel = [&](const ResolvedKernel& k, long j, int c2, const Eigen::VectorXd& xs) {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(k.out_dim);
    for (const auto& [idx, mat] : k.atoms) {
      if (idx == N)
        out.noalias() += mat * xs;
      else
        out.noalias() += mat * P.at(2 * j + c2 - 2L * (N - idx) * s);
    }
    if (k.has_density()) {
      out.noalias() += k.wdens[N] * xs;
      for (int i = 0; i < N; ++i) out.noalias() += k.wdens[i] * P.at(2 * j + c2 - 2L * (N - i) * s);
    }
    return out;
  };
  auto rhs = [&](long j, int c2, const Eigen::VectorXd& xs) {
    Eigen::VectorXd f = apply_kernel(alpha, j, c2, xs);
    if (with_gain) {
      double t = t_start + (j + 0.5 * c2) * dtx;
      Eigen::MatrixXd G = model.gain(t);
      if (G.rows() != model.r1() || G.cols() != model.r2()) throw ShapeError("gain has wrong shape");
      f.noalias() += B * (G * apply_kernel(ck, j, c2, xs));
    }
    return f;
  };

  for (long j = 0; j < M; ++j) {
    Eigen::VectorXd xj = X.col(j);
    Eigen::VectorXd k1 = rhs(j, 0, xj);
    F.col(j) = k1;
    Eigen::VectorXd k2 = rhs(j, 1, xj + 0.5 * dtx * k1);
    Eigen::VectorXd k3 = rhs(j, 1, xj + 0.5 * dtx * k2);
    Eigen::VectorXd k4 = rhs(j, 2, xj + dtx * k3);
    X.col(j + 1) = xj + dtx / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  F.col(M) = rhs(M, 0, X.col(M));

  Trajectory tr;
  tr.grid = g;
  tr.dt = dtx;
  tr.substeps = s;
  tr.steps = K;
  tr.initial = phi0;
  tr.path.resize(model.n, N + K + 1);
  tr.path.leftCols(N) = phi0.body.leftCols(N);
  for (int k = 0; k <= K; ++k) tr.path.col(N + k) = X.col(static_cast<long>(k) * s);
  if (!tr.path.allFinite()) throw DomainError("solution blew up (non-finite values)");
  return tr;
}

static int steps_for(const Grid& g, double t) {
  if (t < 0.0) throw DomainError("negative time");
  double u = t / g.h();
  int k = static_cast<int>(std::lround(u));
  if (std::abs(u - k) > 1e-9 * std::max(1.0, u)) throw DomainError("time must be a multiple of the grid step");
  return k;
}

HistoryElement semigroup_apply(const LinearDelayModel& model, const HistoryElement& phi0, double t,
                               std::optional<double> dt) {
  int k = steps_for(phi0.grid, t);
  if (k == 0) return phi0;
  return solve_linear(model, phi0, k * phi0.grid.h(), dt.value_or(phi0.grid.h()), false).snapshot(k);
}

HistoryElement cocycle_apply(const LinearDelayModel& model, const HistoryElement& phi0, double t, double t_start,
                             std::optional<double> dt) {
  if (!model.gain) throw ConfigError("cocycle_apply needs a gain");
  int k = steps_for(phi0.grid, t);
  if (k == 0) return phi0;
  return solve_linear(model, phi0, k * phi0.grid.h(), dt.value_or(phi0.grid.h()), true, t_start).snapshot(k);
}

LinearDelayModel shift_feedback(const LinearDelayModel& model, const Eigen::MatrixXd& D, double new_lambda) {
  if (D.rows() != model.r1() || D.cols() != model.r2()) throw ShapeError("shift matrix must be r1 x r2");
  LinearDelayModel m = model;
  if (!D.isZero(0.0)) m.alpha += left_multiply(model.b_tilde * D, model.c_kernel);
  if (model.gain) {
    GainFn g = model.gain;
    m.gain = [g, D](double t) { return Eigen::MatrixXd(g(t) - D); };
  }
  m.lambda_gain = new_lambda;
  return m;
}

namespace {

// argmax of f on [a, b] by a grid scan and Newton on finite-difference derivatives
double maximize_1d(const std::function<double(double)>& f, double a, double b, int samples = 4001) {
  double best = a, fbest = f(a);
  double step = (b - a) / (samples - 1);
  for (int i = 1; i < samples; ++i) {
    double y = a + i * step;
    double v = f(y);
    if (v > fbest) {
      fbest = v;
      best = y;
    }
  }
  double y = best;
  for (int it = 0; it < 50; ++it) {
    double e = 1e-5 * std::max(1.0, std::abs(y));
    double d1 = (f(y + e) - f(y - e)) / (2 * e);
    double d2 = (f(y + e) - 2 * f(y) + f(y - e)) / (e * e);
    if (!(d2 < 0.0)) break;
    double ny = y - d1 / d2;
    if (ny < std::max(a, best - step) || ny > std::min(b, best + step)) break;
    if (std::abs(ny - y) < 1e-14 * std::max(1.0, std::abs(y))) {
      y = ny;
      break;
    }
    y = ny;
  }
  return f(y) >= fbest ? y : best;
}

Eigen::MatrixXd scalar(double v) { return Eigen::MatrixXd::Constant(1, 1, v); }

}  // namespace

Preset build_mackey_glass(double gamma, double beta, double kappa, double tau) {
  if (!(gamma > 0 && beta > 0 && kappa > 1 && tau > 0)) throw ConfigError("mackey-glass parameters out of range");
  Preset p;
  auto& m = p.model;
  m.name = "mackey-glass";
  m.n = 1;
  m.tau = tau;
  m.alpha = StieltjesKernel::scalar_atom(0.0, -gamma);
  m.b_tilde = scalar(1.0);
  m.c_kernel = StieltjesKernel::scalar_atom(-tau, 1.0);

  auto F = [=](double y) { return beta * y / (1 + std::pow(std::abs(y), kappa)); };
  auto dF = [=](double y) {
    double a = std::pow(std::abs(y), kappa);
    return beta * (1 + (1 - kappa) * a) / ((1 + a) * (1 + a));
  };
  auto& r = p.report;
  double ypk = maximize_1d([=](double y) { return y / (1 + std::pow(y, kappa)); }, 0.0, 10.0);
  r.x_max = beta / gamma * ypk / (1 + std::pow(ypk, kappa));
  double yl = maximize_1d([&](double y) { return std::abs(dF(y)); }, 0.0, r.x_max);
  r.lambda = std::max({std::abs(dF(yl)), std::abs(dF(0.0)), std::abs(dF(r.x_max))});
  r.equilibria.push_back(0.0);
  if (beta > gamma) {
    r.x_star = std::pow(beta / gamma - 1, 1.0 / kappa);
    r.equilibria.push_back(r.x_star);
    r.equilibria.insert(r.equilibria.begin(), -r.x_star);
  } else {
    r.x_star = 0.0;
    r.trivially_stable = true;
    r.notes.push_back("beta <= gamma: trivially stable zero equilibrium (globally attracting)");
  }
  r.fprime_star = dF(r.x_star);
  if (std::abs(gamma * r.x_star - F(r.x_star)) > 1e-10) r.notes.push_back("equilibrium residual above 1e-10");
  m.lambda_gain = r.lambda;
  double g0 = r.fprime_star;
  m.gain = [g0](double) { return scalar(g0); };
  return p;
}

Preset build_suarez_schopf(double alpha, double tau, double x_max) {
  if (!(alpha > 0 && tau > 0)) throw ConfigError("suarez-schopf parameters out of range");
  Preset p;
  LinearDelayModel m;
  m.name = "suarez-schopf";
  m.n = 1;
  m.tau = tau;
  m.alpha = StieltjesKernel::scalar_atom(0.0, 1.0) + StieltjesKernel::scalar_atom(-tau, -alpha);
  m.b_tilde = scalar(1.0);
  m.c_kernel = StieltjesKernel::scalar_atom(0.0, 1.0);
  auto& r = p.report;
  r.x_max = x_max > 0 ? x_max : std::sqrt(1 + alpha);
  r.equilibria.push_back(0.0);
  if (alpha < 1) {
    double e = std::sqrt(1 - alpha);
    r.equilibria = {-e, 0.0, e};
    r.x_star = e;
  }
  r.fprime_star = -3 * r.x_star * r.x_star;
  double fp = r.fprime_star;
  m.gain = [fp](double) { return scalar(fp); };
  m.lambda_gain = 3 * r.x_max * r.x_max;
  r.shift = -1.5 * r.x_max * r.x_max;
  r.lambda = 1.5 * r.x_max * r.x_max;
  r.inside_stable_region = 2 * alpha * tau < 1;
  if (r.inside_stable_region) r.notes.push_back("2 alpha tau < 1: inside the known global stability region");
  p.model = shift_feedback(m, scalar(r.shift), r.lambda);
  return p;
}

Preset build_delay_decay(double tau, double lambda) {
  Preset p;
  auto& m = p.model;
  m.name = "delay-decay";
  m.n = 1;
  m.tau = tau;
  m.alpha = StieltjesKernel::scalar_atom(-tau, -1.0);
  m.b_tilde = scalar(1.0);
  m.c_kernel = StieltjesKernel::scalar_atom(0.0, 1.0);
  m.lambda_gain = lambda;
  m.gain = [](double) { return scalar(0.0); };
  p.report.lambda = lambda;
  p.report.equilibria = {0.0};
  return p;
}

Preset build_ode_decay(double lambda) {
  Preset p;
  auto& m = p.model;
  m.name = "ode-decay";
  m.n = 1;
  m.tau = 1.0;
  m.alpha = StieltjesKernel::scalar_atom(0.0, -1.0);
  m.b_tilde = scalar(1.0);
  m.c_kernel = StieltjesKernel::scalar_atom(0.0, 1.0);
  m.lambda_gain = lambda;
  m.gain = [](double) { return scalar(0.0); };
  p.report.lambda = lambda;
  p.report.equilibria = {0.0};
  return p;
}

}  // namespace dcomp
