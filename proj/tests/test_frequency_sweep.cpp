#include <doctest.h>

#include <cmath>

#include "dcomp/errors.hpp"
#include "dcomp/frequency_sweep.hpp"

using namespace dcomp;

namespace {

SweepConfig small_mg_config() {
  SweepConfig c;
  c.nu0 = 0.05;
  c.grid_n = 30;
  c.n_u = c.n_m = 3;
  c.T = 60.0;
  c.s_bound = -0.2;
  c.d_omega = 0.25;
  c.omega_max = 5.0;
  c.lambda = build_mackey_glass(0.1, 0.2, 10.0, 1.0).model.lambda_gain;
  return c;
}

}  // namespace

TEST_SUITE("frequency_sweep") {
  TEST_CASE("largest singular value") {
    Eigen::MatrixXcd M(1, 1);
    M(0, 0) = cplx(3.0, -4.0);
    CHECK(largest_singular_value(M) == doctest::Approx(5.0));
    Eigen::MatrixXcd D = Eigen::MatrixXcd::Zero(3, 2);
    D(0, 0) = 2.0;
    D(2, 1) = cplx(0.0, -7.0);
    CHECK(largest_singular_value(D) == doctest::Approx(7.0));
    Eigen::MatrixXcd big = Eigen::MatrixXcd::Random(80, 70);
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(big);
    CHECK(largest_singular_value(big) == doctest::Approx(svd.singularValues()(0)).epsilon(1e-9));
  }

  TEST_CASE("zero measurement kernel gives zero") {
    auto md = build_mackey_glass(0.1, 0.2, 10.0, 1.0).model;
    md.c_kernel = StieltjesKernel::zero(1, 1);
    CHECK(alpha_N(md, 0.7, small_mg_config()) == 0.0);
  }

  TEST_CASE("single basis element gives the entry modulus") {
    auto md = build_mackey_glass(0.1, 0.2, 10.0, 1.0).model;
    auto cfg = small_mg_config();
    cfg.n_u = cfg.n_m = 1;
    auto cache = make_sweep_cache(md, cfg);
    auto W = cache.evaluate(cplx(-cfg.nu0, 0.9)).W;
    CHECK(alpha_N(cache, 0.9, cfg.nu0) == doctest::Approx(std::abs(W(0, 0))).epsilon(1e-14));
  }

  TEST_CASE("alpha is even in omega") {
    auto md = build_mackey_glass(0.1, 0.2, 10.0, 1.0).model;
    auto cfg = small_mg_config();
    auto cache = make_sweep_cache(md, cfg);
    for (double w : {0.3, 1.0, 4.5}) {
      double a = alpha_N(cache, w, cfg.nu0), b = alpha_N(cache, -w, cfg.nu0);
      CHECK(std::abs(a - b) <= 1e-10 * a);
    }
  }

  TEST_CASE("ode decay at order one matches the closed form") {
    auto md = build_ode_decay(0.5).model;
    SweepConfig cfg;
    cfg.m = 1;
    cfg.n_u = cfg.n_m = 1;
    cfg.grid_n = 200;
    cfg.nu0 = 0.2;
    cfg.s_bound = -1.0;
    cfg.T = 60.0;
    cfg.d_omega = 0.5;
    cfg.omega_max = 10.0;
    cfg.lambda = 0.5;
    auto rep = sweep(md, cfg);
    for (size_t i = 0; i < rep.omega.size(); ++i) {
      double exact = 1.0 / std::abs(cplx(-cfg.nu0 + 1.0, rep.omega[i]));
      CHECK(rep.alpha[i] == doctest::Approx(exact).epsilon(1e-4));
    }
    CHECK(rep.sup == doctest::Approx(1.0 / 0.8).epsilon(1e-4));
    CHECK(rep.verdict == Verdict::verified);
  }

  TEST_CASE("sweep is bounded and ordered") {
    auto md = build_mackey_glass(0.1, 0.2, 10.0, 1.0).model;
    auto cfg = small_mg_config();
    auto rep = sweep(md, cfg);
    REQUIRE(rep.omega.size() == 21);
    for (size_t i = 0; i < rep.omega.size(); ++i) {
      CHECK(rep.omega[i] == doctest::Approx(0.25 * i));
      CHECK(std::isfinite(rep.alpha[i]));
      CHECK(rep.alpha[i] >= 0.0);
      CHECK(rep.alpha[i] <= rep.sup);
    }
    CHECK(rep.failures.empty());
    CHECK(rep.window_limited);
  }

  TEST_CASE("serial and parallel sweeps agree bitwise") {
    auto md = build_mackey_glass(0.1, 0.2, 10.0, 1.0).model;
    auto cfg = small_mg_config();
    auto cache = make_sweep_cache(md, cfg);
    auto a = sweep(cache, cfg);
    auto b = sweep_serial(cache, cfg);
    CHECK(a.alpha == b.alpha);
    CHECK(a.sup == b.sup);
  }

  TEST_CASE("larger nested bases never lower alpha") {
    auto md = build_mackey_glass(0.1, 0.2, 10.0, 1.0).model;
    auto cfg = small_mg_config();
    cfg.n_u = cfg.n_m = 2;
    auto small = sweep(md, cfg);
    cfg.n_u = cfg.n_m = 4;
    auto large = sweep(md, cfg);
    for (size_t i = 0; i < small.alpha.size(); ++i) CHECK(large.alpha[i] >= small.alpha[i] - 1e-12);
    CHECK(large.sup >= small.sup - 1e-12);
  }

  TEST_CASE("lipschitz estimate") {
    std::vector<double> w{0, 0.5, 1.0, 1.5}, flat{2, 2, 2, 2}, lin;
    for (double x : w) lin.push_back(0.3 * x + 1.0);
    CHECK(lipschitz_estimate(w, flat) == 0.0);
    CHECK(lipschitz_estimate(w, lin) == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(lipschitz_estimate(w, lin, 3.0) == doctest::Approx(0.9).epsilon(1e-12));
  }

  TEST_CASE("lipschitz estimate is stable under step halving") {
    auto md = build_mackey_glass(0.1, 0.2, 10.0, 1.0).model;
    auto cfg = small_mg_config();
    cfg.d_omega = 0.1;
    auto cache = make_sweep_cache(md, cfg);
    auto coarse = sweep(cache, cfg);
    cfg.d_omega = 0.05;
    auto fine = sweep(cache, cfg);
    CHECK(std::abs(fine.lipschitz - coarse.lipschitz) < 0.5 * coarse.lipschitz);
    CHECK(fine.sup - coarse.sup <= 0.5 * coarse.lipschitz * coarse.d_omega + 1e-12);
  }

  TEST_CASE("verdict rules") {
    SweepReport r;
    r.omega = {0, 1, 2};
    r.alpha = {0.5, 0.8, 0.6};
    r.sup = 0.8;
    r.d_omega = 1.0;
    r.lipschitz = lipschitz_estimate(r);
    CHECK(verdict(r, 0.0).verdict == Verdict::verified);
    CHECK(std::isinf(verdict(r, 0.0).margin));
    CHECK(verdict(r, 1.0 / 0.7).verdict == Verdict::violated);
    CHECK(verdict(r, 1.0 / 0.85).verdict == Verdict::inconclusive);
    auto v = verdict(r, 0.5);
    CHECK(v.verdict == Verdict::verified);
    CHECK(v.margin == doctest::Approx(1.2));
    for (double lam : {0.4, 0.2, 0.01}) CHECK(verdict(r, lam).verdict == Verdict::verified);
    r.alpha[1] = NAN;
    CHECK(verdict(r, 0.5).verdict == Verdict::inconclusive);
  }

  TEST_CASE("too many failed nodes is an error") {
    auto md = build_mackey_glass(0.1, 0.2, 10.0, 1.0).model;
    auto cfg = small_mg_config();
    cfg.nu0 = 0.3;
    CHECK_THROWS_AS(sweep(md, cfg), DomainError);
  }

  TEST_CASE("invalid sweep settings") {
    auto md = build_mackey_glass(0.1, 0.2, 10.0, 1.0).model;
    auto cfg = small_mg_config();
    cfg.d_omega = 0.0;
    CHECK_THROWS_AS(sweep(md, cfg), ConfigError);
    cfg = small_mg_config();
    cfg.n_u = 0;
    CHECK_THROWS_AS(sweep(md, cfg), ConfigError);
  }

  TEST_CASE("default window") {
    CHECK(default_omega_max(-0.2, 1.0) == doctest::Approx(40.0 * M_PI));
    CHECK(default_omega_max(-50.0, 100.0) == doctest::Approx(1000.0));
  }
}
