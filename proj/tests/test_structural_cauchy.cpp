#include <doctest.h>

#include <cmath>
#include <memory>
#include <random>

#include "dcomp/errors.hpp"
#include "dcomp/structural_cauchy.hpp"

using namespace dcomp;

namespace {

LinearDelayModel transport_only(double tau) {
  LinearDelayModel m;
  m.tau = tau;
  m.alpha = StieltjesKernel::zero(1, 1);
  m.b_tilde = Eigen::MatrixXd::Ones(1, 1);
  m.c_kernel = StieltjesKernel::scalar_atom(0.0, 1.0);
  return m;
}

AdornedSource random_adorned(std::mt19937& rng, Grid g, double nu, int K) {
  std::normal_distribution<double> nd;
  AdornedSource X;
  X.k = 1;
  X.grid = g;
  X.nu = nu;
  X.initial = FaceGrid(1, g.N, 1);
  for (auto& v : X.initial.data) v = nd(rng);
  X.boundary.assign(K + 1, std::vector<FaceGrid>(1, FaceGrid(0, g.N, 1)));
  X.boundary[0][0].data[0] = X.initial.data[g.N];
  for (int t = 1; t <= K; ++t) X.boundary[t][0].data[0] = nd(rng);
  return X;
}

TwistedSource random_twisted(std::mt19937& rng, Grid g, double nu, int K) {
  std::normal_distribution<double> nd;
  auto ys = std::make_shared<std::vector<FaceGrid>>(K + 1, FaceGrid(1, g.N, 1));
  for (auto& f : *ys)
    for (auto& v : f.data) v = nd(rng);
  TwistedSource Y;
  Y.k = 1;
  Y.grid = g;
  Y.nu = nu;
  Y.steps = K;
  Y.y = [ys](int s) { return (*ys)[s]; };
  return Y;
}

DecomposableData smooth_pair(Grid g, bool antisym) {
  return {{embed_continuous([](double t) { return std::cos(2 * t) + 0.5; }, g),
           embed_continuous([](double t) { return std::exp(0.7 * t) - 0.2 * t; }, g)},
          antisym};
}

}  // namespace

TEST_SUITE("structural_cauchy") {
  TEST_CASE("adornment basics") {
    std::mt19937 rng(1);
    Grid g{1.0, 10};
    auto X = random_adorned(rng, g, 0.3, 25);
    CHECK(adorn(X, 0).data == X.initial.data);
    AdornedSource C = X;
    for (auto& v : C.initial.data) v = 2.0;
    for (auto& layer : C.boundary) layer[0].data[0] = 2.0;
    for (int t : {0, 3, 17}) {
      auto a = adorn(C, t);
      for (auto v : a.data) CHECK(v.real() == doctest::Approx(2.0 * std::exp(0.3 * t * g.h())));
    }
    AdornedSource Z = X;
    Z.nu = 0.0;
    for (auto& layer : Z.boundary) layer[0].data[0] = 0.0;
    for (int t = g.N + 1; t <= 25; ++t)
      for (auto v : adorn(Z, t).data) CHECK(v == cplx(0.0));
    CHECK_THROWS_AS(adorn(X, 26), DomainError);
  }

  TEST_CASE("twisting basics") {
    Grid g{1.0, 10};
    TwistedSource Y;
    Y.k = 1;
    Y.grid = g;
    Y.nu = 0.0;
    Y.steps = 5;
    Y.y = [&](int) {
      FaceGrid f(1, g.N, 1);
      for (auto& v : f.data) v = 3.0;
      return f;
    };
    for (auto v : twist(Y, 0).data) CHECK(v == cplx(0.0));
    auto one = twist(Y, 1);
    for (int i = 0; i < g.N; ++i) CHECK(one.data[i].real() == doctest::Approx(3.0 * g.h()));
    TwistedSource Z = Y;
    Z.y = [&](int) { return FaceGrid(1, g.N, 1); };
    for (auto v : twist(Z, 4).data) CHECK(v == cplx(0.0));
  }

  TEST_CASE("pure transport is a pure adornment") {
    Grid g{1.0, 40};
    DecomposableForcing eta{smooth_pair(g, true), [](double) { return 0.0; }};
    auto dec = decompose_solution(transport_only(1.0), smooth_pair(g, true), eta, 0.0, 1.5);
    CHECK(dec.max_relative_residual < 1e-12);
    for (const auto& fd : dec.faces)
      for (int t = 0; t <= dec.steps; ++t)
        for (auto v : twist(fd.Y, t).data) CHECK(std::abs(v) < 1e-14);
  }

  TEST_CASE("order one split is exact to rounding") {
    auto md = build_mackey_glass(0.1, 0.2, 10.0, 1.0).model;
    md.alpha = md.alpha + StieltjesKernel::scalar_atom(-1.0, -0.4);
    for (int N : {25, 50, 100}) {
      Grid g{1.0, N};
      DecomposableData phi0{{embed_continuous([](double t) { return std::cos(2 * t); }, g)}, false};
      DecomposableForcing eta{{{embed_continuous([](double t) { return 1.0 + t; }, g)}, false},
                              [](double t) { return std::sin(t); }};
      auto dec = decompose_solution(md, phi0, eta, 0.1, 2.0);
      CHECK(dec.max_residual < 1e-12);
    }
  }

  TEST_CASE("top face source is the forcing restriction") {
    auto md = build_delay_decay(1.0, 0.1).model;
    Grid g{1.0, 20};
    auto prof = [](double t) { return 1.0 + 0.5 * t; };
    DecomposableForcing eta{smooth_pair(g, true), prof};
    const double nu = 0.1;
    auto dec = decompose_solution(md, smooth_pair(g, true), eta, nu, 1.0);
    auto ref = wedge(eta.data.factors).face(3);
    for (const auto& fd : dec.faces) {
      if (fd.face != 3) continue;
      for (int s = 0; s <= dec.steps; ++s) {
        auto y = fd.Y.y(s);
        double r = rho_nu(nu, s * g.h());
        for (size_t p = 0; p < y.data.size(); ++p)
          CHECK(std::abs(r * y.data[p] - prof(s * g.h()) * ref.data[p]) <= 1e-14 * (1 + std::abs(ref.data[p])));
      }
    }
  }

  TEST_CASE("order two residual decreases under refinement") {
    auto md = build_mackey_glass(0.1, 0.2, 10.0, 1.0).model;
    std::vector<double> res;
    for (int N : {20, 40}) {
      Grid g{1.0, N};
      DecomposableForcing eta{smooth_pair(g, true), [](double t) { return std::cos(t); }};
      res.push_back(decompose_solution(md, smooth_pair(g, true), eta, 0.1, 1.0).max_relative_residual);
    }
    CHECK(res[1] < 0.6 * res[0]);
  }

  TEST_CASE("norm ratios are recorded") {
    auto md = build_mackey_glass(0.1, 0.2, 10.0, 1.0).model;
    Grid g{1.0, 20};
    DecomposableForcing eta{smooth_pair(g, true), [](double t) { return std::cos(t); }};
    DecompositionOptions opt;
    opt.with_norms = true;
    auto dec = decompose_solution(md, smooth_pair(g, true), eta, 0.1, 1.0, opt);
    CHECK(dec.rhs > 0.0);
    for (const auto& fd : dec.faces) {
      CHECK(std::isfinite(fd.c_ratio));
      CHECK(fd.c_ratio >= 0.0);
    }
  }

  TEST_CASE("incompatible initial traces are rejected") {
    auto md = build_delay_decay(1.0, 0.1).model;
    Grid g{1.0, 10};
    auto data = smooth_pair(g, true);
    data.factors[0].head(0) += 1.0;
    DecomposableForcing eta{smooth_pair(g, true), [](double) { return 0.0; }};
    CHECK_THROWS_AS(decompose_solution(md, data, eta, 0.0, 1.0), DomainError);
  }

  TEST_CASE("pointwise measurement reads slices") {
    Grid g{1.0, 10};
    std::vector<FaceGrid> series(3, FaceGrid(2, g.N, 1));
    for (size_t t = 0; t < series.size(); ++t)
      for (size_t p = 0; p < series[t].data.size(); ++p) series[t].data[p] = std::sin(0.1 * p + t);
    auto out = pointwise_measure_series(series, StieltjesKernel::scalar_atom(-0.4, 1.0), g, 1);
    for (size_t t = 0; t < series.size(); ++t)
      for (int i = 0; i <= g.N; ++i) {
        int c[2] = {i, 6};
        CHECK(out[t].data[i] == series[t].data[point_index(c, 2, g.N)]);
      }
    auto k1 = StieltjesKernel::scalar_atom(-0.4, 2.0), k2 = StieltjesKernel::scalar_density(-1.0, -0.2, 0.5);
    auto a = pointwise_measure_series(series, k1 + k2, g, 0);
    auto b = pointwise_measure_series(series, k1, g, 0);
    auto c = pointwise_measure_series(series, k2, g, 0);
    for (size_t t = 0; t < series.size(); ++t)
      for (size_t p = 0; p < a[t].data.size(); ++p) CHECK(std::abs(a[t].data[p] - b[t].data[p] - c[t].data[p]) < 1e-14);
  }

  TEST_CASE("atoms at zero read the lower series") {
    Grid g{1.0, 8};
    std::vector<FaceGrid> series(2, FaceGrid(1, g.N, 1)), lower(2, FaceGrid(0, g.N, 1));
    lower[0].data[0] = 5.0;
    lower[1].data[0] = -1.0;
    auto out = pointwise_measure_series(series, StieltjesKernel::scalar_atom(0.0, 1.0), g, 0, &lower);
    CHECK(out[0].data[0] == cplx(5.0));
    CHECK(out[1].data[0] == cplx(-1.0));
  }

  TEST_CASE("measurement of adorned and twisted series respects the bound") {
    std::mt19937 rng(9);
    Grid g{1.0, 40};
    const double nu = 0.1;
    const int K = 80;
    auto gamma = StieltjesKernel::scalar_atom(-0.3, 1.0) + StieltjesKernel::scalar_density(-1.0, -0.5, -0.8);
    const double bound = pointwise_measure_bound(gamma, nu, g.tau);
    CHECK(bound == doctest::Approx(total_variation(gamma) * std::exp(nu)));
    for (int r = 0; r < 5; ++r) {
      auto X = random_adorned(rng, g, nu, K);
      auto Y = random_twisted(rng, g, nu, K);
      std::vector<FaceGrid> sa, st;
      for (int t = 0; t <= K; ++t) {
        sa.push_back(adorn(X, t));
        st.push_back(twist(Y, t));
      }
      double na = series_norm(pointwise_measure_series(sa, gamma, g, 0), g, g.h());
      double nt = series_norm(pointwise_measure_series(st, gamma, g, 0), g, g.h());
      CHECK(na <= bound * adorned_norm(X));
      CHECK(nt <= bound * twisted_norm(Y));
    }
  }

  TEST_CASE("fourier transform commutes with pointwise measurement") {
    Grid g{1.0, 16};
    const int K = 64;
    std::vector<FaceGrid> series(K, FaceGrid(1, g.N, 1)), lower(K, FaceGrid(0, g.N, 1));
    for (int t = 0; t < K; ++t) {
      double s = (t - K / 2.0) / 8.0;
      double bump = std::exp(-s * s);
      for (int i = 0; i <= g.N; ++i) series[t].data[i] = bump * std::cos(g.node(i) + 0.1 * t);
      lower[t].data[0] = bump * std::cos(0.1 * t);
    }
    auto gamma = StieltjesKernel::scalar_atom(0.0, 0.7) + StieltjesKernel::scalar_atom(-0.5, -1.0) +
                 StieltjesKernel::scalar_density(-1.0, 0.0, 0.3);
    CHECK(fourier_commutation_residual(series, gamma, g, 0, &lower) <= 1e-6);
    CHECK(fourier_commutation_residual(series, gamma, g, 0) <= 1e-6);
  }

  TEST_CASE("adorned and twisted parts are uniquely determined") {
    for (int N : {8, 16}) {
      Grid g{1.0, N};
      auto rep = uniqueness_check(g, 2 * N, 0.1, 3);
      CHECK(rep.rank == rep.unknowns);
      CHECK(rep.sigma_min > 0.0);
      CHECK(rep.recovery_error < 1e-8);
      CHECK(rep.zero_fit_norm <= g.h());
    }
  }
}
