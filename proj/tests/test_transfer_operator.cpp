#include <doctest.h>

#include <cmath>

#include "dcomp/errors.hpp"
#include "dcomp/transfer_operator.hpp"

using namespace dcomp;

namespace {

LinearDelayModel ode_decay() { return build_ode_decay(0.5).model; }

LinearDelayModel scalar_delay_measure(double gamma, double tau) {
  LinearDelayModel m;
  m.n = 1;
  m.tau = tau;
  m.alpha = StieltjesKernel::scalar_atom(0.0, -gamma);
  m.b_tilde = Eigen::MatrixXd::Ones(1, 1);
  m.c_kernel = StieltjesKernel::scalar_atom(-tau, 1.0);
  return m;
}

HistoryElement smooth(double a, double b, double w, Grid g) {
  return embed_continuous([=](double t) { return a + b * std::cos(w * t); }, g);
}

}  // namespace

TEST_SUITE("transfer_operator") {
  TEST_CASE("legendre family is orthonormal") {
    Grid g{1.3, 200};
    auto f = legendre_family(g, 10);
    auto w = g.weights();
    Eigen::MatrixXd G = f.e * Eigen::Map<Eigen::VectorXd>(w.data(), w.size()).asDiagonal() * f.e.transpose();
    CHECK((G - Eigen::MatrixXd::Identity(10, 10)).cwiseAbs().maxCoeff() < 1e-10);
  }

  TEST_CASE("nested index sets") {
    auto one = nested_index_sets(1, 3);
    REQUIRE(one.size() == 3);
    CHECK(one[2] == std::vector<int>{2});
    auto two = nested_index_sets(2, 4);
    REQUIRE(two.size() == 4);
    CHECK(two[0] == std::vector<int>{0, 1});
    CHECK(two[1] == std::vector<int>{0, 2});
    CHECK(two[2] == std::vector<int>{1, 2});
    CHECK(two[3] == std::vector<int>{0, 3});
    auto zero = nested_index_sets(0, 1);
    REQUIRE(zero.size() == 1);
    CHECK(zero[0].empty());
  }

  TEST_CASE("order one control element is the head input") {
    auto md = ode_decay();
    Grid g{1.0, 20};
    auto cb = make_control_basis(md, g, 1, 4);
    CHECK(cb.size() == 1);
    auto e = control_embed(cb, 0);
    CHECK(e.face(0)(0, 0) == cplx(1.0));
    for (int i = 0; i <= g.N; ++i) CHECK(e.face(1)(i, 0) == cplx(0.0));
  }

  TEST_CASE("order two control elements are scaled wedges") {
    auto md = build_mackey_glass(0.1, 0.2, 10.0, 1.0).model;
    Grid g{1.0, 30};
    auto cb = make_control_basis(md, g, 2, 4);
    for (int i = 0; i < cb.size(); ++i) {
      auto e = control_embed(cb, i);
      HistoryElement psi(1, g), inf(1, g);
      psi.body.row(0) = cb.family.e.row(i);
      inf.head(0) = 1.0;
      auto ref = wedge({psi, inf});
      ref *= std::sqrt(2.0);
      CHECK((e - ref).max_abs() < 1e-14);
      CHECK(check_antisymmetry(e).max() < 1e-12);
      CHECK(std::abs(e.face(0)(0, 0)) == 0.0);
      CHECK(e.face(3).data == std::vector<cplx>(e.face(3).data.size(), 0.0));
      CHECK(compound_norm(e) == doctest::Approx(1.0).epsilon(1e-12));
    }
  }

  TEST_CASE("measurement of zero is zero") {
    auto md = build_mackey_glass(0.1, 0.2, 10.0, 1.0).model;
    Grid g{1.0, 20};
    auto mb = make_measurement_basis(md, g, 2, 5);
    CompoundGridFunction z(2, 1, g);
    CHECK(measurement_project(z, md.c_kernel, mb).norm() == 0.0);
  }

  TEST_CASE("measurement by atoms reads slices") {
    auto md = build_mackey_glass(0.1, 0.2, 10.0, 1.0).model;
    const double tau = 1.0;
    Grid g{tau, 60};
    auto f1 = [](double t) { return 1.0 + std::sin(2 * t); };
    auto f2 = [](double t) { return std::exp(t) - 0.3; };
    auto p1 = embed_continuous(f1, g), p2 = embed_continuous(f2, g);
    auto phi = wedge({p1, p2});
    auto mb = make_measurement_basis(md, g, 2, 5);
    auto w = g.weights();
    for (double at : {-tau, 0.0}) {
      auto got = measurement_project(phi, StieltjesKernel::scalar_atom(at, 1.0), mb);
      for (int b = 0; b < mb.size(); ++b) {
        double ref = 0.0;
        for (int i = 0; i <= g.N; ++i) {
          double th = g.node(i);
          ref += w[i] * mb.family.e(b, i) * 0.5 * (f1(th) * f2(at) - f2(th) * f1(at));
        }
        ref *= std::sqrt(2.0);
        CHECK(std::abs(got(b) - ref) <= 1e-8 * std::max(1.0, std::abs(ref)));
      }
    }
  }

  TEST_CASE("laplace route of the ode decay at p = 0") {
    auto md = ode_decay();
    Grid g{1.0, 100};
    WedgeSum phi{{1.0, {HistoryElement::unit_head(1, g)}}};
    auto r = resolvent_laplace(md, phi, 0.0, 40.0, -1.0);
    CHECK(std::abs(r.value.face(0)(0, 0) - 1.0) < 1e-4);
    for (int i = 0; i < g.N; ++i) CHECK(std::abs(r.value.face(1)(i, 0) - 1.0) < 2 * g.h());
  }

  TEST_CASE("laplace route refuses lines left of the growth bound") {
    auto md = ode_decay();
    Grid g{1.0, 10};
    WedgeSum phi{{1.0, {HistoryElement::unit_head(1, g)}}};
    CHECK_THROWS_AS(resolvent_laplace(md, phi, cplx(-1.0, 0.5), 10.0, -1.0), LaplaceRouteError);
    CHECK_THROWS_AS(resolvent_laplace(md, phi, cplx(-2.0, 0.0), 10.0, -1.0), LaplaceRouteError);
  }

  TEST_CASE("resolvent norm decays with the real part") {
    auto md = build_mackey_glass(0.1, 0.2, 10.0, 1.0).model;
    Grid g{1.0, 40};
    WedgeSum phi{{1.0, {smooth(1, 0.5, 2, g), smooth(-0.5, 1, 1, g)}}};
    double prev = 1e300;
    for (double re : {0.0, 0.5, 2.0}) {
      double nrm = compound_norm(resolvent_laplace(md, phi, cplx(re, 1.0), 60.0, -0.2).value);
      CHECK(nrm < prev);
      prev = nrm;
    }
  }

  TEST_CASE("doubling the horizon stays within the remainder estimate") {
    auto md = build_mackey_glass(0.1, 0.2, 10.0, 1.0).model;
    Grid g{1.0, 40};
    WedgeSum phi{{1.0, {smooth(1, 0.5, 2, g), smooth(-0.5, 1, 1, g)}}};
    cplx p(-0.05, 1.0);
    auto a = resolvent_laplace(md, phi, p, 40.0, -0.2);
    auto b = resolvent_laplace(md, phi, p, 80.0, -0.2);
    CHECK(a.remainder > 0.0);
    CHECK(compound_norm(a.value - b.value) <= a.remainder);
  }

  TEST_CASE("laplace route is linear in the wedge sum") {
    auto md = build_mackey_glass(0.1, 0.2, 10.0, 1.0).model;
    Grid g{1.0, 30};
    WedgeTerm t1{1.0, {smooth(1, 0.5, 2, g), smooth(-0.5, 1, 1, g)}};
    WedgeTerm t2{1.0, {smooth(0.2, 1, 3, g), HistoryElement::unit_head(1, g)}};
    cplx a(2.0, -1.0), b(-0.5, 0.0), p(0.1, 2.0);
    WedgeTerm s1 = t1, s2 = t2;
    s1.coef = a;
    s2.coef = b;
    auto lhs = resolvent_laplace(md, {s1, s2}, p, 50.0, -0.2).value;
    auto rhs = a * resolvent_laplace(md, {t1}, p, 50.0, -0.2).value + b * resolvent_laplace(md, {t2}, p, 50.0, -0.2).value;
    CHECK((lhs - rhs).max_abs() <= 1e-10 * rhs.max_abs());
  }

  TEST_CASE("serial and parallel laplace routes agree") {
    auto md = build_mackey_glass(0.1, 0.2, 10.0, 1.0).model;
    Grid g{1.0, 30};
    WedgeSum phi{{1.0, {smooth(1, 0.5, 2, g), smooth(-0.5, 1, 1, g)}}};
    auto a = resolvent_laplace(md, phi, cplx(-0.05, 1.0), 30.0, -0.2);
    auto b = resolvent_laplace_serial(md, phi, cplx(-0.05, 1.0), 30.0, -0.2);
    CHECK((a.value - b.value).max_abs() <= 1e-13 * a.value.max_abs());
  }

  TEST_CASE("dense solve of the ode decay") {
    auto md = ode_decay();
    Grid g{1.0, 20};
    auto psi = tensor({HistoryElement::unit_head(1, g)});
    auto r = dense_resolvent_solve(md, psi, 0.0);
    CHECK(std::abs(r.value.face(0)(0, 0) + 1.0) < 1e-10);
    for (int i = 0; i < g.N; ++i) CHECK(std::abs(r.value.face(1)(i, 0) + 1.0) < 1e-10);
    CHECK(r.residual < 1e-10);
  }

  TEST_CASE("dense solve residual and antisymmetry at order two") {
    auto md = build_mackey_glass(0.1, 0.2, 10.0, 1.0).model;
    Grid g{1.0, 30};
    auto psi = wedge({smooth(1, 0.5, 2, g), smooth(-0.5, 1, 1, g)});
    auto r = dense_resolvent_solve(md, psi, cplx(-0.05, 1.0));
    CHECK(r.residual < 1e-10);
    CHECK(r.antisym_violation < 1e-10);
  }

  TEST_CASE("dense and laplace routes agree at moderate resolution") {
    auto md = build_mackey_glass(0.1, 0.2, 10.0, 1.0).model;
    double prev = 1e9;
    for (int N : {25, 50}) {
      Grid g{1.0, N};
      auto f1 = smooth(1, 0.5, 2, g), f2 = smooth(-0.5, 1, 1, g);
      cplx p(0.2, 1.0);
      auto lap = resolvent_laplace(md, {{1.0, {f1, f2}}}, p, 80.0, -0.2).value;
      auto den = dense_resolvent_solve(md, wedge({f1, f2}), p).value;
      lap *= -1.0;
      double err = compound_norm(lap - den) / compound_norm(den);
      CHECK(err < 0.1);
      CHECK(err < prev);
      prev = err;
    }
  }

  TEST_CASE("scalar transfer function") {
    // the measured output jumps at t = tau, so the trapezoid error is first order in h
    const double gamma = 0.1, tau = 1.0;
    auto md = scalar_delay_measure(gamma, tau);
    cplx p(0.2, 0.5);
    cplx exact = std::exp(-p * tau) / (p + gamma);
    double prev = 0.0;
    for (int N : {250, 500, 1000}) {
      Grid g{tau, N};
      auto cb = make_control_basis(md, g, 1, 1);
      auto mb = make_measurement_basis(md, g, 1, 1);
      auto W = transfer_matrix(md, p, cb, mb, 150.0, -gamma);
      double err = std::min(std::abs(W.W(0, 0) - exact), std::abs(W.W(0, 0) + exact)) / std::abs(exact);
      CHECK(err <= g.h());
      if (prev > 0) CHECK(err == doctest::Approx(prev / 2).epsilon(0.1));
      prev = err;
    }
  }

  TEST_CASE("transfer matrix symmetries and fast path") {
    auto md = build_mackey_glass(0.1, 0.2, 10.0, 1.0).model;
    Grid g{1.0, 30};
    auto cb = make_control_basis(md, g, 2, 3);
    auto mb = make_measurement_basis(md, g, 2, 3);
    cplx p(-0.05, 1.3);
    TransferCache cache(md, cb, mb, 40.0, -0.2);
    auto W = transfer_matrix(cache, p);
    auto Wc = transfer_matrix(cache, std::conj(p));
    CHECK((W.W.conjugate() - Wc.W).cwiseAbs().maxCoeff() <= 1e-10 * W.W.cwiseAbs().maxCoeff());
    auto Wf = transfer_matrix_full(md, p, cb, mb, 40.0, -0.2);
    CHECK((W.W - Wf.W).cwiseAbs().maxCoeff() <= 1e-10 * W.W.cwiseAbs().maxCoeff());
    auto md2 = md;
    md2.lambda_gain = 100.0;
    auto W2 = transfer_matrix(md2, p, cb, mb, 40.0, -0.2);
    CHECK((W.W - W2.W).cwiseAbs().maxCoeff() == 0.0);
  }
}
