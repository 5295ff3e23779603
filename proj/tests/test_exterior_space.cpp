#include <doctest.h>

#include <cmath>
#include <random>

#include "dcomp/errors.hpp"
#include "dcomp/exterior_space.hpp"

using namespace dcomp;

namespace {

HistoryElement smooth(double a, double b, double w, Grid g) {
  return embed_continuous([=](double t) { return a + b * std::sin(w * t + 0.3); }, g);
}

// A phi = (alpha(phi), phi') with the exact derivative
HistoryElement apply_A(const StieltjesKernel& alpha, const std::function<double(double)>& f,
                       const std::function<double(double)>& df, Grid g) {
  auto phi = embed_continuous(f, g);
  HistoryElement out(1, g);
  out.head(0) = stieltjes_apply(alpha, phi)(0);
  for (int i = 0; i <= g.N; ++i) out.body(0, i) = df(g.node(i));
  return out;
}

// max |a - b| over nodes with every body coordinate < N, relative to max |b|
double interior_error(const CompoundGridFunction& a, const CompoundGridFunction& b) {
  const int m = a.m, N = a.grid.N;
  double err = 0.0, scale = 0.0;
  std::vector<int> c(m);
  for (FaceIndex J = 0; J < (1u << m); ++J) {
    int k = face_size(J);
    for (size_t p = 0; p < a.face(J).points(); ++p) {
      size_t q = p;
      bool edge = false;
      for (int l = k - 1; l >= 0; --l) {
        c[l] = static_cast<int>(q % (N + 1));
        q /= N + 1;
        if (c[l] == N) edge = true;
      }
      if (edge) continue;
      err = std::max(err, std::abs(a.face(J)(p, 0) - b.face(J)(p, 0)));
      scale = std::max(scale, std::abs(b.face(J)(p, 0)));
    }
  }
  return err / scale;
}

}  // namespace

TEST_SUITE("exterior_space") {
  TEST_CASE("repeated factor wedges to zero") {
    Grid g{1.0, 16};
    auto f = smooth(0.4, 1.0, 2.0, g);
    auto w = wedge({f, f});
    CHECK(w.max_abs() == 0.0);
    auto w3 = wedge({f, smooth(1, 2, 1, g), f});
    CHECK(w3.max_abs() < 1e-15);
  }

  TEST_CASE("wedge of head-only and body-only elements") {
    Grid g{1.0, 8};
    HistoryElement phi(1, g), psi(1, g);
    phi.head(0) = 1.0;
    psi.body.setOnes();
    auto w = wedge({phi, psi});
    CHECK(w.face(0)(0, 0) == 0.0);
    for (int i = 0; i <= g.N; ++i) {
      CHECK(w.face(1)(i, 0).real() == doctest::Approx(-0.5));
      CHECK(w.face(2)(i, 0).real() == doctest::Approx(0.5));
    }
    for (size_t p = 0; p < w.face(3).points(); ++p) CHECK(w.face(3)(p, 0) == 0.0);
  }

  TEST_CASE("swapping factors negates every entry") {
    Grid g{1.0, 12};
    auto a = smooth(0.2, 1.0, 1.5, g), b = smooth(-1.0, 0.5, 3.0, g);
    auto d = wedge({a, b}) + wedge({b, a});
    CHECK(d.max_abs() == 0.0);
  }

  TEST_CASE("wedge is multilinear") {
    Grid g{1.0, 12};
    auto a = smooth(0.2, 1.0, 1.5, g), b = smooth(-1.0, 0.5, 3.0, g), c = smooth(0.7, -0.4, 2.2, g);
    auto lhs = wedge({2.0 * a + c, b});
    auto rhs = 2.0 * wedge({a, b}) + wedge({c, b});
    CHECK((lhs - rhs).max_abs() < 1e-14);
  }

  TEST_CASE("wedge against a repeated factor has zero inner product") {
    Grid g{1.0, 16};
    auto f = smooth(0.4, 1.0, 2.0, g);
    auto other = wedge({smooth(1, 2, 1, g), smooth(0, 1, 3, g)});
    CHECK(std::abs(compound_inner(wedge({f, f}), other)) == 0.0);
  }

  TEST_CASE("orthonormal pair wedges to norm one half") {
    Grid g{1.0, 32};
    auto phi = HistoryElement::unit_head(1, g);
    HistoryElement psi(1, g);
    psi.body.setOnes();
    psi.body(0, g.N) = 0.0;
    psi *= 1.0 / norm(psi);
    REQUIRE(std::abs(inner_product(phi, psi)) < 1e-15);
    auto w = wedge({phi, psi});
    CHECK(compound_inner(w, w).real() == doctest::Approx(0.5).epsilon(1e-14));
  }

  TEST_CASE("gram determinant identity for m = 2 and m = 3") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> u(-1, 1);
    Grid g{1.0, 24};
    auto rnd = [&] { return smooth(u(rng), u(rng), 1.0 + 2 * std::abs(u(rng)), g); };
    for (int m : {2, 3}) {
      for (int r = 0; r < 5; ++r) {
        std::vector<HistoryElement> v, w;
        for (int i = 0; i < m; ++i) {
          v.push_back(rnd());
          w.push_back(rnd());
        }
        Eigen::MatrixXd G(m, m);
        for (int i = 0; i < m; ++i)
          for (int j = 0; j < m; ++j) G(i, j) = inner_product(v[i], w[j]);
        double expect = G.determinant() / (m == 2 ? 2.0 : 6.0);
        double got = compound_inner(wedge(v), wedge(w)).real();
        CHECK(std::abs(got - expect) <= 1e-12 * std::max(1.0, std::abs(expect)));
      }
    }
  }

  TEST_CASE("antisymmetry of wedges and tensors") {
    Grid g{1.0, 10};
    auto a = smooth(0.2, 1.0, 1.5, g), b = smooth(-1.0, 0.5, 3.0, g);
    auto rep = check_antisymmetry(wedge({a, b}));
    CHECK(rep.max() < 1e-12);
    CHECK(rep.flags.empty());
    auto sym = check_antisymmetry(tensor({a, a}));
    CHECK(sym.max() > 1e-3);
    CHECK_FALSE(sym.flags.empty());
  }

  TEST_CASE("nonzero vertex face is flagged as improper") {
    Grid g{1.0, 10};
    auto a = smooth(0.2, 1.0, 1.5, g), b = smooth(-1.0, 0.5, 3.0, g);
    auto w = wedge({a, b});
    w.face(0)(0, 0) = 0.25;
    auto rep = check_antisymmetry(w);
    bool flagged = false;
    for (const auto& f : rep.flags)
      if (f == "improper face nonzero") flagged = true;
    CHECK(flagged);
  }

  TEST_CASE("antisymmetrize projects tensors onto wedges") {
    Grid g{1.0, 10};
    auto a = smooth(0.2, 1.0, 1.5, g), b = smooth(-1.0, 0.5, 3.0, g);
    auto p = antisymmetrize(tensor({a, b}));
    CHECK((p - wedge({a, b})).max_abs() < 1e-14);
  }

  TEST_CASE("vector-valued wedge keeps the gram identity") {
    Grid g{1.0, 10};
    auto v = [&](double s) {
      return embed_continuous([s](double t) { return Eigen::Vector2d(std::cos(s * t), t + s); }, 2, g);
    };
    std::vector<HistoryElement> x{v(1.0), v(2.0)}, y{v(0.5), v(3.0)};
    Eigen::Matrix2d G;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) G(i, j) = inner_product(x[i], y[j]);
    CHECK(compound_inner(wedge(x), wedge(y)).real() == doctest::Approx(G.determinant() / 2).epsilon(1e-12));
    CHECK(check_antisymmetry(wedge(x)).max() < 1e-12);
  }

  TEST_CASE("diagonal shift") {
    FaceGrid a(1, 4, 1);
    for (int i = 0; i < 5; ++i) a(i, 0) = i + 1.0;
    auto s0 = diagonal_shift(a, 0);
    CHECK(s0.data == a.data);
    auto s1 = diagonal_shift(a, 1);
    CHECK(s1(0, 0) == 2.0);
    CHECK(s1(3, 0) == 5.0);
    CHECK(s1(4, 0) == 0.0);
    auto full = diagonal_shift(a, 1.0, 0.25);
    CHECK(full(0, 0) == 5.0);
    for (int i = 1; i < 5; ++i) CHECK(full(i, 0) == 0.0);
    auto big = diagonal_shift(a, 5);
    for (int i = 0; i < 5; ++i) CHECK(big(i, 0) == 0.0);
    CHECK_THROWS_AS(diagonal_shift(a, -1), DomainError);
  }

  TEST_CASE("diagonal shift semigroup law on a 2-face") {
    const int N = 6;
    FaceGrid a(2, N, 1);
    for (size_t p = 0; p < a.points(); ++p) a(p, 0) = std::sin(0.7 * p) + 1.0;
    for (int s = 0; s <= N + 1; ++s)
      for (int t = 0; t <= N + 1; ++t) CHECK(diagonal_shift(diagonal_shift(a, s), t).data == diagonal_shift(a, s + t).data);
  }

  TEST_CASE("compound semigroup at time zero and order one") {
    auto md = build_delay_decay(1.0, 0.1).model;
    Grid g{1.0, 20};
    auto a = smooth(0.2, 1.0, 1.5, g), b = smooth(-1.0, 0.5, 3.0, g);
    CHECK((compound_semigroup_apply(md, {a, b}, 0.0) - wedge({a, b})).max_abs() == 0.0);
    auto one = compound_semigroup_apply(md, {a}, 0.5);
    auto ref = semigroup_apply(md, a, 0.5);
    CHECK(one.face(0)(0, 0).real() == ref.head(0));
    for (int i = 0; i <= g.N; ++i) CHECK(one.face(1)(i, 0).real() == ref.body(0, i));
  }

  TEST_CASE("compound semigroup of the vector ode decay") {
    LinearDelayModel md;
    md.n = 2;
    md.tau = 1.0;
    md.alpha = StieltjesKernel::atom(0.0, -Eigen::MatrixXd::Identity(2, 2));
    md.b_tilde = Eigen::MatrixXd::Identity(2, 2);
    md.c_kernel = StieltjesKernel::atom(0.0, Eigen::MatrixXd::Identity(2, 2));
    Grid g{1.0, 50};
    auto e1 = embed_continuous([](double t) { return Eigen::Vector2d(std::exp(-t), 0.0); }, 2, g);
    auto e2 = embed_continuous([](double t) { return Eigen::Vector2d(0.5 * std::exp(-t), std::exp(-t)); }, 2, g);
    auto phi0 = wedge({e1, e2});
    double t = 0.8;
    auto r = compound_semigroup_apply(md, {e1, e2}, t);
    double expect = std::exp(-4 * t) * compound_inner(phi0, phi0).real();
    CHECK(compound_inner(r, r).real() == doctest::Approx(expect).epsilon(1e-8));
  }

  TEST_CASE("generator of order one is the derivative with the head equation") {
    auto alpha = StieltjesKernel::scalar_atom(-1.0, -1.0) + StieltjesKernel::scalar_atom(0.0, 0.3);
    LinearDelayModel md;
    md.alpha = alpha;
    md.b_tilde = Eigen::MatrixXd::Ones(1, 1);
    md.c_kernel = StieltjesKernel::scalar_atom(0.0, 1.0);
    auto f = [](double t) { return std::cos(2 * t); };
    auto df = [](double t) { return -2 * std::sin(2 * t); };
    double prev = 1e9;
    for (int N : {40, 80, 160}) {
      Grid g{1.0, N};
      auto phi = embed_continuous(f, g);
      auto out = compound_generator_apply(md, tensor({phi}));
      auto ref = tensor({apply_A(alpha, f, df, g)});
      double err = interior_error(out, ref);
      CHECK(err < 4.0 * g.h());
      CHECK(err < prev);
      prev = err;
    }
  }

  TEST_CASE("generator satisfies the leibniz rule on tensors") {
    auto alpha = StieltjesKernel::scalar_atom(0.0, -0.1) + StieltjesKernel::scalar_atom(-1.0, -0.4);
    LinearDelayModel md;
    md.alpha = alpha;
    md.b_tilde = Eigen::MatrixXd::Ones(1, 1);
    md.c_kernel = StieltjesKernel::scalar_atom(0.0, 1.0);
    auto f1 = [](double t) { return std::cos(2 * t); };
    auto d1 = [](double t) { return -2 * std::sin(2 * t); };
    auto f2 = [](double t) { return 1.0 + t * t; };
    auto d2 = [](double t) { return 2 * t; };
    double prev = 1e9;
    for (int N : {20, 40, 80}) {
      Grid g{1.0, N};
      auto p1 = embed_continuous(f1, g), p2 = embed_continuous(f2, g);
      auto out = compound_generator_apply(md, tensor({p1, p2}));
      auto ref = tensor({apply_A(alpha, f1, d1, g), p2}) + tensor({p1, apply_A(alpha, f2, d2, g)});
      double err = interior_error(out, ref);
      CHECK(err < 4.0 * g.h());
      CHECK(err < prev);
      prev = err;
    }
  }

  TEST_CASE("constants have zero derivative under zero kernels") {
    LinearDelayModel md;
    md.alpha = StieltjesKernel::zero(1, 1);
    md.b_tilde = Eigen::MatrixXd::Ones(1, 1);
    md.c_kernel = StieltjesKernel::scalar_atom(0.0, 1.0);
    Grid g{1.0, 10};
    auto c = embed_continuous([](double) { return 1.5; }, g);
    auto out = compound_generator_apply(md, tensor({c, c, c}));
    CHECK(out.max_abs() < 1e-12);
  }

  TEST_CASE("broken traces are rejected") {
    auto md = build_delay_decay(1.0, 0.1).model;
    Grid g{1.0, 10};
    auto a = smooth(0.2, 1.0, 1.5, g), b = smooth(-1.0, 0.5, 3.0, g);
    auto w = wedge({a, b});
    int coords[2] = {3, g.N};
    w.face(3)(point_index(coords, 2, g.N), 0) += 0.1;
    CHECK_THROWS_AS(compound_generator_apply(md, w), DomainError);
  }

  TEST_CASE("finite difference of the semigroup approaches the generator") {
    auto md = build_delay_decay(1.0, 0.1).model;
    auto f1 = [](double t) { return std::cos(2 * t); };
    auto f2 = [](double t) { return 1.0 + 0.5 * t; };
    double prev = 1e9;
    for (int N : {25, 50, 100}) {
      Grid g{1.0, N};
      auto p1 = embed_continuous(f1, g), p2 = embed_continuous(f2, g);
      auto phi = wedge({p1, p2});
      auto fd = compound_semigroup_apply(md, {p1, p2}, g.h()) - phi;
      fd *= 1.0 / g.h();
      auto gen = compound_generator_apply(md, phi);
      double err = compound_norm(fd - gen) / compound_norm(gen);
      CHECK(err < prev);
      prev = err;
    }
    CHECK(prev < 0.05);
  }
}
