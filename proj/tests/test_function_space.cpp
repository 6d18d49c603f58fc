#include <gtest/gtest.h>

#include "far/function_space.hpp"
#include "support.hpp"

using namespace far;
using namespace far::testing;

TEST(Grid, TrapezoidWeights) {
  const Grid g = make_grid(0.0, 1.0, 17);
  const double h = 1.0 / 16.0;
  EXPECT_DOUBLE_EQ(g->points()[0], 0.0);
  EXPECT_DOUBLE_EQ(g->points()[16], 1.0);
  EXPECT_DOUBLE_EQ(g->points()[8], 0.5);
  EXPECT_DOUBLE_EQ(g->weights()[0], h / 2);
  EXPECT_DOUBLE_EQ(g->weights()[16], h / 2);
  for (int i = 1; i < 16; ++i) EXPECT_DOUBLE_EQ(g->weights()[i], h);
  EXPECT_NEAR(g->weights().sum(), 1.0, 1e-12);
}

TEST(Grid, ThreePointsIsTooSmall) {
  // Three points would give weights (0.25, 0.5, 0.25) but the minimum size is 16.
  EXPECT_EQ(code_of([] { make_grid(0, 1, 3); }), ErrorCode::GridTooSmall);
  EXPECT_EQ(code_of([] { make_grid(0, 1, 2); }), ErrorCode::GridTooSmall);
}

TEST(Grid, InvalidSupport) {
  EXPECT_EQ(code_of([] { make_grid(1, 1, 32); }), ErrorCode::InvalidSupport);
  EXPECT_EQ(code_of([] { make_grid(2, 1, 32); }), ErrorCode::InvalidSupport);
}

TEST(Grid, ForexSupport) {
  const Grid g = make_grid(-0.0043, 0.0043, 1024);
  EXPECT_EQ(g->size(), 1024u);
  EXPECT_DOUBLE_EQ(g->points()[0], -0.0043);
  EXPECT_DOUBLE_EQ(g->points()[1023], 0.0043);
  EXPECT_NEAR(g->weights().sum(), 0.0086, 1e-12 * 0.0086);
  for (int i = 1; i < 1024; ++i) EXPECT_GT(g->points()[i], g->points()[i - 1]);
}

TEST(GridFunction, RejectsNonFinite) {
  const Grid g = make_grid(0, 1, 16);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(16);
  v[3] = std::nan("");
  EXPECT_THROW(GridFunction(g, v), Error);
}

TEST(GridFunction, MismatchedGrids) {
  const GridFunction f = GridFunction::constant(make_grid(0, 1, 16), 1.0);
  const GridFunction g = GridFunction::constant(make_grid(0, 2, 16), 1.0);
  EXPECT_EQ(code_of([&] { inner(f, g); }), ErrorCode::GridMismatch);
  // Equal parameters count as the same grid even when built separately.
  EXPECT_NO_THROW(inner(f, GridFunction::constant(make_grid(0, 1, 16), 1.0)));
}

TEST(Inner, Examples) {
  const Grid g = make_grid(0, 1, 1025);
  const GridFunction one = GridFunction::constant(g, 1.0);
  EXPECT_NEAR(inner(one, one), 1.0, 1e-14);
  const GridFunction x = GridFunction::sample(g, [](double t) { return t; });
  EXPECT_NEAR(inner(x, x), 1.0 / 3.0, 1e-5);

  Rng rng = make_stream(1);
  const GridFunction f = random_function(g, rng);
  GridFunction h = random_function(g, rng);
  h -= (inner(h, f) / inner(f, f)) * f;
  EXPECT_NEAR(inner(f, h), 0.0, 1e-12 * norm(f) * norm(h));
}

TEST(Inner, QuadratureConvergence) {
  // Trapezoid error is O(h^2): doubling resolution cuts it by about 4.
  auto error = [](std::size_t n) {
    const Grid g = make_grid(0, 1, n);
    const GridFunction s = GridFunction::sample(g, [](double x) { return std::sin(3 * x); });
    const GridFunction e = GridFunction::sample(g, [](double x) { return std::exp(x); });
    const double exact = (std::exp(1.0) * (std::sin(3.0) - 3 * std::cos(3.0)) + 3.0) / 10.0;
    return std::abs(inner(s, e) - exact);
  };
  for (std::size_t n : {33u, 65u, 129u, 257u}) EXPECT_GE(error(n) / error(2 * n - 1), 3.0) << n;
}

TEST(ProjectZeroIntegral, Examples) {
  const Grid g = make_grid(0, 1, 101);
  const GridFunction c = project_zero_integral(GridFunction::constant(g, 5.0));
  EXPECT_LT(c.values().cwiseAbs().maxCoeff(), 1e-14);

  const GridFunction x = GridFunction::sample(g, [](double t) { return t; });
  const GridFunction p = project_zero_integral(x);
  for (Eigen::Index i = 0; i < 101; ++i) EXPECT_NEAR(p.values()[i], g->points()[i] - 0.5, 1e-14);

  Rng rng = make_stream(2);
  const GridFunction f = project_zero_integral(random_function(g, rng));
  EXPECT_NEAR(integral(f), 0.0, 1e-12);
  EXPECT_LT((project_zero_integral(f).values() - f.values()).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Outer, Examples) {
  const Grid g = make_grid(0, 1, 64);
  Rng rng = make_stream(3);
  GridFunction phi = random_function(g, rng);
  phi *= 1.0 / norm(phi);
  const GridFunction back = apply_operator(outer(phi, phi), phi);
  EXPECT_LT((back.values() - phi.values()).cwiseAbs().maxCoeff(), 1e-10);

  GridFunction orth = random_function(g, rng);
  orth -= inner(orth, phi) * phi;
  EXPECT_LT(apply_operator(outer(phi, phi), orth).values().cwiseAbs().maxCoeff(), 1e-10);

  for (int rep = 0; rep < 100; ++rep) {
    const GridFunction u = random_function(g, rng);
    const GridFunction v = random_function(g, rng);
    const GridFunction w = random_function(g, rng);
    const OperatorRep op = outer(u, v);
    EXPECT_DOUBLE_EQ(op.kernel()(3, 5), u[3] * v[5]);
    const Eigen::VectorXd expect = inner(v, w) * u.values();
    EXPECT_LT((apply_operator(op, w).values() - expect).cwiseAbs().maxCoeff(), 1e-10 * (1 + expect.cwiseAbs().maxCoeff()));
  }
}

TEST(ApplyOperator, CompleteBasisActsAsIdentity) {
  const Grid g = make_grid(-1, 2, 40);
  Rng rng = make_stream(4);
  // Quadrature-orthonormal basis from QR of random functions in the W^{1/2} geometry.
  const auto n = static_cast<Eigen::Index>(g->size());
  Eigen::MatrixXd r(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) r(i, j) = standard_normal(rng);
  const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(r).householderQ();
  const Eigen::VectorXd inv_sqrt_w = g->weights().cwiseSqrt().cwiseInverse();
  OperatorRep id = OperatorRep::zero(g);
  for (Eigen::Index k = 0; k < n; ++k) {
    const GridFunction e(g, inv_sqrt_w.cwiseProduct(q.col(k)));
    id += outer(e, e);
  }
  const GridFunction f = random_function(g, rng);
  EXPECT_LT((apply_operator(id, f).values() - f.values()).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_LT((apply_operator(OperatorRep::identity(g), f).values() - f.values()).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_EQ(apply_operator(OperatorRep::zero(g), f).values().cwiseAbs().maxCoeff(), 0.0);
}

TEST(Adjoint, Identity) {
  const Grid g = make_grid(0, 3, 64);
  Rng rng = make_stream(5);
  for (int rep = 0; rep < 100; ++rep) {
    const OperatorRep k = random_kernel(g, rng);
    const GridFunction f = random_function(g, rng);
    const GridFunction h = random_function(g, rng);
    const double lhs = inner(f, apply_operator(k, h));
    const double rhs = inner(apply_operator(adjoint(k), f), h);
    const double scale = 1 + max_abs(k.kernel()) * g->length() * norm(f) * norm(h);
    EXPECT_LE(std::abs(lhs - rhs), 1e-10 * scale);
    EXPECT_EQ(adjoint(adjoint(k)).kernel(), k.kernel());
  }
  const OperatorRep s = random_psd(g, rng, 3);
  EXPECT_LT(max_abs(adjoint(s).kernel() - s.kernel()), 1e-15 * max_abs(s.kernel()));
}

TEST(Compose, MatchesSequentialApplication) {
  const Grid g = make_grid(0, 1, 48);
  Rng rng = make_stream(6);
  const OperatorRep a = random_kernel(g, rng);
  const OperatorRep b = random_kernel(g, rng);
  const GridFunction f = random_function(g, rng);
  const Eigen::VectorXd direct = apply_operator(a, apply_operator(b, f)).values();
  const Eigen::VectorXd composed = apply_operator(compose(a, b), f).values();
  EXPECT_LT((direct - composed).cwiseAbs().maxCoeff(), 1e-10 * direct.cwiseAbs().maxCoeff());
}

TEST(Eigh, RankOneAndTwo) {
  const Grid g = make_grid(0, 1, 64);
  const GridFunction phi = (1.0 / std::sqrt(0.5)) * GridFunction::sample(g, [](double x) { return std::sin(M_PI * x); });
  const GridFunction psi = (1.0 / std::sqrt(0.5)) * GridFunction::sample(g, [](double x) { return std::sin(2 * M_PI * x); });
  const GridFunction phi_n = (1.0 / norm(phi)) * phi;
  GridFunction psi_n = psi - inner(psi, phi_n) * phi_n;
  psi_n *= 1.0 / norm(psi_n);

  const EigenSystem one = eigh_operator(3.0 * outer(phi_n, phi_n));
  EXPECT_NEAR(one.eigenvalue(0), 3.0, 1e-12);
  EXPECT_LT(one.eigenvalue(1), 1e-12);
  EXPECT_LT((one.eigenfunction(0).values() - phi_n.values()).cwiseAbs().maxCoeff(), 1e-8);

  const EigenSystem two = eigh_operator(2.0 * outer(phi_n, phi_n) + outer(psi_n, psi_n));
  EXPECT_NEAR(two.eigenvalue(0), 2.0, 1e-12);
  EXPECT_NEAR(two.eigenvalue(1), 1.0, 1e-12);
}

TEST(Eigh, NegatedInputGivesSameEigenfunctionSigns) {
  const Grid g = make_grid(0, 1, 48);
  Rng rng = make_stream(7);
  const GridFunction u = random_function(g, rng);
  const EigenSystem e1 = eigh_operator(outer(u, u));
  const GridFunction v = -1.0 * u;
  const EigenSystem e2 = eigh_operator(outer(v, v));
  EXPECT_EQ(e1.eigenfunctions().col(0), e2.eigenfunctions().col(0));
  const Eigen::VectorXd& c = e1.eigenfunctions().col(0);
  Eigen::Index at = 0;
  c.cwiseAbs().maxCoeff(&at);
  EXPECT_GT(c[at], 0.0);
}

TEST(Eigh, ReconstructionAndOrthonormality) {
  const Grid g = make_grid(-2, 1, 48);
  Rng rng = make_stream(8);
  for (int rep = 0; rep < 100; ++rep) {
    const OperatorRep q = random_psd(g, rng, 1 + rep % 10);
    const EigenSystem e = eigh_operator(q);
    const double l1 = e.eigenvalue(0);
    OperatorRep rec = OperatorRep::zero(g);
    for (std::size_t k = 0; k < e.size(); ++k) {
      const GridFunction v = e.eigenfunction(k);
      rec += e.eigenvalue(k) * outer(v, v);
      if (k > 0) {
        EXPECT_GE(e.eigenvalue(k - 1), e.eigenvalue(k));
      }
      EXPECT_GE(e.eigenvalue(k), 0.0);
      const Eigen::VectorXd resid = apply_operator(q, v).values() - e.eigenvalue(k) * v.values();
      EXPECT_LE(std::sqrt(g->weights().dot(resid.cwiseAbs2())), 1e-8 * (1 + l1));
    }
    EXPECT_LE(max_abs(rec.kernel() - q.kernel()), 1e-8 * l1);
    const Eigen::MatrixXd& v = e.eigenfunctions();
    const Eigen::MatrixXd gram = v.transpose() * g->weights().asDiagonal() * v;
    EXPECT_LT(max_abs(gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())), 1e-8);
  }
}

TEST(Eigh, Parseval) {
  const Grid g = make_grid(0, 1, 40);
  const EigenSystem e = eigh_operator(strictly_positive(g));
  Rng rng = make_stream(9);
  for (int rep = 0; rep < 100; ++rep) {
    const GridFunction f = random_function(g, rng);
    double s = 0.0;
    for (std::size_t k = 0; k < e.size(); ++k) s += std::pow(inner(e.eigenfunction(k), f), 2);
    EXPECT_NEAR(s, inner(f, f), 1e-8 * inner(f, f));
  }
}

TEST(Eigh, Errors) {
  const Grid g = make_grid(0, 1, 32);
  Rng rng = make_stream(10);
  EXPECT_EQ(code_of([&] { eigh_operator(random_kernel(g, rng)); }), ErrorCode::NotSymmetric);
  const GridFunction u = random_function(g, rng);
  EXPECT_EQ(code_of([&] { eigh_operator(-1.0 * outer(u, u)); }), ErrorCode::NonPSD);
}

TEST(Eigh, TraceIdentity) {
  const Grid g = make_grid(0, 1, 48);
  Rng rng = make_stream(11);
  const OperatorRep q = random_psd(g, rng, 5);
  EXPECT_NEAR(eigh_operator(q).eigenvalues().sum(), trace(q), 1e-8 * trace(q));
}

TEST(Svd, RankOne) {
  const Grid g = make_grid(0, 1, 64);
  Rng rng = make_stream(12);
  GridFunction u = random_function(g, rng);
  GridFunction v = random_function(g, rng);
  u *= 1.0 / norm(u);
  v *= 1.0 / norm(v);
  const SingularSystem s = svd_operator(2.0 * outer(u, v), 1);
  EXPECT_NEAR(s.singular_values[0], 2.0, 1e-12);
  const double sign = inner(s.left[0], u) > 0 ? 1.0 : -1.0;
  EXPECT_LT((s.left[0].values() - sign * u.values()).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_LT((s.right[0].values() - sign * v.values()).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Svd, PsdMatchesEigen) {
  const Grid g = make_grid(0, 1, 48);
  Rng rng = make_stream(13);
  const OperatorRep q = random_psd(g, rng, 4);
  const EigenSystem e = eigh_operator(q);
  const SingularSystem s = svd_operator(q, 4);
  for (int k = 0; k < 4; ++k) {
    EXPECT_NEAR(s.singular_values[k], e.eigenvalue(static_cast<std::size_t>(k)), 1e-8 * e.eigenvalue(0));
    EXPECT_LT((s.left[static_cast<std::size_t>(k)].values() - e.eigenfunction(static_cast<std::size_t>(k)).values())
                  .cwiseAbs()
                  .maxCoeff(),
              1e-8);
  }
}

TEST(Svd, BestRankFiveApproximation) {
  const Grid g = make_grid(0, 1, 48);
  Rng rng = make_stream(14);
  const OperatorRep k = random_kernel(g, rng);
  const SingularSystem s = svd_operator(k, 5);
  OperatorRep approx = OperatorRep::zero(g);
  for (int j = 0; j < 5; ++j)
    approx += s.singular_values[j] * outer(s.left[static_cast<std::size_t>(j)], s.right[static_cast<std::size_t>(j)]);
  // Oracle: dense SVD of W^{1/2} K W^{1/2}; Eckart-Young residual in Hilbert-Schmidt norm.
  const Eigen::VectorXd sw = g->weights().cwiseSqrt();
  const Eigen::MatrixXd m = sw.asDiagonal() * k.kernel() * sw.asDiagonal();
  const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues();
  const double oracle = std::sqrt(sv.tail(sv.size() - 5).squaredNorm());
  const Eigen::MatrixXd r = sw.asDiagonal() * (k.kernel() - approx.kernel()) * sw.asDiagonal();
  EXPECT_NEAR(r.norm(), oracle, 1e-8 * (1 + oracle));
  for (int j = 1; j < 5; ++j) EXPECT_GE(s.singular_values[j - 1], s.singular_values[j]);
}

TEST(Cdf, Examples) {
  const Grid g = make_grid(0, 1, 101);
  const GridFunction F = cdf_from_density(uniform_density(g));
  for (Eigen::Index i = 0; i < 101; ++i) EXPECT_NEAR(F.values()[i], g->points()[i], 1e-12);
  EXPECT_EQ(cdf_from_density(GridFunction::zero(g)).values().cwiseAbs().maxCoeff(), 0.0);

  const Grid g2 = make_grid(0, 1, 1001);
  const GridFunction tri = GridFunction::sample(g2, [](double x) { return triangular_pdf(x, 0, 1); });
  const GridFunction Ft = cdf_from_density(tri);
  EXPECT_NEAR(interpolate(Ft, 0.5), 0.5, 1e-4);
  EXPECT_NEAR(Ft.values()[1000], 1.0, 1e-10);
  for (Eigen::Index i = 1; i < 1001; ++i) EXPECT_GE(Ft.values()[i], Ft.values()[i - 1]);

  Eigen::VectorXd neg = Eigen::VectorXd::Constant(101, 1.0);
  neg[50] = -1e-6;
  EXPECT_EQ(code_of([&] { cdf_from_density(GridFunction(g, neg)); }), ErrorCode::NegativeDensity);
}

TEST(Quantile, Examples) {
  const Grid g = make_grid(0, 1, 101);
  EXPECT_NEAR(quantile(uniform_density(g), 0.05), 0.05, 1e-6);
  EXPECT_NEAR(quantile(uniform_density(g), 0.5), 0.5, 1e-12);
  const Grid g2 = make_grid(0, 1, 1001);
  const GridFunction tri = GridFunction::sample(g2, [](double x) { return triangular_pdf(x, 0, 1); });
  EXPECT_NEAR(quantile(tri, 0.5), 0.5, 1e-3);
  EXPECT_THROW(quantile(tri, 0.0), Error);
  EXPECT_THROW(quantile(tri, 1.0), Error);
}

TEST(Interpolate, Linear) {
  const Grid g = make_grid(0, 1, 17);
  const GridFunction f = GridFunction::sample(g, [](double x) { return 2 * x + 1; });
  EXPECT_NEAR(interpolate(f, 0.3), 1.6, 1e-14);
  EXPECT_DOUBLE_EQ(interpolate(f, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(interpolate(f, 1.0), 3.0);
}
