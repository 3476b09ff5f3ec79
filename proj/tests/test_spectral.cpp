#include "hpgcn/spectral.hpp"

#include "hpgcn/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace hpgcn;

namespace {

SparseAdjacency make(Index n, std::vector<Edge> edges) {
  return build_adjacency(n, edges);
}

std::vector<Edge> random_edges(Index n, Scalar p, Rng& rng) {
  std::vector<Edge> edges;
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j)
      if (rng.uniform() < p) edges.push_back({i, j, 1.0});
  return edges;
}

Vector random_vector(Index n, Rng& rng) {
  Vector x(n);
  for (Index i = 0; i < n; ++i) x[i] = rng.normal();
  return x;
}

}  // namespace

TEST_CASE("eigendecomposition of K2") {
  const auto basis = dense_eigendecompose(make(2, {{0, 1}}));
  CHECK(basis.lambdas[0] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(basis.lambdas[1] == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("two isolated nodes give the identity operator") {
  const auto basis = dense_eigendecompose(make(2, {}));
  CHECK(basis.lambdas[0] == 1.0);
  CHECK(basis.lambdas[1] == 1.0);
  CHECK(basis.u.isIdentity(0.0));
}

TEST_CASE("triangle spectrum is 0, 1.5, 1.5") {
  const auto basis = dense_eigendecompose(make(3, {{0, 1}, {1, 2}, {0, 2}}));
  CHECK(basis.lambdas[0] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(basis.lambdas[1] == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(basis.lambdas[2] == doctest::Approx(1.5).epsilon(1e-12));
  // repeated eigenvalue: only the subspace is determined, so compare the
  // projector of the degenerate pair against its analytic value
  const Matrix p = basis.u.col(1) * basis.u.col(1).transpose() +
                   basis.u.col(2) * basis.u.col(2).transpose();
  const Matrix expected =
      Matrix::Identity(3, 3) - Matrix::Constant(3, 3, 1.0 / 3.0);
  CHECK((p - expected).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("eigendecomposition cap is enforced") {
  CHECK_THROWS_AS(dense_eigendecompose(make(3, {{0, 1}}), 2),
                  std::invalid_argument);
}

TEST_CASE("basis invariants on random graphs") {
  Rng rng(23);
  for (int trial = 0; trial < 10; ++trial) {
    const Index n = 2 + rng.uniform_index(40);
    const auto adj = build_adjacency(n, random_edges(n, 0.2, rng));
    const auto deg = degrees(adj);
    const auto basis = dense_eigendecompose(adj);

    for (Index i = 0; i < n; ++i) {
      CHECK(basis.lambdas[i] >= -1e-9);
      CHECK(basis.lambdas[i] <= 2.0 + 1e-9);
      if (i > 0) CHECK(basis.lambdas[i] >= basis.lambdas[i - 1]);
    }
    const Matrix gram = basis.u.transpose() * basis.u;
    CHECK((gram - Matrix::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-9);
    // residual per eigenpair
    for (Index i = 0; i < n; ++i) {
      const Vector lu = laplacian_matvec(adj, deg, basis.u.col(i));
      const Vector residual = lu - basis.lambdas[i] * basis.u.col(i);
      CHECK(residual.norm() <= 1e-8 * std::max(1.0, lu.norm()));
    }
  }
}

TEST_CASE("gft basics") {
  const auto basis = dense_eigendecompose(make(2, {{0, 1}}));
  SUBCASE("an eigenvector maps to a unit spectrum") {
    const Vector xhat = gft(basis, basis.u.col(0));
    CHECK(xhat[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(xhat[1]) < 1e-12);
  }
  SUBCASE("zero maps to zero") {
    CHECK(gft(basis, Vector::Zero(2)).isZero(0.0));
  }
  SUBCASE("alternating K2 signal has all energy at lambda = 2") {
    Vector x(2);
    x << 1, -1;
    const Vector xhat = gft(basis, x);
    CHECK(xhat[0] * xhat[0] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(xhat[1] * xhat[1] == doctest::Approx(2.0).epsilon(1e-12));
  }
  SUBCASE("length mismatch rejected") {
    CHECK_THROWS_AS(gft(basis, Vector::Zero(3)), std::invalid_argument);
  }
}

TEST_CASE("igft inverts gft") {
  Rng rng(5);
  const auto basis =
      dense_eigendecompose(make(6, {{0, 1}, {1, 2}, {3, 4}, {0, 2}}));
  SUBCASE("unit spectrum maps to the eigenvector") {
    Vector e0 = Vector::Zero(6);
    e0[0] = 1.0;
    CHECK((igft(basis, e0) - basis.u.col(0)).norm() < 1e-12);
  }
  SUBCASE("roundtrip") {
    const Vector x = random_vector(6, rng);
    CHECK((igft(basis, gft(basis, x)) - x).norm() <= 1e-9 * x.norm());
  }
  SUBCASE("zero maps to zero") {
    CHECK(igft(basis, Vector::Zero(6)).isZero(0.0));
  }
}

TEST_CASE("parseval holds for random signals") {
  Rng rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    const Index n = 2 + rng.uniform_index(255);
    const auto adj = build_adjacency(n, random_edges(n, 0.05, rng));
    const auto basis = dense_eigendecompose(adj);
    for (int s = 0; s < 5; ++s) {
      const Vector x = random_vector(n, rng);
      CHECK(std::abs(gft(basis, x).norm() - x.norm()) <= 1e-9 * x.norm());
    }
  }
}

TEST_CASE("frequency_response") {
  Vector grid(3);
  grid << 0, 1, 2;
  SUBCASE("all-pass") {
    Vector t(1);
    t << 1;
    const Vector h = frequency_response(FilterCoefficients(t), grid);
    for (Index i = 0; i < 3; ++i) CHECK(h[i] == 1.0);
  }
  SUBCASE("lambda squared") {
    Vector t(3);
    t << 0, 0, 1;
    const Vector h = frequency_response(FilterCoefficients(t), grid);
    CHECK(h[2] == 4.0);
  }
  SUBCASE("linear ramp is the high-pass shape") {
    Vector t(2);
    t << 0, 1;
    const Vector h = frequency_response(FilterCoefficients(t), grid);
    CHECK(h[0] == 0.0);
    CHECK(h[1] == 1.0);
    CHECK(h[2] == 2.0);
  }
}

TEST_CASE("pure monomials are non-decreasing on the spectrum range") {
  Vector grid(41);
  for (Index i = 0; i <= 40; ++i) grid[i] = 2.0 * i / 40.0;
  for (Index k = 1; k < 8; ++k) {
    const Vector h =
        frequency_response(FilterCoefficients::monomial(k, 8), grid);
    for (Index i = 1; i < grid.size(); ++i) CHECK(h[i] >= h[i - 1]);
  }
}

TEST_CASE("spectral filter on K2") {
  const auto adj = make(2, {{0, 1}});
  const auto basis = dense_eigendecompose(adj);
  Vector x(2);
  x << 1, -1;
  SUBCASE("identity filter") {
    Vector t(1);
    t << 1;
    CHECK((apply_spectral_filter(basis, FilterCoefficients(t), x) - x).norm() <
          1e-12);
  }
  SUBCASE("theta = e_1 equals one Laplacian application") {
    const Vector y =
        apply_spectral_filter(basis, FilterCoefficients::monomial(1, 2), x);
    CHECK(y[0] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(y[1] == doctest::Approx(-2.0).epsilon(1e-12));
    const Vector spatial = laplacian_matvec(adj, degrees(adj), x);
    CHECK((y - spatial).norm() < 1e-12);
  }
  SUBCASE("theta = e_2 squares the top frequency") {
    const Vector y =
        apply_spectral_filter(basis, FilterCoefficients::monomial(2, 3), x);
    CHECK(y[0] == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(y[1] == doctest::Approx(-4.0).epsilon(1e-12));
  }
}

TEST_CASE("spatial filter examples") {
  const auto adj = make(2, {{0, 1}});
  const auto deg = degrees(adj);
  Vector x(2);
  x << 1, -1;
  SUBCASE("identity") {
    Vector t(1);
    t << 1;
    CHECK((apply_spatial_filter(adj, deg, FilterCoefficients(t), x) - x)
              .norm() == 0.0);
  }
  SUBCASE("one matvec") {
    const Vector y =
        apply_spatial_filter(adj, deg, FilterCoefficients::monomial(1, 2), x);
    CHECK(y[0] == 2.0);
    CHECK(y[1] == -2.0);
  }
}

TEST_CASE("spatial and spectral routes agree") {
  Rng rng(17);
  for (int trial = 0; trial < 25; ++trial) {
    const Index n = 2 + rng.uniform_index(63);
    const auto adj = build_adjacency(n, random_edges(n, 0.1, rng));
    const auto deg = degrees(adj);
    const auto basis = dense_eigendecompose(adj);
    const Index order = 1 + rng.uniform_index(8);
    Vector theta(order);
    for (Index k = 0; k < order; ++k) theta[k] = rng.normal();
    const FilterCoefficients coeffs(theta);
    const Vector x = random_vector(n, rng);
    const Vector spectral = apply_spectral_filter(basis, coeffs, x);
    const Vector spatial = apply_spatial_filter(adj, deg, coeffs, x);
    CHECK((spectral - spatial).norm() <=
          1e-8 * std::max(1.0, spectral.norm()));
  }
}

TEST_CASE("spatial filter is linear") {
  Rng rng(19);
  const Index n = 24;
  const auto adj = build_adjacency(n, random_edges(n, 0.15, rng));
  const auto deg = degrees(adj);
  Vector theta(4);
  for (Index k = 0; k < 4; ++k) theta[k] = rng.normal();
  const FilterCoefficients coeffs(theta);
  const Vector x = random_vector(n, rng);
  const Vector z = random_vector(n, rng);
  const Scalar a = 1.7, b = -0.4;
  const Vector lhs = apply_spatial_filter(adj, deg, coeffs, a * x + b * z);
  const Vector rhs = a * apply_spatial_filter(adj, deg, coeffs, x) +
                     b * apply_spatial_filter(adj, deg, coeffs, z);
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("spectral energy profile") {
  SUBCASE("constant signal on a regular connected graph sits at lambda 0") {
    const auto adj = make(4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}});
    const auto basis = dense_eigendecompose(adj);
    const auto report =
        spectral_energy_profile(basis, Vector::Ones(4), 0.1);
    CHECK(report.energy_above_cutoff == doctest::Approx(0.0).epsilon(1e-12));
    CHECK_FALSE(report.zero_signal);
  }
  SUBCASE("alternating K2 signal is pure high frequency") {
    const auto basis = dense_eigendecompose(make(2, {{0, 1}}));
    Vector x(2);
    x << 1, -1;
    const auto report = spectral_energy_profile(basis, x, 1.0);
    CHECK(report.energy_above_cutoff == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("zero signal is flagged") {
    const auto basis = dense_eigendecompose(make(2, {{0, 1}}));
    const auto report = spectral_energy_profile(basis, Vector::Zero(2), 1.0);
    CHECK(report.zero_signal);
    CHECK(report.energy_above_cutoff == 0.0);
  }
  SUBCASE("parseval ties magnitudes to the signal norm") {
    Rng rng(3);
    const auto adj = build_adjacency(10, random_edges(10, 0.3, rng));
    const auto basis = dense_eigendecompose(adj);
    const Vector x = random_vector(10, rng);
    const auto report = spectral_energy_profile(basis, x, 0.5);
    CHECK(report.magnitudes.squaredNorm() ==
          doctest::Approx(x.squaredNorm()).epsilon(1e-9));
  }
  SUBCASE("cutoff outside the spectrum range is rejected") {
    const auto basis = dense_eigendecompose(make(2, {{0, 1}}));
    CHECK_THROWS_AS(spectral_energy_profile(basis, Vector::Ones(2), 2.5),
                    std::invalid_argument);
  }
}

TEST_CASE("gaussian band-pass response peaks at its center") {
  Vector grid(5);
  grid << 0, 0.5, 1.0, 1.5, 2.0;
  const Vector h = gaussian_bandpass_response(grid, 1.0, 0.3);
  CHECK(h[2] == 1.0);
  CHECK(h[0] < h[1]);
  CHECK(h[1] < h[2]);
  CHECK(h[3] < h[2]);
  CHECK(h[0] == doctest::Approx(h[4]).epsilon(1e-12));
}
