#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "exprelax/mesh.hpp"
#include "support.hpp"

using namespace exprelax;
using testing::grid1;
using testing::grid2;

TEST_CASE("grid geometry") {
  const Grid g = grid1(10);
  CHECK(g.dim() == 1);
  CHECK(g.h(0) == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(g.num_cells() == 10);
  CHECK(g.num_faces(0) == 11);
  CHECK(g.num_faces(1) == 0);

  const Grid g2 = grid2(4, 8, 1.0, 2.0);
  CHECK(g2.h(0) == 0.25);
  CHECK(g2.h(1) == 0.25);
  CHECK(g2.num_cells() == 32);
  CHECK(g2.num_faces(0) == 5 * 8);
  CHECK(g2.num_faces(1) == 4 * 9);
  CHECK(g2.domain_volume() == 2.0);

  CHECK_THROWS_AS(grid1(1), ConfigError);
  const std::vector<double> e{1.0, 1.0, 1.0};
  const std::vector<int> c{4, 4, 4};
  CHECK_THROWS_AS(Grid(3, e, c), ConfigError);
  CHECK_THROWS_AS(grid1(4, -1.0), ConfigError);
}

TEST_CASE("field construction checks length") {
  const Grid g = grid1(4);
  CHECK_THROWS_AS(ScalarField(g, std::vector<double>(5, 0.0)), ContractError);
  CHECK(ScalarField(g, 1.0).conforms(g));
  CHECK_FALSE(ScalarField(grid1(5), 1.0).conforms(g));
}

TEST_CASE("integrate") {
  const Grid g = grid1(10);
  CHECK(integrate(ScalarField(g, 2.0), g) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(integrate(ScalarField(g, 0.0), g) == 0.0);
  ScalarField one(g, 0.0);
  one[3] = 1.0;
  CHECK(integrate(one, g) == doctest::Approx(0.1).epsilon(1e-15));
}

TEST_CASE("integrate is linear") {
  for (const Grid& g : {grid1(37), grid2(9, 13)}) {
    const ScalarField a = testing::noise(g, 1), b = testing::noise(g, 2);
    const double s = 0.7, t = -2.3;
    const double lhs = integrate(s * a + t * b, g);
    const double rhs = s * integrate(a, g) + t * integrate(b, g);
    CHECK(std::abs(lhs - rhs) <= 1e-14 * (1.0 + lp_norm(a, g, 1) + lp_norm(b, g, 1)) * 10);
  }
}

TEST_CASE("face gradient") {
  const Grid g = grid1(10);
  const FaceField z = face_gradient(ScalarField(g, 4.2), g);
  for (double v : z.axis[0]) CHECK(v == 0.0);

  ScalarField x(g);
  for (int i = 0; i < 10; ++i) x[i] = g.center(0, i);
  const FaceField q = face_gradient(x, g);
  CHECK(q.axis[0].front() == 0.0);
  CHECK(q.axis[0].back() == 0.0);
  for (int i = 1; i < 10; ++i) CHECK(q.axis[0][i] == doctest::Approx(1.0).epsilon(1e-13));

  const Grid g2 = grid2(5, 6);
  ScalarField sep(g2);
  for (int j = 0; j < 6; ++j)
    for (int i = 0; i < 5; ++i) sep[g2.index(i, j)] = std::sin(3.0 * g2.center(0, i));
  const FaceField q2 = face_gradient(sep, g2);
  for (double v : q2.axis[1]) CHECK(v == 0.0);
  CHECK(q2.boundary_is_zero());
}

TEST_CASE("divergence") {
  const Grid g = grid1(8);
  const ScalarField dz = divergence(FaceField(g), g);
  for (double v : dz.values()) CHECK(v == 0.0);

  FaceField q(g);
  for (std::size_t i = 1; i + 1 < q.axis[0].size(); ++i) q.axis[0][i] = 1.0;
  const ScalarField d = divergence(q, g);
  CHECK(d[0] == doctest::Approx(1.0 / g.h(0)));
  CHECK(d[7] == doctest::Approx(-1.0 / g.h(0)));
  for (int i = 1; i < 7; ++i) CHECK(d[i] == 0.0);

  q.axis[0][0] = 1.0;
  CHECK_THROWS_AS(divergence(q, g), ContractError);
}

TEST_CASE("discrete divergence theorem for random admissible fluxes") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const Grid g = trial % 2 ? grid1(5 + trial) : grid2(3 + trial % 7, 4 + trial % 5);
    FaceField q(g);
    double total = 0.0;
    for (int a = 0; a < g.dim(); ++a) {
      const int nx = g.cells(0), ny = g.cells(1);
      for (int j = 0; j < (a == 0 ? ny : ny + 1); ++j)
        for (int i = 0; i < (a == 0 ? nx + 1 : nx); ++i) {
          const bool boundary = a == 0 ? (i == 0 || i == nx) : (j == 0 || j == ny);
          const std::size_t k = a == 0 ? i + (nx + 1) * j : i + nx * j;
          q.axis[a][k] = boundary ? 0.0 : 10.0 * n(rng);
          total += std::abs(q.axis[a][k]);
        }
    }
    CHECK(std::abs(integrate(divergence(q, g), g)) <= 1e-12 * (1.0 + total));
  }
}

TEST_CASE("neumann laplacian") {
  const Grid g = grid2(6, 7);
  const ScalarField flat = neumann_laplacian(ScalarField(g, -1.5), g);
  for (double v : flat.values()) CHECK(v == 0.0);
  for (int s = 0; s < 20; ++s) {
    const ScalarField f = testing::smooth(g, 100 + s, 2.0);
    CHECK(std::abs(integrate(neumann_laplacian(f, g), g)) <= 1e-12);
  }
}

TEST_CASE("neumann laplacian of cos(pi x) is second-order accurate") {
  double prev = 0.0;
  for (int n : {16, 32, 64, 128}) {
    const Grid g = grid1(n);
    const ScalarField f = testing::cosine(g);
    const ScalarField lap = neumann_laplacian(f, g);
    double err = 0.0;
    for (int i = 0; i < n; ++i) err = std::max(err, std::abs(lap[i] + M_PI * M_PI * f[i]));
    if (prev > 0.0) CHECK(prev / err == doctest::Approx(4.0).epsilon(0.1));
    prev = err;
  }
}

TEST_CASE("divergence of face gradient is symmetric negative semidefinite") {
  for (const Grid& g : {grid1(9), grid2(4, 5)}) {
    const int n = static_cast<int>(g.num_cells());
    Eigen::MatrixXd A(n, n);
    for (int c = 0; c < n; ++c) {
      ScalarField e(g, 0.0);
      e[c] = 1.0;
      const ScalarField col = divergence(face_gradient(e, g), g);
      for (int r = 0; r < n; ++r) A(r, c) = col[r];
    }
    // Symmetric with respect to the volume-weighted inner product; uniform volumes make it plain.
    CHECK((A - A.transpose()).cwiseAbs().maxCoeff() <= 1e-10);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
    const auto& ev = es.eigenvalues();
    CHECK(ev.maxCoeff() <= 1e-9);
    // Exactly one zero mode (constants) on a connected grid.
    int zeros = 0;
    for (int i = 0; i < n; ++i) zeros += std::abs(ev[i]) < 1e-8;
    CHECK(zeros == 1);
  }
}

TEST_CASE("lp norms") {
  const Grid g = grid1(10);
  for (double p : {1.0, 1.5, 2.0, 3.0}) CHECK(lp_norm(ScalarField(g, 1.0), g, p) == doctest::Approx(1.0));
  CHECK(lp_norm(ScalarField(g, -3.0), g, 2.0) == doctest::Approx(3.0));
  for (int s = 0; s < 20; ++s) {
    const ScalarField f = testing::noise(g, 300 + s);
    CHECK(lp_norm(f, g, 1.0) <= lp_norm(f, g, 2.0) + 1e-15);
  }
  CHECK_THROWS_AS(lp_norm(ScalarField(g, 1.0), g, 0.5), ConfigError);
}

TEST_CASE("field arithmetic requires matching shapes") {
  const Grid a = grid1(4), b = grid1(5);
  ScalarField x(a, 1.0);
  CHECK_THROWS_AS(x += ScalarField(b, 1.0), ContractError);
  CHECK_THROWS_AS(integrate(ScalarField(b, 1.0), a), ContractError);
}
