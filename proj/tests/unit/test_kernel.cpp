#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "ivmkit/kernel.hpp"
#include "testutil.hpp"

using namespace ivmkit;

namespace {
Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<long>(v.size()));
  long i = 0;
  for (double x : v) out[i++] = x;
  return out;
}
}  // namespace

TEST_CASE("linear kernel is the dot product") {
  CHECK(kernel_eval(KernelSpec::linear(), vec({1, 2}), vec({3, 4})) == doctest::Approx(11.0));
}

TEST_CASE("radial kernel at zero distance is one for any gamma") {
  for (double gamma : {0.01, 1.0, 50.0}) {
    const Eigen::VectorXd x = vec({0.3, -1.2, 4.0});
    CHECK(kernel_eval(KernelSpec::radial(gamma), x, x) == 1.0);
  }
}

TEST_CASE("radial kernel matches the closed form") {
  CHECK(kernel_eval(KernelSpec::radial(0.5), vec({0}), vec({2})) ==
        doctest::Approx(std::exp(-2.0)).epsilon(1e-12));
}

TEST_CASE("sigma parameterization converts as gamma = 1/(2 sigma^2)") {
  CHECK(KernelSpec::radial_sigma(2.0).gamma == doctest::Approx(0.125));
  CHECK(KernelSpec::radial_sigma(22.0).gamma == doctest::Approx(1.0 / (2.0 * 22.0 * 22.0)));
  CHECK_THROWS_AS(KernelSpec::radial_sigma(0.0), InvalidInputError);
}

TEST_CASE("kernel rejects dimension mismatch and non-finite input") {
  CHECK_THROWS_AS(kernel_eval(KernelSpec::linear(), vec({1, 2}), vec({1})), DimensionError);
  CHECK_THROWS_WITH_AS(kernel_eval(KernelSpec::linear(), vec({1, 2, 3}), vec({1})),
                       doctest::Contains("expected 3, got 1"), DimensionError);
  CHECK_THROWS_AS(
      kernel_eval(KernelSpec::linear(), vec({std::nan("")}), vec({1})),
      InvalidInputError);
  CHECK_THROWS_AS(KernelSpec::radial(-1.0).validate(), InvalidInputError);
}

TEST_CASE("gram of orthonormal rows under the linear kernel is the identity") {
  Eigen::MatrixXd x(2, 2);
  x << 1, 0, 0, 1;
  const Eigen::MatrixXd g = gram(KernelSpec::linear(), x, x);
  CHECK(g.isApprox(Eigen::MatrixXd::Identity(2, 2), 1e-15));
}

TEST_CASE("two-point radial gram") {
  Eigen::MatrixXd x(2, 1);
  x << 0, 1;
  const Eigen::MatrixXd g = gram(KernelSpec::radial(1.0), x, x);
  CHECK(g(0, 0) == 1.0);
  CHECK(g(1, 1) == 1.0);
  CHECK(g(0, 1) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
  CHECK(g(1, 0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
}

TEST_CASE("gram equals an entrywise loop over kernel_eval") {
  Rng rng(42);
  const Eigen::MatrixXd x = testutil::random_matrix(rng, 20, 3, -2, 2);
  const Eigen::MatrixXd g = gram(KernelSpec::radial(0.7), x, x);
  for (int i = 0; i < 20; ++i) {
    for (int j = 0; j < 20; ++j) {
      CHECK(g(i, j) == kernel_eval(KernelSpec::radial(0.7), x.row(i), x.row(j)));
    }
  }
}

TEST_CASE("gram rejects empty sets and mismatched dimensions") {
  Eigen::MatrixXd empty(0, 2), x(2, 2), z(2, 3);
  x.setRandom();
  z.setRandom();
  CHECK_THROWS_AS(gram(KernelSpec::linear(), empty, x), InvalidInputError);
  CHECK_THROWS_AS(gram(KernelSpec::linear(), x, z), DimensionError);
}

TEST_CASE("self-grams are symmetric and positive semi-definite") {
  Rng rng(7);
  for (int trial = 0; trial < 4; ++trial) {
    const int n = 5 + static_cast<int>(rng.next_below(26));
    const Eigen::MatrixXd x = testutil::random_matrix(rng, n, 4, -3, 3);
    for (const KernelSpec& spec : {KernelSpec::linear(), KernelSpec::radial(0.4)}) {
      const Eigen::MatrixXd g = gram(spec, x, x);
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          CHECK(std::abs(g(i, j) - g(j, i)) <= 1e-12);
        }
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(g);
      const double smallest = eig.eigenvalues().minCoeff();
      const double largest = eig.eigenvalues().maxCoeff();
      CHECK(smallest >= -1e-8 * largest);
    }
  }
}

TEST_CASE("radial kernel values lie in (0, 1] with a unit diagonal") {
  Rng rng(11);
  const Eigen::MatrixXd x = testutil::random_matrix(rng, 12, 2, -2, 2);
  const Eigen::MatrixXd g = gram(KernelSpec::radial(1.3), x, x);
  for (int i = 0; i < 12; ++i) {
    CHECK(g(i, i) == 1.0);
    for (int j = 0; j < 12; ++j) {
      CHECK(g(i, j) > 0.0);
      CHECK(g(i, j) <= 1.0);
    }
  }
}

TEST_CASE("radial kernel decreases strictly with distance") {
  const Eigen::VectorXd x = vec({0.5, -0.5});
  double prev = 2.0;
  for (double r = 0.0; r <= 3.0; r += 0.25) {
    const double k = kernel_eval(KernelSpec::radial(0.8), x, vec({0.5 + r, -0.5}));
    CHECK(k < prev);
    prev = k;
  }
}

TEST_CASE("gram column matches the full gram") {
  Rng rng(3);
  const Eigen::MatrixXd x = testutil::random_matrix(rng, 8, 3, -1, 1);
  const Eigen::MatrixXd g = gram(KernelSpec::radial(0.9), x, x);
  const Eigen::VectorXd col = gram_column(KernelSpec::radial(0.9), x, x.row(5));
  CHECK(col.isApprox(g.col(5), 0.0));
}
