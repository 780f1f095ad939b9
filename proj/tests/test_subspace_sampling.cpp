#include <doctest.h>

#include <cmath>

#include <Eigen/Eigenvalues>

#include "clarsta/subspace_sampling.hpp"
#include "test_util.hpp"

using namespace clarsta;
using testutil::vec;
using Set = ConvexSet<double>;

TEST_CASE("rng is deterministic and seed sensitive") {
  Rng a(42), b(42), c(43);
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
    (void)c;
  }
  Rng d(42), e(43);
  CHECK(d.next_u64() != e.next_u64());
  Rng u(7);
  for (int i = 0; i < 1000; ++i) {
    const double v = u.uniform();
    CHECK(v >= 0.0);
    CHECK(v < 1.0);
  }
}

TEST_CASE("gaussian samples have unit variance") {
  Rng rng(5);
  const int count = 200000;
  double sum = 0, sq = 0;
  for (int i = 0; i < count; ++i) {
    const double z = rng.normal();
    sum += z;
    sq += z * z;
  }
  CHECK(std::abs(sum / count) < 0.01);
  CHECK(std::abs(sq / count - 1.0) < 0.02);
}

TEST_CASE("generate_directions with q = n spans the space") {
  Rng rng(1);
  const double delta = 0.7;
  const Eigen::MatrixXd D = generate_directions<double>(6, 6, delta, nullptr, rng);
  const Eigen::MatrixXd G = D.transpose() * D;
  CHECK((G - delta * delta * Eigen::MatrixXd::Identity(6, 6)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("generate_directions fills the orthogonal complement") {
  Rng rng(2);
  const Eigen::Index n = 5;
  const Eigen::MatrixXd existing = Eigen::MatrixXd::Identity(n, n).leftCols(n - 1);
  const Eigen::MatrixXd d = generate_directions<double>(n, 1, 2.0, &existing, rng);
  CHECK(std::abs(std::abs(d(n - 1, 0)) - 2.0) < 1e-12);
  CHECK(d.topRows(n - 1).norm() < 1e-12);
}

TEST_CASE("generate_directions is reproducible") {
  Rng a(99), b(99);
  const Eigen::MatrixXd x = generate_directions<double>(8, 3, 1.0, nullptr, a);
  const Eigen::MatrixXd y = generate_directions<double>(8, 3, 1.0, nullptr, b);
  CHECK(x == y);
}

TEST_CASE("generate_directions orthogonality over many calls") {
  Rng rng(3);
  double worst_pair = 0, worst_existing = 0;
  for (int t = 0; t < 100; ++t) {
    const Eigen::Index n = 4 + t % 12;
    const Eigen::Index k = t % 3;
    const Eigen::Index q = 1 + t % (n - k);
    const double delta = std::pow(10.0, (t % 5) - 2);
    Eigen::MatrixXd existing;
    const Eigen::MatrixXd* ep = nullptr;
    if (k > 0) {
      existing = thin_qr(testutil::random_matrix(n, k, rng)).Q;
      ep = &existing;
    }
    const Eigen::MatrixXd D = generate_directions<double>(n, q, delta, ep, rng);
    for (Eigen::Index i = 0; i < q; ++i) {
      CHECK(D.col(i).norm() == doctest::Approx(delta).epsilon(1e-12));
      for (Eigen::Index j = i + 1; j < q; ++j)
        worst_pair = std::max(worst_pair, std::abs(D.col(i).dot(D.col(j))) / (delta * delta));
      if (ep)
        worst_existing = std::max(worst_existing, (existing.transpose() * D.col(i)).cwiseAbs().maxCoeff() / delta);
    }
  }
  CHECK(worst_pair <= 1e-10);
  CHECK(worst_existing <= 1e-10);
}

TEST_CASE("generate_directions argument checks") {
  Rng rng(1);
  CHECK_THROWS_AS(generate_directions<double>(3, 4, 1.0, nullptr, rng), std::invalid_argument);
  CHECK_THROWS_AS(generate_directions<double>(3, 1, 0.0, nullptr, rng), std::invalid_argument);
  const Eigen::MatrixXd full = Eigen::MatrixXd::Identity(3, 3);
  CHECK_THROWS_AS(generate_directions<double>(3, 1, 1.0, &full, rng), std::invalid_argument);
}

TEST_CASE("sample_projection_matrix is an orthogonal projector") {
  Rng rng(4);
  CHECK((sample_projection_matrix<double>(5, 5, rng) - Eigen::MatrixXd::Identity(5, 5)).norm() < 1e-12);
  for (int t = 0; t < 20; ++t) {
    const Eigen::Index n = 3 + t % 7;
    const Eigen::Index z = 1 + t % n;
    const Eigen::MatrixXd X = sample_projection_matrix<double>(n, z, rng);
    CHECK((X - X.transpose()).norm() < 1e-12);
    CHECK((X * X - X).norm() < 1e-10);
    CHECK(std::abs(X.trace() - static_cast<double>(z)) < 1e-10);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(X);
    const Eigen::VectorXd ev = es.eigenvalues();  // ascending
    for (Eigen::Index i = 0; i < n; ++i) {
      const double expected = i < n - z ? 0.0 : 1.0;
      CHECK(std::abs(ev(i) - expected) < 1e-8);
    }
  }
}

TEST_CASE("alignment_probability_bound") {
  CHECK(alignment_probability_bound<double>(10, 2, 0.1, 0.0, 1.0) == 1.0);
  const double expected = 1.0 - std::exp(-(49.0 / 8.0) * 0.05 * 0.05);
  CHECK(alignment_probability_bound<double>(50, 5, 0.05, 1.0, 1.0) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(alignment_probability_bound<double>(50, 5, 0.05, 1.0, 1.0) == doctest::Approx(0.01520).epsilon(1e-3));
  CHECK(alignment_probability_bound<double>(50, 5, 0.1 - 1e-12, 1.0, 1.0) < 1e-10);
  // monotone in n and alpha
  CHECK(alignment_probability_bound<double>(100, 10, 0.05, 1.0, 1.0) >
        alignment_probability_bound<double>(50, 5, 0.05, 1.0, 1.0));
  CHECK(alignment_probability_bound<double>(50, 5, 0.02, 1.0, 1.0) >
        alignment_probability_bound<double>(50, 5, 0.05, 1.0, 1.0));
  CHECK_THROWS_AS(alignment_probability_bound<double>(50, 5, 0.2, 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(alignment_probability_bound<double>(50, 5, 0.0, 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("alignment_check") {
  Rng rng(8);
  const Eigen::Index n = 4;
  const Eigen::VectorXd x = vec({0.2, 0.1, -0.3, 0.4});
  const auto box = Set::box(-Eigen::VectorXd::Ones(n), Eigen::VectorXd::Ones(n));
  SUBCASE("full subspace is aligned") {
    const Eigen::MatrixXd Q = thin_qr(testutil::random_matrix(n, n, rng)).Q;
    const auto r = alignment_check<double>(Q, vec({1, -2, 0.5, 3}), x, box, 0.99);
    CHECK(r.lhs == doctest::Approx(r.pi_f).epsilon(1e-10));
    CHECK(r.aligned);
  }
  SUBCASE("zero gradient") {
    const Eigen::MatrixXd Q = Eigen::MatrixXd::Identity(n, 1);
    const auto r = alignment_check<double>(Q, Eigen::VectorXd::Zero(n), x, box, 0.1);
    CHECK(r.pi_f == 0.0);
    CHECK(r.aligned);
  }
  SUBCASE("orthogonal subspace captures nothing") {
    Eigen::MatrixXd Q(2, 1);
    Q << 0, 1;
    const auto r = alignment_check<double>(Q, vec({1, 0}), vec({0, 0}), Set::whole_space(2), 0.01);
    CHECK(r.lhs == 0.0);
    CHECK(r.pi_f == doctest::Approx(1.0));
    CHECK_FALSE(r.aligned);
  }
}
