#include <doctest.h>

#include "clarsta/tr_subproblem.hpp"
#include "test_util.hpp"

using namespace clarsta;
using testutil::vec;
using Set = ConvexSet<double>;

namespace {

LinearSubspaceModel<double> make_model(Eigen::VectorXd center, Eigen::MatrixXd Q, Eigen::VectorXd g) {
  LinearSubspaceModel<double> m;
  m.center = std::move(center);
  m.Q = std::move(Q);
  m.gradient = std::move(g);
  m.constant = 1.0;
  m.diam_bar = 1.0;
  return m;
}

}  // namespace

TEST_CASE("unconstrained subproblem is solved exactly") {
  Rng rng(1);
  const Eigen::MatrixXd Q = thin_qr(testutil::random_matrix(5, 2, rng)).Q;
  const auto m = make_model(Eigen::VectorXd::Zero(5), Q, vec({3, -4}));
  const double delta = 0.7;
  const double pi = criticality_approx(m, Set::whole_space(5));
  const auto r = solve_subproblem(m, delta, Set::whole_space(5), pi);
  CHECK((r.s_hat - (-delta * m.gradient / 5.0)).norm() < 1e-9);
  CHECK(r.model_decrease == doctest::Approx(delta * 5.0).epsilon(1e-9));
  CHECK(r.cauchy_ok);
}

TEST_CASE("zero gradient gives a zero step") {
  const auto m = make_model(Eigen::VectorXd::Zero(3), Eigen::MatrixXd::Identity(3, 2), vec({0, 0}));
  const auto r = solve_subproblem(m, 1.0, Set::whole_space(3), 0.0);
  CHECK(r.s_hat.norm() == 0.0);
  CHECK(r.model_decrease == 0.0);
  CHECK(r.cauchy_ok);
}

TEST_CASE("box blocks the descent direction at the boundary") {
  const Eigen::Index n = 3;
  const auto box = Set::box(Eigen::VectorXd::Zero(n), 2 * Eigen::VectorXd::Ones(n));
  const auto m = make_model(Eigen::VectorXd::Zero(n), Eigen::MatrixXd::Identity(n, 1), vec({1}));
  const double pi = criticality_approx(m, box);
  CHECK(pi == 0.0);
  const auto r = solve_subproblem(m, 1.0, box, pi);
  CHECK(r.s_hat.norm() == 0.0);
  CHECK(r.model_decrease == 0.0);
}

TEST_CASE("fixed step rule") {
  SubproblemSettings<double> s;
  s.step_size_rule = FixedStep{0.1};
  const auto m = make_model(Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Identity(2, 2), vec({1, 0}));
  const auto r = solve_subproblem(m, 0.5, Set::whole_space(2), 1.0, s);
  CHECK(r.s_hat(0) == doctest::Approx(-0.5));
}

TEST_CASE("settings validation") {
  SubproblemSettings<double> s;
  s.kappa_tr = 1.5;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  const auto m = make_model(Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Identity(2, 2), vec({1, 0}));
  CHECK_THROWS_AS(solve_subproblem(m, 0.0, Set::whole_space(2), 1.0), std::invalid_argument);
}

TEST_CASE("subproblem feasibility, decrease identity and Cauchy decrease") {
  Rng rng(9);
  const Eigen::Index n = 6;
  const auto box = Set::box(-Eigen::VectorXd::Ones(n), Eigen::VectorXd::Ones(n));
  const auto ball = Set::ball(Eigen::VectorXd::Zero(n), 2.0);
  const auto hs = Set::halfspace(Eigen::VectorXd::Ones(n), 1.0);
  const auto both = Set::intersection({box, hs});
  const std::vector<Set> sets{box, ball, hs, both};
  const double feas_tol = 2 * ProjectionSettings<double>{}.dykstra_tol;
  for (int t = 0; t < 80; ++t) {
    const auto& set = sets[static_cast<std::size_t>(t % 4)];
    const Eigen::Index p = 1 + t % 3;
    const Eigen::VectorXd x = project(set, Eigen::VectorXd(testutil::random_vector(n, rng, 0.8)));
    const Eigen::MatrixXd Q = thin_qr(testutil::random_matrix(n, p, rng)).Q;
    const auto m = make_model(x, Q, testutil::random_vector(p, rng));
    const double delta = std::pow(2.0, -(t % 6));
    const double pi = criticality_approx(m, set);
    const auto r = solve_subproblem(m, delta, set, pi);
    CHECK(r.s_hat.norm() <= delta + feas_tol);
    CHECK(contains(set, Eigen::VectorXd(x + Q * r.s_hat), feas_tol));
    CHECK(r.model_decrease >= 0.0);
    CHECK(std::abs((eval_model(m, Eigen::VectorXd(Eigen::VectorXd::Zero(p))) - eval_model(m, r.s_hat)) - r.model_decrease) <= 1e-12);
  }
  // well inside the set the subspace slice is locally the whole subspace
  for (int t = 0; t < 30; ++t) {
    const Eigen::Index p = 1 + t % 3;
    const Eigen::MatrixXd Q = thin_qr(testutil::random_matrix(n, p, rng)).Q;
    const auto m = make_model(Eigen::VectorXd::Zero(n), Q, testutil::random_vector(p, rng));
    const double delta = 0.25;
    const double pi = criticality_approx(m, box);
    const auto r = solve_subproblem(m, delta, box, pi);
    CHECK(r.cauchy_ok);
  }
}

TEST_CASE("model decrease grows with the radius") {
  Rng rng(4);
  const Eigen::Index n = 5;
  const auto box = Set::box(-Eigen::VectorXd::Ones(n), Eigen::VectorXd::Ones(n));
  for (int t = 0; t < 20; ++t) {
    const Eigen::MatrixXd Q = thin_qr(testutil::random_matrix(n, 2, rng)).Q;
    const auto m = make_model(testutil::random_vector(n, rng, 0.3), Q, testutil::random_vector(2, rng));
    const double pi = criticality_approx(m, box);
    double last = 0;
    for (double delta : {0.05, 0.1, 0.2, 0.4}) {
      const auto r = solve_subproblem(m, delta, box, pi);
      CHECK(r.model_decrease >= last - 1e-9);
      last = r.model_decrease;
    }
  }
}
