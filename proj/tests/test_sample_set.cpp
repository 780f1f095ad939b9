#include <doctest.h>

#include <algorithm>
#include <set>

#include <Eigen/SVD>

#include "clarsta/ledger.hpp"
#include "clarsta/sample_set.hpp"
#include "test_util.hpp"

using namespace clarsta;
using testutil::vec;

namespace {

// independent sigma_min via a full SVD of the Gram-free matrix
double brute_sigma_min(const Eigen::MatrixXd& M) {
  if (M.cols() == 0) return 0.0;
  if (M.cols() > M.rows()) return 0.0;
  Eigen::BDCSVD<Eigen::MatrixXd> svd(M);
  return svd.singularValues().minCoeff();
}

std::vector<double> brute_thetas(const Eigen::MatrixXd& cols, double delta) {
  std::vector<double> out;
  for (Eigen::Index i = 0; i < cols.cols(); ++i) {
    Eigen::MatrixXd rest(cols.rows(), cols.cols() - 1);
    for (Eigen::Index c = 0, o = 0; c < cols.cols(); ++c)
      if (c != i) rest.col(o++) = cols.col(c);
    const double r = cols.col(i).norm() / delta;
    out.push_back(brute_sigma_min(rest) * std::max(r * r * r * r, 1.0));
  }
  return out;
}

}  // namespace

TEST_CASE("ledger stores each point once") {
  EvaluationLedger<double> ledger;
  const auto i0 = ledger.append(vec({0, 1}), 3.0, true);
  const auto i1 = ledger.append(vec({1, 1}), 2.0, false);
  CHECK(ledger.nf() == 2);
  CHECK(ledger.find(vec({0, 1})) == i0);
  CHECK(ledger.find(vec({1, 1})) == i1);
  CHECK_FALSE(ledger.find(vec({1, 1 + 1e-15})).has_value());
  CHECK_THROWS_AS(ledger.append(vec({0, 1}), 3.0, true), std::logic_error);
  // the infeasible record is never the best
  CHECK(ledger.best_feasible() == i0);
  ledger.append(vec({2, 2}), 3.0, true);
  CHECK(ledger.best_feasible() == i0);
  CHECK(ledger.points_unique());
}

TEST_CASE("pair_points enumerates the unordered pairs of [0 D]") {
  Eigen::MatrixXd D(2, 2);
  D << 1, 0, 0, 2;
  const auto pts = pair_points<double>(vec({1, 1}), D);
  CHECK(pts.size() == 6);  // (0,0) (0,1) (0,2) (1,1) (1,2) (2,2)
  CHECK(pts[0].point == vec({1, 1}));
  CHECK(pts[1].point == vec({2, 1}));
  CHECK(pts[2].point == vec({1, 3}));
  CHECK(pts[3].point == vec({3, 1}));
  CHECK(pts[4].point == vec({2, 3}));
  CHECK(pts[5].point == vec({1, 5}));
}

TEST_CASE("build_candidate_pool") {
  const Eigen::VectorXd x = vec({0, 0});
  Eigen::MatrixXd D(2, 1);
  D << 0.5, 0;
  SUBCASE("p = 1 with no move draws from {s, d, 2d}") {
    EvaluationLedger<double> ledger;
    ledger.append(x, 1.0, true);
    ledger.append(vec({0.5, 0}), 2.0, true);
    ledger.append(vec({1.0, 0}), 3.0, true);
    const Eigen::VectorXd trial = vec({0, 0.3});
    ledger.append(trial, 4.0, true);
    const auto pool = build_candidate_pool<double>(x, x, trial, D, ledger);
    CHECK(pool.size() == 3);
    std::set<std::pair<double, double>> dirs;
    for (const auto& e : pool) dirs.insert({e.direction(0), e.direction(1)});
    CHECK(dirs == std::set<std::pair<double, double>>{{0, 0.3}, {0.5, 0}, {1.0, 0}});
  }
  SUBCASE("unevaluated points are skipped and x_next is excluded") {
    EvaluationLedger<double> ledger;
    ledger.append(x, 1.0, true);
    const Eigen::VectorXd trial = vec({0.5, 0});
    ledger.append(trial, 0.5, true);
    const auto pool = build_candidate_pool<double>(x, trial, trial, D, ledger);
    // x_next = tip = trial, so only x_k itself remains, as direction -d
    REQUIRE(pool.size() == 1);
    CHECK(pool[0].direction == vec({-0.5, 0}));
  }
  SUBCASE("symmetric pair points appear once") {
    Eigen::MatrixXd D2(2, 2);
    D2 << 0.5, 0, 0, 0.5;
    EvaluationLedger<double> ledger;
    for (const auto& pp : pair_points<double>(x, D2)) ledger.append(pp.point, pp.point.sum(), true);
    const auto pool = build_candidate_pool<double>(x, x, std::nullopt, D2, ledger);
    CHECK(pool.size() == 5);
    std::set<std::size_t> idx;
    for (const auto& e : pool) idx.insert(e.ledger_index);
    CHECK(idx.size() == pool.size());
  }
}

TEST_CASE("remove_by_theta examples") {
  SUBCASE("hand computed") {
    Eigen::MatrixXd cols(2, 2);
    cols << 1, 0, 0, 2;
    const auto kept = remove_by_theta_indices<double>(cols, 1.0, 1);
    CHECK(kept == std::vector<int>{0});
  }
  SUBCASE("single column") {
    const Eigen::MatrixXd cols = vec({1, 2});
    CHECK(remove_by_theta<double>(cols, 1.0, 1).cols() == 0);
  }
  SUBCASE("ties go to the smallest index") {
    Eigen::MatrixXd cols(2, 2);
    cols << 1, 1, 1, 1;
    CHECK(remove_by_theta_indices<double>(cols, 1e6, 1) == std::vector<int>{1});
  }
  SUBCASE("count checks") {
    const Eigen::MatrixXd cols = Eigen::MatrixXd::Identity(3, 2);
    CHECK_THROWS_AS(remove_by_theta<double>(cols, 1.0, 3), std::invalid_argument);
    CHECK(remove_by_theta<double>(cols, 1.0, 0) == cols);
  }
}

TEST_CASE("remove_by_theta matches a brute-force argmax") {
  Rng rng(21);
  int compared = 0;
  for (int t = 0; t < 200; ++t) {
    const Eigen::Index m = 1 + t % 6;
    const Eigen::Index n = m + t % 3;
    const double delta = std::vector<double>{0.1, 1.0, 10.0}[static_cast<std::size_t>(t % 3)];
    const Eigen::MatrixXd cols = testutil::random_matrix(n, m, rng) * delta;
    const auto theta = brute_thetas(cols, delta);
    std::vector<double> sorted = theta;
    std::sort(sorted.rbegin(), sorted.rend());
    if (m > 1 && sorted[0] - sorted[1] <= 1e-9) continue;
    const int expected = static_cast<int>(std::max_element(theta.begin(), theta.end()) - theta.begin());
    const auto kept = remove_by_theta_indices<double>(cols, delta, 1);
    std::vector<int> want;
    for (int i = 0; i < m; ++i)
      if (i != expected) want.push_back(i);
    CHECK(kept == want);
    ++compared;
  }
  CHECK(compared > 150);
}

TEST_CASE("select_reusable") {
  const double delta = 0.5;
  SUBCASE("empty pool") {
    const auto r = select_reusable<double>({}, 3, delta, 2, 1, 2.0, 1e-8);
    CHECK(r.size() == 0);
  }
  SUBCASE("everything too long") {
    CandidatePool<double> pool{{vec({5, 0}), 0}, {vec({0, 5}), 1}, {vec({3, 3}), 2}};
    const auto r = select_reusable<double>(pool, 2, delta, 3, 1, 2.0, 1e-8);
    CHECK(r.size() == 0);
  }
  SUBCASE("hand-run pipeline keeps one column") {
    CandidatePool<double> pool{{vec({delta, 0}), 0}, {vec({0, delta}), 1}, {vec({2 * delta, 0}), 2}};
    const auto r = select_reusable<double>(pool, 2, delta, 2, 1, 2.0, delta / 2);
    REQUIRE(r.size() == 1);
    // theta tie between the two unit columns removes the first
    CHECK(r.columns.col(0) == vec({0, delta}));
    CHECK(r.ledger_indices == std::vector<std::size_t>{1});
  }
  SUBCASE("extra removals empty the result") {
    CandidatePool<double> pool{{vec({delta, 0, 0}), 0}, {vec({0, delta, 0}), 1}, {vec({0, 0, delta}), 2}};
    CHECK(select_reusable<double>(pool, 3, delta, 3, 1, 2.0, 1e-8).size() == 2);
    CHECK(select_reusable<double>(pool, 3, delta, 3, 1, 2.0, 1e-8, 3).size() == 0);
  }
  SUBCASE("post-selection geometry on random pools") {
    Rng rng(5);
    for (int t = 0; t < 100; ++t) {
      const Eigen::Index n = 3 + t % 5;
      const int p = 1 + t % static_cast<int>(n);
      const int p_rand = 1 + t % p;
      CandidatePool<double> pool;
      for (std::size_t e = 0; e < static_cast<std::size_t>(2 + t % 7); ++e)
        pool.push_back({testutil::random_vector(n, rng, 0.5), e});
      const double eps_geo = 0.05, eps_rad = 2.0;
      const auto r = select_reusable<double>(pool, n, delta, p, p_rand, eps_rad, eps_geo);
      CHECK(r.size() <= p - p_rand);
      if (r.size() > 0) {
        CHECK(sigma_min(r.columns) >= eps_geo);
        CHECK(r.columns.colwise().norm().maxCoeff() <= eps_rad * delta);
      }
    }
  }
}
