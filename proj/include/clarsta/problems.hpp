#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "clarsta/convex_sets.hpp"
#include "clarsta/types.hpp"

namespace clarsta::problems {

using Objective = std::function<double(const Eigen::VectorXd&)>;

struct KnownOptimum {
  Eigen::VectorXd point;
  double value;
};

struct ProblemInstance {
  std::string name;        // objective name, e.g. "chain_rosenbrock"
  std::string constraint;  // "box", "ball", "halfspace", ...
  Eigen::Index n = 0;
  Objective objective;
  ConvexSet<double> set;
  Eigen::VectorXd x0;
  std::optional<KnownOptimum> known_optimum;
};

/// sum_{i<n} 100 (x_{i+1} - x_i^2)^2 + (1 - x_i)^2, requires n >= 2.
double chain_rosenbrock(const Eigen::VectorXd& x);
/// sum_i (n - sum_j cos x_j + i (1 - cos x_i) - sin x_i)^2 with 1-based i.
double trigonometric(const Eigen::VectorXd& x);

// Analytic gradients, for diagnostics and tests only. The solver never sees them.
Eigen::VectorXd chain_rosenbrock_gradient(const Eigen::VectorXd& x);
Eigen::VectorXd trigonometric_gradient(const Eigen::VectorXd& x);

/// Objective wrapper that counts oracle calls.
class CountingOracle {
 public:
  explicit CountingOracle(Objective f) : f_(std::move(f)), calls_(std::make_shared<long>(0)) {}
  double operator()(const Eigen::VectorXd& x) const {
    ++*calls_;
    return f_(x);
  }
  long calls() const { return *calls_; }

 private:
  Objective f_;
  std::shared_ptr<long> calls_;
};

std::vector<std::string> objective_names();
std::vector<std::string> constraint_names();

/// The benchmark pairing of an objective with one of its three constraint sets
/// and starting point. Throws std::invalid_argument for unknown names.
ProblemInstance make_instance(const std::string& objective, const std::string& constraint, Eigen::Index n);

/// All six objective/constraint combinations at dimension n.
std::vector<ProblemInstance> paper_instances(Eigen::Index n);

/// f(x) = |x - c|^2 over `set`, started from the projection of the origin.
ProblemInstance oracled_quadratic(Eigen::Index n, const Eigen::VectorXd& c, const ConvexSet<double>& set);

}  // namespace clarsta::problems
