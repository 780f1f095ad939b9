#include "clarsta/problems.hpp"

#include <cmath>
#include <stdexcept>

namespace clarsta::problems {

double chain_rosenbrock(const Eigen::VectorXd& x) {
  const Eigen::Index n = x.size();
  if (n < 2) throw std::invalid_argument("chain_rosenbrock: need n >= 2");
  double sum = 0.0;
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    const double a = x(i + 1) - x(i) * x(i);
    const double b = 1.0 - x(i);
    sum += 100.0 * a * a + b * b;
  }
  return sum;
}

double trigonometric(const Eigen::VectorXd& x) {
  const Eigen::Index n = x.size();
  if (n < 1) throw std::invalid_argument("trigonometric: need n >= 1");
  double cos_sum = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) cos_sum += std::cos(x(j));
  double sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double r = static_cast<double>(n) - cos_sum + static_cast<double>(i + 1) * (1.0 - std::cos(x(i))) -
                     std::sin(x(i));
    sum += r * r;
  }
  return sum;
}

Eigen::VectorXd chain_rosenbrock_gradient(const Eigen::VectorXd& x) {
  const Eigen::Index n = x.size();
  if (n < 2) throw std::invalid_argument("chain_rosenbrock_gradient: need n >= 2");
  Eigen::VectorXd g = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    const double a = x(i + 1) - x(i) * x(i);
    g(i) += -400.0 * x(i) * a - 2.0 * (1.0 - x(i));
    g(i + 1) += 200.0 * a;
  }
  return g;
}

Eigen::VectorXd trigonometric_gradient(const Eigen::VectorXd& x) {
  const Eigen::Index n = x.size();
  double cos_sum = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) cos_sum += std::cos(x(j));
  Eigen::VectorXd r(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    r(i) = static_cast<double>(n) - cos_sum + static_cast<double>(i + 1) * (1.0 - std::cos(x(i))) - std::sin(x(i));
  }
  const double r_sum = r.sum();
  Eigen::VectorXd g(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    // d r_i / d x_k = sin x_k + [i == k] ((k+1) sin x_k - cos x_k)
    g(k) = 2.0 * (r_sum * std::sin(x(k)) + r(k) * (static_cast<double>(k + 1) * std::sin(x(k)) - std::cos(x(k))));
  }
  return g;
}

std::vector<std::string> objective_names() { return {"chain_rosenbrock", "trigonometric"}; }

std::vector<std::string> constraint_names() { return {"box", "ball", "halfspace"}; }

ProblemInstance make_instance(const std::string& objective, const std::string& constraint, Eigen::Index n) {
  if (n < 2) throw std::invalid_argument("make_instance: need n >= 2");
  const double dn = static_cast<double>(n);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);

  ProblemInstance inst{objective, constraint, n, {}, ConvexSet<double>::whole_space(n), {}, std::nullopt};
  if (objective == "chain_rosenbrock") {
    inst.objective = chain_rosenbrock;
    inst.x0 = Eigen::VectorXd::Zero(n);
    if (constraint == "box") {
      inst.set = ConvexSet<double>::box(-ones, ones);
    } else if (constraint == "ball") {
      inst.set = ConvexSet<double>::ball(Eigen::VectorXd::Zero(n), std::sqrt(dn));
    } else if (constraint == "halfspace") {
      inst.set = ConvexSet<double>::halfspace(ones, 0.0, HalfspaceSense::GreaterEqual);
    } else {
      throw std::invalid_argument("unknown constraint: " + constraint);
    }
    // 1_n lies in all three sets
    inst.known_optimum = KnownOptimum{ones, 0.0};
  } else if (objective == "trigonometric") {
    inst.objective = trigonometric;
    inst.x0 = ones;
    if (constraint == "box") {
      inst.set = ConvexSet<double>::box(Eigen::VectorXd::Zero(n), 2.0 * ones);
    } else if (constraint == "ball") {
      inst.set = ConvexSet<double>::ball(ones, std::sqrt(dn));
    } else if (constraint == "halfspace") {
      inst.set = ConvexSet<double>::halfspace(ones, dn, HalfspaceSense::LessEqual);
    } else {
      throw std::invalid_argument("unknown constraint: " + constraint);
    }
    // 0_n lies in all three sets
    inst.known_optimum = KnownOptimum{Eigen::VectorXd::Zero(n), 0.0};
  } else {
    throw std::invalid_argument("unknown problem: " + objective);
  }
  return inst;
}

std::vector<ProblemInstance> paper_instances(Eigen::Index n) {
  std::vector<ProblemInstance> out;
  for (const auto& obj : objective_names())
    for (const auto& con : constraint_names()) out.push_back(make_instance(obj, con, n));
  return out;
}

ProblemInstance oracled_quadratic(Eigen::Index n, const Eigen::VectorXd& c, const ConvexSet<double>& set) {
  detail::require_dims(n, c.size(), "oracled_quadratic c");
  detail::require_dims(n, set.dimension(), "oracled_quadratic set");
  ProblemInstance inst{"quadratic", "custom", n, {}, set, {}, std::nullopt};
  inst.objective = [c](const Eigen::VectorXd& x) { return (x - c).squaredNorm(); };
  inst.x0 = project(set, Eigen::VectorXd(Eigen::VectorXd::Zero(n)));
  const Eigen::VectorXd opt = project(set, c);
  inst.known_optimum = KnownOptimum{opt, (opt - c).squaredNorm()};
  return inst;
}

}  // namespace clarsta::problems
