#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace clarsta {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Raised when a direction matrix is too close to rank deficient for the
/// interpolation model to mean anything.
class DegenerateGeometry : public std::runtime_error {
 public:
  explicit DegenerateGeometry(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

inline void require(bool condition, const char* message) {
  if (!condition) throw std::invalid_argument(message);
}

inline void require_dims(Eigen::Index expected, Eigen::Index actual, const char* what) {
  if (expected != actual) {
    throw std::invalid_argument(std::string(what) + ": dimension mismatch (expected " +
                                std::to_string(expected) + ", got " + std::to_string(actual) + ")");
  }
}

}  // namespace detail
}  // namespace clarsta
