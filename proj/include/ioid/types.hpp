#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace ioid {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Bad shapes, orders, or arguments supplied by the caller.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

/// A factorization or solve failed on data that passed validation.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

inline void require(bool ok, const std::string& what) {
  if (!ok) throw ValidationError(what);
}

/// Default relative tolerance for equivalence residuals.
inline constexpr double kDefaultEquivalenceTol = 1e-8;

}  // namespace ioid
