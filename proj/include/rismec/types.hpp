// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace rismec {

using cplx = std::complex<double>;
using Vec = Eigen::VectorXd;
using CVec = Eigen::VectorXcd;
using Mat = Eigen::MatrixXd;
using CMat = Eigen::MatrixXcd;

inline constexpr double kLn2 = std::numbers::ln2;

/// Malformed or inconsistent scenario / CLI configuration.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

/// Vector or matrix sizes that do not agree.
struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Raised when a solver holds a certificate that no feasible allocation
/// exists. `stage` names the pipeline step that detected it.
struct InfeasibleError : std::runtime_error {
  std::string stage;
  InfeasibleError(std::string where, const std::string& what)
      : std::runtime_error(what), stage(std::move(where)) {}
};

}  // namespace rismec
