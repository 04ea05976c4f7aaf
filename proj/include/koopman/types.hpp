#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>

namespace koopman {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using Index = Eigen::Index;
using Complex = std::complex<double>;

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Bad inputs: shapes, empty data, malformed files, invalid configuration.
class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& msg) : Error(msg) {}
};

/// Numerical breakdown: rank-zero lifts, eigensolver failure, defective clusters.
class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& msg) : Error(msg) {}
};

/// Integration failure; carries the offending state and the step at which it occurred.
class IntegrationError : public NumericalError {
public:
    IntegrationError(const std::string& msg, Vec state, long step)
        : NumericalError(msg), state(std::move(state)), step(step) {}
    Vec state;
    long step;
};

}  // namespace koopman
