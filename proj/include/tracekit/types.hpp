#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <stdexcept>
#include <string>

namespace tracekit {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;
using Index = Eigen::Index;

/// Shapes do not line up (non-square input, mismatched apply, ...).
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A caller-supplied parameter is out of its admissible range.
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A scalar function was evaluated outside its mathematical domain.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// An iterative solver failed to converge; carries the final residual.
class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, double final_residual)
        : std::runtime_error(what), final_residual_(final_residual) {}
    double final_residual() const { return final_residual_; }

private:
    double final_residual_;
};

/// Cholesky factorization hit a non-positive pivot; carries its index.
class NotPsdError : public std::runtime_error {
public:
    NotPsdError(const std::string& what, Index pivot)
        : std::runtime_error(what), pivot_(pivot) {}
    Index pivot() const { return pivot_; }

private:
    Index pivot_;
};

/// A factor required to be well conditioned turned out numerically singular.
class RankDeficiencyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace tracekit
