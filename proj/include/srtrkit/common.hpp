#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace srtrkit {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

enum class StabilityDomain { Continuous, Discrete };

// Strict membership: Re < 0 for continuous time, |z| < 1 for discrete time.
bool in_domain(StabilityDomain domain, Complex lambda);

// Signed stability margin of a point: Re(lambda) or |lambda| - 1. Negative inside.
double domain_margin(StabilityDomain domain, Complex lambda);

std::string to_string(StabilityDomain domain);
StabilityDomain parse_domain(const std::string& text);

enum class ErrorKind {
    Dimension,
    InvalidInput,
    InvalidTransform,
    Regularity,
    UnsupportedFeedthrough,
    TrivialCase,
    PoleEvaluation,
    NumericalFailure,
    InvalidTheta,
    Precondition,
    NoSolution,
    AlgebraicLoop,
    Infeasible,
    InexactTruncation,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message);
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

void require(bool condition, ErrorKind kind, const std::string& message);

bool all_finite(const Matrix& m);

}  // namespace srtrkit
