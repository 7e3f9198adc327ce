#include "srtrkit/common.hpp"

#include <cmath>

namespace srtrkit {

bool in_domain(StabilityDomain domain, Complex lambda) {
    return domain_margin(domain, lambda) < 0.0;
}

double domain_margin(StabilityDomain domain, Complex lambda) {
    if (domain == StabilityDomain::Continuous) return lambda.real();
    return std::abs(lambda) - 1.0;
}

std::string to_string(StabilityDomain domain) {
    return domain == StabilityDomain::Continuous ? "continuous" : "discrete";
}

StabilityDomain parse_domain(const std::string& text) {
    if (text == "continuous") return StabilityDomain::Continuous;
    if (text == "discrete") return StabilityDomain::Discrete;
    throw Error(ErrorKind::InvalidInput, "unknown domain '" + text + "'");
}

const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Dimension: return "dimension";
        case ErrorKind::InvalidInput: return "invalid-input";
        case ErrorKind::InvalidTransform: return "invalid-transform";
        case ErrorKind::Regularity: return "regularity-violation";
        case ErrorKind::UnsupportedFeedthrough: return "unsupported-feedthrough";
        case ErrorKind::TrivialCase: return "trivial-case";
        case ErrorKind::PoleEvaluation: return "pole-evaluation";
        case ErrorKind::NumericalFailure: return "numerical-failure";
        case ErrorKind::InvalidTheta: return "invalid-theta";
        case ErrorKind::Precondition: return "precondition";
        case ErrorKind::NoSolution: return "no-solution";
        case ErrorKind::AlgebraicLoop: return "algebraic-loop";
        case ErrorKind::Infeasible: return "infeasible";
        case ErrorKind::InexactTruncation: return "inexact-truncation";
    }
    return "unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

void require(bool condition, ErrorKind kind, const std::string& message) {
    if (!condition) throw Error(kind, message);
}

bool all_finite(const Matrix& m) {
    return m.allFinite();
}

}  // namespace srtrkit
