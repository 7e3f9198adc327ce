#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "srtrkit/numcore.hpp"
#include "srtrkit/srtrcore.hpp"
#include "srtrkit/sysrep.hpp"

namespace srtrkit::structsyn {

// Affine equality constraints on Aw = A22 + K A12 beyond the row conditions.
enum class ExtraConstraint {
    None,
    RingHomogeneous,  // Aw diagonal with one repeated entry
};

std::string to_string(ExtraConstraint extra);
ExtraConstraint parse_extra(const std::string& text);

struct SynthesisSpec {
    srtrcore::SparsityPattern masks;
    std::vector<int> orders;  // retained state count per output row
    ExtraConstraint extra = ExtraConstraint::None;
    StabilityDomain domain = StabilityDomain::Continuous;
};

// Throws unless masks are binary with shapes p x p, p x m and every order lies in 1..n-p.
void validate_spec(const SynthesisSpec& spec, const sysrep::PartitionedRealization& base);

// All-ones masks and full orders: the conditions hold for any K.
SynthesisSpec unconstrained_spec(const sysrep::PartitionedRealization& base);

// One compressor per output row of A12; rows of A12 that vanish get the identity and the zero flag.
std::vector<numcore::RowCompression> compress_rows(const sysrep::PartitionedRealization& base);

struct RowConditions {
    double feedthrough_w = 0.0;   // i)   masked entries of A11 - A12 K
    double feedthrough_v = 0.0;   // ii)  masked entries of B1
    double input_w = 0.0;         // iii) masked columns of the retained rows of Q A_K
    double input_v = 0.0;         // iv)  masked columns of the retained rows of Q (K B1 + B2)
    double truncation = 0.0;      // v)   coupling from discarded into retained states
    double stability = 0.0;       // vi)  distance of the retained block's spectrum outside the stable set
    double margin = 0.0;          // signed spectral margin of the retained block (negative is stable)
    bool constant_row = false;    // row of A12 is zero: iii)-vi) do not apply

    double worst() const;
};

struct ConditionReport {
    std::vector<RowConditions> rows;
    double extra = 0.0;  // largest violated extra equality, absolute
    double max_residual = 0.0;
    double tol = 0.0;
    bool pass = false;
};

ConditionReport mm_conditions(const sysrep::PartitionedRealization& base, const Matrix& K, const SynthesisSpec& spec,
                              double tol = 1e-6);

struct SolveOptions {
    int max_iter = 400;          // function evaluations per start are bounded by a multiple of this
    int restarts = 8;
    std::uint64_t seed = 42;
    double tol = 1e-6;
    double penalty_weight = 10.0;    // weight on the stability hinge
    double stability_margin = 1e-3;  // required clearance of the retained spectra
    double time_budget_seconds = 60.0;
};

struct SolveResult {
    Matrix K;
    ConditionReport report;
    int starts_run = 0;
};

// Raised when no start reaches a passing report; carries the best attempt.
class InfeasibleError : public Error {
public:
    InfeasibleError(const std::string& message, Matrix best_K, ConditionReport best_report)
        : Error(ErrorKind::Infeasible, message), best_K_(std::move(best_K)), best_report_(std::move(best_report)) {}
    const Matrix& best_K() const { return best_K_; }
    const ConditionReport& best_report() const { return best_report_; }

private:
    Matrix best_K_;
    ConditionReport best_report_;
};

SolveResult mm_solve(const sysrep::PartitionedRealization& base, const SynthesisSpec& spec,
                     const SolveOptions& options = {});

// Realizations of the rows of [W V], each of the order requested for that row (zero for constant rows).
struct ReducedRows {
    std::vector<sysrep::StateSpaceSystem> rows;
    Eigen::Index p = 0, m = 0;
    StabilityDomain domain = StabilityDomain::Continuous;

    // Block-diagonal stacking of the rows: one system with p outputs and p + m inputs.
    sysrep::StateSpaceSystem stacked() const;
};

ReducedRows reduce_rows(const sysrep::PartitionedRealization& base, const Matrix& K, const std::vector<int>& orders,
                        double truncation_tol = 1e-2);
ReducedRows reduce_rows(const sysrep::PartitionedRealization& base, const Matrix& K, const SynthesisSpec& spec,
                        double truncation_tol = 1e-2);

// Zero mask entries are identically zero and every realization is stable.
bool verify_structured(const srtrcore::SrtrPair& pair, const SynthesisSpec& spec, double tol);
bool verify_structured(const ReducedRows& rows, const SynthesisSpec& spec, double tol);

// K with eig(A22 + K A12) at the requested values, through the dual placement problem.
Matrix assign_pair_spectrum(const sysrep::PartitionedRealization& base, const std::vector<Complex>& targets,
                            std::mt19937_64& rng);

}  // namespace srtrkit::structsyn
