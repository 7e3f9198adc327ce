#pragma once

#include <cstdint>
#include <optional>

#include "srtrkit/rational.hpp"
#include "srtrkit/sysrep.hpp"

namespace srtrkit::srtrcore {

// The pair (W, V) as one realization with p outputs and p + m inputs.
struct SrtrPair {
    std::optional<sysrep::PartitionedRealization> base;  // absent only for hand-encoded pairs
    Matrix K;                                           // empty for hand-encoded pairs
    Matrix Aw, Bw, Cw, Dw;
    StabilityDomain domain = StabilityDomain::Continuous;
    bool base_minimal = false;
    bool hand_encoded = false;

    Eigen::Index p() const { return Cw.rows(); }
    Eigen::Index m() const { return Dw.cols() - Cw.rows(); }
    Eigen::Index order() const { return Aw.rows(); }
    bool has_generator() const { return !hand_encoded; }

    sysrep::StateSpaceSystem as_system() const;
    CMatrix W(Complex lambda) const;
    CMatrix V(Complex lambda) const;
    // Input block of Bw/Dw acting on the W channel (first p columns) and on the V channel.
    Matrix Bw_w() const { return Bw.leftCols(p()); }
    Matrix Bw_v() const { return Bw.rightCols(m()); }
    Matrix Dw_w() const { return Dw.leftCols(p()); }
    Matrix Dw_v() const { return Dw.rightCols(m()); }
};

SrtrPair srtr_from_k(const sysrep::PartitionedRealization& base, const Matrix& K);

// A pair given directly by its realization, for fixtures outside the K-parametrized class.
SrtrPair srtr_from_realization(const sysrep::StateSpaceSystem& wv,
                               const std::optional<sysrep::PartitionedRealization>& base = std::nullopt);

double verify_srtr_identity(const SrtrPair& pair, const sysrep::StateSpaceSystem& plant, int n_samples,
                            std::uint64_t seed);
double verify_srtr_identity(const SrtrPair& pair, int n_samples = 5, std::uint64_t seed = 42);

bool srtr_is_stable(const SrtrPair& pair);

struct NrfPair {
    RationalMatrix Phi;
    RationalMatrix Gamma;
    StabilityDomain domain = StabilityDomain::Continuous;
    int cancelled_roots = 0;
    int uncancelled_near_common = 0;

    CMatrix transfer(Complex lambda) const;  // (I - Phi)^-1 Gamma
};

NrfPair nrf_from_srtr(const SrtrPair& pair, double cancel_tol = 1e-8);

struct SparsityPattern {
    Eigen::MatrixXi maskW;
    Eigen::MatrixXi maskV;

    bool operator==(const SparsityPattern& o) const { return maskW == o.maskW && maskV == o.maskV; }
    bool subset_of(const SparsityPattern& o) const;
};

SparsityPattern sparsity_pattern(const SrtrPair& pair, double tol);
SparsityPattern sparsity_pattern(const NrfPair& nrf, double tol);

struct FlcfReport {
    bool full_normal_rank = false;
    bool no_finite_zeros = false;
    bool no_infinite_zeros = false;
    bool coprime = false;
    double min_sv_normal = 0.0;
    double min_sv_finite = 0.0;
    double min_sv_infinite = 0.0;
    Complex weakest_point{0.0, 0.0};
};

// Linear pencil S0 + x S1 whose row-rank drops are the zeros of [xI - W, V].
struct ZeroPencil {
    Matrix S0;
    Matrix S1;
    Matrix infinite_test;
};

ZeroPencil zero_pencil(const SrtrPair& pair);

FlcfReport check_flcf(const SrtrPair& pair, std::uint64_t seed = 42, double tol = 1e-9);

}  // namespace srtrkit::srtrcore
