#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "srtrkit/srtrcore.hpp"
#include "srtrkit/sysrep.hpp"

namespace srtrkit::factorkit {

// Theta(x) = Cx (xI - Ax)^-1 Bx.
struct ThetaFactor {
    Matrix Ax, Bx, Cx;
    StabilityDomain domain = StabilityDomain::Continuous;

    Eigen::Index p() const { return Ax.rows(); }
    CMatrix operator()(Complex lambda) const;
};

ThetaFactor make_theta(Matrix Ax, Matrix Bx, Matrix Cx, StabilityDomain domain = StabilityDomain::Continuous);

// (x + 1)^-1 I in continuous time, x^-1 I in discrete time.
ThetaFactor default_theta(Eigen::Index p, StabilityDomain domain);

// [M N] = (A + F C, [F B], U C, [U 0]) with C = [I 0].
struct LcfOverS {
    sysrep::PartitionedRealization blocks;
    Matrix F1, F2, U;
    StabilityDomain domain = StabilityDomain::Continuous;
    // Spectrum of the factor that produced this LCF, when known; steers the Riccati subspace choice.
    std::vector<Complex> factor_spectrum;

    Eigen::Index p() const { return blocks.p(); }
    Eigen::Index n() const { return blocks.n(); }
    Eigen::Index m() const { return blocks.m(); }

    Matrix pole_matrix() const;  // [[A11 + F1, A12], [A21 + F2, A22]]
    sysrep::StateSpaceSystem realization() const;
    CMatrix M(Complex lambda) const;
    CMatrix N(Complex lambda) const;
};

// Checks U invertible and the pole matrix stable.
LcfOverS make_lcf(const sysrep::PartitionedRealization& blocks, Matrix F1, Matrix F2, Matrix U);

// Realization of Theta [xI - W, V] with state (x-part, pair state).
sysrep::StateSpaceSystem theta_pair_realization(const srtrcore::SrtrPair& pair, const ThetaFactor& theta);

LcfOverS lcf_from_srtr(const srtrcore::SrtrPair& pair, const ThetaFactor& theta, int n_samples = 5,
                       std::uint64_t seed = 42);

// sys realizes [M N] as (A + F C, [F B], U C, [U 0]); p is the number of outputs.
LcfOverS to_kontroller_form(const sysrep::StateSpaceSystem& sys);

struct RiccatiSolution {
    Matrix K;
    double residual_norm = 0.0;
    std::vector<Complex> closed_spectrum;  // eig(A11 + F1 - A12 K)
    double cond_v1 = 0.0;
    int subsets_tried = 0;
};

struct CtnareOptions {
    // Prefer the invariant subspace whose spectrum matches these values; defaults to the LCF's factor spectrum.
    std::optional<std::vector<Complex>> target_spectrum;
    double tol = 1e-10;  // residual bound, relative to 1 + block norm
    int max_subsets = 20000;
    int newton_steps = 6;
};

Matrix ctnare_matrix(const LcfOverS& lcf);
Matrix ctnare_residual(const LcfOverS& lcf, const Matrix& K);
RiccatiSolution solve_ctnare(const LcfOverS& lcf, const CtnareOptions& options = {});

// Realization of [M N] in the coordinates fixed by a Riccati solution (x-part decoupled from the pair state).
sysrep::StateSpaceSystem riccati_realization(const LcfOverS& lcf, const Matrix& K);

// [xI 0] + (xI - Ax) U^-1 [-M N] evaluated directly.
CMatrix lcf_pair_value(const LcfOverS& lcf, const Matrix& K, Complex lambda);

srtrcore::SrtrPair srtr_from_lcf(const LcfOverS& lcf, const RiccatiSolution& solution, int n_samples = 5,
                                 std::uint64_t seed = 42);

struct LcfReport {
    bool stable = false;
    double identity_residual = 0.0;
    bool coprime_over_s = false;
};

LcfReport verify_lcf(const LcfOverS& lcf, const sysrep::StateSpaceSystem& plant, int n_samples = 5,
                     std::uint64_t seed = 42);

}  // namespace srtrkit::factorkit
