#include "srtrkit/srtrcore.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "srtrkit/numcore.hpp"

namespace srtrkit::srtrcore {

using sysrep::PartitionedRealization;
using sysrep::StateSpaceSystem;

sysrep::StateSpaceSystem SrtrPair::as_system() const {
    return sysrep::make_system(Aw, Bw, Cw, Dw, domain);
}

CMatrix SrtrPair::W(Complex lambda) const {
    return sysrep::eval_tfm(as_system(), lambda).leftCols(p());
}

CMatrix SrtrPair::V(Complex lambda) const {
    return sysrep::eval_tfm(as_system(), lambda).rightCols(m());
}

SrtrPair srtr_from_k(const PartitionedRealization& base, const Matrix& K) {
    const Eigen::Index p = base.p(), q = base.A22.rows(), m = base.m();
    require(K.rows() == q && K.cols() == p, ErrorKind::Dimension, "K must be (n-p) x p");
    require(K.allFinite(), ErrorKind::InvalidInput, "K has non-finite entries");
    SrtrPair out;
    out.base = base;
    out.K = K;
    out.domain = base.domain;
    out.Aw = base.A22 + K * base.A12;
    out.Bw.resize(q, p + m);
    out.Bw << K * base.A11 - K * base.A12 * K + base.A21 - base.A22 * K, K * base.B1 + base.B2;
    out.Cw = base.A12;
    out.Dw.resize(p, p + m);
    out.Dw << base.A11 - base.A12 * K, base.B1;
    out.base_minimal = sysrep::is_minimal(base.to_system());
    return out;
}

SrtrPair srtr_from_realization(const StateSpaceSystem& wv, const std::optional<PartitionedRealization>& base) {
    wv.validate();
    require(wv.inputs() >= wv.outputs(), ErrorKind::Dimension, "pair realization must have p + m inputs");
    if (base)
        require(wv.outputs() == base->p() && wv.inputs() == base->p() + base->m(), ErrorKind::Dimension,
                "pair realization must have p outputs and p + m inputs");
    SrtrPair out;
    out.base = base;
    out.K = Matrix(0, 0);
    out.Aw = wv.A;
    out.Bw = wv.B;
    out.Cw = wv.C;
    out.Dw = wv.D;
    out.domain = wv.domain;
    out.hand_encoded = true;
    out.base_minimal = base && sysrep::is_minimal(base->to_system());
    return out;
}

namespace {

std::vector<Complex> concat(std::vector<Complex> a, const std::vector<Complex>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

double norm2(const CMatrix& M) {
    if (M.size() == 0) return 0.0;
    return numcore::singular_values(M)(0);
}

}  // namespace

double verify_srtr_identity(const SrtrPair& pair, const StateSpaceSystem& plant, int n_samples, std::uint64_t seed) {
    require(plant.outputs() == pair.p() && plant.inputs() == pair.m(), ErrorKind::Dimension,
            "plant dimensions do not match the pair");
    std::mt19937_64 rng(seed);
    const auto poles = concat(numcore::eigenvalues(plant.A), numcore::eigenvalues(pair.Aw));
    const StateSpaceSystem wv = pair.as_system();
    const Eigen::Index p = pair.p();
    double worst = 0.0;
    int done = 0, attempts = 0;
    while (done < n_samples) {
        const Complex x = numcore::sample_points(poles, 1, rng)[0];
        try {
            const CMatrix G = sysrep::eval_tfm(plant, x);
            const CMatrix WV = sysrep::eval_tfm(wv, x);
            const CMatrix lhs = x * CMatrix::Identity(p, p) - WV.leftCols(p);
            Eigen::PartialPivLU<CMatrix> lu(lhs);
            if (!(lu.rcond() > 1e-14)) throw Error(ErrorKind::PoleEvaluation, "xI - W singular at sample");
            const CMatrix H = lu.solve(WV.rightCols(pair.m()));
            worst = std::max(worst, norm2(G - H) / (1.0 + norm2(G)));
            ++done;
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::PoleEvaluation || ++attempts > 50) throw;
        }
    }
    return worst;
}

double verify_srtr_identity(const SrtrPair& pair, int n_samples, std::uint64_t seed) {
    require(pair.base.has_value(), ErrorKind::InvalidInput, "pair carries no base realization");
    return verify_srtr_identity(pair, pair.base->to_system(), n_samples, seed);
}

bool srtr_is_stable(const SrtrPair& pair) {
    return numcore::is_stable_spectrum(pair.Aw, pair.domain);
}

CMatrix NrfPair::transfer(Complex lambda) const {
    const Eigen::Index p = Phi.rows();
    const CMatrix lhs = CMatrix::Identity(p, p) - Phi.evaluate(lambda);
    return lhs.partialPivLu().solve(Gamma.evaluate(lambda));
}

NrfPair nrf_from_srtr(const SrtrPair& pair, double cancel_tol) {
    const CommonDenominator cd = common_denominator(pair.as_system());
    const Eigen::Index p = pair.p(), m = pair.m();
    NrfPair out;
    out.domain = pair.domain;
    out.Phi = RationalMatrix(p, p);
    out.Gamma = RationalMatrix(p, m);
    ReductionStats stats;
    const Poly xchi = shift_up(cd.chi);
    for (Eigen::Index i = 0; i < p; ++i) {
        const Poly den = subtract(xchi, cd.num[i][i]);
        for (Eigen::Index j = 0; j < p; ++j) {
            if (i == j) continue;
            out.Phi(i, j) = reduce(RationalFn{cd.num[i][j], den}, cancel_tol, &stats);
        }
        for (Eigen::Index k = 0; k < m; ++k)
            out.Gamma(i, k) = reduce(RationalFn{cd.num[i][p + k], den}, cancel_tol, &stats);
    }
    out.cancelled_roots = stats.cancelled;
    out.uncancelled_near_common = stats.near_common;
    return out;
}

bool SparsityPattern::subset_of(const SparsityPattern& o) const {
    if (maskW.rows() != o.maskW.rows() || maskW.cols() != o.maskW.cols() || maskV.rows() != o.maskV.rows() ||
        maskV.cols() != o.maskV.cols())
        return false;
    return (maskW.array() <= o.maskW.array()).all() && (maskV.array() <= o.maskV.array()).all();
}

SparsityPattern sparsity_pattern(const SrtrPair& pair, double tol) {
    const RationalMatrix R = rational_entries(pair.as_system());
    const Eigen::Index p = pair.p(), m = pair.m();
    SparsityPattern out{Eigen::MatrixXi::Zero(p, p), Eigen::MatrixXi::Zero(p, m)};
    for (Eigen::Index i = 0; i < p; ++i) {
        for (Eigen::Index j = 0; j < p; ++j) out.maskW(i, j) = negligible(R(i, j), tol) ? 0 : 1;
        for (Eigen::Index k = 0; k < m; ++k) out.maskV(i, k) = negligible(R(i, p + k), tol) ? 0 : 1;
    }
    return out;
}

SparsityPattern sparsity_pattern(const NrfPair& nrf, double tol) {
    const Eigen::Index p = nrf.Phi.rows(), m = nrf.Gamma.cols();
    SparsityPattern out{Eigen::MatrixXi::Zero(p, p), Eigen::MatrixXi::Zero(p, m)};
    for (Eigen::Index i = 0; i < p; ++i) {
        // The diagonal of W is what the NRF divides out; it is structurally present.
        for (Eigen::Index j = 0; j < p; ++j) out.maskW(i, j) = (i == j || !negligible(nrf.Phi(i, j), tol)) ? 1 : 0;
        for (Eigen::Index k = 0; k < m; ++k) out.maskV(i, k) = negligible(nrf.Gamma(i, k), tol) ? 0 : 1;
    }
    return out;
}

ZeroPencil zero_pencil(const SrtrPair& pair) {
    const Eigen::Index N = pair.order(), p = pair.p(), m = pair.m();
    const Eigen::Index rows = N + 2 * p, cols = N + 2 * p + m;
    ZeroPencil z{Matrix::Zero(rows, cols), Matrix::Zero(rows, cols), Matrix::Zero(rows, cols)};
    // Block rows: state equation, the lambda I_p link, output equation.
    z.S0.block(0, 0, N, N) = pair.Aw;
    z.S0.block(0, N + p, N, p) = -pair.Bw_w();
    z.S0.block(0, N + 2 * p, N, m) = pair.Bw_v();
    z.S0.block(N, N, p, p).setIdentity();
    z.S0.block(N + p, 0, p, N) = pair.Cw;
    z.S0.block(N + p, N, p, p).setIdentity();
    z.S0.block(N + p, N + p, p, p) = -pair.Dw_w();
    z.S0.block(N + p, N + 2 * p, p, m) = pair.Dw_v();
    z.S1.block(0, 0, N, N) = -Matrix::Identity(N, N);
    z.S1.block(N, N + p, p, p) = -Matrix::Identity(p, p);

    z.infinite_test.block(0, 0, N, N).setIdentity();
    z.infinite_test.block(N, N + p, p, p).setIdentity();
    z.infinite_test.bottomRows(p) = z.S0.bottomRows(p);
    return z;
}

FlcfReport check_flcf(const SrtrPair& pair, std::uint64_t seed, double tol) {
    const ZeroPencil z = zero_pencil(pair);
    std::mt19937_64 rng(seed);
    FlcfReport rep;

    std::normal_distribution<double> gauss(0.0, 1.0);
    const double spread = 1.0 + pair.Aw.norm() + pair.Dw.norm();
    const Complex generic(spread * gauss(rng), spread * gauss(rng));
    rep.min_sv_normal = numcore::pencil_min_singular(z.S0, z.S1, generic);
    rep.full_normal_rank = rep.min_sv_normal > tol;

    std::vector<Complex> candidates = numcore::eigenvalues(pair.Aw);
    if (pair.base) {
        const auto base_ev = numcore::eigenvalues(pair.base->A());
        candidates.insert(candidates.end(), base_ev.begin(), base_ev.end());
    }
    const auto pencil_ev = numcore::pencil_rank_candidates(z.S0, z.S1, rng);
    candidates.insert(candidates.end(), pencil_ev.begin(), pencil_ev.end());
    for (int k = 0; k < 20; ++k) candidates.emplace_back(spread * gauss(rng), spread * gauss(rng));

    rep.min_sv_finite = 1e300;
    for (const auto& c : candidates) {
        const double s = numcore::pencil_min_singular(z.S0, z.S1, c);
        if (s < rep.min_sv_finite) {
            rep.min_sv_finite = s;
            rep.weakest_point = c;
        }
    }
    rep.no_finite_zeros = rep.full_normal_rank && rep.min_sv_finite > tol;

    const Vector sv = numcore::singular_values(z.infinite_test);
    rep.min_sv_infinite = sv.size() ? sv(sv.size() - 1) / std::max(1.0, sv(0)) : 1.0;
    rep.no_infinite_zeros = rep.min_sv_infinite > tol;
    rep.coprime = rep.full_normal_rank && rep.no_finite_zeros && rep.no_infinite_zeros;
    return rep;
}

}  // namespace srtrkit::srtrcore
