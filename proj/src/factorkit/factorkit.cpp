#include "srtrkit/factorkit.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>

#include "srtrkit/numcore.hpp"

namespace srtrkit::factorkit {

using srtrcore::SrtrPair;
using sysrep::PartitionedRealization;
using sysrep::StateSpaceSystem;

namespace {

double norm2(const CMatrix& M) { return M.size() ? numcore::singular_values(M)(0) : 0.0; }

double block_scale(const PartitionedRealization& b) { return 1.0 + b.A().norm() + b.B().norm(); }

bool all_in_domain(const std::vector<Complex>& ev, StabilityDomain domain) {
    return std::all_of(ev.begin(), ev.end(), [&](const Complex& z) { return in_domain(domain, z); });
}

CMatrix solve_or_pole(const CMatrix& lhs, const CMatrix& rhs) {
    Eigen::PartialPivLU<CMatrix> lu(lhs);
    if (!(lu.rcond() > 1e-14)) throw Error(ErrorKind::PoleEvaluation, "evaluation point makes a factor singular");
    return lu.solve(rhs);
}

// Max relative gap between two transfer matrices over seeded samples avoiding the given poles.
double sampled_gap(const std::function<CMatrix(Complex)>& a, const std::function<CMatrix(Complex)>& b,
                   const std::vector<Complex>& poles, int n_samples, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    double worst = 0.0;
    int done = 0, misses = 0;
    while (done < n_samples) {
        const Complex x = numcore::sample_points(poles, 1, rng)[0];
        try {
            const CMatrix A = a(x);
            worst = std::max(worst, norm2(A - b(x)) / (1.0 + norm2(A)));
            ++done;
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::PoleEvaluation || ++misses > 50) throw;
        }
    }
    return worst;
}

std::vector<Complex> concat(std::vector<Complex> a, const std::vector<Complex>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

}  // namespace

CMatrix ThetaFactor::operator()(Complex lambda) const {
    const Eigen::Index p = Ax.rows();
    return Cx.cast<Complex>() *
           solve_or_pole(lambda * CMatrix::Identity(p, p) - Ax.cast<Complex>(), Bx.cast<Complex>());
}

ThetaFactor make_theta(Matrix Ax, Matrix Bx, Matrix Cx, StabilityDomain domain) {
    const Eigen::Index p = Ax.rows();
    require(p >= 1 && Ax.cols() == p && Bx.rows() == p && Bx.cols() == p && Cx.rows() == p && Cx.cols() == p,
            ErrorKind::InvalidTheta, "theta factor blocks must be p x p");
    require(Ax.allFinite() && Bx.allFinite() && Cx.allFinite(), ErrorKind::InvalidTheta, "theta factor not finite");
    require(numcore::is_stable_spectrum(Ax, domain), ErrorKind::InvalidTheta, "theta state matrix is not stable");
    require(numcore::rank_with_tolerance(Bx) == p, ErrorKind::InvalidTheta, "theta input matrix is singular");
    require(numcore::rank_with_tolerance(Cx) == p, ErrorKind::InvalidTheta, "theta output matrix is singular");
    return {std::move(Ax), std::move(Bx), std::move(Cx), domain};
}

ThetaFactor default_theta(Eigen::Index p, StabilityDomain domain) {
    const double pole = domain == StabilityDomain::Continuous ? -1.0 : 0.0;
    return make_theta(pole * Matrix::Identity(p, p), Matrix::Identity(p, p), Matrix::Identity(p, p), domain);
}

Matrix LcfOverS::pole_matrix() const {
    Matrix out = blocks.A();
    out.topLeftCorner(p(), p()) += F1;
    out.bottomLeftCorner(n() - p(), p()) += F2;
    return out;
}

StateSpaceSystem LcfOverS::realization() const {
    const Eigen::Index p_ = p(), n_ = n(), m_ = m();
    Matrix B(n_, p_ + m_);
    B << F1, blocks.B1, F2, blocks.B2;
    Matrix C = Matrix::Zero(p_, n_);
    C.leftCols(p_) = U;
    Matrix D = Matrix::Zero(p_, p_ + m_);
    D.leftCols(p_) = U;
    return sysrep::make_system(pole_matrix(), B, C, D, domain);
}

CMatrix LcfOverS::M(Complex lambda) const { return sysrep::eval_tfm(realization(), lambda).leftCols(p()); }
CMatrix LcfOverS::N(Complex lambda) const { return sysrep::eval_tfm(realization(), lambda).rightCols(m()); }

LcfOverS make_lcf(const PartitionedRealization& blocks, Matrix F1, Matrix F2, Matrix U) {
    const Eigen::Index p = blocks.p(), q = blocks.n() - p;
    require(F1.rows() == p && F1.cols() == p && F2.rows() == q && F2.cols() == p && U.rows() == p && U.cols() == p,
            ErrorKind::Dimension, "lcf: F1 p x p, F2 (n-p) x p, U p x p");
    require(F1.allFinite() && F2.allFinite() && U.allFinite(), ErrorKind::InvalidInput, "lcf: non-finite entries");
    require(numcore::rank_with_tolerance(U) == p, ErrorKind::Precondition, "lcf: U is singular");
    LcfOverS out{blocks, std::move(F1), std::move(F2), std::move(U), blocks.domain, {}};
    require(numcore::is_stable_spectrum(out.pole_matrix(), out.domain), ErrorKind::Precondition,
            "lcf: [M N] is not stable");
    return out;
}

StateSpaceSystem theta_pair_realization(const SrtrPair& pair, const ThetaFactor& theta) {
    const Eigen::Index p = pair.p(), N = pair.order(), m = pair.m();
    require(theta.p() == p, ErrorKind::Dimension, "theta size must equal the number of outputs");
    Matrix A = Matrix::Zero(p + N, p + N);
    A.topLeftCorner(p, p) = theta.Ax;
    A.topRightCorner(p, N) = theta.Bx * pair.Cw;
    A.bottomRightCorner(N, N) = pair.Aw;
    Matrix B(p + N, p + m);
    B << theta.Ax * theta.Bx - theta.Bx * pair.Dw_w(), theta.Bx * pair.Dw_v(), -pair.Bw_w(), pair.Bw_v();
    Matrix C = Matrix::Zero(p, p + N);
    C.leftCols(p) = theta.Cx;
    Matrix D = Matrix::Zero(p, p + m);
    D.leftCols(p) = theta.Cx * theta.Bx;
    return sysrep::make_system(A, B, C, D, pair.domain);
}

LcfOverS lcf_from_srtr(const SrtrPair& pair, const ThetaFactor& theta, int n_samples, std::uint64_t seed) {
    require(pair.base.has_value() && pair.has_generator(), ErrorKind::Precondition,
            "lcf_from_srtr needs a pair generated from a base realization");
    require(srtrcore::srtr_is_stable(pair), ErrorKind::Precondition, "lcf_from_srtr needs a stable pair");
    require(pair.base_minimal, ErrorKind::Precondition, "lcf_from_srtr needs a minimal base realization");
    require(theta.domain == pair.domain, ErrorKind::InvalidTheta, "theta and pair use different domains");
    const PartitionedRealization& base = *pair.base;
    const Eigen::Index p = pair.p(), n = base.n();

    // Back to the base coordinates: scale the factor state by Bx^-1, then undo the [I 0; K I] change.
    const StateSpaceSystem mn = theta_pair_realization(pair, theta);
    Matrix T = Matrix::Identity(n, n);
    T.topLeftCorner(p, p) = theta.Bx.partialPivLu().inverse();
    Matrix undo = Matrix::Identity(n, n);
    undo.bottomLeftCorner(n - p, p) = -pair.K;
    T = undo * T;
    const StateSpaceSystem moved = sysrep::apply_transform(mn, sysrep::EquivalenceTransform(T));

    const Matrix U = theta.Cx * theta.Bx;
    LcfOverS out = make_lcf(base, moved.B.topLeftCorner(p, p), moved.B.bottomLeftCorner(n - p, p), U);
    out.factor_spectrum = numcore::eigenvalues(theta.Ax);

    const double scale = block_scale(base);
    const double drift = std::max((moved.A - out.pole_matrix()).cwiseAbs().maxCoeff(),
                                  (moved.B.rightCols(base.m()) - base.B()).cwiseAbs().maxCoeff());
    if (drift > 1e-8 * scale) throw Error(ErrorKind::NumericalFailure, "lcf_from_srtr: coordinate change drifted");

    const StateSpaceSystem plant = base.to_system();
    const StateSpaceSystem lcf_sys = out.realization();
    const double gap = sampled_gap(
        [&](Complex x) { return sysrep::eval_tfm(plant, x); },
        [&](Complex x) {
            const CMatrix MN = sysrep::eval_tfm(lcf_sys, x);
            return CMatrix(solve_or_pole(MN.leftCols(p), MN.rightCols(base.m())));
        },
        concat(numcore::eigenvalues(plant.A), numcore::eigenvalues(lcf_sys.A)), n_samples, seed);
    if (gap > 1e-6) throw Error(ErrorKind::NumericalFailure, "lcf_from_srtr: M^-1 N does not reproduce the plant");
    return out;
}

LcfOverS to_kontroller_form(const StateSpaceSystem& sys) {
    sys.validate();
    const Eigen::Index p = sys.outputs(), n = sys.states(), m = sys.inputs() - p;
    require(m >= 0, ErrorKind::Dimension, "[M N] needs at least p inputs");
    require(p >= 1 && p < n, ErrorKind::Regularity, "[M N] realization needs 1 <= p < n");
    const Matrix U = sys.D.leftCols(p);
    require(sys.D.rightCols(m).isZero(0.0), ErrorKind::Precondition, "feedthrough of [M N] must be [U 0]");
    require(numcore::rank_with_tolerance(U) == p, ErrorKind::Precondition, "condition (a) violated: U is singular");
    const Matrix C = U.partialPivLu().solve(sys.C);
    require(numcore::rank_with_tolerance(C) == p, ErrorKind::Precondition,
            "condition (b) violated: output matrix lacks full row rank");
    require(numcore::is_stable_spectrum(sys.A, sys.domain), ErrorKind::Precondition,
            "condition (c) violated: A + F C is not stable");
    require(sysrep::is_minimal(sys), ErrorKind::Precondition,
            "[M N] realization is not minimal: McMillan degree exceeds the plant's");

    Matrix expected = Matrix::Zero(p, n);
    expected.leftCols(p).setIdentity();
    Matrix T = Matrix::Identity(n, n);
    if (!(C - expected).isZero(1e-14)) {
        Eigen::HouseholderQR<Matrix> qr(C.transpose());
        const Matrix Q = qr.householderQ() * Matrix::Identity(n, n);
        T << C, Q.rightCols(n - p).transpose();
    }
    const StateSpaceSystem moved = sysrep::apply_transform(sys, sysrep::EquivalenceTransform(T));
    const Matrix F = moved.B.leftCols(p);
    const Matrix A = moved.A - F * expected;
    const PartitionedRealization blocks =
        sysrep::make_partitioned(A.topLeftCorner(p, p), A.topRightCorner(p, n - p), A.bottomLeftCorner(n - p, p),
                                 A.bottomRightCorner(n - p, n - p), moved.B.block(0, p, p, m),
                                 moved.B.block(p, p, n - p, m), sys.domain);
    return make_lcf(blocks, F.topRows(p), F.bottomRows(n - p), U);
}

Matrix ctnare_matrix(const LcfOverS& lcf) {
    Matrix out = lcf.pole_matrix();
    const Eigen::Index p = lcf.p(), q = lcf.n() - p;
    out.topRightCorner(p, q) *= -1.0;
    out.bottomLeftCorner(q, p) *= -1.0;
    return out;
}

Matrix ctnare_residual(const LcfOverS& lcf, const Matrix& K) {
    const auto& b = lcf.blocks;
    return K * (b.A11 + lcf.F1) - K * b.A12 * K + (b.A21 + lcf.F2) - b.A22 * K;
}

namespace {

// Newton step on the quadratic: (A22 + K A12) dK - dK (A11 + F1 - A12 K) = R.
Matrix newton_refine(const LcfOverS& lcf, Matrix K, int steps) {
    const auto& b = lcf.blocks;
    double best = ctnare_residual(lcf, K).norm();
    for (int s = 0; s < steps && best > 0.0; ++s) {
        const Matrix R = ctnare_residual(lcf, K);
        Matrix dK;
        try {
            dK = numcore::solve_sylvester(b.A22 + K * b.A12, b.A11 + lcf.F1 - b.A12 * K, R);
        } catch (const Error&) {
            break;
        }
        const Matrix next = K + dK;
        const double r = ctnare_residual(lcf, next).norm();
        if (!(r < best)) break;
        best = r;
        K = next;
    }
    return K;
}

// Calls visit on every subset of blocks whose sizes add up to target, until it returns false.
void for_each_subset(const std::vector<numcore::SchurBlock>& blocks, const std::vector<bool>& allowed, int target,
                     const std::function<bool(const std::vector<bool>&)>& visit) {
    std::vector<bool> chosen(blocks.size(), false);
    bool stop = false;
    std::function<void(std::size_t, int)> rec = [&](std::size_t i, int remaining) {
        if (stop) return;
        if (remaining == 0) {
            stop = !visit(chosen);
            return;
        }
        if (i == blocks.size()) return;
        if (allowed[i] && blocks[i].size <= remaining) {
            chosen[i] = true;
            rec(i + 1, remaining - blocks[i].size);
            chosen[i] = false;
        }
        rec(i + 1, remaining);
    };
    rec(0, target);
}

struct Candidate {
    Matrix K;
    double cond = std::numeric_limits<double>::infinity();
    std::vector<Complex> spectrum;
};

std::optional<Candidate> candidate_from(const numcore::RealSchur& schur, const std::vector<bool>& chosen,
                                        const std::vector<numcore::SchurBlock>& blocks, Eigen::Index p) {
    numcore::RealSchur work = schur;
    try {
        numcore::reorder_schur(work, chosen);
    } catch (const Error&) {
        return std::nullopt;
    }
    const Matrix V = work.Z.leftCols(p);
    const Matrix V1 = V.topRows(p);
    const Vector sv = numcore::singular_values(V1);
    if (sv.size() == 0 || sv(sv.size() - 1) <= 1e-13 * sv(0)) return std::nullopt;
    Candidate c;
    c.cond = sv(0) / sv(sv.size() - 1);
    c.K = V.bottomRows(V.rows() - p) * V1.partialPivLu().inverse();
    for (std::size_t b = 0; b < blocks.size(); ++b)
        if (chosen[b])
            for (const auto& e : numcore::block_eigenvalues(schur.T, blocks[b])) c.spectrum.push_back(e);
    return c;
}

// Picks, for each target value, the nearest still-free eigenvalue block.
std::vector<bool> match_blocks(const numcore::RealSchur& schur, const std::vector<numcore::SchurBlock>& blocks,
                               const std::vector<bool>& allowed, const std::vector<Complex>& targets) {
    std::vector<bool> chosen(blocks.size(), false);
    std::vector<int> remaining(blocks.size());
    for (std::size_t b = 0; b < blocks.size(); ++b) remaining[b] = allowed[b] ? blocks[b].size : 0;
    for (const auto& t : targets) {
        std::size_t best = blocks.size();
        double dist = std::numeric_limits<double>::infinity();
        for (std::size_t b = 0; b < blocks.size(); ++b) {
            if (remaining[b] == 0) continue;
            for (const auto& e : numcore::block_eigenvalues(schur.T, blocks[b])) {
                const double d = std::abs(e - t);
                if (d < dist) {
                    dist = d;
                    best = b;
                }
            }
        }
        if (best == blocks.size()) break;
        --remaining[best];
        chosen[best] = true;
    }
    return chosen;
}

}  // namespace

RiccatiSolution solve_ctnare(const LcfOverS& lcf, const CtnareOptions& options) {
    const Eigen::Index p = lcf.p();
    require(numcore::is_stable_spectrum(lcf.pole_matrix(), lcf.domain), ErrorKind::Precondition,
            "solve_ctnare: [M N] is not stable");
    const Matrix Aplus = ctnare_matrix(lcf);
    const numcore::RealSchur schur = numcore::real_schur(Aplus);
    const auto blocks = numcore::schur_blocks(schur.T);
    std::vector<bool> allowed(blocks.size());
    for (std::size_t b = 0; b < blocks.size(); ++b)
        allowed[b] = all_in_domain(numcore::block_eigenvalues(schur.T, blocks[b]), lcf.domain);

    const std::vector<Complex>* targets =
        options.target_spectrum ? &*options.target_spectrum : (lcf.factor_spectrum.empty() ? nullptr : &lcf.factor_spectrum);

    std::optional<Candidate> best;
    int tried = 0;
    if (targets) {
        const auto chosen = match_blocks(schur, blocks, allowed, *targets);
        int size = 0;
        for (std::size_t b = 0; b < blocks.size(); ++b)
            if (chosen[b]) size += blocks[b].size;
        if (size == p) {
            ++tried;
            best = candidate_from(schur, chosen, blocks, p);
        }
    }
    if (!best) {
        for_each_subset(blocks, allowed, static_cast<int>(p), [&](const std::vector<bool>& chosen) {
            ++tried;
            auto c = candidate_from(schur, chosen, blocks, p);
            if (c && (!best || c->cond < best->cond)) best = std::move(c);
            return tried < options.max_subsets;
        });
    }
    if (!best)
        throw Error(ErrorKind::NoSolution, "solve_ctnare: no disconjugate invariant subspace among " +
                                               std::to_string(tried) + " subsets");

    RiccatiSolution sol;
    sol.K = newton_refine(lcf, best->K, options.newton_steps);
    sol.residual_norm = ctnare_residual(lcf, sol.K).norm();
    sol.cond_v1 = best->cond;
    sol.subsets_tried = tried;
    const auto& b = lcf.blocks;
    sol.closed_spectrum = numcore::eigenvalues(b.A11 + lcf.F1 - b.A12 * sol.K);
    if (sol.residual_norm > options.tol * block_scale(b))
        throw Error(ErrorKind::NumericalFailure,
                    "solve_ctnare: residual " + std::to_string(sol.residual_norm) + " above tolerance");
    if (!all_in_domain(sol.closed_spectrum, lcf.domain))
        throw Error(ErrorKind::NumericalFailure, "solve_ctnare: solution is not right stabilizing");
    return sol;
}

StateSpaceSystem riccati_realization(const LcfOverS& lcf, const Matrix& K) {
    const auto& b = lcf.blocks;
    const Eigen::Index p = lcf.p(), q = lcf.n() - p, m = lcf.m();
    const Matrix Ax = b.A11 + lcf.F1 - b.A12 * K;
    Matrix A = Matrix::Zero(p + q, p + q);
    A << Ax, b.A12, Matrix::Zero(q, p), b.A22 + K * b.A12;
    Matrix B(p + q, p + m);
    B << Ax - b.A11 + b.A12 * K, b.B1, K * b.A12 * K + b.A22 * K - K * b.A11 - b.A21, K * b.B1 + b.B2;
    Matrix C = Matrix::Zero(p, p + q);
    C.leftCols(p) = lcf.U;
    Matrix D = Matrix::Zero(p, p + m);
    D.leftCols(p) = lcf.U;
    return sysrep::make_system(A, B, C, D, lcf.domain);
}

CMatrix lcf_pair_value(const LcfOverS& lcf, const Matrix& K, Complex lambda) {
    const Eigen::Index p = lcf.p();
    const auto& b = lcf.blocks;
    const Matrix Ax = b.A11 + lcf.F1 - b.A12 * K;
    const CMatrix MN = sysrep::eval_tfm(lcf.realization(), lambda);
    CMatrix signedMN = MN;
    signedMN.leftCols(p) *= -1.0;
    CMatrix out = (lambda * CMatrix::Identity(p, p) - Ax.cast<Complex>()) *
                  lcf.U.cast<Complex>().partialPivLu().solve(signedMN);
    out.leftCols(p) += lambda * CMatrix::Identity(p, p);
    return out;
}

SrtrPair srtr_from_lcf(const LcfOverS& lcf, const RiccatiSolution& solution, int n_samples, std::uint64_t seed) {
    const auto& b = lcf.blocks;
    const Eigen::Index p = lcf.p();
    require(solution.K.rows() == lcf.n() - p && solution.K.cols() == p, ErrorKind::Dimension,
            "srtr_from_lcf: K must be (n-p) x p");
    const double residual = ctnare_residual(lcf, solution.K).norm();
    require(residual <= 1e-8 * block_scale(b), ErrorKind::Precondition, "srtr_from_lcf: K does not solve the CTNARE");
    require(numcore::is_stable_spectrum(b.A11 + lcf.F1 - b.A12 * solution.K, lcf.domain), ErrorKind::Precondition,
            "srtr_from_lcf: K is not right stabilizing");

    SrtrPair pair = srtrcore::srtr_from_k(b, solution.K);
    const double gap = sampled_gap([&](Complex x) { return sysrep::eval_tfm(pair.as_system(), x); },
                                   [&](Complex x) { return lcf_pair_value(lcf, solution.K, x); },
                                   concat(numcore::eigenvalues(pair.Aw), numcore::eigenvalues(lcf.pole_matrix())),
                                   n_samples, seed);
    if (gap > 1e-8 * std::max(1.0, solution.cond_v1))
        throw Error(ErrorKind::NumericalFailure, "srtr_from_lcf: the two pair formulas disagree");
    if (!srtrcore::srtr_is_stable(pair)) throw Error(ErrorKind::NumericalFailure, "srtr_from_lcf: pair not stable");
    return pair;
}

LcfReport verify_lcf(const LcfOverS& lcf, const StateSpaceSystem& plant, int n_samples, std::uint64_t seed) {
    LcfReport rep;
    const Eigen::Index p = lcf.p(), m = lcf.m();
    const StateSpaceSystem sys = lcf.realization();
    rep.stable = numcore::is_stable_spectrum(sys.A, lcf.domain);

    rep.identity_residual = sampled_gap(
        [&](Complex x) { return sysrep::eval_tfm(plant, x); },
        [&](Complex x) {
            const CMatrix MN = sysrep::eval_tfm(sys, x);
            return CMatrix(solve_or_pole(MN.leftCols(p), MN.rightCols(m)));
        },
        concat(numcore::eigenvalues(plant.A), numcore::eigenvalues(sys.A)), n_samples, seed);

    // Zeros of [M N] outside the stability domain, through its system pencil.
    const Eigen::Index n = sys.states();
    Matrix S0 = Matrix::Zero(n + p, n + p + m), S1 = Matrix::Zero(n + p, n + p + m);
    S0.topLeftCorner(n, n) = sys.A;
    S0.topRightCorner(n, p + m) = sys.B;
    S0.bottomLeftCorner(p, n) = sys.C;
    S0.bottomRightCorner(p, p + m) = sys.D;
    S1.topLeftCorner(n, n) = -Matrix::Identity(n, n);
    std::mt19937_64 rng(seed);
    std::vector<Complex> probes = numcore::pencil_rank_candidates(S0, S1, rng);
    const auto poles = numcore::eigenvalues(sys.A);
    probes.insert(probes.end(), poles.begin(), poles.end());
    std::normal_distribution<double> g(0.0, 1.0 + sys.A.norm());
    for (int k = 0; k < 20; ++k) probes.emplace_back(std::abs(g(rng)) + 1.0, g(rng));

    bool ok = numcore::rank_with_tolerance(lcf.U) == p;
    for (const auto& z : probes) {
        if (in_domain(lcf.domain, z)) continue;
        if (numcore::pencil_min_singular(S0, S1, z) <= 1e-9) ok = false;
    }
    for (const auto& z : poles)
        if (!in_domain(lcf.domain, z) && !numcore::pbh_test(sys.A, sys.B, numcore::PbhMode::ControllableAt, z))
            ok = false;
    rep.coprime_over_s = ok;
    return rep;
}

}  // namespace srtrkit::factorkit
