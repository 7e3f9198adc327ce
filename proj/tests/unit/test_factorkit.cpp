#include <gtest/gtest.h>

#include <random>

#include "srtrkit/factorkit.hpp"
#include "srtrkit/fixtures.hpp"
#include "srtrkit/numcore.hpp"
#include "support.hpp"

using namespace srtrkit;
using namespace srtrkit::factorkit;
using srtrcore::SrtrPair;
using srtrcore::srtr_from_k;
using sysrep::eval_tfm;
using sysrep::make_partitioned;
using testsupport::match_distance;
using testsupport::random_base;
using testsupport::random_matrix;
using testsupport::throws_kind;

namespace {

Matrix scalar(double v) { return Matrix::Constant(1, 1, v); }

// A minimal base and a K that makes the pair stable, by eigenvalue assignment on the dual pair.
SrtrPair random_stable_pair(std::mt19937_64& rng, int n, int p, int m,
                            StabilityDomain domain = StabilityDomain::Continuous) {
    const auto base = random_base(rng, n, p, m, domain);
    std::uniform_real_distribution<double> u(domain == StabilityDomain::Continuous ? -4.0 : -0.8,
                                             domain == StabilityDomain::Continuous ? -0.5 : 0.8);
    std::vector<Complex> targets;
    for (int i = 0; i < n - p; ++i) targets.emplace_back(u(rng), 0.0);
    const Matrix F = numcore::place_eigenvalues(base.A22.transpose(), base.A12.transpose(), targets, rng);
    return srtr_from_k(base, F.transpose());
}

double pair_gap(const SrtrPair& a, const SrtrPair& b, std::mt19937_64& rng) {
    const auto poles = numcore::eigenvalues(a.Aw);
    double worst = 0.0;
    for (const auto& x : numcore::sample_points(poles, 5, rng)) {
        const CMatrix Ga = eval_tfm(a.as_system(), x);
        worst = std::max(worst, (Ga - eval_tfm(b.as_system(), x)).norm() / (1.0 + Ga.norm()));
    }
    return worst;
}

LcfOverS scalar_lcf(double a11f1, double a12, double a21f2, double a22) {
    const auto blocks = make_partitioned(scalar(a11f1), scalar(a12), scalar(a21f2), scalar(a22), scalar(1), scalar(1));
    return make_lcf(blocks, scalar(0), scalar(0), scalar(1));
}

}  // namespace

TEST(Theta, DefaultFactorIsScaledIdentity) {
    const auto th = default_theta(3, StabilityDomain::Continuous);
    const Complex x(0.5, 2.0);
    EXPECT_LE((th(x) - CMatrix::Identity(3, 3) / (x + 1.0)).norm(), 1e-15);
}

TEST(Theta, DiagonalStateGivesDiagonalFactor) {
    const auto th = make_theta(Vector::LinSpaced(3, -1.0, -3.0).asDiagonal(), Matrix::Identity(3, 3),
                               Vector::LinSpaced(3, 1.0, 2.0).asDiagonal());
    const CMatrix v = th(Complex(0.2, 0.7));
    EXPECT_LE((v - CMatrix(v.diagonal().asDiagonal())).norm(), 0.0);
}

TEST(Theta, InvalidFactorsRejected) {
    EXPECT_TRUE(throws_kind([] { make_theta(scalar(1), scalar(1), scalar(1)); }, ErrorKind::InvalidTheta));
    EXPECT_TRUE(throws_kind([] { make_theta(-Matrix::Identity(2, 2), Matrix::Zero(2, 2), Matrix::Identity(2, 2)); },
                            ErrorKind::InvalidTheta));
}

TEST(LcfFromSrtr, RingControllerPair) {
    const auto pair = srtr_from_k(cli::ring6_controller(), cli::ring6_K());
    const auto theta = default_theta(6, StabilityDomain::Continuous);
    const auto lcf = lcf_from_srtr(pair, theta);
    const auto rep = verify_lcf(lcf, cli::ring6_controller().to_system());
    EXPECT_TRUE(rep.stable);
    EXPECT_TRUE(rep.coprime_over_s);
    EXPECT_LE(rep.identity_residual, 1e-6);

    // [M N] equals Theta [xI - W, V].
    for (Complex x : {Complex(1.0, 0.5), Complex(-0.3, 2.0)}) {
        CMatrix expected(6, 12);
        expected << x * CMatrix::Identity(6, 6) - pair.W(x), pair.V(x);
        expected = theta(x) * expected;
        CMatrix got(6, 12);
        got << lcf.M(x), lcf.N(x);
        EXPECT_LE((got - expected).norm() / expected.norm(), 1e-9);
    }
}

TEST(LcfFromSrtr, PolesOfThePairArePreserved) {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 10; ++trial) {
        const auto pair = random_stable_pair(rng, 6, 2, 2);
        const auto lcf = lcf_from_srtr(pair, default_theta(2, StabilityDomain::Continuous));
        const auto poles = numcore::eigenvalues(lcf.pole_matrix());
        for (const auto& e : numcore::eigenvalues(pair.Aw)) {
            double best = 1e300;
            for (const auto& q : poles) best = std::min(best, std::abs(q - e));
            EXPECT_LE(best, 1e-8);
        }
    }
}

TEST(LcfFromSrtr, DiagonalFactorKeepsSparsity) {
    std::mt19937_64 rng(32);
    int checked = 0;
    for (int trial = 0; trial < 40 && checked < 10; ++trial) {
        const auto inst = testsupport::structured_instance(rng, 3, 2, 1);
        const auto pair = srtr_from_k(inst.base, Matrix::Zero(3, 3));
        if (!srtrcore::srtr_is_stable(pair) || !pair.base_minimal) continue;
        ++checked;
        const auto theta = make_theta(Vector::LinSpaced(3, -1.0, -2.0).asDiagonal(), Matrix::Identity(3, 3),
                                      Matrix::Identity(3, 3));
        const auto lcf = lcf_from_srtr(pair, theta);
        const auto mn = srtrcore::srtr_from_realization(lcf.realization());
        EXPECT_EQ(srtrcore::sparsity_pattern(mn, 1e-9), srtrcore::sparsity_pattern(pair, 1e-9));
    }
    EXPECT_GE(checked, 5);
}

TEST(LcfFromSrtr, UnstablePairRejected) {
    const auto base = make_partitioned(scalar(-1), scalar(1), scalar(1), scalar(2), scalar(1), scalar(1));
    const auto pair = srtr_from_k(base, scalar(0));
    EXPECT_TRUE(throws_kind([&] { lcf_from_srtr(pair, default_theta(1, StabilityDomain::Continuous)); },
                            ErrorKind::Precondition));
}

TEST(Kontroller, AlreadyPartitionedIsRelabelled) {
    std::mt19937_64 rng(33);
    const auto pair = random_stable_pair(rng, 5, 2, 1);
    const auto lcf = lcf_from_srtr(pair, default_theta(2, StabilityDomain::Continuous));
    const auto again = to_kontroller_form(lcf.realization());
    EXPECT_LE((again.F1 - lcf.F1).norm(), 1e-12);
    EXPECT_LE((again.F2 - lcf.F2).norm(), 1e-12);
    EXPECT_LE((again.blocks.A() - lcf.blocks.A()).norm(), 1e-12);
}

TEST(Kontroller, ObserverGainOnRandomPlant) {
    std::mt19937_64 rng(34);
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 5, p = 2, m = 2;
        const auto G = sysrep::make_system(random_matrix(rng, n, n), random_matrix(rng, n, m), random_matrix(rng, p, n),
                                           Matrix::Zero(p, m));
        std::vector<Complex> targets;
        for (int i = 0; i < n; ++i) targets.emplace_back(-1.0 - i, 0.0);
        const Matrix F = numcore::place_eigenvalues(G.A.transpose(), G.C.transpose(), targets, rng).transpose();
        const Matrix U = random_matrix(rng, p, p) + 2.0 * Matrix::Identity(p, p);
        Matrix B(n, p + m), D = Matrix::Zero(p, p + m);
        B << F, G.B;
        D.leftCols(p) = U;
        const auto mn = sysrep::make_system(G.A + F * G.C, B, U * G.C, D);
        const auto lcf = to_kontroller_form(mn);
        EXPECT_TRUE(numcore::is_stable_spectrum(lcf.pole_matrix(), lcf.domain));
        const auto rep = verify_lcf(lcf, G);
        EXPECT_TRUE(rep.stable);
        EXPECT_TRUE(rep.coprime_over_s);
        EXPECT_LE(rep.identity_residual, 1e-8);
    }
}

TEST(Kontroller, SingularUIsRejected) {
    Matrix A = -Matrix::Identity(3, 3);
    Matrix B = Matrix::Ones(3, 3);
    Matrix C(1, 3);
    C << 0, 0, 0;
    EXPECT_TRUE(throws_kind([&] { to_kontroller_form(sysrep::make_system(A, B, C, Matrix::Zero(1, 3))); },
                            ErrorKind::Precondition));
}

TEST(Ctnare, ScalarQuadratic) {
    const auto lcf = scalar_lcf(-2.0, 1.0, 0.0, -1.0);
    const auto sol = solve_ctnare(lcf);
    const double k = sol.K(0, 0);
    EXPECT_TRUE(std::abs(k) < 1e-12 || std::abs(k + 1.0) < 1e-12) << k;
    EXPECT_LE(sol.residual_norm, 1e-12);
    ASSERT_EQ(sol.closed_spectrum.size(), 1u);
    EXPECT_NEAR(sol.closed_spectrum[0].real(), -2.0 - k, 1e-12);
    // Both roots are reachable by asking for their closed value.
    for (double want : {-2.0, -1.0}) {
        CtnareOptions opts;
        opts.target_spectrum = std::vector<Complex>{Complex(want, 0.0)};
        const auto s = solve_ctnare(lcf, opts);
        EXPECT_NEAR(s.K(0, 0), -2.0 - want, 1e-12);
    }
}

TEST(Ctnare, DecoupledCaseReturnsZero) {
    const auto lcf = scalar_lcf(-3.0, 0.0, 0.0, -1.0);
    const auto sol = solve_ctnare(lcf);
    EXPECT_LE(std::abs(sol.K(0, 0)), 1e-14);
}

TEST(Ctnare, SrtrFromLcfScalarAtZeroGain) {
    const auto lcf = scalar_lcf(-2.0, 1.0, 0.0, -1.0);
    RiccatiSolution sol;
    sol.K = scalar(0.0);
    const auto pair = srtr_from_lcf(lcf, sol);
    const Complex x(0.3, 1.1);
    EXPECT_LE(std::abs(pair.W(x)(0, 0) - Complex(-2.0)), 1e-13);
    EXPECT_LE(std::abs(pair.V(x)(0, 0) - (1.0 + 1.0 / (x + 1.0))), 1e-13);
}

TEST(Ctnare, NonStabilizingSolutionRejected) {
    // K = 3 leaves A11 + F1 - A12 K = 1 unstable; it does not even solve the equation.
    const auto lcf = scalar_lcf(-2.0, 1.0, 0.0, -1.0);
    RiccatiSolution sol;
    sol.K = scalar(-3.0);
    EXPECT_TRUE(throws_kind([&] { srtr_from_lcf(lcf, sol); }, ErrorKind::Precondition));
}

TEST(RoundTrip, RingControllerPair) {
    const auto pair = srtr_from_k(cli::ring6_controller(), cli::ring6_K());
    const auto lcf = lcf_from_srtr(pair, default_theta(6, StabilityDomain::Continuous));
    const auto sol = solve_ctnare(lcf);
    EXPECT_LE(sol.residual_norm, 1e-10);
    EXPECT_LE((sol.K - cli::ring6_K()).norm(), 1e-8);
    const auto back = srtr_from_lcf(lcf, sol);
    std::mt19937_64 rng(35);
    EXPECT_LE(pair_gap(pair, back, rng), 1e-6);
}

TEST(RoundTrip, RandomStablePairs) {
    std::mt19937_64 rng(36);
    for (int trial = 0; trial < 25; ++trial) {
        const int p = 1 + trial % 3, m = 1 + trial % 2, n = p + 1 + trial % 4;
        const auto domain = trial % 5 == 4 ? StabilityDomain::Discrete : StabilityDomain::Continuous;
        const auto pair = random_stable_pair(rng, n, p, m, domain);
        const auto lcf = lcf_from_srtr(pair, default_theta(p, domain));
        const auto sol = solve_ctnare(lcf);
        EXPECT_LE(sol.residual_norm, 1e-10 * (1.0 + lcf.blocks.A().norm() + lcf.blocks.B().norm()));
        for (const auto& e : sol.closed_spectrum) EXPECT_TRUE(in_domain(domain, e));
        const auto back = srtr_from_lcf(lcf, sol);
        EXPECT_LE(pair_gap(pair, back, rng), 1e-6) << "trial " << trial;
        // The decoupled realization is another realization of the same [M N].
        const auto a = lcf.realization(), b = riccati_realization(lcf, sol.K);
        const Complex x(0.9, 1.7);
        EXPECT_LE((eval_tfm(a, x) - eval_tfm(b, x)).norm() / (1.0 + eval_tfm(a, x).norm()), 1e-9);
    }
}

TEST(VerifyLcf, UnstablePlantWithTrivialGainIsNotStable) {
    const auto blocks = make_partitioned(scalar(1), scalar(1), scalar(0), scalar(-1), scalar(1), scalar(1));
    LcfOverS lcf{blocks, scalar(0), scalar(0), scalar(1), StabilityDomain::Continuous, {}};
    EXPECT_FALSE(verify_lcf(lcf, blocks.to_system()).stable);
}

TEST(VerifyLcf, PerturbedFactorIsDetected) {
    std::mt19937_64 rng(37);
    const auto pair = random_stable_pair(rng, 5, 2, 2);
    auto lcf = lcf_from_srtr(pair, default_theta(2, StabilityDomain::Continuous));
    const auto plant = pair.base->to_system();
    EXPECT_LE(verify_lcf(lcf, plant).identity_residual, 1e-8);
    lcf.blocks.B1(0, 0) += 0.5;
    EXPECT_GT(verify_lcf(lcf, plant).identity_residual, 1e-3);
}
