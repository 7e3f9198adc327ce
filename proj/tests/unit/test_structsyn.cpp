#include <gtest/gtest.h>

#include "srtrkit/fixtures.hpp"
#include "srtrkit/numcore.hpp"
#include "srtrkit/srtrcore.hpp"
#include "srtrkit/structsyn.hpp"
#include "support.hpp"

using namespace srtrkit;
using namespace srtrkit::structsyn;
using testsupport::random_matrix;

namespace {

SynthesisSpec ring_spec(ExtraConstraint extra = ExtraConstraint::RingHomogeneous) {
    const Eigen::MatrixXi mask = cli::ring6_mask().cast<int>();
    SynthesisSpec s;
    s.masks = {mask, mask};
    s.orders.assign(6, 1);
    s.extra = extra;
    return s;
}

// Applies x -> [I 0; X I] x to a partitioned form; A12 and B1 are untouched.
sysrep::PartitionedRealization shear(const sysrep::PartitionedRealization& b, const Matrix& X) {
    return sysrep::make_partitioned(b.A11 - b.A12 * X, b.A12, X * b.A11 + b.A21 - (X * b.A12 + b.A22) * X,
                                    X * b.A12 + b.A22, b.B1, X * b.B1 + b.B2, b.domain);
}

// A problem with a known solution gain: a row-structured instance seen through a shear, so that the
// solution is the shear gain rather than zero.
struct KnownInstance {
    sysrep::PartitionedRealization base;
    SynthesisSpec spec;
    Matrix solution;
};

KnownInstance known_instance(std::mt19937_64& rng, int p, int m) {
    for (;;) {
        const auto s = testsupport::structured_instance(rng, p, m, 1);
        SynthesisSpec spec;
        spec.masks = {s.maskW, s.maskV};
        spec.orders.assign(p, 1);
        if (!mm_conditions(s.base, Matrix::Zero(p, p), spec, 1e-12).pass) continue;
        if (!sysrep::is_minimal(s.base.to_system())) continue;
        const Matrix K0 = random_matrix(rng, p, p, 0.3);
        return {shear(s.base, -K0), spec, K0};
    }
}

// Scalar row with one state: numerator and denominator in descending powers.
std::pair<std::vector<double>, std::vector<double>> first_order_tf(const sysrep::StateSpaceSystem& row,
                                                                   Eigen::Index col) {
    const double a = row.A(0, 0), b = row.B(0, col), c = row.C(0, 0), d = row.D(0, col);
    return {{d, c * b - d * a}, {1.0, -a}};
}

// Coefficients aligned at the constant term; surplus leading coefficients must be negligible.
double relative_gap(const std::vector<double>& got, const std::vector<double>& want) {
    if (got.size() < want.size()) return 1e300;
    const std::size_t lead = got.size() - want.size();
    double worst = 0.0, scale = 0.0;
    for (double w : want) scale = std::max(scale, std::abs(w));
    for (std::size_t k = 0; k < lead; ++k) worst = std::max(worst, std::abs(got[k]) / scale);
    for (std::size_t k = 0; k < want.size(); ++k)
        worst = std::max(worst, std::abs(got[lead + k] - want[k]) / std::abs(want[k]));
    return worst;
}

}  // namespace

TEST(CompressRows, EachRowIsMappedOntoTheLastCoordinate) {
    const auto base = cli::ring6_controller();
    const auto comp = compress_rows(base);
    ASSERT_EQ(comp.size(), 6u);
    for (Eigen::Index i = 0; i < 6; ++i) {
        const Matrix& Q = comp[i].Q;
        EXPECT_FALSE(comp[i].zero);
        EXPECT_LE((Q * Q.transpose() - Matrix::Identity(6, 6)).norm(), 1e-12);
        RowVector target = RowVector::Zero(6);
        target(5) = base.A12.row(i).norm();
        EXPECT_LE((base.A12.row(i) * Q.transpose() - target).norm(), 1e-12);
    }
}

TEST(CompressRows, ZeroRowGetsIdentityAndFlag) {
    auto base = cli::ring6_controller();
    base.A12.row(2).setZero();
    const auto comp = compress_rows(base);
    EXPECT_TRUE(comp[2].zero);
    EXPECT_EQ(comp[2].Q, Matrix::Identity(6, 6));
    EXPECT_FALSE(comp[1].zero);
}

TEST(Conditions, PrintedGainPassesAtPrintedPrecision) {
    const auto rep = mm_conditions(cli::ring6_controller(), cli::ring6_K(), ring_spec(), 5e-3);
    EXPECT_TRUE(rep.pass);
    EXPECT_LE(rep.max_residual, 5e-3);
    EXPECT_LE(rep.extra, 5e-3);
    for (const auto& r : rep.rows) {
        EXPECT_LT(r.margin, -9.0);
        EXPECT_EQ(r.feedthrough_v, 0.0);
    }
}

TEST(Conditions, ZeroGainViolatesFeedthroughPattern) {
    const auto rep = mm_conditions(cli::ring6_controller(), Matrix::Zero(6, 6), ring_spec(), 5e-3);
    EXPECT_FALSE(rep.pass);
    double worst = 0.0;
    for (const auto& r : rep.rows) worst = std::max(worst, r.feedthrough_w);
    EXPECT_GT(worst, 0.1);
}

TEST(Conditions, AllOnesMasksMakePatternConditionsVacuous) {
    std::mt19937_64 rng(3);
    const auto base = testsupport::random_base(rng, 7, 3, 2);
    SynthesisSpec spec = unconstrained_spec(base);
    spec.orders.assign(3, 2);
    const auto rep = mm_conditions(base, random_matrix(rng, 4, 3), spec);
    for (const auto& r : rep.rows) {
        EXPECT_EQ(r.feedthrough_w, 0.0);
        EXPECT_EQ(r.feedthrough_v, 0.0);
        EXPECT_EQ(r.input_w, 0.0);
        EXPECT_EQ(r.input_v, 0.0);
    }
}

TEST(Conditions, FeedthroughResidualMatchesDirectSum) {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 10; ++trial) {
        const auto base = testsupport::random_base(rng, 6, 3, 2);
        const Matrix K = random_matrix(rng, 3, 3);
        SynthesisSpec spec = unconstrained_spec(base);
        spec.masks.maskW = Eigen::MatrixXi::Identity(3, 3);
        const auto rep = mm_conditions(base, K, spec);
        const Matrix D = base.A11 - base.A12 * K;
        for (int i = 0; i < 3; ++i) {
            double s = 0.0;
            for (int j = 0; j < 3; ++j)
                if (j != i) s += D(i, j) * D(i, j);
            EXPECT_NEAR(rep.rows[i].feedthrough_w, std::sqrt(s), 1e-12);
        }
    }
}

TEST(Conditions, ResidualsAreNonNegative) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const auto base = testsupport::random_base(rng, 6, 2, 2);
        SynthesisSpec spec = unconstrained_spec(base);
        spec.masks.maskW = Eigen::MatrixXi::Identity(2, 2);
        spec.masks.maskV = Eigen::MatrixXi::Identity(2, 2);
        spec.orders = {1, 3};
        const auto rep = mm_conditions(base, random_matrix(rng, 4, 2), spec);
        for (const auto& r : rep.rows) {
            for (double v : {r.feedthrough_w, r.feedthrough_v, r.input_w, r.input_v, r.truncation, r.stability})
                EXPECT_GE(v, 0.0);
            EXPECT_EQ(r.stability, std::max(0.0, r.margin));
        }
        EXPECT_GE(rep.max_residual, 0.0);
    }
}

TEST(Conditions, SpecValidation) {
    const auto base = cli::ring6_controller();
    SynthesisSpec s = ring_spec();
    s.orders[0] = 0;
    EXPECT_TRUE(testsupport::throws_kind([&] { mm_conditions(base, cli::ring6_K(), s); }, ErrorKind::InvalidInput));
    s = ring_spec();
    s.masks.maskW(0, 3) = 2;
    EXPECT_TRUE(testsupport::throws_kind([&] { mm_conditions(base, cli::ring6_K(), s); }, ErrorKind::InvalidInput));
    s = ring_spec();
    s.orders.pop_back();
    EXPECT_TRUE(testsupport::throws_kind([&] { mm_conditions(base, cli::ring6_K(), s); }, ErrorKind::Dimension));
    EXPECT_EQ(parse_extra("ring-homogeneous"), ExtraConstraint::RingHomogeneous);
    EXPECT_EQ(parse_extra("none"), ExtraConstraint::None);
    EXPECT_THROW(parse_extra("diagonal"), Error);
}

TEST(ReduceRows, RingRowsMatchPrintedTransferFunctions) {
    const auto rows = reduce_rows(cli::ring6_controller(), cli::ring6_K(), ring_spec());
    ASSERT_EQ(rows.rows.size(), 6u);
    for (Eigen::Index i = 0; i < 6; ++i) {
        ASSERT_EQ(rows.rows[i].states(), 1);
        for (const auto& tf : cli::ring6_expected_srtr()) {
            const Eigen::Index j = (i - tf.row_offset + 6) % 6;
            const auto [num, den] = first_order_tf(rows.rows[i], tf.v_channel ? 6 + j : j);
            EXPECT_LE(relative_gap(num, tf.num), 0.01) << tf.name << " row " << i;
            EXPECT_LE(relative_gap(den, tf.den), 0.01) << tf.name << " row " << i;
        }
    }
}

TEST(ReduceRows, ZeroCouplingRowIsConstant) {
    std::mt19937_64 rng(6);
    auto base = testsupport::random_base(rng, 6, 3, 2);
    base.A12.row(1).setZero();
    const Matrix K = random_matrix(rng, 3, 3);
    const auto rows = reduce_rows(base, K, std::vector<int>{3, 3, 3});
    EXPECT_EQ(rows.rows[1].states(), 0);
    Matrix expected(1, 5);
    expected << (base.A11 - base.A12 * K).row(1), base.B1.row(1);
    EXPECT_LE((rows.rows[1].D - expected).norm(), 1e-14);
}

TEST(ReduceRows, FullOrderRowsReproduceThePair) {
    std::mt19937_64 rng(7);
    const auto base = testsupport::random_base(rng, 7, 3, 2);
    const Matrix K = random_matrix(rng, 4, 3);
    const auto pair = srtrcore::srtr_from_k(base, K);
    const auto rows = reduce_rows(base, K, std::vector<int>{4, 4, 4});
    const auto stacked = rows.stacked();
    for (const Complex x : {Complex(0.3, 1.1), Complex(-2.0, 0.5), Complex(1.7, -0.4)}) {
        const CMatrix full = sysrep::eval_tfm(pair.as_system(), x);
        EXPECT_LE((sysrep::eval_tfm(stacked, x) - full).norm(), 1e-9 * (1.0 + full.norm()));
    }
}

TEST(ReduceRows, ReducedRowsAgreeWithFullRowsOnExactInstances) {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 10; ++trial) {
        const auto inst = known_instance(rng, 3, 2);
        const auto rep = mm_conditions(inst.base, inst.solution, inst.spec, 1e-9);
        ASSERT_TRUE(rep.pass) << rep.max_residual;
        const auto pair = srtrcore::srtr_from_k(inst.base, inst.solution);
        const auto stacked = reduce_rows(inst.base, inst.solution, inst.spec).stacked();
        std::mt19937_64 srng(trial);
        for (const Complex x : numcore::sample_points(numcore::eigenvalues(pair.Aw), 5, srng)) {
            const CMatrix full = sysrep::eval_tfm(pair.as_system(), x);
            EXPECT_LE((sysrep::eval_tfm(stacked, x) - full).norm(), 1e-7 * (1.0 + full.norm()));
        }
    }
}

TEST(ReduceRows, CouplingAboveToleranceIsRejected) {
    std::mt19937_64 rng(9);
    const auto base = testsupport::random_base(rng, 6, 2, 2);
    EXPECT_TRUE(testsupport::throws_kind(
        [&] { reduce_rows(base, random_matrix(rng, 4, 2), std::vector<int>{1, 1}, 1e-9); },
        ErrorKind::InexactTruncation));
}

TEST(Verify, PrintedRingResultIsStructured) {
    const auto rows = reduce_rows(cli::ring6_controller(), cli::ring6_K(), ring_spec());
    EXPECT_TRUE(verify_structured(rows, ring_spec(), 1e-2));
}

TEST(Verify, DensePairFailsIdentityMasks) {
    std::mt19937_64 rng(10);
    const auto base = testsupport::random_base(rng, 6, 3, 3);
    Matrix K = structsyn::assign_pair_spectrum(base, {-1.0, -2.0, -3.0}, rng);
    const auto pair = srtrcore::srtr_from_k(base, K);
    SynthesisSpec spec = unconstrained_spec(base);
    EXPECT_TRUE(verify_structured(pair, spec, 1e-9));
    spec.masks.maskW = Eigen::MatrixXi::Identity(3, 3);
    spec.masks.maskV = Eigen::MatrixXi::Identity(3, 3);
    EXPECT_FALSE(verify_structured(pair, spec, 1e-9));
}

TEST(Verify, UnstableRowFails) {
    auto rows = reduce_rows(cli::ring6_controller(), cli::ring6_K(), ring_spec());
    rows.rows[3].A(0, 0) = -rows.rows[3].A(0, 0);
    EXPECT_FALSE(verify_structured(rows, ring_spec(), 1e-2));
}

TEST(Verify, SoundnessOnPassingInstances) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 10; ++trial) {
        const auto inst = known_instance(rng, 3, 3);
        const double tol = 1e-9;
        ASSERT_TRUE(mm_conditions(inst.base, inst.solution, inst.spec, tol).pass);
        const auto rows = reduce_rows(inst.base, inst.solution, inst.spec);
        EXPECT_TRUE(verify_structured(rows, inst.spec, 10 * tol));
        EXPECT_TRUE(verify_structured(srtrcore::srtr_from_k(inst.base, inst.solution), inst.spec, 1e-7));
    }
}

TEST(Solver, ZeroAcceptedWhenUnconstrainedAndStable) {
    std::mt19937_64 rng(12);
    for (;;) {
        const auto base = testsupport::random_base(rng, 6, 2, 2);
        if (!numcore::is_stable_spectrum(base.A22, base.domain)) continue;
        const auto res = mm_solve(base, unconstrained_spec(base));
        EXPECT_EQ(res.K, Matrix::Zero(4, 2));
        EXPECT_EQ(res.starts_run, 0);
        EXPECT_TRUE(res.report.pass);
        break;
    }
}

TEST(Solver, MaskedInputFeedthroughIsInfeasible) {
    std::mt19937_64 rng(13);
    const auto base = testsupport::random_base(rng, 6, 2, 2);
    SynthesisSpec spec = unconstrained_spec(base);
    spec.masks.maskW.setZero();
    spec.masks.maskV.setZero();
    try {
        mm_solve(base, spec);
        FAIL() << "expected an infeasibility error";
    } catch (const InfeasibleError& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Infeasible);
        EXPECT_GT(e.best_report().max_residual, 0.1);
    }
}

TEST(Solver, FindsGainOnInstancesWithKnownSolution) {
    std::mt19937_64 rng(14);
    for (int trial = 0; trial < 5; ++trial) {
        const auto inst = known_instance(rng, 3, 2);
        SolveOptions opt;
        opt.seed = 100 + trial;
        const auto res = mm_solve(inst.base, inst.spec, opt);
        EXPECT_TRUE(res.report.pass);
        EXPECT_LE(res.report.max_residual, 1e-6);
        for (const auto& r : res.report.rows) EXPECT_LT(r.margin, 0.0);
        EXPECT_TRUE(verify_structured(reduce_rows(inst.base, res.K, inst.spec), inst.spec, 1e-5));
    }
}

TEST(Solver, DeterministicForFixedSeed) {
    std::mt19937_64 rng(15);
    const auto inst = known_instance(rng, 3, 2);
    const auto a = mm_solve(inst.base, inst.spec);
    const auto b = mm_solve(inst.base, inst.spec);
    EXPECT_EQ(a.K, b.K);
}

TEST(Solver, RingProblemReachesPrintedPrecision) {
    try {
        const auto res = mm_solve(cli::ring6_controller(), ring_spec());
        EXPECT_TRUE(res.report.pass);
    } catch (const InfeasibleError& e) {
        // The data carry four decimals; the best residual sits at that rounding level.
        EXPECT_LE(e.best_report().max_residual, 5e-3);
        for (const auto& r : e.best_report().rows) EXPECT_LT(r.margin, 0.0);
    }
}

TEST(Invariance, ShearLeavesInputFeedthroughAndCouplingRow) {
    std::mt19937_64 rng(16);
    for (int trial = 0; trial < 10; ++trial) {
        const auto base = testsupport::random_base(rng, 7, 3, 2);
        const auto moved = shear(base, random_matrix(rng, 4, 3));
        EXPECT_LE((moved.B1 - base.B1).cwiseAbs().maxCoeff(), 1e-12);
        EXPECT_LE((moved.A12 - base.A12).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(Placement, AssignedSpectrumIsAchieved) {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-3.0, -0.2);
    for (int trial = 0; trial < 20; ++trial) {
        const auto base = testsupport::random_base(rng, 6, 2, 2);
        std::vector<Complex> targets;
        const double re = u(rng), im = -u(rng);
        targets = {Complex(re, im), Complex(re, -im), u(rng), u(rng)};
        const Matrix K = assign_pair_spectrum(base, targets, rng);
        EXPECT_LE(testsupport::match_distance(testsupport::oracle_eigenvalues(base.A22 + K * base.A12), targets),
                  1e-6);
    }
}
