#include "srtrkit/structsyn.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include <unsupported/Eigen/NonLinearOptimization>

#include "srtrkit/rational.hpp"

namespace srtrkit::structsyn {

using sysrep::PartitionedRealization;
using sysrep::StateSpaceSystem;

std::string to_string(ExtraConstraint extra) {
    return extra == ExtraConstraint::RingHomogeneous ? "ring-homogeneous" : "none";
}

ExtraConstraint parse_extra(const std::string& text) {
    if (text == "ring-homogeneous") return ExtraConstraint::RingHomogeneous;
    if (text.empty() || text == "none" || text == "null") return ExtraConstraint::None;
    throw Error(ErrorKind::InvalidInput, "unknown extra constraint: " + text);
}

void validate_spec(const SynthesisSpec& spec, const PartitionedRealization& base) {
    const Eigen::Index p = base.p(), m = base.m(), q = base.A22.rows();
    const auto& W = spec.masks.maskW;
    const auto& V = spec.masks.maskV;
    require(W.rows() == p && W.cols() == p, ErrorKind::Dimension, "maskW must be p x p");
    require(V.rows() == p && V.cols() == m, ErrorKind::Dimension, "maskV must be p x m");
    require(((W.array() == 0) || (W.array() == 1)).all() && ((V.array() == 0) || (V.array() == 1)).all(),
            ErrorKind::InvalidInput, "mask entries must be 0 or 1");
    require(static_cast<Eigen::Index>(spec.orders.size()) == p, ErrorKind::Dimension, "one order per output row");
    for (int o : spec.orders)
        require(o >= 1 && o <= q, ErrorKind::InvalidInput, "row orders must lie in 1..n-p");
    require(spec.domain == base.domain, ErrorKind::InvalidInput, "spec and base disagree on the time domain");
}

SynthesisSpec unconstrained_spec(const PartitionedRealization& base) {
    SynthesisSpec s;
    s.masks = {Eigen::MatrixXi::Ones(base.p(), base.p()), Eigen::MatrixXi::Ones(base.p(), base.m())};
    s.orders.assign(base.p(), static_cast<int>(base.A22.rows()));
    s.domain = base.domain;
    return s;
}

std::vector<numcore::RowCompression> compress_rows(const PartitionedRealization& base) {
    std::vector<numcore::RowCompression> out;
    for (Eigen::Index i = 0; i < base.p(); ++i) out.push_back(numcore::row_compressor(base.A12.row(i)));
    return out;
}

double RowConditions::worst() const {
    return std::max({feedthrough_w, feedthrough_v, input_w, input_v, truncation, stability});
}

namespace {

struct PairBlocks {
    Matrix Aw, AK, BV, Dw;
};

PairBlocks pair_blocks(const PartitionedRealization& b, const Matrix& K) {
    return {b.A22 + K * b.A12, K * b.A11 - K * b.A12 * K + b.A21 - b.A22 * K, K * b.B1 + b.B2, b.A11 - b.A12 * K};
}

// Entries of row vector(s) in the columns where the mask row is zero.
template <typename Fn>
void masked_columns(const Eigen::MatrixXi& mask, Eigen::Index row, const Matrix& M, Fn&& emit) {
    for (Eigen::Index j = 0; j < M.cols(); ++j)
        if (mask(row, j) == 0)
            for (Eigen::Index r = 0; r < M.rows(); ++r) emit(M(r, j));
}

double masked_norm(const Eigen::MatrixXi& mask, Eigen::Index row, const Matrix& M) {
    double s = 0.0;
    masked_columns(mask, row, M, [&](double v) { s += v * v; });
    return std::sqrt(s);
}

Matrix homogeneity_violation(const Matrix& Aw) {
    const double mean = Aw.trace() / static_cast<double>(Aw.rows());
    return Aw - mean * Matrix::Identity(Aw.rows(), Aw.cols());
}

struct RowView {
    Matrix retained_rows;  // [0 I] Q, n_i x q
    Matrix corner;         // retained block of Q Aw Q^T
    Matrix coupling;       // retained rows, discarded columns
};

RowView row_view(const numcore::RowCompression& rc, const Matrix& Aw, int order) {
    const Eigen::Index q = Aw.rows();
    const Matrix M = rc.Q * Aw * rc.Q.transpose();
    return {rc.Q.bottomRows(order), M.bottomRightCorner(order, order), M.bottomLeftCorner(order, q - order)};
}

}  // namespace

ConditionReport mm_conditions(const PartitionedRealization& base, const Matrix& K, const SynthesisSpec& spec,
                              double tol) {
    validate_spec(spec, base);
    require(K.rows() == base.A22.rows() && K.cols() == base.p(), ErrorKind::Dimension, "K must be (n-p) x p");
    const PairBlocks pb = pair_blocks(base, K);
    const auto comp = compress_rows(base);
    const auto& mW = spec.masks.maskW;
    const auto& mV = spec.masks.maskV;
    ConditionReport rep;
    rep.tol = tol;
    bool strictly_stable = true;
    for (Eigen::Index i = 0; i < base.p(); ++i) {
        RowConditions rc;
        rc.feedthrough_w = masked_norm(mW, i, pb.Dw.row(i));
        rc.feedthrough_v = masked_norm(mV, i, base.B1.row(i));
        rc.constant_row = comp[i].zero;
        if (!rc.constant_row) {
            const RowView v = row_view(comp[i], pb.Aw, spec.orders[i]);
            rc.input_w = masked_norm(mW, i, v.retained_rows * pb.AK);
            rc.input_v = masked_norm(mV, i, v.retained_rows * pb.BV);
            rc.truncation = v.coupling.size() ? v.coupling.norm() : 0.0;
            rc.margin = numcore::spectral_margin(v.corner, spec.domain);
            rc.stability = std::max(0.0, rc.margin);
            strictly_stable = strictly_stable && rc.margin < 0.0;
        } else {
            rc.margin = -std::numeric_limits<double>::infinity();
        }
        rep.max_residual = std::max(rep.max_residual, rc.worst());
        rep.rows.push_back(rc);
    }
    if (spec.extra == ExtraConstraint::RingHomogeneous) rep.extra = homogeneity_violation(pb.Aw).cwiseAbs().maxCoeff();
    rep.max_residual = std::max(rep.max_residual, rep.extra);
    rep.pass = strictly_stable && rep.max_residual <= tol;
    return rep;
}

namespace {

// Stacked residual whose zero set is the feasible set: equality residuals plus a stability hinge.
struct ConditionResidual {
    using Scalar = double;
    enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };
    using InputType = Vector;
    using ValueType = Vector;
    using JacobianType = Matrix;

    const PartitionedRealization& base;
    const SynthesisSpec& spec;
    std::vector<numcore::RowCompression> comp;
    double weight;
    double clearance;
    int n_values = 0;

    ConditionResidual(const PartitionedRealization& b, const SynthesisSpec& s, double w, double c)
        : base(b), spec(s), comp(compress_rows(b)), weight(w), clearance(c) {
        n_values = std::max<int>(static_cast<int>(evaluate(Vector::Zero(inputs())).size()), inputs());
    }

    int inputs() const { return static_cast<int>(base.A22.rows() * base.p()); }
    int values() const { return n_values; }

    Matrix as_gain(const Vector& x) const {
        return Eigen::Map<const Matrix>(x.data(), base.A22.rows(), base.p());
    }

    std::vector<double> evaluate(const Vector& x) const {
        const PairBlocks pb = pair_blocks(base, as_gain(x));
        const auto& mW = spec.masks.maskW;
        const auto& mV = spec.masks.maskV;
        std::vector<double> r;
        auto emit = [&](double v) { r.push_back(v); };
        for (Eigen::Index i = 0; i < base.p(); ++i) {
            masked_columns(mW, i, pb.Dw.row(i), emit);
            if (comp[i].zero) continue;
            const RowView v = row_view(comp[i], pb.Aw, spec.orders[i]);
            masked_columns(mW, i, v.retained_rows * pb.AK, emit);
            masked_columns(mV, i, v.retained_rows * pb.BV, emit);
            for (Eigen::Index k = 0; k < v.coupling.size(); ++k) r.push_back(v.coupling.data()[k]);
            r.push_back(weight * std::max(0.0, numcore::spectral_margin(v.corner, spec.domain) + clearance));
        }
        if (spec.extra == ExtraConstraint::RingHomogeneous) {
            const Matrix h = homogeneity_violation(pb.Aw);
            for (Eigen::Index k = 0; k < h.size(); ++k) r.push_back(h.data()[k]);
        }
        return r;
    }

    int operator()(const Vector& x, Vector& f) const {
        const auto r = evaluate(x);
        f = Vector::Zero(n_values);
        for (std::size_t k = 0; k < r.size(); ++k) f(static_cast<Eigen::Index>(k)) = r[k];
        return 0;
    }

    // Central differences are exact on the quadratic parts.
    int df(const Vector& x, Matrix& J) const {
        J.resize(n_values, inputs());
        Vector xp = x, xm = x, fp, fm;
        for (int k = 0; k < inputs(); ++k) {
            const double h = 1e-6 * std::max(1.0, std::abs(x(k)));
            xp(k) = x(k) + h;
            xm(k) = x(k) - h;
            (*this)(xp, fp);
            (*this)(xm, fm);
            J.col(k) = (fp - fm) / (2.0 * h);
            xp(k) = xm(k) = x(k);
        }
        return 0;
    }
};

bool better(const ConditionReport& a, double ka, const ConditionReport& b, double kb) {
    double sa = 0.0, sb = 0.0;
    for (const auto& r : a.rows) sa = std::max(sa, r.stability);
    for (const auto& r : b.rows) sb = std::max(sb, r.stability);
    if (sa != sb) return sa < sb;
    return ka < kb;
}

}  // namespace

SolveResult mm_solve(const PartitionedRealization& base, const SynthesisSpec& spec, const SolveOptions& options) {
    validate_spec(spec, base);
    require(options.tol > 0.0 && options.restarts >= 0 && options.max_iter > 0, ErrorKind::InvalidInput,
            "solver options out of range");
    require(sysrep::is_minimal(base.to_system()), ErrorKind::Precondition, "base realization is not minimal");
    require(numcore::structural_property(base.A22, base.A12, numcore::Property::Observable, base.domain),
            ErrorKind::Precondition, "(A12, A22) is not observable");
    const Eigen::Index q = base.A22.rows(), p = base.p();

    const Matrix zero = Matrix::Zero(q, p);
    const ConditionReport at_zero = mm_conditions(base, zero, spec, options.tol);
    if (at_zero.pass) return {zero, at_zero, 0};
    for (const auto& r : at_zero.rows)
        if (r.feedthrough_v > options.tol)
            throw InfeasibleError("masked entries of B1 are nonzero; no gain can remove them", zero, at_zero);

    ConditionResidual fn(base, spec, options.penalty_weight, options.stability_margin);
    std::mt19937_64 rng(options.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double spread =
        (1.0 + base.A22.norm()) / std::max(base.A12.norm(), 1e-12) / std::sqrt(static_cast<double>(q));

    const auto started = std::chrono::steady_clock::now();
    SolveResult best;
    bool have_pass = false;
    Matrix fallback_K = zero;
    ConditionReport fallback = at_zero;
    int run = 0;
    for (int start = 0; start <= options.restarts; ++start) {
        const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        if (elapsed > options.time_budget_seconds) break;
        Vector x = Vector::Zero(q * p);
        if (start > 0)
            for (Eigen::Index k = 0; k < x.size(); ++k) x(k) = spread * gauss(rng);
        Eigen::LevenbergMarquardt<ConditionResidual> lm(fn);
        lm.parameters.maxfev = options.max_iter;
        lm.parameters.ftol = 1e-15;
        lm.parameters.xtol = 1e-15;
        lm.minimize(x);
        ++run;
        if (!x.allFinite()) continue;
        const Matrix K = fn.as_gain(x);
        const ConditionReport rep = mm_conditions(base, K, spec, options.tol);
        if (rep.pass) {
            if (!have_pass || better(rep, K.norm(), best.report, best.K.norm())) best = {K, rep, 0};
            have_pass = true;
        } else if (rep.max_residual < fallback.max_residual) {
            fallback = rep;
            fallback_K = K;
        }
    }
    if (!have_pass)
        throw InfeasibleError("no start reached the tolerance; best residual " + std::to_string(fallback.max_residual),
                              fallback_K, fallback);
    best.starts_run = run;
    return best;
}

StateSpaceSystem ReducedRows::stacked() const {
    Eigen::Index N = 0;
    for (const auto& r : rows) N += r.states();
    Matrix A = Matrix::Zero(N, N), B(N, p + m), C = Matrix::Zero(p, N), D(p, p + m);
    Eigen::Index o = 0;
    for (Eigen::Index i = 0; i < p; ++i) {
        const auto& r = rows[i];
        const Eigen::Index ni = r.states();
        A.block(o, o, ni, ni) = r.A;
        B.middleRows(o, ni) = r.B;
        C.block(i, o, 1, ni) = r.C;
        D.row(i) = r.D;
        o += ni;
    }
    return sysrep::make_system(A, B, C, D, domain);
}

ReducedRows reduce_rows(const PartitionedRealization& base, const Matrix& K, const std::vector<int>& orders,
                        double truncation_tol) {
    const Eigen::Index p = base.p(), m = base.m(), q = base.A22.rows();
    require(static_cast<Eigen::Index>(orders.size()) == p, ErrorKind::Dimension, "one order per output row");
    require(K.rows() == q && K.cols() == p, ErrorKind::Dimension, "K must be (n-p) x p");
    const PairBlocks pb = pair_blocks(base, K);
    const auto comp = compress_rows(base);
    Matrix input(q, p + m);
    input << pb.AK, pb.BV;
    ReducedRows out;
    out.p = p;
    out.m = m;
    out.domain = base.domain;
    for (Eigen::Index i = 0; i < p; ++i) {
        Matrix D(1, p + m);
        D << pb.Dw.row(i), base.B1.row(i);
        if (comp[i].zero) {
            out.rows.push_back(sysrep::static_gain(D, base.domain));
            continue;
        }
        const int ni = orders[i];
        require(ni >= 1 && ni <= q, ErrorKind::InvalidInput, "row orders must lie in 1..n-p");
        const RowView v = row_view(comp[i], pb.Aw, ni);
        const double coupling = v.coupling.size() ? v.coupling.norm() : 0.0;
        if (coupling > truncation_tol)
            throw Error(ErrorKind::InexactTruncation,
                        "row " + std::to_string(i) + ": discarded states feed the retained ones (residual " +
                            std::to_string(coupling) + ")");
        Matrix C = Matrix::Zero(1, ni);
        C(0, ni - 1) = comp[i].norm;
        out.rows.push_back(sysrep::make_system(v.corner, v.retained_rows * input, C, D, base.domain));
    }
    return out;
}

ReducedRows reduce_rows(const PartitionedRealization& base, const Matrix& K, const SynthesisSpec& spec,
                        double truncation_tol) {
    validate_spec(spec, base);
    return reduce_rows(base, K, spec.orders, truncation_tol);
}

namespace {

bool row_respects_masks(const StateSpaceSystem& row, Eigen::Index i, const SynthesisSpec& spec, double tol) {
    const srtrcore::RationalMatrix R = srtrcore::rational_entries(row);
    const Eigen::Index p = spec.masks.maskW.cols();
    for (Eigen::Index j = 0; j < R.cols(); ++j) {
        const int allowed = j < p ? spec.masks.maskW(i, j) : spec.masks.maskV(i, j - p);
        if (!allowed && !srtrcore::negligible(R(0, j), tol)) return false;
    }
    return true;
}

}  // namespace

bool verify_structured(const srtrcore::SrtrPair& pair, const SynthesisSpec& spec, double tol) {
    if (pair.p() != spec.masks.maskW.rows() || pair.m() != spec.masks.maskV.cols()) return false;
    if (!srtrcore::srtr_is_stable(pair)) return false;
    return srtrcore::sparsity_pattern(pair, tol).subset_of(spec.masks);
}

bool verify_structured(const ReducedRows& rows, const SynthesisSpec& spec, double tol) {
    if (rows.p != spec.masks.maskW.rows() || rows.m != spec.masks.maskV.cols()) return false;
    if (static_cast<Eigen::Index>(rows.rows.size()) != rows.p) return false;
    for (Eigen::Index i = 0; i < rows.p; ++i) {
        const auto& r = rows.rows[i];
        if (r.states() > 0 && !numcore::is_stable_spectrum(r.A, rows.domain)) return false;
        if (!row_respects_masks(r, i, spec, tol)) return false;
    }
    return true;
}

Matrix assign_pair_spectrum(const PartitionedRealization& base, const std::vector<Complex>& targets,
                            std::mt19937_64& rng) {
    require(static_cast<Eigen::Index>(targets.size()) == base.A22.rows(), ErrorKind::Dimension,
            "one target per eliminated state");
    const Matrix F = numcore::place_eigenvalues(base.A22.transpose(), base.A12.transpose(), targets, rng);
    return F.transpose();
}

}  // namespace srtrkit::structsyn
