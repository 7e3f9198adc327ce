#include <algorithm>
#include <cmath>
#include <limits>

#include "srtrkit/numcore.hpp"

namespace srtrkit::numcore {

double spectral_margin(const Matrix& A, StabilityDomain domain) {
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& ev : eigenvalues(A)) worst = std::max(worst, domain_margin(domain, ev));
    return worst;
}

bool is_stable_spectrum(const Matrix& A, StabilityDomain domain) {
    for (const auto& ev : eigenvalues(A))
        if (!in_domain(domain, ev)) return false;
    return true;
}

double pbh_tolerance(const Matrix& A, const Matrix& BorC) {
    const double scale = std::max(A.size() ? A.norm() : 0.0, BorC.size() ? BorC.norm() : 0.0);
    return 1e-9 * std::max(1.0, scale);
}

bool pbh_test(const Matrix& A, const Matrix& BorC, PbhMode mode, Complex lambda, std::optional<double> tol) {
    require(A.rows() == A.cols(), ErrorKind::Dimension, "pbh_test: A must be square");
    const Eigen::Index n = A.rows();
    if (mode == PbhMode::ControllableAt)
        require(BorC.rows() == n, ErrorKind::Dimension, "pbh_test: B must have n rows");
    else
        require(BorC.cols() == n, ErrorKind::Dimension, "pbh_test: C must have n columns");
    if (n == 0) return true;
    const Matrix At = mode == PbhMode::ControllableAt ? A : Matrix(A.transpose());
    const Matrix Bt = mode == PbhMode::ControllableAt ? BorC : Matrix(BorC.transpose());
    CMatrix M(n, n + Bt.cols());
    M.leftCols(n) = At.cast<Complex>() - lambda * CMatrix::Identity(n, n);
    M.rightCols(Bt.cols()) = Bt.cast<Complex>();
    const double t = tol ? *tol : pbh_tolerance(A, BorC);
    return rank_with_tolerance(M, t) == n;
}

bool structural_property(const Matrix& A, const Matrix& BorC, Property property, StabilityDomain domain,
                         std::optional<double> tol) {
    const PbhMode mode = (property == Property::Controllable || property == Property::Stabilizable)
                             ? PbhMode::ControllableAt
                             : PbhMode::ObservableAt;
    const bool unstable_only = property == Property::Stabilizable || property == Property::Detectable;
    for (const auto& ev : eigenvalues(A)) {
        if (ev.imag() < 0) continue;
        if (unstable_only && in_domain(domain, ev)) continue;
        if (!pbh_test(A, BorC, mode, ev, tol)) return false;
    }
    return true;
}

// A single reflector sends v to -sign(v_q)|v| e_q; a sign flip of the last row fixes the orientation.
RowCompression row_compressor(const RowVector& v) {
    const Eigen::Index q = v.size();
    require(q >= 1, ErrorKind::Dimension, "row_compressor: empty vector");
    RowCompression out;
    out.norm = v.norm();
    if (out.norm == 0.0) {
        out.Q = Matrix::Identity(q, q);
        out.zero = true;
        return out;
    }
    Vector u = v.transpose();
    const double alpha = v(q - 1) >= 0 ? -out.norm : out.norm;
    u(q - 1) -= alpha;
    out.Q = Matrix::Identity(q, q) - (2.0 / u.squaredNorm()) * u * u.transpose();
    if (alpha < 0) out.Q.row(q - 1) *= -1.0;
    return out;
}

Matrix orthogonal_complement(const Matrix& basis, Eigen::Index n) {
    if (basis.cols() == 0) return Matrix::Identity(n, n);
    Eigen::HouseholderQR<Matrix> qr(basis);
    const Matrix Q = qr.householderQ() * Matrix::Identity(n, n);
    return Q.rightCols(n - basis.cols());
}

Matrix controllable_subspace(const Matrix& A, const Matrix& B, std::optional<double> tol) {
    const Eigen::Index n = A.rows();
    require(A.cols() == n && B.rows() == n, ErrorKind::Dimension, "controllable_subspace: dimension mismatch");
    Matrix V(n, 0);
    if (n == 0 || B.cols() == 0) return V;
    const double scale = std::max(A.norm(), B.norm());
    if (scale == 0.0) return V;
    const double thresh = (tol ? *tol : 1e-9) * scale;
    Matrix W = B;
    while (V.cols() < n) {
        for (int pass = 0; pass < 2 && V.cols() > 0; ++pass) W -= V * (V.transpose() * W);
        if (W.cols() == 0) break;
        const Svd s = jacobi_svd(W);
        const Eigen::Index r = std::min<Eigen::Index>((s.values.array() > thresh).count(), n - V.cols());
        if (r == 0) break;
        Matrix fresh = s.U.leftCols(r);
        for (int pass = 0; pass < 2 && V.cols() > 0; ++pass) fresh -= V * (V.transpose() * fresh);
        Eigen::HouseholderQR<Matrix> qr(fresh);
        fresh = qr.householderQ() * Matrix::Identity(n, r);
        Matrix grown(n, V.cols() + r);
        grown << V, fresh;
        V = grown;
        W = A * fresh;
    }
    return V;
}

double pencil_min_singular(const Matrix& S0, const Matrix& S1, Complex lambda) {
    const CMatrix S = S0.cast<Complex>() + lambda * S1.cast<Complex>();
    const Vector s = singular_values(S);
    const double scale = std::max(1.0, S0.norm() + std::abs(lambda) * S1.norm());
    const Eigen::Index k = std::min(S.rows(), S.cols());
    if (k == 0) return 1.0;
    return s(k - 1) / scale;
}

std::vector<Complex> pencil_rank_candidates(const Matrix& S0, const Matrix& S1, std::mt19937_64& rng) {
    const Eigen::Index r = S0.rows(), c = S0.cols();
    require(S1.rows() == r && S1.cols() == c && r <= c, ErrorKind::Dimension, "pencil: shape mismatch");
    std::normal_distribution<double> gauss(0.0, 1.0);
    Matrix R(c, r);
    for (Eigen::Index i = 0; i < R.size(); ++i) R.data()[i] = gauss(rng);
    const Matrix P0 = S0 * R, P1 = S1 * R;
    const double scale = std::max(1.0, S0.norm() / std::max(S1.norm(), 1e-300));
    for (int attempt = 0; attempt < 12; ++attempt) {
        const double mu = scale * gauss(rng);
        const Matrix shifted = P0 + mu * P1;
        const Vector sv = singular_values(shifted);
        if (sv.size() == 0 || sv(sv.size() - 1) <= 1e-10 * std::max(1.0, sv(0))) continue;
        const Matrix M = shifted.partialPivLu().solve(P1);
        const auto nus = eigenvalues(M);
        double numax = 0.0;
        for (const auto& nu : nus) numax = std::max(numax, std::abs(nu));
        std::vector<Complex> out;
        for (const auto& nu : nus)
            if (std::abs(nu) > 1e-8 * std::max(1.0, numax)) out.push_back(mu - 1.0 / nu);
        return out;
    }
    return {};
}

std::vector<Complex> sample_points(const std::vector<Complex>& poles, int count, std::mt19937_64& rng, double radius) {
    Complex center(0.0, 0.0);
    for (const auto& p : poles) center += p;
    if (!poles.empty()) center /= static_cast<double>(poles.size());
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<Complex> out;
    for (int k = 0; k < count; ++k) {
        bool placed = false;
        for (int attempt = 0; attempt < 200 && !placed; ++attempt) {
            const double rad = radius * std::sqrt(unit(rng));
            const double theta = 2.0 * M_PI * unit(rng);
            const Complex z = center + std::polar(rad, theta);
            bool clear = true;
            for (const auto& p : poles)
                if (std::abs(z - p) < 1e-3 * (1.0 + std::abs(p))) clear = false;
            if (clear) {
                out.push_back(z);
                placed = true;
            }
        }
        if (!placed) throw Error(ErrorKind::PoleEvaluation, "could not place a sample point away from the poles");
    }
    return out;
}

}  // namespace srtrkit::numcore
