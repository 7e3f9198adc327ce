#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "srtrkit/numcore.hpp"

namespace srtrkit::numcore {

namespace {
constexpr double kEps = std::numeric_limits<double>::epsilon();

// Real embedding [[Re, -Im], [Im, Re]]; each singular value appears twice.
Matrix embed(const CMatrix& M) {
    const Eigen::Index r = M.rows(), c = M.cols();
    Matrix E(2 * r, 2 * c);
    E.topLeftCorner(r, c) = M.real();
    E.topRightCorner(r, c) = -M.imag();
    E.bottomLeftCorner(r, c) = M.imag();
    E.bottomRightCorner(r, c) = M.real();
    return E;
}
}  // namespace

// One-sided Jacobi (Hestenes) on the taller orientation.
Svd jacobi_svd(const Matrix& M) {
    require(M.allFinite(), ErrorKind::InvalidInput, "svd: non-finite entries");
    const bool transposed = M.rows() < M.cols();
    Matrix U = transposed ? Matrix(M.transpose()) : M;
    const Eigen::Index c = U.cols();
    Matrix V = Matrix::Identity(c, c);
    const double floor = std::pow(1e-3 * kEps * U.norm(), 2);
    const double orth_tol = static_cast<double>(U.rows()) * kEps;

    bool converged = c < 2;
    for (int sweep = 0; sweep < 80 && !converged; ++sweep) {
        bool rotated = false;
        for (Eigen::Index i = 0; i + 1 < c; ++i) {
            for (Eigen::Index j = i + 1; j < c; ++j) {
                const double alpha = U.col(i).squaredNorm();
                const double beta = U.col(j).squaredNorm();
                const double gamma = U.col(i).dot(U.col(j));
                if (alpha <= floor || beta <= floor) continue;
                if (std::abs(gamma) <= orth_tol * std::sqrt(alpha * beta)) continue;
                rotated = true;
                const double zeta = (beta - alpha) / (2.0 * gamma);
                const double t = (zeta >= 0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double cs = 1.0 / std::sqrt(1.0 + t * t);
                const double sn = cs * t;
                for (Eigen::Index r = 0; r < U.rows(); ++r) {
                    const double a = U(r, i), b = U(r, j);
                    U(r, i) = cs * a - sn * b;
                    U(r, j) = sn * a + cs * b;
                }
                for (Eigen::Index r = 0; r < c; ++r) {
                    const double a = V(r, i), b = V(r, j);
                    V(r, i) = cs * a - sn * b;
                    V(r, j) = sn * a + cs * b;
                }
            }
        }
        converged = !rotated;
    }
    if (!converged) throw Error(ErrorKind::NumericalFailure, "Jacobi SVD did not converge");

    Vector norms(c);
    for (Eigen::Index k = 0; k < c; ++k) norms(k) = U.col(k).norm();
    std::vector<Eigen::Index> idx(c);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return norms(a) > norms(b); });

    Svd out;
    out.values.resize(c);
    out.U.resize(U.rows(), c);
    out.V.resize(c, c);
    for (Eigen::Index k = 0; k < c; ++k) {
        const Eigen::Index s = idx[k];
        out.values(k) = norms(s);
        out.U.col(k) = norms(s) > 0 ? Vector(U.col(s) / norms(s)) : Vector::Zero(U.rows());
        out.V.col(k) = V.col(s);
    }
    if (transposed) std::swap(out.U, out.V);
    return out;
}

Vector singular_values(const Matrix& M) {
    if (M.size() == 0) return Vector();
    return jacobi_svd(M).values;
}

Vector singular_values(const CMatrix& M) {
    if (M.size() == 0) return Vector();
    const Vector doubled = jacobi_svd(embed(M)).values;
    Vector out(doubled.size() / 2);
    for (Eigen::Index k = 0; k < out.size(); ++k) out(k) = doubled(2 * k);
    return out;
}

double auto_tolerance(Eigen::Index rows, Eigen::Index cols, double norm2) {
    return static_cast<double>(std::max(rows, cols)) * norm2 * kEps;
}

int rank_with_tolerance(const Matrix& M, std::optional<double> tol) {
    if (M.size() == 0) return 0;
    const Vector s = singular_values(M);
    const double t = tol ? *tol : auto_tolerance(M.rows(), M.cols(), s(0));
    return static_cast<int>((s.array() > t).count());
}

int rank_with_tolerance(const CMatrix& M, std::optional<double> tol) {
    if (M.size() == 0) return 0;
    const Vector s = singular_values(M);
    const double t = tol ? *tol : auto_tolerance(M.rows(), M.cols(), s(0));
    return static_cast<int>((s.array() > t).count());
}

}  // namespace srtrkit::numcore
