#include <algorithm>
#include <cmath>

#include "srtrkit/numcore.hpp"

namespace srtrkit::numcore {

Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

Matrix solve_sylvester(const Matrix& A, const Matrix& B, const Matrix& C) {
    require(A.rows() == A.cols() && B.rows() == B.cols(), ErrorKind::Dimension, "sylvester: A and B must be square");
    require(C.rows() == A.rows() && C.cols() == B.rows(), ErrorKind::Dimension, "sylvester: C has the wrong shape");
    const Eigen::Index m = A.rows(), n = B.rows();
    if (m == 0 || n == 0) return Matrix::Zero(m, n);
    // Column-major vec: vec(A X - X B) = (I kron A - B^T kron I) vec(X).
    const Matrix op = kron(Matrix::Identity(n, n), A) - kron(B.transpose(), Matrix::Identity(m, m));
    Eigen::PartialPivLU<Matrix> lu(op);
    if (!(lu.rcond() > 1e-15)) throw Error(ErrorKind::NumericalFailure, "sylvester: operator is singular");
    const Vector x = lu.solve(Eigen::Map<const Vector>(C.data(), C.size()));
    return Eigen::Map<const Matrix>(x.data(), m, n);
}

Matrix place_eigenvalues(const Matrix& A, const Matrix& B, const std::vector<Complex>& targets, std::mt19937_64& rng) {
    const Eigen::Index n = A.rows(), m = B.cols();
    require(A.cols() == n && B.rows() == n, ErrorKind::Dimension, "place: A square, B with n rows");
    require(static_cast<Eigen::Index>(targets.size()) == n, ErrorKind::Dimension, "place: need n target eigenvalues");

    // Real block-diagonal matrix carrying the targets.
    Matrix L = Matrix::Zero(n, n);
    std::vector<bool> used(targets.size(), false);
    Eigen::Index k = 0;
    for (std::size_t i = 0; i < targets.size(); ++i) {
        if (used[i]) continue;
        used[i] = true;
        const Complex t = targets[i];
        if (std::abs(t.imag()) <= 1e-12 * std::max(1.0, std::abs(t))) {
            L(k, k) = t.real();
            ++k;
            continue;
        }
        std::size_t partner = targets.size();
        for (std::size_t j = i + 1; j < targets.size(); ++j)
            if (!used[j] && std::abs(targets[j] - std::conj(t)) <= 1e-10 * std::max(1.0, std::abs(t))) {
                partner = j;
                break;
            }
        require(partner < targets.size(), ErrorKind::InvalidInput, "place: targets not closed under conjugation");
        used[partner] = true;
        L(k, k) = t.real();
        L(k + 1, k + 1) = t.real();
        L(k, k + 1) = std::abs(t.imag());
        L(k + 1, k) = -std::abs(t.imag());
        k += 2;
    }

    std::normal_distribution<double> g(0.0, 1.0);
    for (int attempt = 0; attempt < 20; ++attempt) {
        Matrix G(m, n);
        for (Eigen::Index i = 0; i < G.size(); ++i) G.data()[i] = g(rng);
        Matrix X;
        try {
            X = solve_sylvester(A, L, -B * G);
        } catch (const Error&) {
            throw Error(ErrorKind::NumericalFailure, "place: targets overlap the open-loop spectrum");
        }
        Eigen::FullPivLU<Matrix> lu(X);
        if (lu.rank() < n || lu.rcond() < 1e-12) continue;
        return G * lu.inverse();
    }
    throw Error(ErrorKind::NumericalFailure, "place: pair appears uncontrollable");
}

}  // namespace srtrkit::numcore
