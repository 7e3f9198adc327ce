#include <algorithm>
#include <cmath>
#include <limits>

#include "srtrkit/numcore.hpp"

namespace srtrkit::numcore {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// Similarity by R = [[c,-s],[s,c]] on indices (i, i+1): T <- R^T T R, Z <- Z R.
void rotate(Matrix& T, Matrix& Z, int i, double c, double s) {
    const int n = static_cast<int>(T.rows());
    for (int j = 0; j < n; ++j) {
        const double a = T(i, j), b = T(i + 1, j);
        T(i, j) = c * a + s * b;
        T(i + 1, j) = -s * a + c * b;
    }
    for (int r = 0; r < n; ++r) {
        const double a = T(r, i), b = T(r, i + 1);
        T(r, i) = c * a + s * b;
        T(r, i + 1) = -s * a + c * b;
    }
    for (int r = 0; r < Z.rows(); ++r) {
        const double a = Z(r, i), b = Z(r, i + 1);
        Z(r, i) = c * a + s * b;
        Z(r, i + 1) = -s * a + c * b;
    }
}

// Splits a 2x2 diagonal block with real eigenvalues into triangular form.
void standardize_block(Matrix& T, Matrix& Z, int k) {
    const double a = T(k, k), b = T(k, k + 1), c = T(k + 1, k), d = T(k + 1, k + 1);
    if (c == 0.0) return;
    const double p = 0.5 * (a - d);
    const double disc = p * p + b * c;
    if (disc < 0.0) return;
    const double sq = std::sqrt(disc);
    const double lambda = 0.5 * (a + d) + (p >= 0.0 ? sq : -sq);
    double v1 = b, v2 = lambda - a;
    const double w1 = lambda - d, w2 = c;
    if (std::hypot(w1, w2) > std::hypot(v1, v2)) {
        v1 = w1;
        v2 = w2;
    }
    const double r = std::hypot(v1, v2);
    if (r == 0.0) return;
    rotate(T, Z, k, v1 / r, v2 / r);
    T(k + 1, k) = 0.0;
}

void hessenberg(Matrix& H, Matrix& Z) {
    const Eigen::Index n = H.rows();
    for (Eigen::Index k = 0; k + 2 < n; ++k) {
        const Eigen::Index len = n - k - 1;
        Vector v = H.block(k + 1, k, len, 1);
        const double xnorm = v.norm();
        if (xnorm == 0.0) continue;
        const double alpha = v(0) > 0 ? -xnorm : xnorm;
        v(0) -= alpha;
        const double vv = v.squaredNorm();
        if (vv == 0.0) continue;
        const double beta = 2.0 / vv;
        RowVector tmp = v.transpose() * H.bottomRows(len);
        H.bottomRows(len) -= beta * v * tmp;
        Vector tmp2 = H.rightCols(len) * v;
        H.rightCols(len) -= beta * tmp2 * v.transpose();
        Vector tmp3 = Z.rightCols(len) * v;
        Z.rightCols(len) -= beta * tmp3 * v.transpose();
        H.block(k + 2, k, len - 1, 1).setZero();
        H(k + 1, k) = alpha;
    }
}

struct Reflector {
    double v[3] = {0, 0, 0};
    double beta = 0;
    int len = 0;
};

Reflector make_reflector(const double* x, int len) {
    Reflector h;
    h.len = len;
    double norm = 0;
    for (int i = 0; i < len; ++i) norm += x[i] * x[i];
    norm = std::sqrt(norm);
    if (norm == 0) return h;
    const double alpha = x[0] > 0 ? -norm : norm;
    for (int i = 0; i < len; ++i) h.v[i] = x[i];
    h.v[0] -= alpha;
    double vv = 0;
    for (int i = 0; i < len; ++i) vv += h.v[i] * h.v[i];
    if (vv > 0) h.beta = 2.0 / vv;
    return h;
}

void apply_left(Matrix& T, const Reflector& h, int row0, int col0, int col1) {
    for (int j = col0; j <= col1; ++j) {
        double s = 0;
        for (int i = 0; i < h.len; ++i) s += h.v[i] * T(row0 + i, j);
        s *= h.beta;
        for (int i = 0; i < h.len; ++i) T(row0 + i, j) -= s * h.v[i];
    }
}

void apply_right(Matrix& T, const Reflector& h, int col0, int row0, int row1) {
    for (int r = row0; r <= row1; ++r) {
        double s = 0;
        for (int i = 0; i < h.len; ++i) s += h.v[i] * T(r, col0 + i);
        s *= h.beta;
        for (int i = 0; i < h.len; ++i) T(r, col0 + i) -= s * h.v[i];
    }
}

// Operator X -> A11 X - X A22 acting on column-major vec(X).
Matrix sylvester_operator(int p, int q, const Matrix& A11, const Matrix& A22) {
    Matrix L = Matrix::Zero(p * q, p * q);
    for (int b = 0; b < q; ++b) {
        L.block(b * p, b * p, p, p) += A11;
        for (int a = 0; a < q; ++a) L.block(b * p, a * p, p, p) -= A22(a, b) * Matrix::Identity(p, p);
    }
    return L;
}

// Swaps the adjacent diagonal blocks of sizes p (at j) and q (at j+p).
void swap_adjacent(Matrix& T, Matrix& Z, int j, int p, int q) {
    const int n = static_cast<int>(T.rows());
    if (p == 1 && q == 1) {
        const double t11 = T(j, j), t22 = T(j + 1, j + 1), t12 = T(j, j + 1);
        const double x = t12, y = t22 - t11;
        const double r = std::hypot(x, y);
        if (r == 0.0) return;
        rotate(T, Z, j, x / r, y / r);
        T(j + 1, j) = 0.0;
        T(j, j) = t22;
        T(j + 1, j + 1) = t11;
        return;
    }
    const Matrix A11 = T.block(j, j, p, p);
    const Matrix A22 = T.block(j + p, j + p, q, q);
    const Matrix A12 = T.block(j, j + p, p, q);
    Matrix L = sylvester_operator(p, q, A11, A22);
    Eigen::FullPivLU<Matrix> lu(L);
    if (lu.rank() < p * q)
        throw Error(ErrorKind::NumericalFailure, "schur swap: blocks share an eigenvalue");
    Vector x = lu.solve(Eigen::Map<const Vector>(A12.data(), p * q));
    Matrix X = Eigen::Map<Matrix>(x.data(), p, q);
    Matrix M(p + q, q);
    M.topRows(p) = -X;
    M.bottomRows(q) = Matrix::Identity(q, q);
    Eigen::HouseholderQR<Matrix> qr(M);
    Matrix Q = qr.householderQ() * Matrix::Identity(p + q, p + q);
    const double scale = std::max(1.0, T.block(j, j, p + q, p + q).norm());
    T.block(j, j, p + q, n - j) = (Q.transpose() * T.block(j, j, p + q, n - j)).eval();
    T.block(0, j, j + p + q, p + q) = (T.block(0, j, j + p + q, p + q) * Q).eval();
    Z.middleCols(j, p + q) = (Z.middleCols(j, p + q) * Q).eval();
    const double resid = T.block(j + q, j, p, q).norm();
    if (resid > 1e-10 * scale)
        throw Error(ErrorKind::NumericalFailure, "schur swap rejected: ill-conditioned block exchange");
    T.block(j + q, j, p, q).setZero();
    if (q == 2) standardize_block(T, Z, j);
    if (p == 2) standardize_block(T, Z, j + q);
}

}  // namespace

RealSchur real_schur(const Matrix& A) {
    require(A.rows() == A.cols(), ErrorKind::Dimension, "real_schur: matrix must be square");
    require(A.allFinite(), ErrorKind::InvalidInput, "real_schur: non-finite entries");
    const int n = static_cast<int>(A.rows());
    RealSchur out{A, Matrix::Identity(n, n)};
    Matrix& T = out.T;
    Matrix& Z = out.Z;
    if (n == 0) return out;
    hessenberg(T, Z);
    const double anorm = std::max(T.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());

    int hi = n - 1;
    int iter = 0;
    int total = 0;
    const int max_total = 100 * std::max(n, 10);
    while (hi >= 0) {
        int l = hi;
        while (l > 0) {
            const double sub = std::abs(T(l, l - 1));
            double s = std::abs(T(l - 1, l - 1)) + std::abs(T(l, l));
            if (s == 0.0) s = anorm;
            if (sub == 0.0) break;
            if (sub <= kEps * s) {
                // Ahues-Tisseur refinement of the small-subdiagonal test.
                const double ab = std::max(sub, std::abs(T(l - 1, l)));
                const double ba = std::min(sub, std::abs(T(l - 1, l)));
                const double diff = std::abs(T(l - 1, l - 1) - T(l, l));
                const double aa = std::max(std::abs(T(l, l)), diff);
                const double bb = std::min(std::abs(T(l, l)), diff);
                const double sum = aa + ab;
                if (ba * (ab / sum) <= std::max(std::numeric_limits<double>::min() * n, kEps * (bb * (aa / sum)))) {
                    T(l, l - 1) = 0.0;
                    break;
                }
            }
            --l;
        }
        if (l == hi) {
            --hi;
            iter = 0;
            continue;
        }
        if (l == hi - 1) {
            standardize_block(T, Z, hi - 1);
            hi -= 2;
            iter = 0;
            continue;
        }
        if (++iter > 90 || ++total > max_total)
            throw Error(ErrorKind::NumericalFailure, "QR iteration did not converge");

        // Shifts: eigenvalues of the trailing 2x2 block, or an exceptional block now and then.
        double h11 = T(hi - 1, hi - 1), h12 = T(hi - 1, hi), h21 = T(hi, hi - 1), h22 = T(hi, hi);
        if (iter % 20 == 10) {
            const double w = std::abs(T(l + 1, l)) + std::abs(T(l + 2, l + 1));
            h11 = 0.75 * w + T(l, l);
            h12 = -0.4375 * w;
            h21 = w;
            h22 = h11;
        } else if (iter % 20 == 0) {
            const double w = std::abs(T(hi, hi - 1)) + std::abs(T(hi - 1, hi - 2));
            h11 = 0.75 * w + T(hi, hi);
            h12 = -0.4375 * w;
            h21 = w;
            h22 = h11;
        }
        double rt1r, rt1i, rt2r, rt2i;
        {
            const double half = 0.5 * (h11 - h22);
            const double bc = h12 * h21;
            const double disc = half * half + bc;
            if (disc >= 0.0) {
                const double zeta = half + std::copysign(std::sqrt(disc), half);
                rt1r = h22 + zeta;
                rt2r = zeta != 0.0 ? h22 - bc / zeta : rt1r;
                // Double real shift at the eigenvalue nearer the corner entry.
                if (std::abs(rt1r - h22) <= std::abs(rt2r - h22)) rt2r = rt1r;
                else rt1r = rt2r;
                rt1i = rt2i = 0.0;
            } else {
                rt1r = rt2r = h22 + half;
                rt1i = std::sqrt(-disc);
                rt2i = -rt1i;
            }
        }
        // First column of (T - r1)(T - r2), scaled, with differences taken before products.
        double x, y, z;
        {
            const double scale = std::abs(T(l, l) - rt2r) + std::abs(rt2i) + std::abs(T(l + 1, l));
            const double h21s = T(l + 1, l) / scale;
            x = h21s * T(l, l + 1) + (T(l, l) - rt1r) * ((T(l, l) - rt2r) / scale) - rt1i * (rt2i / scale);
            y = h21s * (T(l, l) + T(l + 1, l + 1) - rt1r - rt2r);
            z = h21s * T(l + 2, l + 1);
        }
        for (int k = l; k <= hi - 1; ++k) {
            const int last = std::min(k + 2, hi);
            const int len = last - k + 1;
            if (k > l) {
                x = T(k, k - 1);
                y = T(k + 1, k - 1);
                z = len == 3 ? T(k + 2, k - 1) : 0.0;
            }
            const double vec[3] = {x, y, z};
            const Reflector h = make_reflector(vec, len);
            if (h.beta == 0.0) continue;
            apply_left(T, h, k, k > l ? k - 1 : l, n - 1);
            apply_right(T, h, k, 0, std::min(last + 1, hi));
            apply_right(Z, h, k, 0, n - 1);
            if (k > l) {
                T(k + 1, k - 1) = 0.0;
                if (len == 3) T(k + 2, k - 1) = 0.0;
            }
        }
    }
    for (int j = 0; j < n; ++j)
        for (int i = j + 2; i < n; ++i) T(i, j) = 0.0;
    return out;
}

std::vector<SchurBlock> schur_blocks(const Matrix& T) {
    std::vector<SchurBlock> blocks;
    const int n = static_cast<int>(T.rows());
    int i = 0;
    while (i < n) {
        if (i + 1 < n && T(i + 1, i) != 0.0) {
            blocks.push_back({i, 2});
            i += 2;
        } else {
            blocks.push_back({i, 1});
            i += 1;
        }
    }
    return blocks;
}

std::vector<Complex> block_eigenvalues(const Matrix& T, const SchurBlock& block) {
    const int k = block.start;
    if (block.size == 1) return {Complex(T(k, k), 0.0)};
    const double a = T(k, k), b = T(k, k + 1), c = T(k + 1, k), d = T(k + 1, k + 1);
    const double p = 0.5 * (a - d);
    const double disc = p * p + b * c;
    const double mid = 0.5 * (a + d);
    if (disc < 0.0) {
        const double im = std::sqrt(-disc);
        return {Complex(mid, im), Complex(mid, -im)};
    }
    const double sq = std::sqrt(disc);
    return {Complex(mid + sq, 0.0), Complex(mid - sq, 0.0)};
}

int reorder_schur(RealSchur& schur, const std::vector<bool>& selected_blocks) {
    const auto blocks = schur_blocks(schur.T);
    require(selected_blocks.size() == blocks.size(), ErrorKind::Dimension, "reorder_schur: one flag per block expected");
    std::vector<std::pair<int, bool>> order;
    for (std::size_t b = 0; b < blocks.size(); ++b) order.emplace_back(blocks[b].size, selected_blocks[b]);
    int leading = 0;
    std::size_t filled = 0;
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
        if (!order[pos].second) continue;
        for (std::size_t q = pos; q > filled; --q) {
            int start = 0;
            for (std::size_t r = 0; r + 1 < q; ++r) start += order[r].first;
            swap_adjacent(schur.T, schur.Z, start, order[q - 1].first, order[q].first);
            std::swap(order[q - 1], order[q]);
        }
        leading += order[filled].first;
        ++filled;
    }
    return leading;
}

std::vector<Complex> eigenvalues(const Matrix& A) {
    const RealSchur s = real_schur(A);
    std::vector<Complex> out;
    out.reserve(A.rows());
    for (const auto& b : schur_blocks(s.T)) {
        for (const auto& ev : block_eigenvalues(s.T, b)) out.push_back(ev);
    }
    return out;
}

}  // namespace srtrkit::numcore

