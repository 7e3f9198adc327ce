#include "srtrkit/rational.hpp"

#include <algorithm>
#include <cmath>

#include "srtrkit/numcore.hpp"

namespace srtrkit::srtrcore {

int degree(const Poly& p) {
    for (int k = static_cast<int>(p.size()) - 1; k >= 0; --k)
        if (p[k] != 0.0) return k;
    return -1;
}

Poly trimmed(Poly p) {
    const int d = degree(p);
    p.resize(d < 0 ? 1 : d + 1);
    if (d < 0) p[0] = 0.0;
    return p;
}

Complex evaluate(const Poly& p, Complex x) {
    Complex acc(0.0, 0.0);
    for (auto it = p.rbegin(); it != p.rend(); ++it) acc = acc * x + *it;
    return acc;
}

Poly add(const Poly& a, const Poly& b) {
    Poly out(std::max(a.size(), b.size()), 0.0);
    for (std::size_t k = 0; k < a.size(); ++k) out[k] += a[k];
    for (std::size_t k = 0; k < b.size(); ++k) out[k] += b[k];
    return out;
}

Poly subtract(const Poly& a, const Poly& b) { return add(a, scaled(b, -1.0)); }

Poly multiply(const Poly& a, const Poly& b) {
    if (a.empty() || b.empty()) return {0.0};
    Poly out(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
    return out;
}

Poly scaled(const Poly& a, double s) {
    Poly out(a);
    for (auto& c : out) c *= s;
    return out;
}

Poly shift_up(const Poly& a) {
    Poly out(a.size() + 1, 0.0);
    std::copy(a.begin(), a.end(), out.begin() + 1);
    return out;
}

double max_abs(const Poly& p) {
    double m = 0.0;
    for (double c : p) m = std::max(m, std::abs(c));
    return m;
}

std::vector<Complex> roots(const Poly& p) {
    const int d = degree(p);
    if (d <= 0) return {};
    Matrix companion = Matrix::Zero(d, d);
    for (int k = 0; k < d; ++k) companion(0, k) = -p[d - 1 - k] / p[d];
    for (int k = 1; k < d; ++k) companion(k, k - 1) = 1.0;
    return numcore::eigenvalues(companion);
}

Poly divide(const Poly& a, const Poly& monic) {
    const int da = degree(a), dm = degree(monic);
    if (da < dm) return {0.0};
    Poly rem(a.begin(), a.begin() + da + 1);
    Poly quot(da - dm + 1, 0.0);
    for (int k = da - dm; k >= 0; --k) {
        const double c = rem[k + dm];
        quot[k] = c;
        for (int j = 0; j <= dm; ++j) rem[k + j] -= c * monic[j];
    }
    return quot;
}

Poly from_roots(const std::vector<Complex>& rs) {
    Poly out{1.0};
    std::vector<bool> used(rs.size(), false);
    for (std::size_t i = 0; i < rs.size(); ++i) {
        if (used[i]) continue;
        used[i] = true;
        const Complex r = rs[i];
        if (r.imag() == 0.0) {
            out = multiply(out, {-r.real(), 1.0});
            continue;
        }
        std::size_t partner = rs.size();
        double best = 1e300;
        for (std::size_t j = i + 1; j < rs.size(); ++j)
            if (!used[j] && std::abs(rs[j] - std::conj(r)) < best) {
                best = std::abs(rs[j] - std::conj(r));
                partner = j;
            }
        if (partner < rs.size()) used[partner] = true;
        out = multiply(out, {std::norm(r), -2.0 * r.real(), 1.0});
    }
    return out;
}

bool negligible(const RationalFn& f, double tol) {
    return max_abs(f.num) <= tol * std::max(max_abs(f.den), 1e-300);
}

RationalFn reduce(const RationalFn& f, double tol, ReductionStats* stats) {
    RationalFn out{trimmed(f.num), trimmed(f.den)};
    require(degree(out.den) >= 0, ErrorKind::InvalidInput, "rational function with zero denominator");
    if (degree(out.num) < 0) return {{0.0}, {1.0}};

    const auto nr = roots(out.num);
    const auto dr = roots(out.den);
    std::vector<bool> taken(dr.size(), false);
    std::vector<Complex> common;
    int near = 0;
    for (const auto& r : nr) {
        std::size_t best = dr.size();
        double dist = 1e300;
        for (std::size_t j = 0; j < dr.size(); ++j) {
            if (taken[j]) continue;
            const double d = std::abs(r - dr[j]) / std::max(1.0, std::abs(dr[j]));
            if (d < dist) {
                dist = d;
                best = j;
            }
        }
        if (best == dr.size()) continue;
        if (dist <= tol) {
            taken[best] = true;
            common.push_back(0.5 * (r + dr[best]));
        } else if (dist <= 1e-4) {
            ++near;
        }
    }
    // Keep only conjugate-closed cancellations.
    std::vector<Complex> closed;
    for (const auto& c : common) {
        if (c.imag() == 0.0 || std::abs(c.imag()) <= tol * std::max(1.0, std::abs(c))) {
            closed.emplace_back(c.real(), 0.0);
            continue;
        }
        if (c.imag() < 0) continue;
        const bool has_partner = std::any_of(common.begin(), common.end(), [&](const Complex& o) {
            return std::abs(o - std::conj(c)) <= 2 * tol * std::max(1.0, std::abs(c));
        });
        if (has_partner) {
            closed.push_back(c);
            closed.push_back(std::conj(c));
        }
    }
    if (!closed.empty()) {
        const Poly factor = from_roots(closed);
        out.num = trimmed(divide(out.num, factor));
        out.den = trimmed(divide(out.den, factor));
    }
    const double lead = out.den[degree(out.den)];
    out.num = scaled(out.num, 1.0 / lead);
    out.den = scaled(out.den, 1.0 / lead);
    if (stats) {
        stats->cancelled += static_cast<int>(closed.size());
        stats->near_common += near;
    }
    return out;
}

CMatrix RationalMatrix::evaluate(Complex x) const {
    CMatrix out(rows_, cols_);
    for (Eigen::Index i = 0; i < rows_; ++i)
        for (Eigen::Index j = 0; j < cols_; ++j) out(i, j) = (*this)(i, j)(x);
    return out;
}

Leverrier leverrier_faddeev(const Matrix& A) {
    require(A.rows() == A.cols(), ErrorKind::Dimension, "leverrier: matrix must be square");
    const Eigen::Index n = A.rows();
    Leverrier out;
    out.chi.assign(n + 1, 0.0);
    out.chi[n] = 1.0;
    if (n == 0) return out;
    Matrix M = Matrix::Identity(n, n);
    out.adjugate.push_back(M);
    for (Eigen::Index k = 1; k <= n; ++k) {
        const Matrix AM = A * M;
        const double c = -AM.trace() / static_cast<double>(k);
        out.chi[n - k] = c;
        if (k < n) {
            M = AM + c * Matrix::Identity(n, n);
            out.adjugate.push_back(M);
        }
    }
    return out;
}

CommonDenominator common_denominator(const sysrep::StateSpaceSystem& sys) {
    sys.validate();
    const Eigen::Index n = sys.states(), p = sys.outputs(), m = sys.inputs();
    const Leverrier lf = leverrier_faddeev(sys.A);
    CommonDenominator out;
    out.chi = lf.chi;
    out.num.assign(p, std::vector<Poly>(m, Poly(n + 1, 0.0)));
    std::vector<Matrix> markov;
    for (const auto& Mk : lf.adjugate) markov.push_back(sys.C * Mk * sys.B);
    for (Eigen::Index i = 0; i < p; ++i) {
        for (Eigen::Index j = 0; j < m; ++j) {
            Poly& num = out.num[i][j];
            for (Eigen::Index k = 0; k <= n; ++k) num[k] = sys.D(i, j) * lf.chi[k];
            for (Eigen::Index k = 0; k < n; ++k) num[n - 1 - k] += markov[k](i, j);
        }
    }
    return out;
}

RationalMatrix rational_entries(const sysrep::StateSpaceSystem& sys) {
    const CommonDenominator cd = common_denominator(sys);
    RationalMatrix out(sys.outputs(), sys.inputs());
    for (Eigen::Index i = 0; i < out.rows(); ++i)
        for (Eigen::Index j = 0; j < out.cols(); ++j) out(i, j) = RationalFn{cd.num[i][j], cd.chi};
    return out;
}

}  // namespace srtrkit::srtrcore
