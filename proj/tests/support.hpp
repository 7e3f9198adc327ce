#pragma once

#include <algorithm>
#include <complex>
#include <functional>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "srtrkit/common.hpp"
#include "srtrkit/sysrep.hpp"

namespace testsupport {

using srtrkit::Complex;
using srtrkit::Matrix;

inline Matrix random_matrix(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c, double scale = 1.0) {
    std::normal_distribution<double> g(0.0, scale);
    Matrix m(r, c);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = g(rng);
    return m;
}

// Oracle eigenvalues from Eigen's own solver, sorted for matching.
inline std::vector<Complex> oracle_eigenvalues(const Matrix& A) {
    Eigen::EigenSolver<Matrix> es(A, false);
    std::vector<Complex> out(es.eigenvalues().data(), es.eigenvalues().data() + A.rows());
    return out;
}

// Greedy nearest matching distance between two multisets.
inline double match_distance(std::vector<Complex> a, std::vector<Complex> b) {
    if (a.size() != b.size()) return 1e300;
    double worst = 0.0;
    for (const auto& x : a) {
        auto it = std::min_element(b.begin(), b.end(),
                                   [&](const Complex& u, const Complex& v) { return std::abs(u - x) < std::abs(v - x); });
        worst = std::max(worst, std::abs(*it - x));
        b.erase(it);
    }
    return worst;
}

inline Matrix cyclic_shift(int p) {
    Matrix F = Matrix::Zero(p, p);
    F(0, p - 1) = 1.0;
    for (int i = 1; i < p; ++i) F(i, i - 1) = 1.0;
    return F;
}

inline bool throws_kind(const std::function<void()>& f, srtrkit::ErrorKind kind) {
    try {
        f();
    } catch (const srtrkit::Error& e) {
        return e.kind() == kind;
    }
    return false;
}

// Random system with n states put into output-normal form; minimal with probability one.
inline srtrkit::sysrep::PartitionedRealization random_base(std::mt19937_64& rng, int n, int p, int m,
                                                           srtrkit::StabilityDomain domain =
                                                               srtrkit::StabilityDomain::Continuous) {
    using namespace srtrkit::sysrep;
    for (;;) {
        auto sys = make_system(random_matrix(rng, n, n), random_matrix(rng, n, m), random_matrix(rng, p, n),
                               Matrix::Zero(p, m), domain);
        if (!is_minimal(sys)) continue;
        return to_output_normal(sys).form;
    }
}

// Row-structured instance: each output row owns a private block of states, so with K = 0 the zero
// entries of the masks are exact zeros of W and V.
struct StructuredInstance {
    srtrkit::sysrep::PartitionedRealization base;
    Eigen::MatrixXi maskW, maskV;
};

inline StructuredInstance structured_instance(std::mt19937_64& rng, int p, int m, int states_per_row) {
    std::bernoulli_distribution coin(0.5);
    const int q = p * states_per_row;
    Eigen::MatrixXi maskW(p, p), maskV(p, m);
    for (int i = 0; i < p; ++i) {
        for (int j = 0; j < p; ++j) maskW(i, j) = (i == j || coin(rng)) ? 1 : 0;
        for (int k = 0; k < m; ++k) maskV(i, k) = coin(rng) ? 1 : 0;
        maskV(i, i % m) = 1;
    }
    Matrix A11 = random_matrix(rng, p, p), B1 = random_matrix(rng, p, m);
    Matrix A12 = Matrix::Zero(p, q), A22 = Matrix::Zero(q, q);
    Matrix A21 = random_matrix(rng, q, p), B2 = random_matrix(rng, q, m);
    for (int i = 0; i < p; ++i) {
        const int o = i * states_per_row;
        A12.block(i, o, 1, states_per_row) = random_matrix(rng, 1, states_per_row);
        A22.block(o, o, states_per_row, states_per_row) =
            random_matrix(rng, states_per_row, states_per_row) - 2.0 * Matrix::Identity(states_per_row, states_per_row);
        for (int j = 0; j < p; ++j)
            if (!maskW(i, j)) {
                A11(i, j) = 0.0;
                A21.block(o, j, states_per_row, 1).setZero();
            }
        for (int k = 0; k < m; ++k)
            if (!maskV(i, k)) {
                B1(i, k) = 0.0;
                B2.block(o, k, states_per_row, 1).setZero();
            }
    }
    return {srtrkit::sysrep::make_partitioned(A11, A12, A21, A22, B1, B2), maskW, maskV};
}

}  // namespace testsupport
