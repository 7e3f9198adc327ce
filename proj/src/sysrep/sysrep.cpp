#include "srtrkit/sysrep.hpp"

#include "srtrkit/numcore.hpp"

namespace srtrkit::sysrep {

void StateSpaceSystem::validate() const {
    const Eigen::Index n = A.rows();
    require(A.cols() == n, ErrorKind::Dimension, "system: A must be square");
    require(B.rows() == n, ErrorKind::Dimension, "system: B must have as many rows as A");
    require(C.cols() == n, ErrorKind::Dimension, "system: C must have as many columns as A");
    require(D.rows() == C.rows() && D.cols() == B.cols(), ErrorKind::Dimension, "system: D must be outputs x inputs");
    require(A.allFinite() && B.allFinite() && C.allFinite() && D.allFinite(), ErrorKind::InvalidInput,
            "system: non-finite entries");
}

StateSpaceSystem make_system(Matrix A, Matrix B, Matrix C, Matrix D, StabilityDomain domain) {
    StateSpaceSystem sys{std::move(A), std::move(B), std::move(C), std::move(D), domain};
    sys.validate();
    return sys;
}

StateSpaceSystem static_gain(const Matrix& D, StabilityDomain domain) {
    return make_system(Matrix(0, 0), Matrix(0, D.cols()), Matrix(D.rows(), 0), D, domain);
}

Matrix PartitionedRealization::A() const {
    Matrix out(n(), n());
    out << A11, A12, A21, A22;
    return out;
}

Matrix PartitionedRealization::B() const {
    Matrix out(n(), m());
    out << B1, B2;
    return out;
}

Matrix PartitionedRealization::C() const {
    Matrix out = Matrix::Zero(p(), n());
    out.leftCols(p()).setIdentity();
    return out;
}

StateSpaceSystem PartitionedRealization::to_system() const {
    return make_system(A(), B(), C(), Matrix::Zero(p(), m()), domain);
}

PartitionedRealization make_partitioned(Matrix A11, Matrix A12, Matrix A21, Matrix A22, Matrix B1, Matrix B2,
                                        StabilityDomain domain) {
    const Eigen::Index p = A11.rows(), q = A22.rows(), m = B1.cols();
    require(p >= 1, ErrorKind::Dimension, "partitioned: p must be at least 1");
    require(q >= 1, ErrorKind::Dimension, "partitioned: n must exceed p");
    require(A11.cols() == p && A12.rows() == p && A12.cols() == q && A21.rows() == q && A21.cols() == p &&
                A22.cols() == q && B1.rows() == p && B2.rows() == q && B2.cols() == m,
            ErrorKind::Dimension, "partitioned: block shapes are inconsistent");
    PartitionedRealization out{std::move(A11), std::move(A12), std::move(A21), std::move(A22),
                               std::move(B1),  std::move(B2),  domain,         false};
    require(out.A().allFinite() && out.B().allFinite(), ErrorKind::InvalidInput, "partitioned: non-finite entries");
    out.observable_pair = numcore::structural_property(out.A22, out.A12, numcore::Property::Observable, domain);
    return out;
}

PartitionedRealization partition(const StateSpaceSystem& sys) {
    sys.validate();
    const Eigen::Index p = sys.outputs(), n = sys.states();
    require(p >= 1 && p < n, ErrorKind::Dimension, "partition: need 1 <= p < n");
    Matrix expected = Matrix::Zero(p, n);
    expected.leftCols(p).setIdentity();
    require(sys.C == expected, ErrorKind::InvalidInput, "partition: output matrix is not [I 0]");
    require(sys.D.isZero(0.0), ErrorKind::UnsupportedFeedthrough, "partition: feedthrough must be zero");
    const Eigen::Index q = n - p;
    return make_partitioned(sys.A.topLeftCorner(p, p), sys.A.topRightCorner(p, q), sys.A.bottomLeftCorner(q, p),
                            sys.A.bottomRightCorner(q, q), sys.B.topRows(p), sys.B.bottomRows(q), sys.domain);
}

EquivalenceTransform::EquivalenceTransform(Matrix T) : T_(std::move(T)) {
    require(T_.rows() == T_.cols(), ErrorKind::InvalidTransform, "transform must be square");
    require(T_.allFinite(), ErrorKind::InvalidTransform, "transform has non-finite entries");
    require(numcore::rank_with_tolerance(T_) == T_.rows(), ErrorKind::InvalidTransform, "transform is singular");
    Tinv_ = T_.rows() ? Matrix(T_.partialPivLu().inverse()) : Matrix(0, 0);
}

StateSpaceSystem apply_transform(const StateSpaceSystem& sys, const EquivalenceTransform& T) {
    sys.validate();
    require(T.matrix().rows() == sys.states(), ErrorKind::Dimension, "transform size does not match state dimension");
    const Matrix& M = T.matrix();
    const Matrix& Mi = T.inverse();
    return make_system(M * sys.A * Mi, M * sys.B, sys.C * Mi, sys.D, sys.domain);
}

OutputNormalForm to_output_normal(const StateSpaceSystem& sys) {
    sys.validate();
    const Eigen::Index n = sys.states(), p = sys.outputs();
    require(sys.D.isZero(0.0), ErrorKind::UnsupportedFeedthrough, "output-normal form needs zero feedthrough");
    require(p != n, ErrorKind::TrivialCase, "p == n: full state measurement, nothing to partition");
    require(p >= 1 && p < n, ErrorKind::Regularity, "need 1 <= outputs < states");
    require(numcore::rank_with_tolerance(sys.C) == p, ErrorKind::Regularity, "output matrix lacks full row rank");
    Eigen::HouseholderQR<Matrix> qr(sys.C.transpose());
    const Matrix Q = qr.householderQ() * Matrix::Identity(n, n);
    Matrix T(n, n);
    T << sys.C, Q.rightCols(n - p).transpose();
    EquivalenceTransform tr(T);
    StateSpaceSystem moved = apply_transform(sys, tr);
    moved.C.setZero();
    moved.C.leftCols(p).setIdentity();
    return {partition(moved), tr};
}

CMatrix eval_tfm(const StateSpaceSystem& sys, Complex lambda) {
    const Eigen::Index n = sys.states();
    CMatrix out = sys.D.cast<Complex>();
    if (n == 0) return out;
    const CMatrix M = lambda * CMatrix::Identity(n, n) - sys.A.cast<Complex>();
    Eigen::PartialPivLU<CMatrix> lu(M);
    if (!(lu.rcond() > 1e-14)) throw Error(ErrorKind::PoleEvaluation, "evaluation point is at a pole");
    out += sys.C.cast<Complex>() * lu.solve(sys.B.cast<Complex>());
    return out;
}

bool is_minimal(const StateSpaceSystem& sys) {
    sys.validate();
    return numcore::structural_property(sys.A, sys.B, numcore::Property::Controllable, sys.domain) &&
           numcore::structural_property(sys.A, sys.C, numcore::Property::Observable, sys.domain);
}

StateSpaceSystem minimal_realization(const StateSpaceSystem& sys, std::optional<double> tol) {
    sys.validate();
    const Matrix V = numcore::controllable_subspace(sys.A, sys.B, tol);
    const Matrix Ac = V.transpose() * sys.A * V;
    const Matrix Bc = V.transpose() * sys.B;
    const Matrix Cc = sys.C * V;
    const Matrix W = numcore::controllable_subspace(Ac.transpose(), Cc.transpose(), tol);
    return make_system(W.transpose() * Ac * W, W.transpose() * Bc, Cc * W, sys.D, sys.domain);
}

Matrix cyclic_shift(int p) {
    Matrix F = Matrix::Zero(p, p);
    if (p == 0) return F;
    F(0, p - 1) = 1.0;
    for (int i = 1; i < p; ++i) F(i, i - 1) = 1.0;
    return F;
}

RingNetwork build_ring_network(int p, const StateSpaceSystem& phi, const StateSpaceSystem& gamma) {
    require(p >= 2, ErrorKind::InvalidInput, "ring network needs at least two nodes");
    phi.validate();
    gamma.validate();
    require(phi.inputs() == 1 && phi.outputs() == 1 && gamma.inputs() == 1 && gamma.outputs() == 1,
            ErrorKind::InvalidInput, "ring blocks must be scalar");
    require(phi.D.isZero(0.0) && gamma.D.isZero(0.0), ErrorKind::InvalidInput, "ring blocks must be strictly proper");
    require(phi.states() + gamma.states() >= 1, ErrorKind::InvalidInput, "ring nodes need at least one state");
    const Eigen::Index nf = phi.states(), ng = gamma.states();
    const Matrix I = Matrix::Identity(p, p);
    const Matrix F = cyclic_shift(p);
    const Eigen::Index Nf = p * nf, Ng = p * ng, n = Nf + Ng;

    Matrix A = Matrix::Zero(n, n);
    A.topLeftCorner(Nf, Nf) = numcore::kron(I, phi.A) + numcore::kron(F, phi.B * phi.C);
    A.topRightCorner(Nf, Ng) = numcore::kron(F, phi.B * gamma.C);
    A.bottomRightCorner(Ng, Ng) = numcore::kron(I, gamma.A);
    Matrix B = Matrix::Zero(n, p);
    B.bottomRows(Ng) = numcore::kron(I, gamma.B);
    Matrix C(p, n);
    C << numcore::kron(I, phi.C), numcore::kron(I, gamma.C);
    StateSpaceSystem sys = make_system(A, B, C, Matrix::Zero(p, p), phi.domain);

    // Node-local basis completion keeps the partitioned blocks node-structured.
    const Eigen::Index nl = nf + ng;
    RowVector local(nl);
    local << phi.C, gamma.C;
    require(local.norm() > 0.0, ErrorKind::Regularity, "ring node output map is zero");
    Eigen::HouseholderQR<Matrix> qr(Matrix(local.transpose()));
    const Matrix Ql = qr.householderQ() * Matrix::Identity(nl, nl);
    const Matrix completion = Ql.rightCols(nl - 1).transpose();
    Matrix T = Matrix::Zero(n, n);
    for (int i = 0; i < p; ++i) {
        T.block(i, i * nf, 1, nf) = phi.C;
        T.block(i, Nf + i * ng, 1, ng) = gamma.C;
        for (Eigen::Index r = 0; r + 1 < nl; ++r) {
            const Eigen::Index row = p + i * (nl - 1) + r;
            T.block(row, i * nf, 1, nf) = completion.block(r, 0, 1, nf);
            T.block(row, Nf + i * ng, 1, ng) = completion.block(r, nf, 1, ng);
        }
    }
    EquivalenceTransform tr(T);
    StateSpaceSystem moved = apply_transform(sys, tr);
    moved.C.setZero();
    moved.C.leftCols(p).setIdentity();
    return {sys, partition(moved), tr};
}

}  // namespace srtrkit::sysrep
