#pragma once

#include <optional>

#include "srtrkit/common.hpp"

namespace srtrkit::sysrep {

struct StateSpaceSystem {
    Matrix A;
    Matrix B;
    Matrix C;
    Matrix D;
    StabilityDomain domain = StabilityDomain::Continuous;

    Eigen::Index states() const { return A.rows(); }
    Eigen::Index inputs() const { return D.cols(); }
    Eigen::Index outputs() const { return D.rows(); }

    // Throws a dimension error on inconsistent shapes or non-finite data.
    void validate() const;
};

StateSpaceSystem make_system(Matrix A, Matrix B, Matrix C, Matrix D,
                             StabilityDomain domain = StabilityDomain::Continuous);

// Static gain: no states.
StateSpaceSystem static_gain(const Matrix& D, StabilityDomain domain = StabilityDomain::Continuous);

// Output-normal partitioned form: implicit C = [I 0], D = 0.
struct PartitionedRealization {
    Matrix A11, A12, A21, A22, B1, B2;
    StabilityDomain domain = StabilityDomain::Continuous;
    bool observable_pair = false;

    Eigen::Index p() const { return A11.rows(); }
    Eigen::Index n() const { return A11.rows() + A22.rows(); }
    Eigen::Index m() const { return B1.cols(); }

    Matrix A() const;
    Matrix B() const;
    Matrix C() const;
    StateSpaceSystem to_system() const;
};

PartitionedRealization make_partitioned(Matrix A11, Matrix A12, Matrix A21, Matrix A22, Matrix B1, Matrix B2,
                                        StabilityDomain domain = StabilityDomain::Continuous);

// Reads the blocks of a system whose output matrix is already [I 0].
PartitionedRealization partition(const StateSpaceSystem& sys);

class EquivalenceTransform {
public:
    explicit EquivalenceTransform(Matrix T);
    const Matrix& matrix() const { return T_; }
    const Matrix& inverse() const { return Tinv_; }

private:
    Matrix T_;
    Matrix Tinv_;
};

StateSpaceSystem apply_transform(const StateSpaceSystem& sys, const EquivalenceTransform& T);

struct OutputNormalForm {
    PartitionedRealization form;
    EquivalenceTransform transform;
};

OutputNormalForm to_output_normal(const StateSpaceSystem& sys);

CMatrix eval_tfm(const StateSpaceSystem& sys, Complex lambda);

bool is_minimal(const StateSpaceSystem& sys);

// Controllable part first, then its observable part, both by orthogonal projection.
StateSpaceSystem minimal_realization(const StateSpaceSystem& sys, std::optional<double> tol = std::nullopt);

struct RingNetwork {
    StateSpaceSystem system;
    PartitionedRealization partitioned;
    EquivalenceTransform transform;
};

// Node i reads the output of node i-1 (cyclically) through phi; gamma carries the local input.
RingNetwork build_ring_network(int p, const StateSpaceSystem& phi, const StateSpaceSystem& gamma);

Matrix cyclic_shift(int p);

}  // namespace srtrkit::sysrep
