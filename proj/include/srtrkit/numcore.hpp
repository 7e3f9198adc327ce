#pragma once

#include <functional>
#include <optional>
#include <random>
#include <vector>

#include "srtrkit/common.hpp"

namespace srtrkit::numcore {

// A = Z T Z^T with T quasi upper triangular; 2x2 diagonal blocks carry complex pairs only.
struct RealSchur {
    Matrix T;
    Matrix Z;
};

struct SchurBlock {
    int start;
    int size;
};

RealSchur real_schur(const Matrix& A);
std::vector<SchurBlock> schur_blocks(const Matrix& T);
std::vector<Complex> block_eigenvalues(const Matrix& T, const SchurBlock& block);

// Moves the flagged blocks (indexed as in schur_blocks) to the leading
// positions, keeping their relative order. Returns the size of the leading
// invariant subspace.
int reorder_schur(RealSchur& schur, const std::vector<bool>& selected_blocks);

std::vector<Complex> eigenvalues(const Matrix& A);

struct Svd {
    Matrix U;       // thin left factor, columns for the k = min(rows, cols) values
    Vector values;  // descending
    Matrix V;
};

Svd jacobi_svd(const Matrix& M);
Vector singular_values(const Matrix& M);
Vector singular_values(const CMatrix& M);

double auto_tolerance(Eigen::Index rows, Eigen::Index cols, double norm2);

int rank_with_tolerance(const Matrix& M, std::optional<double> tol = std::nullopt);
int rank_with_tolerance(const CMatrix& M, std::optional<double> tol = std::nullopt);

bool is_stable_spectrum(const Matrix& A, StabilityDomain domain);
double spectral_margin(const Matrix& A, StabilityDomain domain);

enum class PbhMode { ControllableAt, ObservableAt };
enum class Property { Controllable, Observable, Stabilizable, Detectable };

// Default tolerance for PBH rank decisions at computed eigenvalues.
double pbh_tolerance(const Matrix& A, const Matrix& BorC);

bool pbh_test(const Matrix& A, const Matrix& BorC, PbhMode mode, Complex lambda,
              std::optional<double> tol = std::nullopt);

bool structural_property(const Matrix& A, const Matrix& BorC, Property property,
                         StabilityDomain domain, std::optional<double> tol = std::nullopt);

struct RowCompression {
    Matrix Q;
    double norm = 0.0;
    bool zero = false;
};

// Q orthogonal with v Q^T = |v| e_last^T.
RowCompression row_compressor(const RowVector& v);

// Orthonormal basis of the smallest A-invariant subspace containing range(B).
Matrix controllable_subspace(const Matrix& A, const Matrix& B, std::optional<double> tol = std::nullopt);

// Columns completing an orthonormal basis to all of R^n.
Matrix orthogonal_complement(const Matrix& basis, Eigen::Index n);

// Points where a rectangular pencil S0 + lambda S1 (rows <= cols) may drop row rank.
// Found from a random square compression of the pencil; every rank drop is among them.
std::vector<Complex> pencil_rank_candidates(const Matrix& S0, const Matrix& S1, std::mt19937_64& rng);

// Smallest singular value of S0 + lambda S1 relative to the pencil scale.
double pencil_min_singular(const Matrix& S0, const Matrix& S1, Complex lambda);

Matrix kron(const Matrix& a, const Matrix& b);

// X with A X - X B = C, through the vectorized Kronecker system.
Matrix solve_sylvester(const Matrix& A, const Matrix& B, const Matrix& C);

// Real state feedback F with eig(A + B F) equal to the requested values (closed under conjugation).
// Uses a random right-hand side in the Sylvester equation A X - X L = -B G and F = G X^-1.
Matrix place_eigenvalues(const Matrix& A, const Matrix& B, const std::vector<Complex>& targets, std::mt19937_64& rng);

// Seeded sample points on a disk, kept away from given poles.
std::vector<Complex> sample_points(const std::vector<Complex>& poles, int count, std::mt19937_64& rng,
                                   double radius = 2.0);

}  // namespace srtrkit::numcore
