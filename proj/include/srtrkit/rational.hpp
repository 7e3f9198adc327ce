#pragma once

#include <vector>

#include "srtrkit/common.hpp"
#include "srtrkit/sysrep.hpp"

namespace srtrkit::srtrcore {

// Real polynomial, coefficients in ascending powers.
using Poly = std::vector<double>;

int degree(const Poly& p);
Poly trimmed(Poly p);
Complex evaluate(const Poly& p, Complex x);
Poly add(const Poly& a, const Poly& b);
Poly subtract(const Poly& a, const Poly& b);
Poly multiply(const Poly& a, const Poly& b);
Poly scaled(const Poly& a, double s);
Poly shift_up(const Poly& a);  // multiply by the variable
double max_abs(const Poly& p);
std::vector<Complex> roots(const Poly& p);
// Quotient of a by a monic real polynomial; remainder discarded.
Poly divide(const Poly& a, const Poly& monic);
Poly from_roots(const std::vector<Complex>& rs);

struct RationalFn {
    Poly num{0.0};
    Poly den{1.0};

    Complex operator()(Complex x) const { return evaluate(num, x) / evaluate(den, x); }
    bool proper() const { return degree(num) <= degree(den); }
};

// Identically zero within tol: every numerator coefficient at most tol times the largest denominator coefficient.
bool negligible(const RationalFn& f, double tol);

struct ReductionStats {
    int cancelled = 0;
    int near_common = 0;  // root pairs closer than a loose bound that were left in place
};

// Monic denominator, numerically coincident roots removed.
RationalFn reduce(const RationalFn& f, double tol, ReductionStats* stats = nullptr);

class RationalMatrix {
public:
    RationalMatrix() = default;
    RationalMatrix(Eigen::Index rows, Eigen::Index cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

    Eigen::Index rows() const { return rows_; }
    Eigen::Index cols() const { return cols_; }
    RationalFn& operator()(Eigen::Index i, Eigen::Index j) { return data_[i * cols_ + j]; }
    const RationalFn& operator()(Eigen::Index i, Eigen::Index j) const { return data_[i * cols_ + j]; }
    CMatrix evaluate(Complex x) const;

private:
    Eigen::Index rows_ = 0;
    Eigen::Index cols_ = 0;
    std::vector<RationalFn> data_;
};

// Characteristic polynomial and adjugate coefficients: adj(xI - A) = sum_k M_k x^(n-1-k).
struct Leverrier {
    Poly chi;
    std::vector<Matrix> adjugate;
};

Leverrier leverrier_faddeev(const Matrix& A);

// Entry numerators over the shared denominator det(xI - A).
struct CommonDenominator {
    Poly chi;
    std::vector<std::vector<Poly>> num;  // [row][col]
};

CommonDenominator common_denominator(const sysrep::StateSpaceSystem& sys);

RationalMatrix rational_entries(const sysrep::StateSpaceSystem& sys);

}  // namespace srtrkit::srtrcore
