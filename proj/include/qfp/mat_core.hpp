// mat_core.hpp — Dense complex matrices, Hermitian eigensystems, matrix exponential,
// column-stacking vectorization, superoperators and Choi matrices.
//
// Convention: vec() stacks columns, so vec(A X B) = (Bᵀ ⊗ A) vec(X).

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace qfp {

using cplx = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;
using Rng = std::mt19937_64;

inline constexpr cplx kI{0.0, 1.0};

// Default tolerances for structural identities and PSD checks.
inline constexpr double kStructuralTol = 1e-10;
inline constexpr double kPsdSlack = 1e-9;

// ----------------------------------------------------------------------------
// Errors
// ----------------------------------------------------------------------------

class DimensionMismatch : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A violated precondition, with the numerical quantity that violated it.
class ContractViolation : public std::invalid_argument {
public:
    ContractViolation(const std::string& what, double witness);
    double witness() const noexcept { return witness_; }

private:
    double witness_;
};

// ----------------------------------------------------------------------------
// Basic helpers
// ----------------------------------------------------------------------------

double max_abs(const ComplexMatrix& m);
bool all_finite(const ComplexMatrix& m);
// max |M - M†| entry.
double hermitian_deviation(const ComplexMatrix& m);
ComplexMatrix identity(Index d);
ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);
// Σ_α X_α ⊗ Y_α in one matrix product.
ComplexMatrix kron_sum(const std::vector<ComplexMatrix>& xs, const std::vector<ComplexMatrix>& ys);
ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix anticommutator(const ComplexMatrix& a, const ComplexMatrix& b);
// |i><j| in dimension d.
ComplexMatrix unit_matrix(Index d, Index i, Index j);

ComplexMatrix pauli_x();
ComplexMatrix pauli_y();
ComplexMatrix pauli_z();

// ----------------------------------------------------------------------------
// HermitianOperator
// ----------------------------------------------------------------------------

// Square matrix with ‖M − M†‖_max ≤ 1e-12·(1 + ‖M‖_max).
class HermitianOperator {
public:
    // Throws ContractViolation (witness = max asymmetry) if not Hermitian.
    explicit HermitianOperator(ComplexMatrix m);

    // (m + m†)/2 without any check beyond squareness.
    static HermitianOperator symmetrized(const ComplexMatrix& m);

    const ComplexMatrix& matrix() const noexcept { return m_; }
    Index dim() const noexcept { return m_.rows(); }

private:
    struct Unchecked {};
    HermitianOperator(ComplexMatrix m, Unchecked) : m_(std::move(m)) {}
    ComplexMatrix m_;
};

// ----------------------------------------------------------------------------
// Eigensystem
// ----------------------------------------------------------------------------

struct EigenSystem {
    RealVector values;      // ascending
    ComplexMatrix vectors;  // unitary, eigenvectors in columns

    Index dim() const noexcept { return values.size(); }
    ComplexMatrix to_eigen(const ComplexMatrix& lab) const;
    ComplexMatrix to_lab(const ComplexMatrix& eig) const;
    // Δ_mn = ε_m − ε_n
    Eigen::MatrixXd bohr_frequencies() const;
};

EigenSystem hermitian_eig(const HermitianOperator& m);

// Scaling-and-squaring Padé exponential.
ComplexMatrix expm(const ComplexMatrix& m);

// ----------------------------------------------------------------------------
// Vectorization and superoperators
// ----------------------------------------------------------------------------

ComplexVector vectorize(const ComplexMatrix& x);
ComplexMatrix devectorize(const ComplexVector& v, Index rows, Index cols);
ComplexMatrix devectorize(const ComplexVector& v);  // square

// Linear map on d×d operators, stored as a d²×d² matrix acting on vec(X).
class Superoperator {
public:
    Superoperator() = default;
    explicit Superoperator(ComplexMatrix matrix);

    static Superoperator identity(Index d);
    static Superoperator zero(Index d);

    Index dim() const noexcept { return dim_; }
    const ComplexMatrix& matrix() const noexcept { return m_; }

    ComplexMatrix apply(const ComplexMatrix& x) const;
    // Adjoint with respect to the trace pairing Tr(ρ X): Tr(S*(ρ) X) = Tr(ρ S(X)).
    Superoperator trace_adjoint() const;

    friend Superoperator operator*(const Superoperator& a, const Superoperator& b);
    friend Superoperator operator+(const Superoperator& a, const Superoperator& b);
    friend Superoperator operator-(const Superoperator& a, const Superoperator& b);
    friend Superoperator operator*(cplx s, const Superoperator& a);

private:
    Index dim_ = 0;
    ComplexMatrix m_;
};

// X ↦ A X B
Superoperator sandwich_superop(const ComplexMatrix& a, const ComplexMatrix& b);
// X ↦ H X − X H
Superoperator commutator_superop(const ComplexMatrix& h);
// X ↦ A X + X A
Superoperator anticommutator_superop(const ComplexMatrix& a);
// X ↦ Xᵀ
Superoperator transpose_superop(Index d);

// C = Σ_ij E_ij ⊗ S(E_ij); S completely positive ⇔ C ⪰ 0.
ComplexMatrix choi_matrix(const Superoperator& s);

struct PsdCheck {
    bool psd = false;
    double min_eigenvalue = 0.0;
};

// λ_min ≥ −tol·(1 + ‖M‖₂).
PsdCheck is_psd(const HermitianOperator& m, double tol = kPsdSlack);

double trace_norm(const HermitianOperator& m);

// ----------------------------------------------------------------------------
// Random samples (seeded by the caller)
// ----------------------------------------------------------------------------

ComplexMatrix random_complex(Index d, Rng& rng);
HermitianOperator random_hermitian(Index d, Rng& rng);
ComplexMatrix random_unitary(Index d, Rng& rng);
// Full-rank random density matrix.
HermitianOperator random_density(Index d, Rng& rng);

// ----------------------------------------------------------------------------
// Interchange format
// ----------------------------------------------------------------------------
//
// "rows cols" followed by row-major "re im" pairs, whitespace separated.

void write_matrix(std::ostream& os, const ComplexMatrix& m);
ComplexMatrix read_matrix(std::istream& is);
std::string format_matrix(const ComplexMatrix& m);
ComplexMatrix parse_matrix(const std::string& text);

}  // namespace qfp
