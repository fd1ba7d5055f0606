// subsystem.hpp — Physical Subsystems given by Kraus-form conditional expectations
// P₀(X) = Σ_α V_α† X V_α, their commutant, and a validator for the conditional
// expectation axioms.

#pragma once

#include "qfp/mat_core.hpp"

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace qfp {

struct KrausFamily {
    Index dim = 0;
    std::vector<ComplexMatrix> operators;

    // Heisenberg action X ↦ Σ V† X V.
    ComplexMatrix project(const ComplexMatrix& x) const;
    // Predual action ρ ↦ Σ V ρ V†.
    ComplexMatrix project_state(const ComplexMatrix& rho) const;
    Superoperator heisenberg_superop() const;
};

// Orthogonal projectors onto consecutive diagonal blocks of the given sizes.
KrausFamily sector_family(std::span<const int> sector_dims);

// V_αβ = 1_A ⊗ √ω |φ_β⟩⟨φ_α| in the bath eigenbasis (ascending eigenvalues).
// The induced predual projection is ρ ↦ Tr_B(ρ) ⊗ ω.
KrausFamily partial_trace_family(Index dim_a, const HermitianOperator& bath_state);

// Tr_B for ρ on H_A ⊗ H_B.
ComplexMatrix partial_trace_b(const ComplexMatrix& rho, Index dim_a, Index dim_b);

struct CommutantResult {
    std::vector<ComplexMatrix> basis;  // Hermitian, Hilbert-Schmidt orthonormal
    RealVector singular_values;        // ascending
    double zero_threshold = 0.0;       // absolute cut used for the rank decision
    double gap = 0.0;                  // smallest retained singular value / largest
};

// Orthonormal basis of {X : [V_α, X] = [V_α†, X] = 0 ∀α}. Throws ContractViolation
// (witness = offending relative singular value) when the nullspace is ill-determined.
CommutantResult commutant_with_report(const KrausFamily& k);
std::vector<ComplexMatrix> commutant(const KrausFamily& k);

class PhysicalSubsystem {
public:
    const KrausFamily& kraus() const noexcept { return kraus_; }
    Index dim() const noexcept { return kraus_.dim; }
    // P₀ on observables.
    const Superoperator& heisenberg_projection() const noexcept { return heisenberg_; }
    // Trace-pairing adjoint of P₀, acting on density matrices.
    const Superoperator& schrodinger_projection() const noexcept { return schrodinger_; }
    // Hermitian, Hilbert-Schmidt orthonormal basis of the subalgebra 𝒳.
    const std::vector<ComplexMatrix>& commutant_basis() const noexcept { return basis_; }
    Index subalgebra_dim() const noexcept { return static_cast<Index>(basis_.size()); }
    // d² × r matrix with columns vec(X_a).
    const ComplexMatrix& embedding() const noexcept { return embedding_; }

    ComplexMatrix project(const ComplexMatrix& x) const;
    ComplexMatrix project_state(const ComplexMatrix& rho) const;
    // ‖X − Π_𝒳 X‖_max where Π_𝒳 is the orthogonal projector onto span(basis).
    double distance_from_subalgebra(const ComplexMatrix& x) const;
    bool contains(const ComplexMatrix& x, double tol = 1e-9) const;
    // Coefficients ⟨X_a, X⟩_HS.
    ComplexVector coordinates(const ComplexMatrix& x) const;

    // Builds without checking unitality or idempotence; for validator tests only.
    static PhysicalSubsystem unchecked(KrausFamily k);

private:
    friend PhysicalSubsystem build_projection(KrausFamily k);
    PhysicalSubsystem(KrausFamily k, std::vector<ComplexMatrix> basis);

    KrausFamily kraus_;
    Superoperator heisenberg_;
    Superoperator schrodinger_;
    std::vector<ComplexMatrix> basis_;
    ComplexMatrix embedding_;
};

// Rejects non-unital (witness ‖P₀(1) − 1‖) and non-idempotent (witness ‖P₀² − P₀‖)
// families, and families whose commutant differs from the image of P₀.
PhysicalSubsystem build_projection(KrausFamily k);

struct AxiomResult {
    std::string name;
    bool passed = false;
    double witness = 0.0;
    std::string note;
};

struct ValidationReport {
    std::vector<AxiomResult> axioms;
    bool all_passed() const;
    const AxiomResult& axiom(const std::string& name) const;
};

// Checks adjointness, fixed points, complete positivity, the bimodule property and
// (vacuously, in finite dimension) normality. Sampling draws from rng.
ValidationReport validate_cppnce(const PhysicalSubsystem& s, int sample_count, Rng& rng);

// Count header followed by each matrix in the interchange format.
void write_kraus_family(std::ostream& os, const KrausFamily& k);
KrausFamily read_kraus_family(std::istream& is);

}  // namespace qfp
