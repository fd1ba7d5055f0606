// coarse_grain.hpp — Gaussian coarse-grained perturbations L_{λω}, the T(λ) schedule,
// the principal-value Gaussian integral and the Lamb-shift Hamiltonian.

#pragma once

#include "qfp/mat_core.hpp"
#include "qfp/subsystem.hpp"

namespace qfp {

struct CoarseGrainSchedule {
    double lambda = 0.0;
    double xi = 1.0;
    double T_ref = 1.0;

    // Throws ContractViolation unless 0 < xi < 2, T_ref > 0 and lambda ≠ 0.
    void validate() const;
};

// |λ|^{-ξ} T̃ exactly.
double T_of_lambda(const CoarseGrainSchedule& s);

// (2π)^{1/2} π^{-1/4} T^{1/2}, the scale of every L_{λω} entry.
double coarse_grain_prefactor(double T);

struct CoarseGrainedPerturbation {
    double omega = 0.0;
    double T = 0.0;
    ComplexMatrix matrix;  // computational basis
};

// Eigenbasis entries κ e^{-T²(ω−Δ_mn)²/2} H'_mn, rotated back.
CoarseGrainedPerturbation coarse_grained_L(const EigenSystem& h0, const HermitianOperator& hp, double T,
                                           double omega);

// PV ∫ dω e^{-a(ω−μ)²}/ω = 2√π F(√a μ), F the Dawson function.
double pv_gaussian(double mu, double a);
// Same integral by adaptive Cauchy principal-value quadrature; oracle for pv_gaussian.
double pv_gaussian_quadrature(double mu, double a);

// Second-order building blocks, all in the computational basis:
//   centered = L_{λ0} − ⟨L_{λ0}⟩
//   lamb     = −∫ dω/(2πω) ⟨M_ω† M_ω⟩ with M_ω = L_{λω} − ⟨L_{λω}⟩ (principal value)
struct SecondOrderKernel {
    ComplexMatrix centered;
    ComplexMatrix lamb;
};

// Requires [H₀-commutator, P₀] = 0; throws ContractViolation with the witness otherwise.
SecondOrderKernel second_order_kernel(const EigenSystem& h0, const HermitianOperator& hp, double T,
                                      const PhysicalSubsystem& s);

// Effective Hamiltonian H_LS entering the generator as i[λ² H_LS, X].
HermitianOperator lamb_shift(const EigenSystem& h0, const HermitianOperator& hp, double T,
                             const PhysicalSubsystem& s);

}  // namespace qfp
