// generator.hpp — Quantum Fokker-Planck generator in Lindblad form, its time-domain
// oracle, propagation in either picture, QDS certificates and steady states.
//
// The generator is contractual on the subalgebra 𝒳 = image(P₀). Internally it is
// also kept as an r×r matrix g_ab = Tr(X_a L(X_b)) over the Hermitian orthonormal
// commutant basis, which is what propagators and steady states use.

#pragma once

#include "qfp/coarse_grain.hpp"
#include "qfp/mat_core.hpp"
#include "qfp/subsystem.hpp"

#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace qfp {

// One dissipative channel: X ↦ weight · P₀(J† X J).
struct JumpTerm {
    double weight = 0.0;
    ComplexMatrix op;
};

struct LindbladDecomposition {
    ComplexMatrix h_free;   // ⟨H₀⟩
    ComplexMatrix h_first;  // λ⟨H′⟩
    ComplexMatrix h_lamb;   // λ² H_LS
    ComplexMatrix decay;    // A = Ψ(1)
    std::vector<JumpTerm> jumps;
    Superoperator jump_map;  // Ψ on the full operator space (empty if not requested)

    ComplexMatrix effective_hamiltonian() const { return h_free + h_first + h_lamb; }
    // Ψ(X) from the jump terms.
    ComplexMatrix apply_jump(const ComplexMatrix& x, const PhysicalSubsystem& s) const;
};

struct GeneratorOptions {
    // Pin T instead of deriving it from the schedule.
    std::optional<double> T;
    // Build the d²×d² Heisenberg/Schrödinger/Ψ superoperators. Costs O(d⁶).
    bool full_superops = true;
};

struct GeneratorBundle {
    LindbladDecomposition decomposition;
    CoarseGrainSchedule schedule;
    double T = 0.0;
    std::shared_ptr<const PhysicalSubsystem> subsystem;

    ComplexMatrix reduced;           // g, r×r
    ComplexMatrix predual_embedding;  // d²×r, columns vec(P₀*(X_a))

    Superoperator heisenberg;   // empty unless full_superops
    Superoperator schrodinger;  // trace adjoint of heisenberg

    Index dim() const { return subsystem->dim(); }
    // L(P₀ X) in the Heisenberg picture.
    ComplexMatrix apply_heisenberg(const ComplexMatrix& x) const;
    // The part of L that is second order, divided by λ² (the assembled K_T), on the full space.
    Superoperator second_order() const;
};

GeneratorBundle build_generator(std::shared_ptr<const PhysicalSubsystem> sub, const HermitianOperator& h0,
                                const HermitianOperator& hp, const CoarseGrainSchedule& sched,
                                const GeneratorOptions& opts = {});

// Assembles a bundle from precomputed Lindblad pieces (used by specialized scenario forms).
GeneratorBundle assemble_bundle(std::shared_ptr<const PhysicalSubsystem> sub, LindbladDecomposition pieces,
                                const CoarseGrainSchedule& sched, double T, bool full_superops = true);

// ----------------------------------------------------------------------------
// Time-domain oracle for K_T
// ----------------------------------------------------------------------------

struct OracleOptions {
    // Grid points on [−8T, 8T] at the coarse level; 0 picks a count from the Bohr spread.
    Index points = 0;
    // Richardson extrapolation over the grid and its halving.
    bool richardson = true;
};

// (1/(√π T)) ∫∫_{t₂≤t₁} e^{−(t₁²+t₂²)/2T²} A₀₁(t₁) A₁₀(t₂), with A(t)X = i[H′(t), X].
Superoperator k_t_oracle(const PhysicalSubsystem& sub, const HermitianOperator& h0, const HermitianOperator& hp,
                         double T, const OracleOptions& opts = {});

// ----------------------------------------------------------------------------
// Propagation
// ----------------------------------------------------------------------------

enum class Picture { heisenberg, schrodinger };

struct Trajectory {
    std::vector<double> times;
    std::vector<ComplexMatrix> states;
    bool negative_times = false;
};

// exp(t g), r×r.
ComplexMatrix reduced_propagator(const GeneratorBundle& b, double t);
// X ↦ Σ (e^{tg} c(P₀X))_a X_a on the full space.
Superoperator heisenberg_propagator(const GeneratorBundle& b, double t);
// ρ ↦ Σ (e^{tgᵀ} m(ρ))_a P₀*(X_a), m_a = Tr(ρ X_a).
Superoperator schrodinger_propagator(const GeneratorBundle& b, double t);

// Heisenberg: state0 must lie in 𝒳. Schrödinger: state0 must be a density matrix fixed by P₀*.
Trajectory evolve(const GeneratorBundle& b, const ComplexMatrix& state0, std::span<const double> times,
                  Picture picture);

// ----------------------------------------------------------------------------
// Certificates
// ----------------------------------------------------------------------------

struct CertificateRow {
    double t = 0.0;
    double min_choi_eig = 0.0;        // Choi of the Schrödinger propagator
    bool choi_psd = false;
    double unitality_residual = 0.0;  // ‖E_t(1) − 1‖_max
    double trace_residual = 0.0;      // max over ρ of |Tr S_t(ρ) − Tr ρ| via the dual of the trace
    double semigroup_residual = 0.0;  // ‖e^{2tg} − (e^{tg})²‖_max / (1 + ‖e^{2tg}‖_max)
    double hs_norm = 0.0;             // largest singular value of e^{tg} (Hilbert-Schmidt induced)
    double trace_norm_excess = 0.0;   // max(‖S_t(Y)‖₁ − ‖Y‖₁) over sampled Hermitian Y in 𝒳_*
    double op_norm_excess = 0.0;      // max(‖E_t(X)‖_op − ‖X‖_op) over sampled Hermitian X in 𝒳

    bool passed() const;
};

struct QdsCertificate {
    std::vector<CertificateRow> rows;
    bool passed() const;
};

QdsCertificate qds_certificate(const GeneratorBundle& b, std::span<const double> times, Rng& rng,
                               int samples = 8);

// ----------------------------------------------------------------------------
// Steady states
// ----------------------------------------------------------------------------

struct SteadyState {
    ComplexMatrix state;         // trace one, full space
    Index nullity = 0;
    bool unique = false;
    bool ambiguous = false;      // a singular value sits just above the zero cut
    RealVector singular_values;  // of gᵀ, ascending
    double gap = 0.0;            // smallest nonzero singular value / largest
};

SteadyState steady_state(const GeneratorBundle& b);

// ----------------------------------------------------------------------------
// Export
// ----------------------------------------------------------------------------

// Writes h_free.mat, h_first.mat, h_lamb.mat, decay.mat, jump_<k>.mat, reduced.mat,
// kraus.txt and manifest.txt into dir.
void export_bundle(const GeneratorBundle& b, const std::string& dir, const std::string& descriptor);

}  // namespace qfp
