// scenarios.hpp — Worked models: sector (QFGR) dynamics, partial trace over a finite
// heat bath, the Gibbs-limit study and the weak-coupling error sweep.

#pragma once

#include "qfp/coarse_grain.hpp"
#include "qfp/generator.hpp"
#include "qfp/mat_core.hpp"
#include "qfp/subsystem.hpp"

#include <memory>
#include <span>
#include <vector>

namespace qfp {

// ----------------------------------------------------------------------------
// Quantum Fermi Golden Rule
// ----------------------------------------------------------------------------

struct QfgrModel {
    std::vector<int> sector_dims;
    ComplexMatrix h0;  // block diagonal
    ComplexMatrix hp;
    CoarseGrainSchedule schedule;

    // Throws ContractViolation if H₀ couples sectors or inputs are not Hermitian.
    void validate() const;
};

struct ScatteringOperators {
    // d[a][b] = V_b L_{λ0} V_a for a ≠ b (zero matrix on the diagonal); full d×d.
    std::vector<std::vector<ComplexMatrix>> d;
    // H″_a = Σ_{b≠a} ∫ dω/(2πω) D_ab(ω)† D_ab(ω), supported on sector a.
    std::vector<ComplexMatrix> shifts;
};

struct QfgrSystem {
    QfgrModel model;
    double T = 0.0;
    KrausFamily sectors;
    ScatteringOperators scattering;
    // H_a + λH′_a − λ²H″_a, supported on sector a.
    std::vector<ComplexMatrix> hamiltonians;

    // ∂ρ for a block-diagonal ρ = Σ ρ_a:
    //   −i[H_a+λH′_a−λ²H″_a, ρ_a] − (λ²/2)Σ_{b≠a}{D_ab†D_ab, ρ_a} + λ² Σ_{b≠a} D_ba ρ_b D_ba†
    ComplexMatrix apply(const ComplexMatrix& rho) const;
};

// Sector equations built directly from block formulas.
QfgrSystem qfgr_generator(const QfgrModel& m);

// The general construction for the same model.
GeneratorBundle qfgr_general(const QfgrModel& m, bool full_superops = true);

// max-entry difference between QfgrSystem::apply and the general Schrödinger
// generator on sampled block-diagonal Hermitian inputs.
double qfgr_deviation(const QfgrSystem& sys, const GeneratorBundle& general, Rng& rng, int samples = 8);

struct FgrRow {
    double T = 0.0;
    double integral = 0.0;    // ∫ g_T(Δ) dΔ / |H′|²
    double peak = 0.0;        // g_T(0) / |H′|²
    double half_width = 0.0;  // Δ at which g_T falls to half its peak
};

// Nascent-delta surrogate for the classical golden-rule limit: g_T(Δ) = 2√π T e^{−T²Δ²}.
std::vector<FgrRow> fgr_rate_check(std::span<const double> T_values);

// ----------------------------------------------------------------------------
// Heat bath
// ----------------------------------------------------------------------------

struct HeatBathModel {
    ComplexMatrix h_a;
    ComplexMatrix h_b;
    ComplexMatrix q;
    ComplexMatrix phi;
    double beta = 1.0;
    CoarseGrainSchedule schedule;

    Index dim_a() const { return h_a.rows(); }
    Index dim_b() const { return h_b.rows(); }
    void validate() const;
};

// e^{−βH_B}/Tr e^{−βH_B}
HermitianOperator bath_state(const HeatBathModel& m);

struct SpectralLine {
    double omega = 0.0;
    double weight = 0.0;
};

struct CorrelationData {
    double mean = 0.0;                     // h̄ = Tr(σ_β Φ)
    std::vector<SpectralLine> lines;       // h(t) = Σ c_k e^{iω_k t}
    std::vector<SpectralLine> connected;   // the ω=0 line reduced by h̄²

    cplx h(double t) const;
    cplx connected_h(double t) const;
};

// h(t) = Tr(σ_β Φ_t Φ), Φ_t = e^{iH_B t} Φ e^{−iH_B t}. Lines closer than 1e-10 are merged.
CorrelationData bath_correlation(const HeatBathModel& m);

// Specialized generator on B(H_A) (trivial Kraus family {1}).
GeneratorBundle heat_bath_generator(const HeatBathModel& m, bool full_superops = true);

// General construction on H_A ⊗ H_B with the partial-trace family.
GeneratorBundle heat_bath_general(const HeatBathModel& m, bool full_superops = true);

// max-entry difference of the two Heisenberg generators on the matrix units of B(H_A),
// comparing L_spec(X) with (1/d_B) Tr_B L_gen(X ⊗ 1).
double heat_bath_deviation(const GeneratorBundle& special, const GeneratorBundle& general, Index dim_a,
                           Index dim_b);

struct GibbsRow {
    double lambda = 0.0;
    double distance = 0.0;  // trace distance to e^{−βH_A}/Z
    Index nullity = 0;
    bool unique = false;
    ComplexMatrix state;
};

struct GibbsStudy {
    ComplexMatrix target;
    std::vector<GibbsRow> rows;
    bool strictly_decreasing() const;
};

// Requires h̄ = 0 (to 1e-10). The schedule's λ is replaced by each grid value.
GibbsStudy gibbs_limit_study(const HeatBathModel& m, std::span<const double> lambdas);

// ----------------------------------------------------------------------------
// Weak-coupling sweep
// ----------------------------------------------------------------------------

struct SweepRow {
    double lambda = 0.0;
    double T = 0.0;
    std::vector<double> times;
    std::vector<double> errors;  // spectral norm of the reduced difference at each t
    double sup_error = 0.0;
};

// Reduced exact map W_t = P₀ e^{t(Z+λA)} P₀ on 𝒳 in the commutant coordinates.
ComplexMatrix exact_reduced_propagator(const PhysicalSubsystem& s, const EigenSystem& h_lambda,
                                       const ComplexMatrix& predual_embedding, double t);

// For each λ: sup over an evenly spaced grid of `count` points on [0, τ̄/λ²] of
// ‖W_t − e^{tg}‖₂. No convergence claim is made. threads ≤ 1 runs serially.
std::vector<SweepRow> weak_coupling_sweep(std::shared_ptr<const PhysicalSubsystem> sub, const HermitianOperator& h0,
                                          const HermitianOperator& hp, std::span<const double> lambdas, double xi,
                                          double T_ref, double tau_bar, Index count, int threads = 1);

// Same, on an explicit time grid.
SweepRow weak_coupling_errors(const PhysicalSubsystem& sub, const GeneratorBundle& b, const HermitianOperator& h0,
                              const HermitianOperator& hp, std::span<const double> times);

// Qubit coupled through σ_x to n equally spaced bath levels (spacing δ), with
// Φ_mn = s·x e^{−x/2}, x = |b_m − b_n| (m ≠ n). Used by the sweep preset.
HeatBathModel quasi_continuum_model(Index levels, double spacing, double qubit_gap, double strength, double beta,
                                    const CoarseGrainSchedule& sched);

// The full-space data of a heat-bath model: H₀ = H_A⊗1 + 1⊗H_B, H′ = Q⊗Φ.
struct CompositeSystem {
    std::shared_ptr<const PhysicalSubsystem> subsystem;
    HermitianOperator h0;
    HermitianOperator hp;
};
CompositeSystem heat_bath_composite(const HeatBathModel& m);

}  // namespace qfp
