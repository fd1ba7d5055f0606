// scenarios.cpp — see scenarios.hpp

#include "qfp/scenarios.hpp"

#include "qfp/parallel.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace qfp {

namespace {

void require_hermitian(const ComplexMatrix& m, const char* what) {
    if (m.rows() != m.cols()) throw DimensionMismatch(std::string(what) + " is not square");
    const double dev = hermitian_deviation(m);
    if (dev > 1e-12 * (1.0 + max_abs(m))) throw ContractViolation(std::string(what) + " is not Hermitian", dev);
}

ComplexMatrix hermitian_part(const ComplexMatrix& m) { return 0.5 * (m + m.adjoint()); }

// T/√π · e^{−T²(Δ₁−Δ₂)²/4} · PV∫ e^{−T²(ω−μ)²}/ω, μ = (Δ₁+Δ₂)/2 − shift
double lamb_weight(double T, double d1, double d2, double shift) {
    const double gap = d1 - d2;
    return T / std::sqrt(std::numbers::pi) * std::exp(-0.25 * T * T * gap * gap) *
           pv_gaussian(0.5 * (d1 + d2) - shift, T * T);
}

}  // namespace

// ----------------------------------------------------------------------------
// QFGR
// ----------------------------------------------------------------------------

void QfgrModel::validate() const {
    require_hermitian(h0, "QFGR H0");
    require_hermitian(hp, "QFGR H'");
    if (h0.rows() != hp.rows()) throw DimensionMismatch("QFGR: H0 and H' differ in size");
    const KrausFamily k = sector_family(sector_dims);
    if (k.dim != h0.rows()) throw DimensionMismatch("QFGR: sector dimensions do not sum to dim H0");
    double w = 0.0;
    for (const auto& v : k.operators) w = std::max(w, max_abs(commutator(h0, v)));
    if (w > 1e-12 * (1.0 + max_abs(h0))) throw ContractViolation("QFGR: H0 does not commute with the sectors", w);
    schedule.validate();
}

QfgrSystem qfgr_generator(const QfgrModel& m) {
    m.validate();
    QfgrSystem sys;
    sys.model = m;
    sys.T = T_of_lambda(m.schedule);
    sys.sectors = sector_family(m.sector_dims);
    const double T = sys.T;
    const double lam = m.schedule.lambda;
    const Index d = m.h0.rows();
    const auto ns = m.sector_dims.size();

    // Eigenbasis chosen sector by sector so that no eigenvector straddles two sectors.
    ComplexMatrix u = ComplexMatrix::Zero(d, d);
    RealVector eps(d);
    std::vector<Index> sector_of(static_cast<std::size_t>(d));
    std::vector<Index> offsets;
    Index off = 0;
    for (std::size_t a = 0; a < ns; ++a) {
        const Index sz = m.sector_dims[a];
        const EigenSystem es = hermitian_eig(HermitianOperator::symmetrized(m.h0.block(off, off, sz, sz)));
        u.block(off, off, sz, sz) = es.vectors;
        eps.segment(off, sz) = es.values;
        for (Index i = off; i < off + sz; ++i) sector_of[static_cast<std::size_t>(i)] = static_cast<Index>(a);
        offsets.push_back(off);
        off += sz;
    }
    const ComplexMatrix hpe = u.adjoint() * m.hp * u;
    const double kappa = coarse_grain_prefactor(T);
    auto delta = [&](Index i, Index j) { return eps(i) - eps(j); };

    sys.scattering.d.assign(ns, std::vector<ComplexMatrix>(ns, ComplexMatrix::Zero(d, d)));
    sys.scattering.shifts.assign(ns, ComplexMatrix::Zero(d, d));
    for (std::size_t a = 0; a < ns; ++a) {
        for (std::size_t b = 0; b < ns; ++b) {
            if (a == b) continue;
            ComplexMatrix de = ComplexMatrix::Zero(d, d);
            for (Index j = offsets[a]; j < offsets[a] + m.sector_dims[a]; ++j) {
                for (Index i = offsets[b]; i < offsets[b] + m.sector_dims[b]; ++i) {
                    const double x = delta(i, j);
                    de(i, j) = kappa * std::exp(-0.5 * T * T * x * x) * hpe(i, j);
                }
            }
            sys.scattering.d[a][b] = u * de * u.adjoint();
        }
        // H″_a entries (j, j′) in sector a, summed over intermediate i outside a.
        ComplexMatrix se = ComplexMatrix::Zero(d, d);
        for (Index j = offsets[a]; j < offsets[a] + m.sector_dims[a]; ++j) {
            for (Index jp = offsets[a]; jp < offsets[a] + m.sector_dims[a]; ++jp) {
                cplx acc = 0.0;
                for (Index i = 0; i < d; ++i) {
                    if (sector_of[static_cast<std::size_t>(i)] == static_cast<Index>(a)) continue;
                    if (hpe(i, j) == cplx(0.0) || hpe(i, jp) == cplx(0.0)) continue;
                    acc += std::conj(hpe(i, j)) * hpe(i, jp) * lamb_weight(T, delta(i, j), delta(i, jp), 0.0);
                }
                se(j, jp) = acc;
            }
        }
        sys.scattering.shifts[a] = hermitian_part(u * se * u.adjoint());
    }

    for (std::size_t a = 0; a < ns; ++a) {
        const ComplexMatrix& v = sys.sectors.operators[a];
        sys.hamiltonians.push_back(hermitian_part(v * (m.h0 + lam * m.hp) * v - lam * lam * sys.scattering.shifts[a]));
    }
    return sys;
}

ComplexMatrix QfgrSystem::apply(const ComplexMatrix& rho) const {
    const double lam = model.schedule.lambda;
    const auto ns = sectors.operators.size();
    std::vector<ComplexMatrix> blocks;
    for (const auto& v : sectors.operators) blocks.push_back(v * rho * v);
    ComplexMatrix out = ComplexMatrix::Zero(rho.rows(), rho.cols());
    for (std::size_t a = 0; a < ns; ++a) {
        out += -kI * commutator(hamiltonians[a], blocks[a]);
        for (std::size_t b = 0; b < ns; ++b) {
            if (a == b) continue;
            const ComplexMatrix& dab = scattering.d[a][b];
            const ComplexMatrix& dba = scattering.d[b][a];
            out += -0.5 * lam * lam * anticommutator(dab.adjoint() * dab, blocks[a]);
            out += lam * lam * (dba * blocks[b] * dba.adjoint());
        }
    }
    return out;
}

GeneratorBundle qfgr_general(const QfgrModel& m, bool full_superops) {
    m.validate();
    auto sub = std::make_shared<const PhysicalSubsystem>(build_projection(sector_family(m.sector_dims)));
    GeneratorOptions opts;
    opts.full_superops = full_superops;
    return build_generator(std::move(sub), HermitianOperator(m.h0), HermitianOperator(m.hp), m.schedule, opts);
}

double qfgr_deviation(const QfgrSystem& sys, const GeneratorBundle& general, Rng& rng, int samples) {
    if (general.schrodinger.dim() != sys.sectors.dim) {
        throw std::invalid_argument("qfgr_deviation: general bundle lacks full superoperators");
    }
    double w = 0.0;
    for (int k = 0; k < samples; ++k) {
        const ComplexMatrix rho = sys.sectors.project_state(random_hermitian(sys.sectors.dim, rng).matrix());
        w = std::max(w, max_abs(sys.apply(rho) - general.schrodinger.apply(rho)));
    }
    return w;
}

namespace {

double fgr_profile(double x, void* p) {
    const double T = *static_cast<const double*>(p);
    return 2.0 * std::sqrt(std::numbers::pi) * T * std::exp(-T * T * x * x);
}

}  // namespace

std::vector<FgrRow> fgr_rate_check(std::span<const double> T_values) {
    std::vector<FgrRow> rows;
    gsl_integration_workspace* ws = gsl_integration_workspace_alloc(1000);
    for (double T : T_values) {
        if (!(T > 0.0)) {
            gsl_integration_workspace_free(ws);
            throw ContractViolation("fgr_rate_check: T must be positive", T);
        }
        double t = T;
        gsl_function f{&fgr_profile, &t};
        double result = 0.0;
        double err = 0.0;
        gsl_integration_qagi(&f, 0.0, 1e-13, 1000, ws, &result, &err);
        rows.push_back({T, result, fgr_profile(0.0, &t), std::sqrt(std::log(2.0)) / T});
    }
    gsl_integration_workspace_free(ws);
    return rows;
}

// ----------------------------------------------------------------------------
// Heat bath
// ----------------------------------------------------------------------------

void HeatBathModel::validate() const {
    require_hermitian(h_a, "H_A");
    require_hermitian(h_b, "H_B");
    require_hermitian(q, "Q");
    require_hermitian(phi, "Phi");
    if (q.rows() != h_a.rows()) throw DimensionMismatch("heat bath: Q and H_A differ in size");
    if (phi.rows() != h_b.rows()) throw DimensionMismatch("heat bath: Phi and H_B differ in size");
    if (!(beta >= 0.0) || !std::isfinite(beta)) throw ContractViolation("heat bath: beta must be >= 0", beta);
    schedule.validate();
}

HermitianOperator bath_state(const HeatBathModel& m) {
    const EigenSystem es = hermitian_eig(HermitianOperator::symmetrized(m.h_b));
    RealVector p = (-m.beta * (es.values.array() - es.values.minCoeff())).exp();
    p /= p.sum();
    return HermitianOperator::symmetrized(es.vectors * p.cast<cplx>().asDiagonal() * es.vectors.adjoint());
}

cplx CorrelationData::h(double t) const {
    cplx s = 0.0;
    for (const auto& l : lines) s += l.weight * std::exp(kI * l.omega * t);
    return s;
}

cplx CorrelationData::connected_h(double t) const {
    cplx s = 0.0;
    for (const auto& l : connected) s += l.weight * std::exp(kI * l.omega * t);
    return s;
}

CorrelationData bath_correlation(const HeatBathModel& m) {
    const EigenSystem es = hermitian_eig(HermitianOperator::symmetrized(m.h_b));
    const Index db = es.dim();
    RealVector p = (-m.beta * (es.values.array() - es.values.minCoeff())).exp();
    p /= p.sum();
    const ComplexMatrix phe = es.to_eigen(m.phi);

    CorrelationData c;
    std::vector<SpectralLine> raw;
    for (Index mm = 0; mm < db; ++mm) {
        c.mean += p(mm) * phe(mm, mm).real();
        for (Index n = 0; n < db; ++n) {
            const double w = p(mm) * std::norm(phe(mm, n));
            if (w > 0.0) raw.push_back({es.values(mm) - es.values(n), w});
        }
    }
    std::stable_sort(raw.begin(), raw.end(), [](const auto& a, const auto& b) { return a.omega < b.omega; });
    for (const auto& l : raw) {
        if (!c.lines.empty() && std::abs(l.omega - c.lines.back().omega) < 1e-10) {
            c.lines.back().weight += l.weight;
        } else {
            c.lines.push_back(l);
        }
    }
    c.connected = c.lines;
    const double hbar2 = c.mean * c.mean;
    if (hbar2 > 0.0) {
        auto it = std::find_if(c.connected.begin(), c.connected.end(),
                               [](const auto& l) { return std::abs(l.omega) < 1e-10; });
        if (it == c.connected.end()) {
            throw std::logic_error("bath_correlation: nonzero mean without a zero-frequency line");
        }
        it->weight -= hbar2;
    }
    return c;
}

GeneratorBundle heat_bath_generator(const HeatBathModel& m, bool full_superops) {
    m.validate();
    const Index da = m.dim_a();
    const double T = T_of_lambda(m.schedule);
    const double lam = m.schedule.lambda;
    const CorrelationData corr = bath_correlation(m);

    auto sub = std::make_shared<const PhysicalSubsystem>(build_projection(KrausFamily{da, {identity(da)}}));

    const EigenSystem es = hermitian_eig(HermitianOperator::symmetrized(m.h_a));
    const Eigen::MatrixXd delta = es.bohr_frequencies();
    const ComplexMatrix qe = es.to_eigen(m.q);
    const double kappa = coarse_grain_prefactor(T);

    LindbladDecomposition dec;
    dec.h_free = m.h_a;
    dec.h_first = lam * corr.mean * m.q;
    dec.decay = ComplexMatrix::Zero(da, da);
    ComplexMatrix lamb_e = ComplexMatrix::Zero(da, da);
    for (const auto& line : corr.connected) {
        // Q_{ω_k}: eigenbasis entries κ e^{−T²(ω_k−Δ_ij)²/2} Q_ij
        ComplexMatrix qk = qe;
        for (Index j = 0; j < da; ++j) {
            for (Index i = 0; i < da; ++i) {
                const double x = line.omega - delta(i, j);
                qk(i, j) *= kappa * std::exp(-0.5 * T * T * x * x);
            }
        }
        const ComplexMatrix qk_lab = es.to_lab(qk);
        dec.decay += lam * lam * line.weight * (qk_lab.adjoint() * qk_lab);
        dec.jumps.push_back({lam * lam * line.weight, qk_lab});

        // ∫ dω′/(2πω′) Q†_{ω_k+ω′} Q_{ω_k+ω′}
        for (Index j = 0; j < da; ++j) {
            for (Index jp = 0; jp < da; ++jp) {
                cplx acc = 0.0;
                for (Index i = 0; i < da; ++i) {
                    if (qe(i, j) == cplx(0.0) || qe(i, jp) == cplx(0.0)) continue;
                    acc += std::conj(qe(i, j)) * qe(i, jp) * lamb_weight(T, delta(i, j), delta(i, jp), line.omega);
                }
                lamb_e(j, jp) -= line.weight * acc;
            }
        }
    }
    dec.h_lamb = lam * lam * es.to_lab(lamb_e);
    return assemble_bundle(std::move(sub), std::move(dec), m.schedule, T, full_superops);
}

CompositeSystem heat_bath_composite(const HeatBathModel& m) {
    m.validate();
    const Index da = m.dim_a();
    const Index db = m.dim_b();
    auto sub = std::make_shared<const PhysicalSubsystem>(build_projection(partial_trace_family(da, bath_state(m))));
    HermitianOperator h0 = HermitianOperator::symmetrized(kron(m.h_a, identity(db)) + kron(identity(da), m.h_b));
    HermitianOperator hp = HermitianOperator::symmetrized(kron(m.q, m.phi));
    return {std::move(sub), std::move(h0), std::move(hp)};
}

GeneratorBundle heat_bath_general(const HeatBathModel& m, bool full_superops) {
    CompositeSystem c = heat_bath_composite(m);
    GeneratorOptions opts;
    opts.full_superops = full_superops;
    return build_generator(std::move(c.subsystem), c.h0, c.hp, m.schedule, opts);
}

double heat_bath_deviation(const GeneratorBundle& special, const GeneratorBundle& general, Index dim_a,
                           Index dim_b) {
    double w = 0.0;
    const ComplexMatrix id_b = identity(dim_b);
    for (Index j = 0; j < dim_a; ++j) {
        for (Index i = 0; i < dim_a; ++i) {
            const ComplexMatrix x = unit_matrix(dim_a, i, j);
            const ComplexMatrix ls = special.apply_heisenberg(x);
            const ComplexMatrix lg = general.apply_heisenberg(kron(x, id_b));
            const ComplexMatrix y = partial_trace_b(lg, dim_a, dim_b) / static_cast<double>(dim_b);
            w = std::max(w, max_abs(ls - y));
        }
    }
    return w;
}

bool GibbsStudy::strictly_decreasing() const {
    for (std::size_t k = 1; k < rows.size(); ++k) {
        if (!(rows[k].distance < rows[k - 1].distance)) return false;
    }
    return true;
}

GibbsStudy gibbs_limit_study(const HeatBathModel& m, std::span<const double> lambdas) {
    m.validate();
    const CorrelationData corr = bath_correlation(m);
    if (std::abs(corr.mean) > 1e-10) {
        throw ContractViolation("gibbs_limit_study: bath mean Tr(sigma Phi) must vanish", corr.mean);
    }
    GibbsStudy study;
    const EigenSystem es = hermitian_eig(HermitianOperator::symmetrized(m.h_a));
    RealVector p = (-m.beta * (es.values.array() - es.values.minCoeff())).exp();
    p /= p.sum();
    study.target = es.vectors * p.cast<cplx>().asDiagonal() * es.vectors.adjoint();

    for (double lam : lambdas) {
        HeatBathModel ml = m;
        ml.schedule.lambda = lam;
        const GeneratorBundle b = heat_bath_generator(ml, false);
        const SteadyState ss = steady_state(b);
        GibbsRow row;
        row.lambda = lam;
        row.nullity = ss.nullity;
        row.unique = ss.unique;
        row.state = ss.state;
        row.distance = 0.5 * trace_norm(HermitianOperator::symmetrized(ss.state - study.target));
        study.rows.push_back(std::move(row));
    }
    return study;
}

// ----------------------------------------------------------------------------
// Weak-coupling sweep
// ----------------------------------------------------------------------------

ComplexMatrix exact_reduced_propagator(const PhysicalSubsystem& s, const EigenSystem& h_lambda,
                                       const ComplexMatrix& predual_embedding, double t) {
    const Index d = s.dim();
    const auto& basis = s.commutant_basis();
    const Index r = s.subalgebra_dim();
    const ComplexVector phase = (-kI * t * h_lambda.values.cast<cplx>()).array().exp();
    const ComplexMatrix u = h_lambda.vectors * phase.asDiagonal() * h_lambda.vectors.adjoint();
    ComplexMatrix images(d * d, r);
    for (Index b = 0; b < r; ++b) images.col(b) = vectorize(u.adjoint() * basis[b] * u);
    // coordinates of P₀(Y): Tr(X_a P₀(Y)) = Tr(P₀*(X_a) Y)
    return predual_embedding.adjoint() * images;
}

SweepRow weak_coupling_errors(const PhysicalSubsystem& sub, const GeneratorBundle& b, const HermitianOperator& h0,
                              const HermitianOperator& hp, std::span<const double> times) {
    if (times.empty()) throw std::invalid_argument("weak_coupling_errors: empty time grid");
    SweepRow row;
    row.lambda = b.schedule.lambda;
    row.T = b.T;
    const EigenSystem hl = hermitian_eig(HermitianOperator::symmetrized(h0.matrix() + row.lambda * hp.matrix()));
    for (double t : times) {
        const ComplexMatrix diff =
            exact_reduced_propagator(sub, hl, b.predual_embedding, t) - reduced_propagator(b, t);
        Eigen::JacobiSVD<ComplexMatrix> svd(diff);
        const double e = svd.singularValues()(0);
        row.times.push_back(t);
        row.errors.push_back(e);
        row.sup_error = std::max(row.sup_error, e);
    }
    return row;
}

std::vector<SweepRow> weak_coupling_sweep(std::shared_ptr<const PhysicalSubsystem> sub, const HermitianOperator& h0,
                                          const HermitianOperator& hp, std::span<const double> lambdas, double xi,
                                          double T_ref, double tau_bar, Index count, int threads) {
    if (lambdas.empty() || count <= 0) throw std::invalid_argument("weak_coupling_sweep: empty grid");
    if (sub->dim() > 32) {
        throw std::invalid_argument("weak_coupling_sweep: full space dimension above 32 is not supported");
    }
    std::vector<SweepRow> rows(lambdas.size());
    auto job = [&](std::size_t k) {
        const double lam = lambdas[k];
        CoarseGrainSchedule s{lam, xi, T_ref};
        GeneratorOptions opts;
        opts.full_superops = false;
        const GeneratorBundle b = build_generator(sub, h0, hp, s, opts);
        std::vector<double> times;
        const double stop = tau_bar / (lam * lam);
        for (Index i = 0; i < count; ++i) {
            times.push_back(count == 1 ? 0.0 : stop * static_cast<double>(i) / static_cast<double>(count - 1));
        }
        rows[k] = weak_coupling_errors(*sub, b, h0, hp, times);
    };
    parallel_for(lambdas.size(), threads, job);
    return rows;
}

HeatBathModel quasi_continuum_model(Index levels, double spacing, double qubit_gap, double strength, double beta,
                                    const CoarseGrainSchedule& sched) {
    HeatBathModel m;
    m.h_a = 0.5 * qubit_gap * pauli_z();
    m.h_b = ComplexMatrix::Zero(levels, levels);
    for (Index k = 0; k < levels; ++k) m.h_b(k, k) = spacing * static_cast<double>(k);
    m.q = pauli_x();
    m.phi = ComplexMatrix::Zero(levels, levels);
    for (Index a = 0; a < levels; ++a) {
        for (Index b = 0; b < levels; ++b) {
            if (a == b) continue;
            const double x = spacing * std::abs(static_cast<double>(a - b));
            m.phi(a, b) = strength * x * std::exp(-0.5 * x);
        }
    }
    m.beta = beta;
    m.schedule = sched;
    return m;
}

}  // namespace qfp
