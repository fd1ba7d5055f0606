// generator.cpp — see generator.hpp

#include "qfp/generator.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

namespace qfp {

namespace {

ComplexMatrix hermitian_part(const ComplexMatrix& m) { return 0.5 * (m + m.adjoint()); }

double largest_abs_eigenvalue(const ComplexMatrix& m) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitian_part(m), Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

ComplexMatrix LindbladDecomposition::apply_jump(const ComplexMatrix& x, const PhysicalSubsystem& s) const {
    ComplexMatrix y = ComplexMatrix::Zero(x.rows(), x.cols());
    for (const auto& j : jumps) y += j.weight * (j.op.adjoint() * x * j.op);
    return s.project(y);
}

ComplexMatrix GeneratorBundle::apply_heisenberg(const ComplexMatrix& x) const {
    const ComplexMatrix px = subsystem->project(x);
    const auto& dec = decomposition;
    const ComplexMatrix h = dec.effective_hamiltonian();
    return kI * commutator(h, px) - 0.5 * anticommutator(dec.decay, px) + dec.apply_jump(px, *subsystem);
}

Superoperator GeneratorBundle::second_order() const {
    const auto& dec = decomposition;
    const ComplexMatrix& p = subsystem->heisenberg_projection().matrix();
    const Index d = dim();
    ComplexMatrix psi;
    if (dec.jump_map.dim() == d) {
        psi = dec.jump_map.matrix();
    } else {
        ComplexMatrix raw = ComplexMatrix::Zero(d * d, d * d);
        for (const auto& j : dec.jumps) raw += j.weight * sandwich_superop(j.op.adjoint(), j.op).matrix();
        psi = p * raw * p;
    }
    const ComplexMatrix h = kI * commutator_superop(dec.h_lamb).matrix() -
                            0.5 * anticommutator_superop(dec.decay).matrix();
    const double l2 = schedule.lambda * schedule.lambda;
    return Superoperator((h * p + psi) / l2);
}

GeneratorBundle assemble_bundle(std::shared_ptr<const PhysicalSubsystem> sub, LindbladDecomposition pieces,
                                const CoarseGrainSchedule& sched, double T, bool full_superops) {
    if (!sub) throw std::invalid_argument("assemble_bundle: null subsystem");
    const Index d = sub->dim();
    for (const ComplexMatrix* m : {&pieces.h_free, &pieces.h_first, &pieces.h_lamb, &pieces.decay}) {
        if (m->rows() != d || m->cols() != d) throw DimensionMismatch("assemble_bundle: piece has wrong shape");
    }
    pieces.h_free = hermitian_part(pieces.h_free);
    pieces.h_first = hermitian_part(pieces.h_first);
    pieces.h_lamb = hermitian_part(pieces.h_lamb);
    pieces.decay = hermitian_part(pieces.decay);

    GeneratorBundle b;
    b.schedule = sched;
    b.T = T;
    b.subsystem = std::move(sub);
    const PhysicalSubsystem& s = *b.subsystem;
    const auto& basis = s.commutant_basis();
    const Index r = s.subalgebra_dim();

    if (full_superops) {
        const ComplexMatrix& p = s.heisenberg_projection().matrix();
        ComplexMatrix raw = ComplexMatrix::Zero(d * d, d * d);
        for (const auto& j : pieces.jumps) raw += j.weight * sandwich_superop(j.op.adjoint(), j.op).matrix();
        pieces.jump_map = Superoperator(p * raw * p);
        const ComplexMatrix h = kI * commutator_superop(pieces.effective_hamiltonian()).matrix() -
                                0.5 * anticommutator_superop(pieces.decay).matrix();
        b.heisenberg = Superoperator(h * p + pieces.jump_map.matrix());
        b.schrodinger = b.heisenberg.trace_adjoint();
    }
    b.decomposition = std::move(pieces);

    ComplexMatrix images(d * d, r);
    b.predual_embedding.resize(d * d, r);
    for (Index a = 0; a < r; ++a) {
        images.col(a) = vectorize(b.apply_heisenberg(basis[a]));
        b.predual_embedding.col(a) = vectorize(s.project_state(basis[a]));
    }
    b.reduced = s.embedding().adjoint() * images;
    return b;
}

GeneratorBundle build_generator(std::shared_ptr<const PhysicalSubsystem> sub, const HermitianOperator& h0,
                                const HermitianOperator& hp, const CoarseGrainSchedule& sched,
                                const GeneratorOptions& opts) {
    if (!sub) throw std::invalid_argument("build_generator: null subsystem");
    sched.validate();
    const double T = opts.T ? *opts.T : T_of_lambda(sched);
    if (!(T > 0.0)) throw ContractViolation("build_generator: T must be positive", T);
    const Index d = sub->dim();
    if (h0.dim() != d || hp.dim() != d) throw DimensionMismatch("build_generator: H0/H' do not match subsystem");

    const EigenSystem eig = hermitian_eig(h0);
    const SecondOrderKernel kernel = second_order_kernel(eig, hp, T, *sub);
    const double lam = sched.lambda;

    LindbladDecomposition dec;
    dec.h_free = sub->project(h0.matrix());
    dec.h_first = lam * sub->project(hp.matrix());
    dec.h_lamb = lam * lam * kernel.lamb;
    dec.decay = lam * lam * sub->project(kernel.centered * kernel.centered);
    dec.jumps.push_back({lam * lam, kernel.centered});
    return assemble_bundle(std::move(sub), std::move(dec), sched, T, opts.full_superops);
}

// ----------------------------------------------------------------------------

namespace {

// K_T·E (d²×r) from the double sum on a uniform grid of n intervals; the Heaviside
// kink on the diagonal gets weight 1/2.
ComplexMatrix oracle_columns(const PhysicalSubsystem& sub, const ComplexMatrix& h0, const ComplexMatrix& hp,
                             double T, Index n) {
    const Index d = sub.dim();
    const auto& basis = sub.commutant_basis();
    const auto r = static_cast<std::size_t>(basis.size());
    const double h = 16.0 * T / static_cast<double>(n);

    std::vector<ComplexMatrix> cum(r, ComplexMatrix::Zero(d, d));
    std::vector<ComplexMatrix> acc(r, ComplexMatrix::Zero(d, d));
    for (Index i = 0; i <= n; ++i) {
        const double t = -8.0 * T + h * static_cast<double>(i);
        const ComplexMatrix u = expm(-kI * t * h0);
        const ComplexMatrix hpt = u * hp * u.adjoint();
        const double g = std::exp(-t * t / (2.0 * T * T));
        // end points of the truncated interval carry trapezoid weight 1/2
        const double w = (i == 0 || i == n) ? 0.5 * h : h;
        for (std::size_t b = 0; b < r; ++b) {
            const ComplexMatrix a = (kI * g) * commutator(hpt, basis[b]);
            const ComplexMatrix a10 = a - sub.project(a);
            const ComplexMatrix inner = cum[b] + 0.5 * w * a10;
            acc[b] += (kI * g * w) * commutator(hpt, inner);
            cum[b] += w * a10;
        }
    }
    ComplexMatrix cols(d * d, static_cast<Index>(r));
    const double pref = 1.0 / (std::sqrt(std::numbers::pi) * T);
    for (std::size_t b = 0; b < r; ++b) cols.col(static_cast<Index>(b)) = pref * vectorize(sub.project(acc[b]));
    return cols;
}

}  // namespace

Superoperator k_t_oracle(const PhysicalSubsystem& sub, const HermitianOperator& h0, const HermitianOperator& hp,
                         double T, const OracleOptions& opts) {
    if (!(T > 0.0)) throw ContractViolation("k_t_oracle: T must be positive", T);
    const Index d = sub.dim();
    if (h0.dim() != d || hp.dim() != d) throw DimensionMismatch("k_t_oracle: H0/H' do not match subsystem");
    Index n = opts.points;
    if (n <= 0) {
        // resolve the fastest phase e^{iΔt} with h·Δ_max ≤ 0.02
        Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h0.matrix(), Eigen::EigenvaluesOnly);
        const double spread = es.eigenvalues().maxCoeff() - es.eigenvalues().minCoeff();
        n = std::max<Index>(400, static_cast<Index>(std::ceil(16.0 * T * spread / 0.02)));
    }
    ComplexMatrix cols = oracle_columns(sub, h0.matrix(), hp.matrix(), T, n);
    if (opts.richardson) {
        const ComplexMatrix fine = oracle_columns(sub, h0.matrix(), hp.matrix(), T, 2 * n);
        cols = (4.0 * fine - cols) / 3.0;
    }
    const ComplexMatrix& p = sub.heisenberg_projection().matrix();
    return Superoperator(cols * (sub.embedding().adjoint() * p));
}

// ----------------------------------------------------------------------------

ComplexMatrix reduced_propagator(const GeneratorBundle& b, double t) { return expm(t * b.reduced); }

Superoperator heisenberg_propagator(const GeneratorBundle& b, double t) {
    const PhysicalSubsystem& s = *b.subsystem;
    const ComplexMatrix& e = s.embedding();
    return Superoperator(e * reduced_propagator(b, t) * (e.adjoint() * s.heisenberg_projection().matrix()));
}

Superoperator schrodinger_propagator(const GeneratorBundle& b, double t) {
    const ComplexMatrix& e = b.subsystem->embedding();
    return Superoperator(b.predual_embedding * expm(t * b.reduced.transpose()) * e.adjoint());
}

Trajectory evolve(const GeneratorBundle& b, const ComplexMatrix& state0, std::span<const double> times,
                  Picture picture) {
    const PhysicalSubsystem& s = *b.subsystem;
    const Index d = s.dim();
    if (state0.rows() != d || state0.cols() != d) throw DimensionMismatch("evolve: state has wrong shape");
    const ComplexMatrix& e = s.embedding();
    Trajectory tr;
    tr.times.assign(times.begin(), times.end());
    tr.negative_times = std::any_of(times.begin(), times.end(), [](double t) { return t < 0.0; });

    if (picture == Picture::heisenberg) {
        if (!s.contains(state0)) {
            throw ContractViolation("evolve: observable lies outside the subalgebra",
                                    s.distance_from_subalgebra(state0));
        }
        const ComplexVector c = e.adjoint() * vectorize(state0);
        for (double t : times) tr.states.push_back(devectorize(e * (reduced_propagator(b, t) * c), d, d));
        return tr;
    }

    const double herm = hermitian_deviation(state0);
    if (herm > 1e-10 * (1.0 + max_abs(state0))) throw ContractViolation("evolve: state is not Hermitian", herm);
    const double tr0 = state0.trace().real();
    if (std::abs(tr0 - 1.0) > 1e-10) throw ContractViolation("evolve: state trace is not 1", tr0);
    const PsdCheck psd = is_psd(HermitianOperator::symmetrized(state0));
    if (!psd.psd) throw ContractViolation("evolve: state is not positive semidefinite", psd.min_eigenvalue);
    const double off = max_abs(s.project_state(state0) - state0);
    if (off > 1e-9 * (1.0 + max_abs(state0))) {
        throw ContractViolation("evolve: state is not fixed by the predual projection", off);
    }
    const ComplexVector m = e.adjoint() * vectorize(state0);
    const ComplexMatrix gt = b.reduced.transpose();
    for (double t : times) tr.states.push_back(devectorize(b.predual_embedding * (expm(t * gt) * m), d, d));
    return tr;
}

// ----------------------------------------------------------------------------

bool CertificateRow::passed() const {
    return choi_psd && unitality_residual <= 1e-10 && trace_residual <= 1e-9 && semigroup_residual <= 1e-9 &&
           trace_norm_excess <= 1e-9 && op_norm_excess <= 1e-9;
}

bool QdsCertificate::passed() const {
    return std::all_of(rows.begin(), rows.end(), [](const CertificateRow& r) { return r.passed(); });
}

QdsCertificate qds_certificate(const GeneratorBundle& b, std::span<const double> times, Rng& rng, int samples) {
    const PhysicalSubsystem& s = *b.subsystem;
    const Index d = s.dim();
    const ComplexMatrix& e = s.embedding();
    const ComplexVector one = vectorize(identity(d));
    const ComplexVector one_coords = e.adjoint() * one;

    // Samples are drawn once so that every t sees the same inputs.
    std::vector<ComplexMatrix> states;
    std::vector<ComplexMatrix> observables;
    for (int k = 0; k < samples; ++k) {
        states.push_back(s.project_state(random_density(d, rng).matrix()));
        states.push_back(s.project_state(random_hermitian(d, rng).matrix()));
        observables.push_back(s.project(random_hermitian(d, rng).matrix()));
    }

    QdsCertificate cert;
    for (double t : times) {
        CertificateRow row;
        row.t = t;
        const ComplexMatrix et = reduced_propagator(b, t);
        const Superoperator st = schrodinger_propagator(b, t);

        const PsdCheck choi = is_psd(HermitianOperator::symmetrized(choi_matrix(st)));
        row.choi_psd = choi.psd;
        row.min_choi_eig = choi.min_eigenvalue;

        row.unitality_residual = (e * (et * one_coords) - one).cwiseAbs().maxCoeff();
        row.trace_residual = (one.adjoint() * st.matrix() - one.adjoint()).cwiseAbs().maxCoeff();

        const ComplexMatrix e2 = reduced_propagator(b, 2.0 * t);
        row.semigroup_residual = max_abs(e2 - et * et) / (1.0 + max_abs(e2));

        Eigen::JacobiSVD<ComplexMatrix> svd(et);
        row.hs_norm = svd.singularValues()(0);

        double tn = -1e300;
        for (const auto& y : states) {
            const ComplexMatrix yt = st.apply(y);
            tn = std::max(tn, trace_norm(HermitianOperator::symmetrized(yt)) -
                                  trace_norm(HermitianOperator::symmetrized(y)));
        }
        row.trace_norm_excess = tn;

        double on = -1e300;
        for (const auto& x : observables) {
            const ComplexMatrix xt = devectorize(e * (et * (e.adjoint() * vectorize(x))), d, d);
            on = std::max(on, largest_abs_eigenvalue(xt) - largest_abs_eigenvalue(x));
        }
        row.op_norm_excess = on;
        cert.rows.push_back(row);
    }
    return cert;
}

// ----------------------------------------------------------------------------

SteadyState steady_state(const GeneratorBundle& b) {
    const PhysicalSubsystem& s = *b.subsystem;
    const Index d = s.dim();
    const Index r = s.subalgebra_dim();
    const ComplexMatrix gt = b.reduced.transpose();
    Eigen::JacobiSVD<ComplexMatrix> svd(gt, Eigen::ComputeFullV);
    const RealVector sv = svd.singularValues();  // descending

    SteadyState out;
    out.singular_values = sv.reverse();
    const double smax = sv(0);
    Index nullity = 0;
    if (smax <= 1e-14) {
        nullity = r;
    } else {
        for (Index k = 0; k < r; ++k)
            if (sv(k) <= 1e-10 * smax) ++nullity;
        const Index kept = r - nullity;
        if (kept > 0) {
            out.gap = sv(kept - 1) / smax;
            out.ambiguous = out.gap < 1e-8;
        }
    }
    out.nullity = nullity;
    out.unique = nullity == 1 && !out.ambiguous;

    const ComplexMatrix null = svd.matrixV().rightCols(nullity);
    ComplexVector m;
    if (nullity == 1) {
        m = null.col(0);
    } else {
        const ComplexVector m0 = s.embedding().adjoint() * vectorize(identity(d) / static_cast<double>(d));
        m = null * (null.adjoint() * m0);
    }
    ComplexMatrix rho = devectorize(b.predual_embedding * m, d, d);
    const cplx tr = rho.trace();
    if (std::abs(tr) < 1e-300) throw ContractViolation("steady_state: null vector has zero trace", 0.0);
    rho /= tr;
    out.state = hermitian_part(rho);
    return out;
}

// ----------------------------------------------------------------------------

void export_bundle(const GeneratorBundle& b, const std::string& dir, const std::string& descriptor) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    auto write = [&](const std::string& name, const ComplexMatrix& m) {
        std::ofstream os(fs::path(dir) / name);
        if (!os) throw std::runtime_error("export_bundle: cannot write " + name);
        write_matrix(os, m);
    };
    const auto& dec = b.decomposition;
    write("h_free.mat", dec.h_free);
    write("h_first.mat", dec.h_first);
    write("h_lamb.mat", dec.h_lamb);
    write("decay.mat", dec.decay);
    for (std::size_t k = 0; k < dec.jumps.size(); ++k) {
        write("jump_" + std::to_string(k) + ".mat", std::sqrt(std::abs(dec.jumps[k].weight)) * dec.jumps[k].op);
    }
    write("reduced.mat", b.reduced);
    {
        std::ofstream os(fs::path(dir) / "kraus.txt");
        write_kraus_family(os, b.subsystem->kraus());
    }
    std::ofstream man(fs::path(dir) / "manifest.txt");
    man.precision(17);
    man << "subsystem = " << descriptor << '\n'
        << "dim = " << b.dim() << '\n'
        << "subalgebra_dim = " << b.subsystem->subalgebra_dim() << '\n'
        << "lambda = " << b.schedule.lambda << '\n'
        << "xi = " << b.schedule.xi << '\n'
        << "T_ref = " << b.schedule.T_ref << '\n'
        << "T = " << b.T << '\n'
        << "jumps = " << dec.jumps.size() << '\n';
}

}  // namespace qfp
