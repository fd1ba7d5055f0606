// test_generator.cpp — assembled generator, the time-domain K_T, propagation, certificates,
// steady states and export

#include "oracles.hpp"

#include "qfp/generator.hpp"

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>

using namespace qfp;

namespace {

std::shared_ptr<const PhysicalSubsystem> make(std::vector<ComplexMatrix> ops) {
    KrausFamily k;
    k.dim = ops.front().rows();
    k.operators = std::move(ops);
    return std::make_shared<const PhysicalSubsystem>(build_projection(std::move(k)));
}

std::shared_ptr<const PhysicalSubsystem> dephasing() { return make({oracle::unit(2, 0, 0), oracle::unit(2, 1, 1)}); }

std::shared_ptr<const PhysicalSubsystem> sectors(std::vector<int> dims) {
    return std::make_shared<const PhysicalSubsystem>(build_projection(sector_family(dims)));
}

// block-diagonal random Hermitian matrix for the given sector sizes
ComplexMatrix block_hermitian(const std::vector<int>& dims, Rng& rng) {
    Index d = 0;
    for (int s : dims) d += s;
    ComplexMatrix h = ComplexMatrix::Zero(d, d);
    Index off = 0;
    for (int s : dims) {
        h.block(off, off, s, s) = random_hermitian(s, rng).matrix();
        off += s;
    }
    return h;
}

}  // namespace

TEST_CASE("H' in the subalgebra gives a pure commutator generator") {
    const auto s = dephasing();
    const GeneratorBundle b =
        build_generator(s, HermitianOperator(pauli_z()), HermitianOperator(0.7 * pauli_z()), {0.1, 1.0, 1.0});
    const auto& dec = b.decomposition;
    CHECK(oracle::max_abs(dec.decay) < 1e-15);
    CHECK(oracle::max_abs(dec.h_lamb) < 1e-15);
    CHECK(oracle::max_abs(dec.jump_map.matrix()) < 1e-15);
    CHECK(oracle::max_abs(dec.h_first - 0.07 * pauli_z()) < 1e-15);
    CHECK(oracle::max_abs(b.second_order().matrix()) < 1e-8);
    const Superoperator ko = k_t_oracle(*s, HermitianOperator(pauli_z()), HermitianOperator(0.7 * pauli_z()), b.T);
    CHECK(oracle::max_abs(ko.matrix()) < 1e-8);
    // diagonal observables are conserved by i[⟨H₀⟩ + λ⟨H′⟩, ·]
    CHECK(oracle::max_abs(b.reduced) < 1e-15);
}

TEST_CASE("dephasing qubit: relaxation and agreement with both time-domain oracles") {
    const auto s = dephasing();
    const HermitianOperator h0(pauli_z()), hp(pauli_x());
    const GeneratorBundle b = build_generator(s, h0, hp, {0.1, 1.0, 0.1});
    CHECK(b.T == doctest::Approx(1.0));
    // populations relax: the decay operator is nonzero
    CHECK(oracle::max_abs(b.decomposition.decay) > 1e-4);
    const ComplexMatrix k = b.second_order().matrix();
    CHECK(oracle::max_abs(k - k_t_oracle(*s, h0, hp, b.T).matrix()) < 1e-6);
    const ComplexMatrix ref = oracle::k_t(s->heisenberg_projection().matrix(), h0.matrix(), hp.matrix(), b.T, 800);
    CHECK(oracle::max_abs(k - ref) < 1e-6);
}

TEST_CASE("property: assembled K_T matches the direct-quadrature oracle on random sector models") {
    Rng rng(31);
    for (int trial = 0; trial < 3; ++trial) {
        const std::vector<int> dims = trial == 2 ? std::vector<int>{1, 2} : std::vector<int>{1, 1};
        const auto s = sectors(dims);
        const HermitianOperator h0(block_hermitian(dims, rng));
        const HermitianOperator hp = random_hermitian(s->dim(), rng);
        GeneratorOptions o;
        o.T = 0.6 + 0.4 * trial;
        const GeneratorBundle b = build_generator(s, h0, hp, {0.2, 1.0, 1.0}, o);
        const ComplexMatrix ref = oracle::k_t(s->heisenberg_projection().matrix(), h0.matrix(), hp.matrix(), b.T, 600);
        CHECK(oracle::max_abs(b.second_order().matrix() - ref) < 1e-6);
    }
}

TEST_CASE("k_t_oracle maps Hermitian elements of the subalgebra to Hermitian operators") {
    Rng rng(32);
    const std::vector<int> dims{1, 2};
    const auto s = sectors(dims);
    const HermitianOperator h0(block_hermitian(dims, rng));
    const HermitianOperator hp = random_hermitian(3, rng);
    const Superoperator k = k_t_oracle(*s, h0, hp, 0.8);
    for (const auto& x : s->commutant_basis()) CHECK(hermitian_deviation(k.apply(x)) < 1e-8);
}

TEST_CASE("doubling H' and halving λ at fixed T leaves the bundle unchanged") {
    Rng rng(33);
    const std::vector<int> dims{2, 1};
    const auto s = sectors(dims);
    const HermitianOperator h0(block_hermitian(dims, rng));
    const HermitianOperator hp = random_hermitian(3, rng);
    GeneratorOptions o;
    o.T = 1.3;
    const GeneratorBundle a = build_generator(s, h0, hp, {0.2, 1.0, 1.0}, o);
    const GeneratorBundle b = build_generator(s, h0, HermitianOperator(2.0 * hp.matrix()), {0.1, 1.0, 1.0}, o);
    CHECK(oracle::max_abs(a.reduced - b.reduced) < 1e-10);
    CHECK(oracle::max_abs(a.heisenberg.matrix() - b.heisenberg.matrix()) < 1e-10);
}

TEST_CASE("H' gauge: adding a multiple of the identity changes nothing") {
    Rng rng(34);
    const auto s = dephasing();
    const HermitianOperator h0(pauli_z());
    const HermitianOperator hp = random_hermitian(2, rng);
    const GeneratorBundle a = build_generator(s, h0, hp, {0.3, 1.0, 0.5});
    for (double c : {1.0, -3.7}) {
        const GeneratorBundle b = build_generator(s, h0, HermitianOperator(hp.matrix() + c * identity(2)), {0.3, 1.0, 0.5});
        CHECK(oracle::max_abs(a.heisenberg.matrix() - b.heisenberg.matrix()) < 1e-10);
    }
}

TEST_CASE("apply_heisenberg agrees with the superoperator and the Schrödinger adjoint") {
    Rng rng(35);
    const std::vector<int> dims{1, 2};
    const auto s = sectors(dims);
    const GeneratorBundle b =
        build_generator(s, HermitianOperator(block_hermitian(dims, rng)), random_hermitian(3, rng), {0.4, 1.0, 0.5});
    for (int k = 0; k < 4; ++k) {
        const ComplexMatrix x = random_complex(3, rng);
        CHECK(oracle::max_abs(b.apply_heisenberg(x) - b.heisenberg.apply(s->project(x))) < 1e-12);
        const ComplexMatrix rho = random_complex(3, rng);
        CHECK(std::abs((b.schrodinger.apply(rho) * x).trace() - (rho * b.heisenberg.apply(x)).trace()) < 1e-12);
    }
}

TEST_CASE("evolve: unitality, pure rotation, and relaxation to the steady state") {
    const auto s = dephasing();
    const GeneratorBundle b = build_generator(s, HermitianOperator(pauli_z()), HermitianOperator(pauli_x()), {0.3, 1.0, 0.2});
    const std::vector<double> times{0.0, 0.5, 3.0, 40.0};
    const Trajectory one = evolve(b, identity(2), times, Picture::heisenberg);
    for (const auto& x : one.states) CHECK(oracle::max_abs(x - identity(2)) < 1e-12);

    ComplexMatrix rho = ComplexMatrix::Zero(2, 2);
    rho(0, 0) = 1.0;
    const std::vector<double> late{2000.0};
    const Trajectory tr = evolve(b, rho, late, Picture::schrodinger);
    const SteadyState ss = steady_state(b);
    CHECK(ss.unique);
    CHECK(oracle::max_abs(tr.states[0] - ss.state) < 1e-8);

    const Trajectory neg = evolve(b, rho, std::vector<double>{-1.0}, Picture::schrodinger);
    CHECK(neg.negative_times);

    CHECK_THROWS_AS(evolve(b, pauli_x(), times, Picture::heisenberg), ContractViolation);
    ComplexMatrix coh = 0.5 * (identity(2) + pauli_x());
    CHECK_THROWS_AS(evolve(b, coh, times, Picture::schrodinger), ContractViolation);
    CHECK_THROWS_AS(evolve(b, 2.0 * rho, times, Picture::schrodinger), ContractViolation);
}

TEST_CASE("pure rotation keeps the spectrum of the state") {
    Rng rng(36);
    const auto s = make({identity(3)});
    const GeneratorBundle b = build_generator(s, random_hermitian(3, rng), random_hermitian(3, rng), {0.05, 1.0, 1.0});
    const HermitianOperator rho = random_density(3, rng);
    const std::vector<double> times{0.0, 1.0, 7.5};
    const Trajectory tr = evolve(b, rho.matrix(), times, Picture::schrodinger);
    const RealVector ev0 = hermitian_eig(rho).values;
    for (const auto& st : tr.states) {
        CHECK((hermitian_eig(HermitianOperator::symmetrized(st)).values - ev0).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("qds_certificate: commutator bundle, dephasing model and t = 0") {
    Rng rng(37);
    const auto full = make({identity(2)});
    const GeneratorBundle u = build_generator(full, random_hermitian(2, rng), random_hermitian(2, rng), {0.2, 1.0, 1.0});
    const std::vector<double> times{0.0, 0.1, 1.0, 10.0};
    const QdsCertificate cu = qds_certificate(u, times, rng);
    CHECK(cu.passed());
    for (const auto& r : cu.rows) CHECK(r.hs_norm == doctest::Approx(1.0).epsilon(1e-10));
    // t = 0: identity map, Choi rank one
    const ComplexMatrix c0 = choi_matrix(schrodinger_propagator(u, 0.0));
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(HermitianOperator::symmetrized(c0).matrix());
    CHECK(es.eigenvalues()(3) == doctest::Approx(2.0));
    CHECK(std::abs(es.eigenvalues()(2)) < 1e-12);

    const auto s = dephasing();
    const GeneratorBundle b = build_generator(s, HermitianOperator(pauli_z()), HermitianOperator(pauli_x()), {0.1, 1.0, 0.1});
    const QdsCertificate cb = qds_certificate(b, std::vector<double>{0.1, 1.0, 10.0}, rng);
    CHECK(cb.passed());
    for (double t : {0.1, 1.0, 10.0}) {
        const Superoperator st = schrodinger_propagator(b, t);
        const ComplexMatrix c = oracle::choi_of(2, [&](const ComplexMatrix& x) { return oracle::apply(st.matrix(), x); });
        Eigen::SelfAdjointEigenSolver<ComplexMatrix> e2(0.5 * (c + c.adjoint()));
        CHECK(e2.eigenvalues()(0) > -1e-9);
    }
}

TEST_CASE("propagators: semigroup law and the Heisenberg/Schrödinger pairing") {
    Rng rng(38);
    const std::vector<int> dims{1, 2};
    const auto s = sectors(dims);
    const GeneratorBundle b =
        build_generator(s, HermitianOperator(block_hermitian(dims, rng)), random_hermitian(3, rng), {0.4, 1.0, 0.6});
    const Superoperator e1 = heisenberg_propagator(b, 0.7);
    const Superoperator e2 = heisenberg_propagator(b, 1.4);
    CHECK(oracle::max_abs((e1 * e1).matrix() - e2.matrix()) < 1e-12);
    const Superoperator s1 = schrodinger_propagator(b, 0.7);
    const ComplexMatrix rho = s->project_state(random_density(3, rng).matrix());
    const ComplexMatrix x = random_complex(3, rng);
    CHECK(std::abs((s1.apply(rho) * x).trace() - (rho * e1.apply(x)).trace()) < 1e-12);
    // generator derivative at 0 by finite differences
    const double h = 1e-5;
    const ComplexMatrix fd = (heisenberg_propagator(b, h).matrix() - heisenberg_propagator(b, -h).matrix()) / (2 * h);
    CHECK(oracle::max_abs(fd - b.heisenberg.matrix() * s->heisenberg_projection().matrix()) < 1e-7);
}

TEST_CASE("steady_state: degenerate commutator bundle and nullspace oracle") {
    Rng rng(39);
    const auto full = make({identity(3)});
    ComplexMatrix h0 = ComplexMatrix::Zero(3, 3);
    h0(0, 0) = 0.1;
    h0(1, 1) = 0.5;
    h0(2, 2) = 1.3;
    const GeneratorBundle u = build_generator(full, HermitianOperator(h0), HermitianOperator(0.2 * h0), {0.1, 1.0, 1.0});
    const SteadyState su = steady_state(u);
    CHECK(su.nullity == 3);
    CHECK_FALSE(su.unique);
    CHECK(std::abs(su.state.trace() - cplx{1.0, 0.0}) < 1e-14);
    CHECK(oracle::max_abs(su.state - identity(3) / 3.0) < 1e-12);

    const std::vector<int> dims{1, 2};
    const auto s = sectors(dims);
    const GeneratorBundle b =
        build_generator(s, HermitianOperator(block_hermitian(dims, rng)), random_hermitian(3, rng), {0.5, 1.0, 0.5});
    const SteadyState ss = steady_state(b);
    CHECK(ss.unique);
    CHECK(std::abs(ss.state.trace() - cplx{1.0, 0.0}) < 1e-14);
    CHECK(oracle::max_abs(b.schrodinger.apply(ss.state)) < 1e-10);
    // kernel of the full Schrödinger generator restricted to P₀*-fixed states
    const ComplexMatrix gen = b.schrodinger.matrix() * s->schrodinger_projection().matrix();
    Eigen::FullPivLU<ComplexMatrix> lu(gen);
    lu.setThreshold(1e-9);
    const ComplexMatrix ker = lu.kernel();
    Index fixed = 0;
    ComplexMatrix best;
    for (Index j = 0; j < ker.cols(); ++j) {
        const ComplexMatrix m = devectorize(ker.col(j), 3, 3);
        if (oracle::max_abs(s->project_state(m) - m) < 1e-9 && std::abs(m.trace()) > 1e-6) {
            ++fixed;
            best = m / m.trace();
        }
    }
    REQUIRE(fixed >= 1);
    CHECK(oracle::max_abs(best - ss.state) < 1e-8);
}

TEST_CASE("export_bundle writes the manifest and operators") {
    const auto s = dephasing();
    const GeneratorBundle b = build_generator(s, HermitianOperator(pauli_z()), HermitianOperator(pauli_x()), {0.1, 1.0, 0.1});
    const auto dir = std::filesystem::temp_directory_path() / "qfp_export_test";
    std::filesystem::remove_all(dir);
    export_bundle(b, dir.string(), "dephasing");
    for (const char* f : {"h_free.mat", "h_first.mat", "h_lamb.mat", "decay.mat", "reduced.mat", "kraus.txt", "manifest.txt"}) {
        CHECK_MESSAGE(std::filesystem::exists(dir / f), f);
    }
    std::ifstream is(dir / "decay.mat");
    CHECK(oracle::max_abs(read_matrix(is) - b.decomposition.decay) == 0.0);
}
