// test_scenarios.cpp — sector dynamics, golden-rule surrogate, heat bath, Gibbs limit, sweep

#include "oracles.hpp"

#include "qfp/scenarios.hpp"

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

using namespace qfp;

namespace {

ComplexMatrix diag(std::initializer_list<double> v) {
    ComplexMatrix m = ComplexMatrix::Zero(static_cast<Index>(v.size()), static_cast<Index>(v.size()));
    Index i = 0;
    for (double x : v) {
        m(i, i) = x;
        ++i;
    }
    return m;
}

HeatBathModel random_bath(Rng& rng, double lambda) {
    HeatBathModel m;
    m.h_a = random_hermitian(2, rng).matrix();
    m.h_b = random_hermitian(3, rng).matrix();
    m.q = random_hermitian(2, rng).matrix();
    m.phi = random_hermitian(3, rng).matrix();
    m.beta = 0.9;
    m.schedule = {lambda, 1.0, 0.4};
    return m;
}

HeatBathModel reference_gibbs_model() {
    HeatBathModel m;
    m.h_a = pauli_z();
    m.h_b = diag({0.0, 0.7, 1.9, 2.4});
    m.q = pauli_x();
    m.phi = ComplexMatrix::Ones(4, 4) - identity(4);
    m.phi(0, 3) = m.phi(3, 0) = 0.1;
    m.phi(1, 3) = m.phi(3, 1) = 1.5;
    m.beta = 1.0;
    m.schedule = {0.3, 1.0, 1.0};
    return m;
}

}  // namespace

TEST_CASE("two one-dimensional sectors obey the classical rate equation") {
    QfgrModel m;
    m.sector_dims = {1, 1};
    m.h0 = diag({0.4, -0.3});
    m.hp = 0.8 * pauli_x();
    m.schedule = {0.2, 1.0, 0.3};
    const QfgrSystem sys = qfgr_generator(m);
    const double T = sys.T;
    const double rate = 0.04 * 2.0 * std::sqrt(std::numbers::pi) * T * std::exp(-T * T * 0.49) * 0.64;
    const ComplexMatrix d0 = sys.apply(diag({1.0, 0.0}));
    CHECK(d0(0, 0).real() == doctest::Approx(-rate).epsilon(1e-12));
    CHECK(d0(1, 1).real() == doctest::Approx(rate).epsilon(1e-12));
    const GeneratorBundle g = qfgr_general(m);
    const ComplexMatrix d1 = g.schrodinger.apply(diag({1.0, 0.0}));
    CHECK(oracle::max_abs(d0 - d1) < 1e-13);
}

TEST_CASE("block-diagonal H' gives vanishing scattering operators") {
    Rng rng(41);
    QfgrModel m;
    m.sector_dims = {2, 1};
    m.h0 = ComplexMatrix::Zero(3, 3);
    m.h0.block(0, 0, 2, 2) = random_hermitian(2, rng).matrix();
    m.h0(2, 2) = 0.7;
    m.hp = ComplexMatrix::Zero(3, 3);
    m.hp.block(0, 0, 2, 2) = random_hermitian(2, rng).matrix();
    m.hp(2, 2) = -0.2;
    m.schedule = {0.3, 1.0, 1.0};
    const QfgrSystem sys = qfgr_generator(m);
    for (const auto& row : sys.scattering.d) {
        for (const auto& d : row) CHECK(oracle::max_abs(d) < 1e-15);
    }
    for (const auto& h : sys.scattering.shifts) CHECK(oracle::max_abs(h) < 1e-15);
}

TEST_CASE("property: sector equations equal the general construction and conserve trace") {
    Rng rng(42);
    for (int trial = 0; trial < 4; ++trial) {
        QfgrModel m;
        m.sector_dims = trial % 2 ? std::vector<int>{2, 2} : std::vector<int>{1, 2, 1};
        m.h0 = ComplexMatrix::Zero(4, 4);
        Index off = 0;
        for (int s : m.sector_dims) {
            m.h0.block(off, off, s, s) = random_hermitian(s, rng).matrix();
            off += s;
        }
        m.hp = random_hermitian(4, rng).matrix();
        m.schedule = {0.15 + 0.1 * trial, 1.0, 0.5};
        const QfgrSystem sys = qfgr_generator(m);
        const GeneratorBundle g = qfgr_general(m);
        CHECK(qfgr_deviation(sys, g, rng) < 1e-10);

        const ComplexMatrix rho = g.subsystem->project_state(random_density(4, rng).matrix());
        CHECK(std::abs(sys.apply(rho).trace()) < 1e-13);
        const std::vector<double> times{0.5, 5.0, 50.0};
        const Trajectory tr = evolve(g, rho, times, Picture::schrodinger);
        for (const auto& st : tr.states) CHECK(std::abs(st.trace() - cplx{1.0, 0.0}) < 1e-9);
    }
}

TEST_CASE("QFGR model contract") {
    QfgrModel m;
    m.sector_dims = {1, 1};
    m.h0 = pauli_x();
    m.hp = pauli_z();
    m.schedule = {0.1, 1.0, 1.0};
    CHECK_THROWS_AS(m.validate(), ContractViolation);
    m.h0 = diag({1.0, 2.0, 3.0});
    CHECK_THROWS_AS(m.validate(), DimensionMismatch);
}

TEST_CASE("golden-rule nascent delta") {
    const std::vector<double> ts{1.0, 2.0, 10.0};
    const auto rows = fgr_rate_check(ts);
    REQUIRE(rows.size() == 3);
    for (const auto& r : rows) {
        CHECK(std::abs(r.integral - 2.0 * std::numbers::pi) < 1e-6);
        CHECK(r.peak == doctest::Approx(2.0 * std::sqrt(std::numbers::pi) * r.T).epsilon(1e-14));
        CHECK(std::exp(-r.T * r.T * r.half_width * r.half_width) == doctest::Approx(0.5));
    }
    CHECK(rows[1].peak / rows[0].peak == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("bath_correlation examples") {
    HeatBathModel m;
    m.h_a = pauli_z();
    m.q = pauli_x();
    m.h_b = diag({0.0, 0.4, 1.1});
    m.phi = identity(3);
    m.beta = 0.6;
    m.schedule = {0.1, 1.0, 1.0};
    const CorrelationData c = bath_correlation(m);
    CHECK(c.mean == doctest::Approx(1.0));
    for (double t : {0.0, 1.3, -4.0}) {
        CHECK(std::abs(c.h(t) - cplx{1.0, 0.0}) < 1e-13);
        CHECK(std::abs(c.connected_h(t)) < 1e-13);
    }

    // ground state of σ_z with Φ = σ_x: one line at −2 with the Heisenberg-picture Φ_t
    m.h_b = pauli_z();
    m.phi = pauli_x();
    m.beta = 60.0;
    const CorrelationData g = bath_correlation(m);
    for (double t : {0.0, 0.3, 2.0}) CHECK(std::abs(g.h(t) - std::exp(-2.0 * oracle::I * t)) < 1e-12);
}

TEST_CASE("property: bath correlation agrees with the trace formula") {
    Rng rng(43);
    for (int k = 0; k < 5; ++k) {
        const HeatBathModel m = random_bath(rng, 0.1);
        const CorrelationData c = bath_correlation(m);
        const ComplexMatrix sigma = bath_state(m).matrix();
        CHECK(std::abs(c.mean - (sigma * m.phi).trace().real()) < 1e-13);
        CHECK(std::abs(c.h(0.0) - (sigma * m.phi * m.phi).trace()) < 1e-12);
        for (double t : {0.7, -2.2, 9.0}) {
            const ComplexMatrix u = oracle::taylor_expm(oracle::I * t * m.h_b);
            const cplx ref = (sigma * u * m.phi * u.adjoint() * m.phi).trace();
            CHECK(std::abs(c.h(t) - ref) < 1e-11);
            CHECK(std::abs(c.connected_h(t) - (ref - c.mean * c.mean)) < 1e-11);
        }
    }
}

TEST_CASE("Φ = 1 leaves only the first-order Hamiltonian") {
    Rng rng(44);
    HeatBathModel m = random_bath(rng, 0.2);
    m.phi = identity(3);
    const GeneratorBundle b = heat_bath_generator(m);
    CHECK(oracle::max_abs(b.decomposition.decay) < 1e-14);
    CHECK(oracle::max_abs(b.decomposition.h_lamb) < 1e-14);
    CHECK(oracle::max_abs(b.decomposition.h_first - 0.2 * m.q) < 1e-14);
    CHECK(oracle::max_abs(b.decomposition.h_free - m.h_a) < 1e-14);
}

TEST_CASE("property: specialized heat-bath generator equals the partial-trace construction") {
    Rng rng(45);
    for (int k = 0; k < 3; ++k) {
        const HeatBathModel m = random_bath(rng, 0.1 + 0.1 * k);
        const GeneratorBundle s = heat_bath_generator(m);
        const GeneratorBundle g = heat_bath_general(m);
        CHECK(heat_bath_deviation(s, g, 2, 3) < 1e-7);
        const std::vector<double> times{0.1, 1.0, 10.0};
        CHECK(qds_certificate(s, times, rng).passed());
    }
}

TEST_CASE("Gibbs limit on the reference model") {
    const HeatBathModel m = reference_gibbs_model();
    const std::vector<double> lams{0.3, 0.1, 0.03};
    const GibbsStudy st = gibbs_limit_study(m, lams);
    REQUIRE(st.rows.size() == 3);
    CHECK(st.strictly_decreasing());
    CHECK(st.rows.back().distance < 0.05);
    for (const auto& r : st.rows) {
        CHECK(r.unique);
        CHECK(r.nullity == 1);
    }
}

TEST_CASE("Gibbs limit: infinite temperature and trivial H_A target the maximally mixed state") {
    HeatBathModel m = reference_gibbs_model();
    m.beta = 0.0;
    const std::vector<double> lams{0.3, 0.03};
    const GibbsStudy a = gibbs_limit_study(m, lams);
    CHECK(oracle::max_abs(a.target - 0.5 * identity(2)) < 1e-15);
    CHECK(a.rows.back().distance < 0.05);

    m = reference_gibbs_model();
    m.h_a = 0.4 * identity(2);
    const GibbsStudy b = gibbs_limit_study(m, lams);
    CHECK(oracle::max_abs(b.target - 0.5 * identity(2)) < 1e-15);

    m = reference_gibbs_model();
    m.phi = m.phi + identity(4);
    CHECK_THROWS_AS(gibbs_limit_study(m, lams), ContractViolation);
}

TEST_CASE("weak-coupling errors: zero at t = 0 and when H' lies in the subalgebra") {
    Rng rng(46);
    const std::vector<int> dims{1, 2};
    auto sub = std::make_shared<const PhysicalSubsystem>(build_projection(sector_family(dims)));
    ComplexMatrix h0 = ComplexMatrix::Zero(3, 3);
    h0(0, 0) = 0.2;
    h0.block(1, 1, 2, 2) = random_hermitian(2, rng).matrix();
    const HermitianOperator hin(h0 * 0.5 + identity(3));
    const std::vector<double> lams{0.2, 0.05};
    const auto rows = weak_coupling_sweep(sub, HermitianOperator(h0), hin, lams, 1.0, 1.0, 0.5, 11);
    for (const auto& r : rows) CHECK(r.sup_error < 1e-9);

    const HermitianOperator hp = random_hermitian(3, rng);
    const auto rows2 = weak_coupling_sweep(sub, HermitianOperator(h0), hp, lams, 1.0, 1.0, 0.5, 11, 2);
    for (const auto& r : rows2) {
        CHECK(r.errors.front() < 1e-14);
        CHECK(r.times.back() == doctest::Approx(0.5 / (r.lambda * r.lambda)));
        CHECK(r.sup_error > 0.0);
    }
}

TEST_CASE("exact reduced propagator against a direct full-space evolution") {
    Rng rng(47);
    HeatBathModel m = random_bath(rng, 0.3);
    const CompositeSystem c = heat_bath_composite(m);
    const ComplexMatrix hl = c.h0.matrix() + 0.3 * c.hp.matrix();
    const EigenSystem es = hermitian_eig(HermitianOperator::symmetrized(hl));
    const GeneratorBundle g = build_generator(c.subsystem, c.h0, c.hp, m.schedule);
    const double t = 2.5;
    const ComplexMatrix w = exact_reduced_propagator(*c.subsystem, es, g.predual_embedding, t);
    // W_t acts on coordinates c(X) of X ∈ 𝒳 as c(P₀(e^{iHt} X e^{−iHt}))
    const ComplexMatrix u = oracle::taylor_expm(oracle::I * t * hl);
    for (const auto& x : c.subsystem->commutant_basis()) {
        const ComplexMatrix y = c.subsystem->project(u * x * u.adjoint());
        const ComplexVector lhs = w * c.subsystem->coordinates(x);
        CHECK((lhs - c.subsystem->coordinates(y)).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("quasi-continuum model layout") {
    const HeatBathModel m = quasi_continuum_model(6, 0.25, 2.0, 0.15, 1.0, {0.2, 0.5, 1.0});
    CHECK(m.dim_a() == 2);
    CHECK(m.dim_b() == 6);
    CHECK(m.h_b(5, 5).real() == doctest::Approx(1.25));
    CHECK(std::abs(m.phi(0, 0)) == 0.0);
    const double x = 0.5;
    CHECK(m.phi(0, 2).real() == doctest::Approx(0.15 * x * std::exp(-x / 2)));
    CHECK(hermitian_deviation(m.phi) == 0.0);
    CHECK(oracle::max_abs(m.h_a - pauli_z()) < 1e-15);
}
