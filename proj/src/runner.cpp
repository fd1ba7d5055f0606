// runner.cpp — see runner.hpp

#include "qfp/runner.hpp"

#include "qfp/generator.hpp"
#include "qfp/parallel.hpp"
#include "qfp/scenarios.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <memory>
#include <sstream>

namespace qfp {

namespace {

using json = nlohmann::json;

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

// Thresholds asserted by a run.
constexpr double kTraceTol = 1e-9;
constexpr double kStateSlack = 1e-9;
constexpr double kPathTol = 1e-7;

struct Failure {
    std::string check;
    double witness = 0.0;
};

struct CsvRow {
    double t = 0.0;
    double error_norm = kNan;
    double trace_dev = 0.0;
    double min_choi_eig = 0.0;
    double min_state_eig = 0.0;
};

struct LambdaResult {
    double lambda = 0.0;
    json summary;
    std::vector<CsvRow> rows;
    std::vector<Failure> failures;
};

// Everything that does not depend on λ, built once.
struct Shared {
    std::shared_ptr<const PhysicalSubsystem> sub;  // qfgr/custom: the scenario subsystem
    std::optional<CompositeSystem> composite;      // heat_bath full space
    HeatBathModel bath;
    QfgrModel qfgr;
    ComplexMatrix gibbs_target;
};

double min_eigenvalue(const ComplexMatrix& m) {
    return hermitian_eig(HermitianOperator::symmetrized(m)).values.minCoeff();
}

json matrix_json(const ComplexMatrix& m) {
    json rows = json::array();
    for (Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Index j = 0; j < m.cols(); ++j) row.push_back({m(i, j).real(), m(i, j).imag()});
        rows.push_back(std::move(row));
    }
    return rows;
}

ComplexMatrix gibbs_state(const ComplexMatrix& h, double beta) {
    const EigenSystem es = hermitian_eig(HermitianOperator::symmetrized(h));
    RealVector p = (-beta * (es.values.array() - es.values.minCoeff())).exp();
    p /= p.sum();
    return es.vectors * p.cast<cplx>().asDiagonal() * es.vectors.adjoint();
}

json config_echo(const ScenarioConfig& c, std::uint64_t seed) {
    json e;
    e["source"] = c.source;
    e["name"] = c.name;
    e["kind"] = to_string(c.kind);
    e["seed"] = seed;
    e["lambda"] = c.lambdas;
    e["xi"] = c.xi;
    e["T_ref"] = c.T_ref;
    e["time"] = c.time.auto_mode
                    ? json{{"mode", "auto"}, {"tau_bar", c.time.tau_bar}, {"count", c.time.count}}
                    : json{{"mode", "grid"}, {"start", c.time.start}, {"stop", c.time.stop}, {"count", c.time.count}};
    e["error_norm"] = c.error_norm;
    e["samples"] = c.samples;
    switch (c.kind) {
        case ScenarioKind::qfgr:
            e["sectors"] = c.sectors;
            e["h0"] = matrix_json(c.h0);
            e["hp"] = matrix_json(c.hp);
            break;
        case ScenarioKind::custom: {
            e["kraus"] = json::array();
            for (const auto& v : c.kraus) e["kraus"].push_back(matrix_json(v));
            e["h0"] = matrix_json(c.h0);
            e["hp"] = matrix_json(c.hp);
            break;
        }
        case ScenarioKind::heat_bath:
            e["h_a"] = matrix_json(c.h_a);
            e["h_b"] = matrix_json(c.h_b);
            e["q"] = matrix_json(c.q);
            e["phi"] = matrix_json(c.phi);
            e["beta"] = c.beta;
            e["gibbs"] = c.gibbs;
            e["dual_path"] = c.dual_path;
            break;
    }
    if (c.rho0) e["rho0"] = matrix_json(*c.rho0);
    return e;
}

GeneratorBundle scenario_bundle(const ScenarioConfig& c, const Shared& sh, const CoarseGrainSchedule& s) {
    switch (c.kind) {
        case ScenarioKind::qfgr:
        case ScenarioKind::custom:
            return build_generator(sh.sub, HermitianOperator(c.h0), HermitianOperator(c.hp), s);
        case ScenarioKind::heat_bath: {
            HeatBathModel m = sh.bath;
            m.schedule = s;
            return heat_bath_generator(m, true);
        }
    }
    throw std::logic_error("unreachable");
}

LambdaResult run_lambda(const ScenarioConfig& c, const Shared& sh, std::size_t k, std::uint64_t seed,
                        const ComplexMatrix& rho0) {
    LambdaResult out;
    const double lam = c.lambdas[k];
    out.lambda = lam;
    const CoarseGrainSchedule s{lam, c.xi, c.T_ref};
    const std::vector<double> times = c.time.grid(lam);
    std::seed_seq seq{seed, static_cast<std::uint64_t>(k) + 1};
    Rng rng(seq);

    json& js = out.summary;
    js["lambda"] = lam;
    auto fail = [&](const std::string& check, double witness) { out.failures.push_back({check, witness}); };

    try {
        const GeneratorBundle b = scenario_bundle(c, sh, s);
        js["T"] = b.T;
        js["dim"] = b.dim();
        js["subalgebra_dim"] = b.subsystem->subalgebra_dim();

        // Certificate on the run grid.
        const QdsCertificate cert = qds_certificate(b, times, rng, c.samples);
        double choi_min = std::numeric_limits<double>::infinity();
        double unit = 0.0, trace = 0.0, semi = 0.0, tn = -std::numeric_limits<double>::infinity();
        double on = -std::numeric_limits<double>::infinity();
        for (const auto& r : cert.rows) {
            choi_min = std::min(choi_min, r.min_choi_eig);
            unit = std::max(unit, r.unitality_residual);
            trace = std::max(trace, r.trace_residual);
            semi = std::max(semi, r.semigroup_residual);
            tn = std::max(tn, r.trace_norm_excess);
            on = std::max(on, r.op_norm_excess);
        }
        js["certificate"] = {{"passed", cert.passed()},
                             {"min_choi_eig", choi_min},
                             {"max_unitality_residual", unit},
                             {"max_trace_residual", trace},
                             {"max_semigroup_residual", semi},
                             {"max_trace_norm_excess", tn},
                             {"max_op_norm_excess", on}};
        if (!cert.passed()) {
            for (const auto& r : cert.rows) {
                if (!r.choi_psd) fail("choi_psd at t=" + std::to_string(r.t), r.min_choi_eig);
                if (r.unitality_residual > 1e-10) fail("unitality at t=" + std::to_string(r.t), r.unitality_residual);
                if (r.trace_residual > 1e-9) fail("trace preservation at t=" + std::to_string(r.t), r.trace_residual);
                if (r.semigroup_residual > 1e-9) fail("semigroup at t=" + std::to_string(r.t), r.semigroup_residual);
                if (r.trace_norm_excess > 1e-9) fail("trace-norm contraction at t=" + std::to_string(r.t), r.trace_norm_excess);
                if (r.op_norm_excess > 1e-9) fail("operator-norm contraction at t=" + std::to_string(r.t), r.op_norm_excess);
            }
        }

        // Trajectory of the initial state.
        const Trajectory tr = evolve(b, rho0, times, Picture::schrodinger);
        out.rows.resize(times.size());
        double worst_trace = 0.0, worst_state = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < times.size(); ++i) {
            CsvRow& row = out.rows[i];
            row.t = times[i];
            row.trace_dev = std::abs(tr.states[i].trace() - cplx{1.0, 0.0});
            row.min_choi_eig = cert.rows[i].min_choi_eig;
            row.min_state_eig = min_eigenvalue(tr.states[i]);
            worst_trace = std::max(worst_trace, row.trace_dev);
            worst_state = std::min(worst_state, row.min_state_eig);
        }
        js["max_trace_dev"] = worst_trace;
        js["min_state_eig"] = worst_state;
        if (worst_trace > kTraceTol) fail("trace of evolved state", worst_trace);
        if (worst_state < -kStateSlack) fail("positivity of evolved state", worst_state);

        // Exact reduced dynamics versus the semigroup, on the full space.
        if (c.error_norm) {
            SweepRow sw;
            if (c.kind == ScenarioKind::heat_bath) {
                GeneratorOptions o;
                o.full_superops = false;
                const CompositeSystem& cs = *sh.composite;
                const GeneratorBundle g = build_generator(cs.subsystem, cs.h0, cs.hp, s, o);
                sw = weak_coupling_errors(*cs.subsystem, g, cs.h0, cs.hp, times);
            } else {
                sw = weak_coupling_errors(*sh.sub, b, HermitianOperator(c.h0), HermitianOperator(c.hp), times);
            }
            for (std::size_t i = 0; i < times.size(); ++i) out.rows[i].error_norm = sw.errors[i];
            js["sup_error_norm"] = sw.sup_error;
        }

        const SteadyState ss = steady_state(b);
        json st{{"nullity", ss.nullity}, {"unique", ss.unique}, {"ambiguous", ss.ambiguous}, {"gap", ss.gap},
                {"state", matrix_json(ss.state)}};
        if (c.kind == ScenarioKind::heat_bath) {
            st["gibbs_distance"] = 0.5 * trace_norm(HermitianOperator::symmetrized(ss.state - sh.gibbs_target));
        }
        js["steady_state"] = std::move(st);

        if (c.kind == ScenarioKind::qfgr) {
            QfgrModel m = sh.qfgr;
            m.schedule = s;
            const double dev = qfgr_deviation(qfgr_generator(m), b, rng, c.samples);
            js["sector_equation_deviation"] = dev;
            if (dev > kPathTol) fail("sector equations versus general generator", dev);
        }
        if (c.kind == ScenarioKind::heat_bath && c.dual_path) {
            HeatBathModel m = sh.bath;
            m.schedule = s;
            const double dev = heat_bath_deviation(b, heat_bath_general(m, false), m.dim_a(), m.dim_b());
            js["dual_path_deviation"] = dev;
            if (dev > kPathTol) fail("heat-bath specialized versus general generator", dev);
        }
    } catch (const ContractViolation& e) {
        fail(e.what(), e.witness());
    }

    json fl = json::array();
    for (const auto& f : out.failures) fl.push_back({{"check", f.check}, {"witness", f.witness}});
    js["failures"] = std::move(fl);
    js["passed"] = out.failures.empty();
    return out;
}

std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

RunResult run_scenario(const ScenarioConfig& c, const RunOptions& opts) {
    const auto t0 = std::chrono::steady_clock::now();
    const std::uint64_t seed = opts.seed.value_or(c.seed);

    Shared sh;
    switch (c.kind) {
        case ScenarioKind::qfgr:
            sh.qfgr.sector_dims = c.sectors;
            sh.qfgr.h0 = c.h0;
            sh.qfgr.hp = c.hp;
            sh.qfgr.schedule = {c.lambdas.front(), c.xi, c.T_ref};
            sh.qfgr.validate();
            sh.sub = std::make_shared<const PhysicalSubsystem>(build_projection(sector_family(c.sectors)));
            break;
        case ScenarioKind::custom: {
            KrausFamily k;
            k.dim = c.h0.rows();
            k.operators = c.kraus;
            sh.sub = std::make_shared<const PhysicalSubsystem>(build_projection(std::move(k)));
            break;
        }
        case ScenarioKind::heat_bath:
            sh.bath.h_a = c.h_a;
            sh.bath.h_b = c.h_b;
            sh.bath.q = c.q;
            sh.bath.phi = c.phi;
            sh.bath.beta = c.beta;
            sh.bath.schedule = {c.lambdas.front(), c.xi, c.T_ref};
            sh.bath.validate();
            sh.gibbs_target = gibbs_state(c.h_a, c.beta);
            if (c.error_norm) sh.composite = heat_bath_composite(sh.bath);
            break;
    }

    // Initial state: configured, or a seeded random state pushed through the predual projection.
    const Index dim = c.kind == ScenarioKind::heat_bath ? c.h_a.rows() : c.h0.rows();
    ComplexMatrix rho0;
    if (c.rho0) {
        rho0 = *c.rho0;
    } else {
        Rng rng(seed);
        rho0 = random_density(dim, rng).matrix();
        if (sh.sub) rho0 = sh.sub->project_state(rho0);
    }

    std::vector<LambdaResult> results(c.lambdas.size());
    parallel_for(c.lambdas.size(), opts.threads,
                 [&](std::size_t k) { results[k] = run_lambda(c, sh, k, seed, rho0); });

    RunResult rr;
    json& js = rr.summary;
    js["tool"] = "qfp";
    js["version"] = kToolVersion;
    js["config"] = config_echo(c, seed);
    js["rho0"] = matrix_json(rho0);
    js["results"] = json::array();
    bool ok = true;
    for (const auto& r : results) {
        js["results"].push_back(r.summary);
        ok = ok && r.failures.empty();
    }

    if (c.kind == ScenarioKind::heat_bath && c.gibbs) {
        json g;
        try {
            const GibbsStudy study = gibbs_limit_study(sh.bath, c.lambdas);
            json dist = json::array();
            json uniq = json::array();
            bool all_unique = true;
            for (const auto& row : study.rows) {
                dist.push_back(row.distance);
                uniq.push_back(row.unique);
                all_unique = all_unique && row.unique;
            }
            js["gibbs_distance"] = dist;
            js["gibbs_unique"] = uniq;
            js["gibbs_monotone"] = study.strictly_decreasing();
            js["gibbs_target"] = matrix_json(study.target);
            if (!study.strictly_decreasing()) {
                ok = false;
                js["gibbs_failure"] = "distance to the Gibbs state is not strictly decreasing along the lambda list";
            }
            if (!all_unique) {
                ok = false;
                js["gibbs_failure"] = "steady state is not unique for some lambda";
            }
        } catch (const ContractViolation& e) {
            ok = false;
            js["gibbs_failure"] = e.what();
            js["gibbs_witness"] = e.witness();
        }
    }
    js["passed"] = ok;
    rr.exit_code = ok ? 0 : 1;

    namespace fs = std::filesystem;
    const fs::path dir(opts.out_dir);
    fs::create_directories(dir);
    rr.csv_path = (dir / c.csv).string();
    rr.json_path = (dir / c.json).string();
    {
        std::ofstream os(rr.csv_path, std::ios::binary);
        os << "lambda,t,error_norm,trace_dev,min_choi_eig,min_state_eig\n";
        for (const auto& r : results) {
            for (const auto& row : r.rows) {
                os << fmt(r.lambda) << ',' << fmt(row.t) << ',' << fmt(row.error_norm) << ',' << fmt(row.trace_dev)
                   << ',' << fmt(row.min_choi_eig) << ',' << fmt(row.min_state_eig) << '\n';
            }
        }
        if (!os) throw std::runtime_error("cannot write " + rr.csv_path);
    }
    js["wall_clock_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    {
        std::ofstream os(rr.json_path);
        os << js.dump(2) << '\n';
        if (!os) throw std::runtime_error("cannot write " + rr.json_path);
    }
    return rr;
}

}  // namespace qfp
