// acceptance.cpp — one PASS/FAIL line per acceptance criterion, with the measured numbers.
// Exit status is the number of failed criteria.

#include "qfp/config.hpp"
#include "qfp/generator.hpp"
#include "qfp/scenarios.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

using namespace qfp;

namespace {

int failures = 0;

void report(int id, bool ok, const std::string& title, const std::string& detail) {
    std::printf("AC%02d %s  %s: %s\n", id, ok ? "PASS" : "FAIL", title.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

// Runs a criterion; an escaping exception counts as a failure.
void criterion(int id, const std::string& title, const std::function<std::pair<bool, std::string>()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    try {
        auto [ok, detail] = body();
        const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        char buf[32];
        std::snprintf(buf, sizeof buf, " (%.1fs)", s);
        report(id, ok, title, detail + buf);
    } catch (const std::exception& e) {
        report(id, false, title, std::string("exception: ") + e.what());
    }
}

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

struct Model {
    std::string name;
    std::shared_ptr<const PhysicalSubsystem> sub;
    HermitianOperator h0;
    HermitianOperator hp;
    CoarseGrainSchedule sched;
};

HeatBathModel bath_of(const ScenarioConfig& c, double lambda) {
    HeatBathModel m;
    m.h_a = c.h_a;
    m.h_b = c.h_b;
    m.q = c.q;
    m.phi = c.phi;
    m.beta = c.beta;
    m.schedule = {lambda, c.xi, c.T_ref};
    return m;
}

QfgrModel qfgr_of(const ScenarioConfig& c, double lambda) {
    QfgrModel m;
    m.sector_dims = c.sectors;
    m.h0 = c.h0;
    m.hp = c.hp;
    m.schedule = {lambda, c.xi, c.T_ref};
    return m;
}

// Full-space model (subsystem, H₀, H′) of a preset at its first λ.
Model full_model(const std::string& preset) {
    const ScenarioConfig c = load_config("preset:" + preset);
    const double lam = c.lambdas.front();
    const CoarseGrainSchedule s{lam, c.xi, c.T_ref};
    switch (c.kind) {
        case ScenarioKind::qfgr:
            return {preset, std::make_shared<const PhysicalSubsystem>(build_projection(sector_family(c.sectors))),
                    HermitianOperator(c.h0), HermitianOperator(c.hp), s};
        case ScenarioKind::custom: {
            KrausFamily k;
            k.dim = c.h0.rows();
            k.operators = c.kraus;
            return {preset, std::make_shared<const PhysicalSubsystem>(build_projection(std::move(k))),
                    HermitianOperator(c.h0), HermitianOperator(c.hp), s};
        }
        case ScenarioKind::heat_bath: {
            CompositeSystem cs = heat_bath_composite(bath_of(c, lam));
            return {preset, cs.subsystem, cs.h0, cs.hp, s};
        }
    }
    throw std::logic_error("unreachable");
}

// Every bundle the presets run, one per (preset, λ).
std::vector<std::pair<std::string, GeneratorBundle>> scenario_bundles() {
    std::vector<std::pair<std::string, GeneratorBundle>> out;
    for (const auto& name : preset_names()) {
        const ScenarioConfig c = load_config("preset:" + name);
        for (double lam : c.lambdas) {
            const std::string label = name + "@" + num(lam);
            const CoarseGrainSchedule s{lam, c.xi, c.T_ref};
            if (c.kind == ScenarioKind::heat_bath) {
                out.emplace_back(label, heat_bath_generator(bath_of(c, lam)));
            } else {
                const Model m = full_model(name);
                out.emplace_back(label, build_generator(m.sub, m.h0, m.hp, s));
            }
        }
    }
    return out;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

int threads() { return static_cast<int>(std::max(1u, std::min(4u, std::thread::hardware_concurrency()))); }

}  // namespace

int main() {
    std::printf("acceptance: %zu criteria\n", std::size_t{11});

    criterion(1, "Oracle equivalence", [] {
        // general construction on the full space for every model, d ≤ 8
        std::vector<Model> models;
        models.push_back(full_model("dephasing-qubit"));
        models.push_back(full_model("two-sector-qubit"));
        models.push_back(full_model("qfgr-2x2"));
        models.push_back(full_model("heat-bath-qubit"));
        models.push_back(full_model("qubit-gibbs"));
        double worst = 0.0;
        std::string detail;
        bool ok = true;
        for (const auto& m : models) {
            GeneratorOptions o;
            const GeneratorBundle b = build_generator(m.sub, m.h0, m.hp, m.sched, o);
            const Superoperator k = k_t_oracle(*m.sub, m.h0, m.hp, b.T);
            const double e = max_abs(b.second_order().matrix() - k.matrix());
            const double scale = max_abs(k.matrix());
            worst = std::max(worst, e);
            ok = ok && e <= 1e-6 && m.sub->dim() <= 8;
            detail += m.name + " d=" + std::to_string(m.sub->dim()) + " |K|=" + num(scale) + " err=" + num(e) + "; ";
        }
        return std::pair{ok, "max-entry " + num(worst) + " over 5 models [" + detail + "]"};
    });

    auto bundles = scenario_bundles();
    const std::vector<double> cert_times{0.1, 1.0, 10.0, 100.0};

    criterion(2, "QDS certificate", [&] {
        Rng rng(2);
        double choi = 1e300, unit = 0.0, trace = 0.0, semi = 0.0;
        bool ok = true;
        std::string bad;
        for (const auto& [name, b] : bundles) {
            const QdsCertificate c = qds_certificate(b, cert_times, rng);
            for (const auto& r : c.rows) {
                choi = std::min(choi, r.min_choi_eig);
                unit = std::max(unit, r.unitality_residual);
                trace = std::max(trace, r.trace_residual);
                semi = std::max(semi, r.semigroup_residual);
                const bool row_ok = r.choi_psd && r.unitality_residual <= 1e-10 && r.trace_residual <= 1e-9 &&
                                    r.semigroup_residual <= 1e-9;
                if (!row_ok) bad += " " + name + "@t=" + num(r.t);
                ok = ok && row_ok;
            }
        }
        return std::pair{ok, std::to_string(bundles.size()) + " bundles x 4 times; min Choi eig " + num(choi) +
                                 ", unitality " + num(unit) + ", trace " + num(trace) + ", semigroup " + num(semi) +
                                 (bad.empty() ? "" : "; failing:" + bad)};
    });

    criterion(3, "Contraction", [&] {
        Rng rng(3);
        double worst = -1e300;
        std::size_t n = 0;
        std::vector<double> times;
        for (int k = 0; k <= 40; ++k) times.push_back(0.25 * k * k);
        for (const auto& [name, b] : bundles) {
            const PhysicalSubsystem& s = *b.subsystem;
            for (int k = 0; k < 6; ++k) {
                const ComplexMatrix y = s.project_state(random_hermitian(s.dim(), rng).matrix());
                const double y1 = trace_norm(HermitianOperator::symmetrized(y));
                for (double t : times) {
                    const ComplexMatrix yt = schrodinger_propagator(b, t).apply(y);
                    worst = std::max(worst, trace_norm(HermitianOperator::symmetrized(yt)) - y1);
                    ++n;
                }
                const ComplexMatrix rho = s.project_state(random_density(s.dim(), rng).matrix());
                for (const auto& st : evolve(b, rho, times, Picture::schrodinger).states) {
                    worst = std::max(worst, trace_norm(HermitianOperator::symmetrized(st)) - 1.0);
                    ++n;
                }
            }
        }
        return std::pair{worst <= 1e-9, "max(|S_t Y|_1 - |Y|_1) = " + num(worst) + " over " + std::to_string(n) +
                                            " sampled states"};
    });

    criterion(4, "Homomorphism degeneracy", [] {
        std::vector<Model> models;
        {
            Model m = full_model("dephasing-qubit");
            m.hp = HermitianOperator(0.7 * pauli_z() + 0.2 * identity(2));
            models.push_back(m);
        }
        {
            Model m = full_model("qfgr-2x2");
            ComplexMatrix hp = m.hp.matrix();
            hp.block(0, 2, 2, 2).setZero();
            hp.block(2, 0, 2, 2).setZero();
            m.hp = HermitianOperator(hp);
            m.name = "qfgr-2x2 (block-diagonal H')";
            models.push_back(m);
        }
        {
            const ScenarioConfig c = load_config("preset:heat-bath-qubit");
            Model m = full_model("heat-bath-qubit");
            m.hp = HermitianOperator::symmetrized(kron(c.q, identity(c.h_b.rows())));
            m.name = "heat-bath-qubit (H' = Q x 1)";
            models.push_back(m);
        }
        double worst = 0.0;
        for (const auto& m : models) {
            const GeneratorBundle b = build_generator(m.sub, m.h0, m.hp, m.sched);
            worst = std::max(worst, max_abs(b.second_order().matrix()));
            worst = std::max(worst, max_abs(k_t_oracle(*m.sub, m.h0, m.hp, b.T).matrix()));
        }
        return std::pair{worst <= 1e-8, "max |K_T| = " + num(worst) + " (assembled and oracle, 3 models)"};
    });

    criterion(5, "H' gauge invariance", [] {
        double worst = 0.0;
        for (const char* p : {"dephasing-qubit", "qfgr-2x2", "heat-bath-qubit", "two-sector-qubit"}) {
            const Model m = full_model(p);
            const GeneratorBundle a = build_generator(m.sub, m.h0, m.hp, m.sched);
            for (double c : {1.0, -3.7}) {
                const HermitianOperator hc(m.hp.matrix() + c * identity(m.sub->dim()));
                const GeneratorBundle b = build_generator(m.sub, m.h0, hc, m.sched);
                worst = std::max(worst, max_abs(a.heisenberg.matrix() - b.heisenberg.matrix()));
            }
        }
        return std::pair{worst <= 1e-10, "max-entry change " + num(worst) + " for c in {1, -3.7} on 4 models"};
    });

    criterion(6, "Heat-bath dual-path identity", [] {
        Rng rng(6);
        double worst = 0.0;
        std::string detail;
        for (int k = 0; k < 3; ++k) {
            HeatBathModel m;
            m.h_a = random_hermitian(2, rng).matrix();
            m.h_b = random_hermitian(3, rng).matrix();
            m.q = random_hermitian(2, rng).matrix();
            m.phi = random_hermitian(3, rng).matrix();
            m.beta = 0.5 + 0.5 * k;
            m.schedule = {0.3 - 0.1 * k, 1.0, 0.5};
            const GeneratorBundle s = heat_bath_generator(m);
            const double e = heat_bath_deviation(s, heat_bath_general(m), 2, 3);
            worst = std::max(worst, e);
            detail += num(e) + (k < 2 ? ", " : "");
        }
        return std::pair{worst <= 1e-7, "max-entry " + num(worst) + " on 3 random models [" + detail + "]"};
    });

    criterion(7, "Gibbs limit", [] {
        const ScenarioConfig c = load_config("preset:qubit-gibbs");
        const GibbsStudy st = gibbs_limit_study(bath_of(c, c.lambdas.front()), c.lambdas);
        std::string detail;
        bool unique = true;
        for (const auto& r : st.rows) {
            detail += "lambda=" + num(r.lambda) + " dist=" + num(r.distance) + (r.unique ? "" : " (non-unique)") + "; ";
            unique = unique && r.unique;
        }
        const bool ok = c.lambdas == std::vector<double>{0.3, 0.1, 0.03} && st.strictly_decreasing() &&
                        st.rows.back().distance < 0.05 && unique;
        return std::pair{ok, detail + (st.strictly_decreasing() ? "strictly decreasing" : "NOT decreasing")};
    });

    criterion(8, "FGR nascent delta", [] {
        const std::vector<double> ts{1.0, 10.0};
        const auto rows = fgr_rate_check(ts);
        const double e1 = std::abs(rows[0].integral - 2.0 * std::numbers::pi);
        const double e2 = std::abs(rows[1].integral - 2.0 * std::numbers::pi);
        const double lin = std::abs((rows[1].peak / rows[1].T) / (rows[0].peak / rows[0].T) - 1.0);
        const bool ok = e1 <= 1e-6 && e2 <= 1e-6 && lin <= 1e-9;
        return std::pair{ok, "|I-2pi| = " + num(e1) + " (T=1), " + num(e2) + " (T=10); peak/T relative spread " + num(lin)};
    });

    criterion(9, "Weak-coupling sweep", [] {
        const ScenarioConfig c = load_config("preset:quasi-continuum");
        const CompositeSystem cs = heat_bath_composite(bath_of(c, c.lambdas.front()));
        const auto rows = weak_coupling_sweep(cs.subsystem, cs.h0, cs.hp, c.lambdas, c.xi, c.T_ref, c.time.tau_bar,
                                              c.time.count, threads());
        std::string table;
        double at02 = -1.0, at005 = -1.0;
        for (const auto& r : rows) {
            table += "lambda=" + num(r.lambda) + " T=" + num(r.T) + " sup=" + num(r.sup_error) + "; ";
            if (r.lambda == 0.2) at02 = r.sup_error;
            if (r.lambda == 0.05) at005 = r.sup_error;
        }
        const bool ok = cs.subsystem->dim() == 32 && at02 >= 0.0 && at005 >= 0.0 && at005 < at02;
        return std::pair{ok, "d_B=16, " + table + (ok ? "0.05 < 0.2" : "ordering violated")};
    });

    criterion(10, "Conditional-expectation validator", [] {
        Rng rng(10);
        const ScenarioConfig q = load_config("preset:qfgr-2x2");
        const ScenarioConfig h = load_config("preset:heat-bath-qubit");
        const PhysicalSubsystem sectors = build_projection(sector_family(q.sectors));
        const PhysicalSubsystem trace = build_projection(partial_trace_family(2, bath_state(bath_of(h, 0.1))));
        const ValidationReport a = validate_cppnce(sectors, 16, rng);
        const ValidationReport b = validate_cppnce(trace, 16, rng);
        KrausFamily broken;
        broken.dim = 2;
        const double s = 1.0 / std::sqrt(3.0);
        broken.operators = {s * identity(2), s * pauli_x(), s * pauli_z()};
        const ValidationReport c = validate_cppnce(PhysicalSubsystem::unchecked(broken), 16, rng);
        const double w = c.axiom("bimodule").witness;
        const bool ok = a.all_passed() && b.all_passed() && !c.axiom("bimodule").passed && w > 0.0;
        std::string failed;
        for (const auto& x : c.axioms) {
            if (!x.passed) failed += " " + x.name;
        }
        return std::pair{ok, std::string("sector family ") + (a.all_passed() ? "passes" : "fails") +
                                 ", partial-trace family " + (b.all_passed() ? "passes" : "fails") +
                                 "; broken family fails [" + failed + " ] with bimodule witness " + num(w)};
    });

    criterion(11, "Determinism", [] {
        namespace fs = std::filesystem;
        const fs::path root = fs::temp_directory_path() / "qfp_acceptance_determinism";
        fs::remove_all(root);
        bool ok = true;
        std::string detail;
        for (const char* p : {"two-sector-qubit", "heat-bath-qubit", "qubit-gibbs"}) {
            std::vector<std::string> outputs;
            for (const char* th : {"1", "3"}) {
                const fs::path dir = root / (std::string(p) + "_" + th);
                const std::string cmd = std::string(QFP_BINARY) + " run preset:" + p + " --threads " + th +
                                        " --out-dir " + dir.string() + " >/dev/null 2>&1";
                const int rc = std::system(cmd.c_str());
                ok = ok && rc == 0;
                outputs.push_back(slurp(dir / (std::string(p) + ".csv")));
            }
            const bool same = !outputs[0].empty() && outputs[0] == outputs[1];
            ok = ok && same;
            detail += std::string(p) + (same ? " identical (" + std::to_string(outputs[0].size()) + " bytes); " : " DIFFERS; ");
        }
        return std::pair{ok, detail + "runs with 1 and 3 threads"};
    });

    std::printf("acceptance: %d of 11 failed\n", failures);
    return failures;
}
