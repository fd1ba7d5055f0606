// config.cpp — see config.hpp

#include "qfp/config.hpp"

#include "qfp/scenarios.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

namespace qfp {

namespace pt = boost::property_tree;

ConfigError::ConfigError(const std::string& source, int line, const std::string& field, const std::string& message)
    : std::runtime_error(source + (line > 0 ? ":" + std::to_string(line) : std::string()) +
                         (field.empty() ? std::string() : ": " + field) + ": " + message),
      line_(line),
      field_(field) {}

const char* to_string(ScenarioKind k) {
    switch (k) {
        case ScenarioKind::qfgr: return "qfgr";
        case ScenarioKind::heat_bath: return "heat_bath";
        case ScenarioKind::custom: return "custom";
    }
    return "?";
}

std::vector<double> TimeSpec::grid(double lambda) const {
    const double lo = auto_mode ? 0.0 : start;
    const double hi = auto_mode ? tau_bar / (lambda * lambda) : stop;
    std::vector<double> t;
    for (int i = 0; i < count; ++i) {
        t.push_back(count == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1));
    }
    return t;
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

bool parse_double(const std::string& text, double& out) {
    const std::string t = trim(text);
    if (t.empty()) return false;
    const char* first = t.data();
    if (*first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, t.data() + t.size(), out);
    return ec == std::errc() && ptr == t.data() + t.size() && std::isfinite(out);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep)) parts.push_back(trim(cur));
    return parts;
}

int parse_dimension(const std::string& inner) {
    double v = 0.0;
    if (!parse_double(inner, v) || v < 1 || v != std::floor(v)) {
        throw std::invalid_argument("dimension must be a positive integer, got '" + inner + "'");
    }
    return static_cast<int>(v);
}

// Maps "section.key" to its 1-based line in the source text, for diagnostics.
std::map<std::string, int> key_lines(const std::string& text) {
    std::map<std::string, int> lines;
    std::istringstream is(text);
    std::string line;
    std::string section;
    int n = 0;
    while (std::getline(is, line)) {
        ++n;
        const std::string t = trim(line);
        if (t.empty() || t[0] == ';') continue;
        if (t.front() == '[' && t.back() == ']') {
            section = trim(t.substr(1, t.size() - 2));
            lines.emplace(section, n);
            continue;
        }
        const auto eq = t.find('=');
        if (eq != std::string::npos) lines.emplace(section + "." + trim(t.substr(0, eq)), n);
    }
    return lines;
}

class Reader {
public:
    Reader(const pt::ptree& tree, std::string source, std::map<std::string, int> lines)
        : tree_(tree), source_(std::move(source)), lines_(std::move(lines)) {}

    [[noreturn]] void fail(const std::string& field, const std::string& message) const {
        // a missing key is reported at its section header
        auto it = lines_.find(field);
        if (it == lines_.end()) it = lines_.find(field.substr(0, field.find('.')));
        throw ConfigError(source_, it == lines_.end() ? 0 : it->second, field, message);
    }

    bool has(const std::string& field) const { return tree_.get_optional<std::string>(field).has_value(); }

    std::string str(const std::string& field) const {
        const auto v = tree_.get_optional<std::string>(field);
        if (!v) fail(field, "required field is missing");
        return trim(*v);
    }

    std::string str_or(const std::string& field, const std::string& def) const {
        return has(field) ? str(field) : def;
    }

    double num(const std::string& field) const {
        double v = 0.0;
        if (!parse_double(str(field), v)) fail(field, "expected a finite number, got '" + str(field) + "'");
        return v;
    }

    double num_or(const std::string& field, double def) const { return has(field) ? num(field) : def; }

    int integer(const std::string& field) const {
        const double v = num(field);
        if (v != std::floor(v) || std::abs(v) > 1e9) fail(field, "expected an integer, got '" + str(field) + "'");
        return static_cast<int>(v);
    }

    bool flag_or(const std::string& field, bool def) const {
        if (!has(field)) return def;
        const std::string v = lower(str(field));
        if (v == "true" || v == "yes" || v == "1" || v == "on") return true;
        if (v == "false" || v == "no" || v == "0" || v == "off") return false;
        fail(field, "expected true or false, got '" + v + "'");
    }

    std::vector<double> list(const std::string& field) const {
        std::vector<double> out;
        for (const auto& part : split(str(field), ',')) {
            double v = 0.0;
            if (!parse_double(part, v)) fail(field, "expected a comma-separated list of numbers, got '" + part + "'");
            out.push_back(v);
        }
        if (out.empty()) fail(field, "list is empty");
        return out;
    }

    ComplexMatrix matrix(const std::string& field) const {
        try {
            return parse_matrix_literal(str(field));
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception& e) {
            fail(field, e.what());
        }
    }

    ComplexMatrix hermitian(const std::string& field) const {
        ComplexMatrix m = matrix(field);
        if (m.rows() != m.cols()) fail(field, "matrix must be square");
        const double dev = hermitian_deviation(m);
        if (dev > 1e-12 * (1.0 + max_abs(m))) {
            fail(field, "matrix must be Hermitian (max |M - M^dagger| = " + std::to_string(dev) + ")");
        }
        return m;
    }

    void only_keys(const std::string& section, const std::set<std::string>& allowed) const {
        const auto child = tree_.get_child_optional(section);
        if (!child) return;
        for (const auto& [key, value] : *child) {
            if (!allowed.count(key)) fail(section + "." + key, "unknown key");
        }
    }

    const pt::ptree& tree() const { return tree_; }

private:
    const pt::ptree& tree_;
    std::string source_;
    std::map<std::string, int> lines_;
};

std::string one_line(const ComplexMatrix& m) {
    std::string s = format_matrix(m);
    std::replace(s.begin(), s.end(), '\n', ' ');
    return trim(s);
}

}  // namespace

ComplexMatrix parse_matrix_literal(const std::string& text) {
    std::string t = trim(text);
    double factor = 1.0;
    const auto star = t.find('*');
    if (star != std::string::npos) {
        if (!parse_double(t.substr(0, star), factor)) {
            throw std::invalid_argument("bad scalar factor '" + trim(t.substr(0, star)) + "'");
        }
        t = trim(t.substr(star + 1));
    }
    const std::string key = lower(t);
    auto inner = [&](const std::string& head) {
        if (t.back() != ')') throw std::invalid_argument("missing ')' in '" + t + "'");
        return t.substr(head.size(), t.size() - head.size() - 1);
    };
    ComplexMatrix m;
    if (key == "sigma_x") {
        m = pauli_x();
    } else if (key == "sigma_y") {
        m = pauli_y();
    } else if (key == "sigma_z") {
        m = pauli_z();
    } else if (key.rfind("identity(", 0) == 0) {
        m = identity(parse_dimension(inner("identity(")));
    } else if (key.rfind("zero(", 0) == 0) {
        const int n = parse_dimension(inner("zero("));
        m = ComplexMatrix::Zero(n, n);
    } else if (key.rfind("diag(", 0) == 0) {
        const auto parts = split(inner("diag("), ',');
        if (parts.empty()) throw std::invalid_argument("diag() needs at least one entry");
        m = ComplexMatrix::Zero(static_cast<Index>(parts.size()), static_cast<Index>(parts.size()));
        for (std::size_t i = 0; i < parts.size(); ++i) {
            double v = 0.0;
            if (!parse_double(parts[i], v)) throw std::invalid_argument("bad diag entry '" + parts[i] + "'");
            m(static_cast<Index>(i), static_cast<Index>(i)) = v;
        }
    } else {
        m = parse_matrix(t);
    }
    if (!all_finite(m)) throw std::invalid_argument("matrix has non-finite entries");
    return factor * m;
}

ScenarioConfig parse_config(const std::string& text, const std::string& source) {
    pt::ptree tree;
    {
        std::istringstream is(text);
        try {
            pt::read_ini(is, tree);
        } catch (const pt::ini_parser_error& e) {
            throw ConfigError(source, static_cast<int>(e.line()), "", e.message());
        }
    }
    const Reader r(tree, source, key_lines(text));

    const std::set<std::string> sections{"scenario", "schedule", "time", "output", "qfgr",
                                         "heat_bath", "custom", "state"};
    for (const auto& [name, child] : tree) {
        if (!sections.count(name)) r.fail(name, "unknown section");
        if (child.empty() && !child.data().empty()) r.fail(name, "key outside any section");
    }

    ScenarioConfig c;
    c.source = source;

    r.only_keys("scenario", {"kind", "name", "seed", "error_norm", "samples"});
    const std::string kind = lower(r.str("scenario.kind"));
    if (kind == "qfgr") {
        c.kind = ScenarioKind::qfgr;
    } else if (kind == "heat_bath") {
        c.kind = ScenarioKind::heat_bath;
    } else if (kind == "custom") {
        c.kind = ScenarioKind::custom;
    } else {
        r.fail("scenario.kind", "must be one of qfgr, heat_bath, custom; got '" + kind + "'");
    }
    c.name = r.str_or("scenario.name", source);
    if (r.has("scenario.seed")) {
        const std::string s = r.str("scenario.seed");
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), c.seed);
        if (ec != std::errc() || ptr != s.data() + s.size()) {
            r.fail("scenario.seed", "expected a non-negative integer, got '" + s + "'");
        }
    }
    c.error_norm = r.flag_or("scenario.error_norm", true);
    c.samples = r.has("scenario.samples") ? r.integer("scenario.samples") : 8;
    if (c.samples < 1) r.fail("scenario.samples", "must be at least 1");

    r.only_keys("schedule", {"lambda", "xi", "T_ref"});
    c.lambdas = r.list("schedule.lambda");
    for (double l : c.lambdas) {
        if (l == 0.0) r.fail("schedule.lambda", "lambda must be nonzero (the semigroup is undefined at zero coupling)");
    }
    c.xi = r.num("schedule.xi");
    if (!(c.xi > 0.0 && c.xi < 2.0)) {
        r.fail("schedule.xi", "the coarse-graining exponent must satisfy 0 < xi < 2, got " + r.str("schedule.xi"));
    }
    c.T_ref = r.num("schedule.T_ref");
    if (!(c.T_ref > 0.0)) r.fail("schedule.T_ref", "reference time must be positive");

    r.only_keys("time", {"mode", "start", "stop", "count", "tau_bar"});
    const std::string mode = lower(r.str_or("time.mode", "grid"));
    if (mode == "auto") {
        c.time.auto_mode = true;
        c.time.tau_bar = r.num("time.tau_bar");
        if (!(c.time.tau_bar > 0.0)) r.fail("time.tau_bar", "must be positive");
    } else if (mode == "grid") {
        c.time.start = r.num_or("time.start", 0.0);
        c.time.stop = r.num("time.stop");
        if (c.time.stop < c.time.start) r.fail("time.stop", "must not precede time.start");
    } else {
        r.fail("time.mode", "must be grid or auto, got '" + mode + "'");
    }
    c.time.count = r.integer("time.count");
    if (c.time.count < 1) r.fail("time.count", "time grid must be nonempty");

    r.only_keys("output", {"csv", "json"});
    c.csv = r.str_or("output.csv", c.csv);
    c.json = r.str_or("output.json", c.json);

    Index dim = 0;
    switch (c.kind) {
        case ScenarioKind::qfgr: {
            r.only_keys("qfgr", {"sectors", "h0", "hp"});
            for (double s : r.list("qfgr.sectors")) {
                if (s < 1 || s != std::floor(s)) r.fail("qfgr.sectors", "sector dimensions must be positive integers");
                c.sectors.push_back(static_cast<int>(s));
            }
            c.h0 = r.hermitian("qfgr.h0");
            c.hp = r.hermitian("qfgr.hp");
            dim = std::accumulate(c.sectors.begin(), c.sectors.end(), Index{0});
            if (c.h0.rows() != dim) r.fail("qfgr.h0", "dimension differs from the sector total " + std::to_string(dim));
            if (c.hp.rows() != dim) r.fail("qfgr.hp", "dimension differs from the sector total " + std::to_string(dim));
            Index off = 0;
            for (int s : c.sectors) {
                const double leak = c.h0.block(off, 0, s, dim).cwiseAbs().sum() -
                                    c.h0.block(off, off, s, s).cwiseAbs().sum();
                if (leak > 1e-12 * (1.0 + max_abs(c.h0))) r.fail("qfgr.h0", "must be block diagonal in the sectors");
                off += s;
            }
            break;
        }
        case ScenarioKind::custom: {
            std::set<std::string> keys{"h0", "hp"};
            std::vector<std::pair<int, std::string>> kraus_keys;
            if (const auto child = tree.get_child_optional("custom")) {
                for (const auto& [key, value] : *child) {
                    if (key.rfind("kraus", 0) == 0) {
                        const std::string idx = key.substr(5);
                        int k = 0;
                        const auto [ptr, ec] = std::from_chars(idx.data(), idx.data() + idx.size(), k);
                        if (ec != std::errc() || ptr != idx.data() + idx.size() || k < 1) {
                            r.fail("custom." + key, "Kraus keys are named kraus1, kraus2, ...");
                        }
                        kraus_keys.emplace_back(k, key);
                        keys.insert(key);
                    }
                }
            }
            r.only_keys("custom", keys);
            std::sort(kraus_keys.begin(), kraus_keys.end());
            if (kraus_keys.empty()) r.fail("custom", "at least one kraus1 = ... entry is required");
            c.h0 = r.hermitian("custom.h0");
            c.hp = r.hermitian("custom.hp");
            dim = c.h0.rows();
            if (c.hp.rows() != dim) r.fail("custom.hp", "dimension differs from h0");
            for (const auto& [k, key] : kraus_keys) {
                ComplexMatrix v = r.matrix("custom." + key);
                if (v.rows() != dim || v.cols() != dim) r.fail("custom." + key, "must be square of the size of h0");
                c.kraus.push_back(std::move(v));
            }
            break;
        }
        case ScenarioKind::heat_bath: {
            r.only_keys("heat_bath", {"h_a", "h_b", "q", "phi", "beta", "gibbs", "dual_path"});
            c.h_a = r.hermitian("heat_bath.h_a");
            c.h_b = r.hermitian("heat_bath.h_b");
            c.q = r.hermitian("heat_bath.q");
            c.phi = r.hermitian("heat_bath.phi");
            if (c.q.rows() != c.h_a.rows()) r.fail("heat_bath.q", "dimension differs from h_a");
            if (c.phi.rows() != c.h_b.rows()) r.fail("heat_bath.phi", "dimension differs from h_b");
            c.beta = r.num("heat_bath.beta");
            if (c.beta < 0.0) r.fail("heat_bath.beta", "inverse temperature must be >= 0");
            c.gibbs = r.flag_or("heat_bath.gibbs", false);
            c.dual_path = r.flag_or("heat_bath.dual_path", false);
            dim = c.h_a.rows();
            const Index full = c.h_a.rows() * c.h_b.rows();
            if ((c.error_norm || c.dual_path) && full > 32) {
                r.fail("heat_bath.h_b", "system-bath dimension " + std::to_string(full) +
                                            " exceeds 32; set scenario.error_norm = false and dual_path = false");
            }
            break;
        }
    }
    if (dim > 32) r.fail(c.kind == ScenarioKind::heat_bath ? "heat_bath.h_a" : "scenario.kind",
                         "dimension above 32 is not supported");
    for (const char* sec : {"qfgr", "heat_bath", "custom"}) {
        if (sec != std::string(to_string(c.kind)) && tree.get_child_optional(sec)) {
            r.fail(sec, std::string("section does not match scenario kind ") + to_string(c.kind));
        }
    }

    r.only_keys("state", {"rho0"});
    if (r.has("state.rho0")) {
        ComplexMatrix rho = r.hermitian("state.rho0");
        if (rho.rows() != dim) r.fail("state.rho0", "dimension differs from the system (" + std::to_string(dim) + ")");
        if (std::abs(rho.trace().real() - 1.0) > 1e-10) r.fail("state.rho0", "trace must be 1");
        c.rho0 = std::move(rho);
    }
    return c;
}

ScenarioConfig load_config(const std::string& ref) {
    if (ref.rfind("preset:", 0) == 0) {
        const std::string name = ref.substr(7);
        std::string text;
        try {
            text = preset_text(name);
        } catch (const std::out_of_range&) {
            throw ConfigError(ref, 0, "", "unknown preset '" + name + "'");
        }
        return parse_config(text, ref);
    }
    std::ifstream is(ref);
    if (!is) throw ConfigError(ref, 0, "", "cannot open configuration file");
    std::stringstream ss;
    ss << is.rdbuf();
    return parse_config(ss.str(), ref);
}

// ----------------------------------------------------------------------------
// Presets. Bump the version line when a preset's numbers change.
// ----------------------------------------------------------------------------

namespace {

std::string quasi_continuum_text() {
    const HeatBathModel m = quasi_continuum_model(16, 0.25, 2.0, 0.15, 1.0, {0.2, 0.5, 1.0});
    std::ostringstream os;
    os << "; qubit coupled through sigma_x to 16 equally spaced bath levels (spacing 0.25),\n"
          "; Phi_mn = 0.15 x exp(-x/2), x = |b_m - b_n|. The window tau_bar/lambda^2 stays\n"
          "; below the bath recurrence time 2 pi / 0.25.\n"
          "; version 1\n"
          "[scenario]\nkind = heat_bath\nname = quasi-continuum\nseed = 1\n\n"
          "[schedule]\nlambda = 0.2, 0.1, 0.05\nxi = 0.5\nT_ref = 1\n\n"
          "[time]\nmode = auto\ntau_bar = 0.05\ncount = 200\n\n"
          "[heat_bath]\n"
       << "h_a = " << one_line(m.h_a) << "\n"
       << "h_b = " << one_line(m.h_b) << "\n"
       << "q = sigma_x\n"
       << "phi = " << one_line(m.phi) << "\n"
       << "beta = 1\n\n"
          "[output]\ncsv = quasi-continuum.csv\njson = quasi-continuum.json\n";
    return os.str();
}

const std::map<std::string, std::string>& presets() {
    static const std::map<std::string, std::string> table = [] {
        std::map<std::string, std::string> t;
        t["two-sector-qubit"] =
            "; two one-dimensional sectors: classical two-state rate equation\n"
            "; version 1\n"
            "[scenario]\nkind = qfgr\nname = two-sector-qubit\nseed = 7\n\n"
            "[schedule]\nlambda = 0.3, 0.1\nxi = 1\nT_ref = 0.5\n\n"
            "[time]\nstart = 0\nstop = 10\ncount = 11\n\n"
            "[qfgr]\nsectors = 1, 1\nh0 = diag(0.5, -0.5)\nhp = sigma_x\n\n"
            "[state]\nrho0 = diag(1, 0)\n\n"
            "[output]\ncsv = two-sector-qubit.csv\njson = two-sector-qubit.json\n";
        t["qfgr-2x2"] =
            "; two two-dimensional sectors with intra-sector coherences\n"
            "; version 1\n"
            "[scenario]\nkind = qfgr\nname = qfgr-2x2\nseed = 11\n\n"
            "[schedule]\nlambda = 0.4, 0.2\nxi = 1\nT_ref = 0.4\n\n"
            "[time]\nstart = 0\nstop = 20\ncount = 9\n\n"
            "[qfgr]\nsectors = 2, 2\n"
            "h0 = 4 4  0.4 0  0.1 0  0 0  0 0   0.1 0  -0.3 0  0 0  0 0   "
            "0 0  0 0  1.1 0  -0.2 0.1   0 0  0 0  -0.2 -0.1  0.6 0\n"
            "hp = 4 4  0.2 0  0.1 0.05  0.5 -0.2  0.3 0.1   0.1 -0.05  -0.1 0  0.25 0  0.4 -0.3   "
            "0.5 0.2  0.25 0  0.3 0  0.05 0   0.3 -0.1  0.4 0.3  0.05 0  -0.2 0\n\n"
            "[state]\nrho0 = diag(0.5, 0.5, 0, 0)\n\n"
            "[output]\ncsv = qfgr-2x2.csv\njson = qfgr-2x2.json\n";
        t["dephasing-qubit"] =
            "; dephasing projection onto diagonal qubit observables\n"
            "; version 1\n"
            "[scenario]\nkind = custom\nname = dephasing-qubit\nseed = 3\n\n"
            "[schedule]\nlambda = 0.1\nxi = 1\nT_ref = 0.1\n\n"
            "[time]\nstart = 0\nstop = 100\ncount = 5\n\n"
            "[custom]\nkraus1 = diag(1, 0)\nkraus2 = diag(0, 1)\nh0 = sigma_z\nhp = sigma_x\n\n"
            "[state]\nrho0 = diag(1, 0)\n\n"
            "[output]\ncsv = dephasing-qubit.csv\njson = dephasing-qubit.json\n";
        t["heat-bath-qubit"] =
            "; qubit and three-level bath with nonzero bath mean\n"
            "; version 1\n"
            "[scenario]\nkind = heat_bath\nname = heat-bath-qubit\nseed = 5\n\n"
            "[schedule]\nlambda = 0.2, 0.05\nxi = 1\nT_ref = 0.3\n\n"
            "[time]\nstart = 0\nstop = 10\ncount = 6\n\n"
            "[heat_bath]\n"
            "h_a = 2 2  0.6 0  0.15 -0.05  0.15 0.05  -0.4 0\n"
            "h_b = diag(0, 0.8, 1.7)\n"
            "q = sigma_x\n"
            "phi = 3 3  0.3 0  0.7 0.2  0.1 0   0.7 -0.2  -0.2 0  0.5 -0.1   0.1 0  0.5 0.1  0.4 0\n"
            "beta = 0.7\ndual_path = true\n\n"
            "[output]\ncsv = heat-bath-qubit.csv\njson = heat-bath-qubit.json\n";
        t["qubit-gibbs"] =
            "; reference model for the thermal steady-state limit (bath mean zero)\n"
            "; version 1\n"
            "[scenario]\nkind = heat_bath\nname = qubit-gibbs\nseed = 2\n\n"
            "[schedule]\nlambda = 0.3, 0.1, 0.03\nxi = 1\nT_ref = 1\n\n"
            "[time]\nstart = 0\nstop = 10\ncount = 6\n\n"
            "[heat_bath]\n"
            "h_a = sigma_z\n"
            "h_b = diag(0, 0.7, 1.9, 2.4)\n"
            "q = sigma_x\n"
            "phi = 4 4  0 0  1 0  1 0  0.1 0   1 0  0 0  1 0  1.5 0   1 0  1 0  0 0  1 0   "
            "0.1 0  1.5 0  1 0  0 0\n"
            "beta = 1\ngibbs = true\ndual_path = true\n\n"
            "[output]\ncsv = qubit-gibbs.csv\njson = qubit-gibbs.json\n";
        t["quasi-continuum"] = quasi_continuum_text();
        return t;
    }();
    return table;
}

}  // namespace

std::vector<std::string> preset_names() {
    std::vector<std::string> names;
    for (const auto& [k, v] : presets()) names.push_back(k);
    return names;
}

std::string preset_text(const std::string& name) { return presets().at(name); }

}  // namespace qfp
