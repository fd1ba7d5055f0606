// config.hpp — Scenario configuration files and the built-in presets.
//
// INI-style text: [section] headers, "key = value" lines and ";" comment lines.
// Matrices are given on one line as
//   rows cols re im re im ...   (interchange format, row-major)
//   diag(a, b, ...)  sigma_x  sigma_y  sigma_z  identity(n)  zero(n)
// optionally prefixed by a real factor, e.g. "0.5*sigma_z".

#pragma once

#include "qfp/mat_core.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace qfp {

// Parse or semantic error in a configuration. line is 0 when unknown.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& source, int line, const std::string& field, const std::string& message);
    int line() const noexcept { return line_; }
    const std::string& field() const noexcept { return field_; }

private:
    int line_;
    std::string field_;
};

enum class ScenarioKind { qfgr, heat_bath, custom };

const char* to_string(ScenarioKind k);

struct TimeSpec {
    bool auto_mode = false;  // [0, τ̄/λ²] per λ
    double start = 0.0;
    double stop = 0.0;
    double tau_bar = 0.0;
    int count = 0;

    std::vector<double> grid(double lambda) const;
};

struct ScenarioConfig {
    std::string source;  // file path or preset:NAME
    std::string name;
    ScenarioKind kind = ScenarioKind::custom;
    std::uint64_t seed = 0;

    std::vector<double> lambdas;
    double xi = 1.0;
    double T_ref = 1.0;
    TimeSpec time;

    std::string csv = "results.csv";
    std::string json = "summary.json";

    // weak-coupling error column (exact vs semigroup); needs the full space
    bool error_norm = true;
    int samples = 8;  // sampled states per certificate time

    // qfgr and custom
    std::vector<int> sectors;
    std::vector<ComplexMatrix> kraus;
    ComplexMatrix h0;
    ComplexMatrix hp;

    // heat_bath
    ComplexMatrix h_a, h_b, q, phi;
    double beta = 1.0;
    bool gibbs = false;      // run the Gibbs-limit study over the λ list
    bool dual_path = false;  // compare with the general partial-trace construction

    std::optional<ComplexMatrix> rho0;
};

// Single-line matrix literal; throws std::invalid_argument.
ComplexMatrix parse_matrix_literal(const std::string& text);

ScenarioConfig parse_config(const std::string& text, const std::string& source);
// "preset:NAME" or a file path.
ScenarioConfig load_config(const std::string& ref);

std::vector<std::string> preset_names();
// Throws std::out_of_range for unknown names.
std::string preset_text(const std::string& name);

}  // namespace qfp
