// runner.hpp — Executes a parsed scenario: generator builds, certificates, trajectories,
// steady states and the optional comparison paths; writes the CSV table and JSON summary.

#pragma once

#include "qfp/config.hpp"

#include "json.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace qfp {

inline constexpr const char* kToolVersion = "0.3.0";

struct RunOptions {
    std::string out_dir = ".";
    int threads = 1;
    std::optional<std::uint64_t> seed;  // overrides the config seed
};

struct RunResult {
    int exit_code = 0;  // 0 when every asserted invariant held, 1 otherwise
    nlohmann::json summary;
    std::string csv_path;
    std::string json_path;
};

// CSV columns: lambda, t, error_norm, trace_dev, min_choi_eig, min_state_eig (17 digits),
// rows ordered by (λ index, t index). error_norm is "nan" when disabled.
RunResult run_scenario(const ScenarioConfig& c, const RunOptions& opts);

}  // namespace qfp
