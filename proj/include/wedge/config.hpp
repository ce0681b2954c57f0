#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "wedge/free_boundary.hpp"

namespace wedge {

// thresholds applied by `verify` to a single run
struct VerifyThresholds {
    double rh_max = 1e-8;
    double consistency_rel = 1e-6; // times sup |dw|
    double euler_max = 1e-3;       // sup norm, any equation
    double fit_slack = 0.15;       // added to the decay bounds in the permissive direction
    double decay_max = -1.0;       // weak dp, dw along rays; drho across streamlines
    double streamline_min = -0.1;  // weak drho along a streamline
    double streamline_z2 = 5.0;
    double uniqueness_max = 1e-8;  // second start from a random iterate; negative skips
};

// cartesian product; any empty list gives an empty sweep
struct SweepSpec {
    std::vector<double> amplitudes;
    std::vector<std::string> branches{"weak"};
    std::vector<int> grids{128}; // N, with M = N / 2
};

struct RunConfig {
    ProblemSpec problem;
    std::string out_dir = "wedge_out";
    std::uint64_t seed = 1;
    int polar_samples = 181;
    VerifyThresholds verify;
    SweepSpec sweep;
};

nlohmann::json to_json(const RunConfig& c);
// missing keys take defaults, unknown keys are a validation error
RunConfig config_from_json(const nlohmann::json& j);
RunConfig load_config(const std::string& path);
void save_config(const RunConfig& c, const std::string& path);

// problem checks plus the output and sweep settings
void validate(const RunConfig& c);

} // namespace wedge
