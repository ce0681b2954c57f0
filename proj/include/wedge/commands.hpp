#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "wedge/config.hpp"
#include "wedge/diagnostics.hpp"
#include "wedge/error.hpp"

namespace wedge {

enum ExitCode : int {
    exit_ok = 0,
    exit_other = 1,
    exit_validation = 2,
    exit_nonconvergence = 3,
    exit_guard = 4, // regime, cavitation, ellipticity, tangent point, fold-over
    exit_io = 5,
    exit_verify_failed = 6,
};

int exit_code_for(ErrorKind k);

struct Criterion {
    std::string name;
    bool applicable = true;
    bool passed = false;
    double value = 0.0;
    double threshold = 0.0;
    std::string detail;
};

// each command writes into cfg.out_dir and returns an exit code; library
// errors propagate, run_command maps them
int cmd_polar(const RunConfig& cfg, std::ostream& log);
int cmd_solve(const RunConfig& cfg, std::ostream& log);
// uses a run saved in cfg.out_dir when present, else solves first
int cmd_verify(const RunConfig& cfg, std::ostream& log);
int cmd_sweep(const RunConfig& cfg, std::ostream& log);

// the single-run checks applied by verify
std::vector<Criterion> evaluate_criteria(const WedgeProblem& pb, const FixedPointResult& run,
                                         const DiagnosticsReport& report, const VerifyThresholds& t,
                                         std::uint64_t seed);

// dispatch by name; catches wedge::Error and reports it on err
int run_command(const std::string& name, const RunConfig& cfg, std::ostream& log, std::ostream& err);

} // namespace wedge
