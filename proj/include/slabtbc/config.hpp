#pragma once

#include <optional>

#include "slabtbc/verify.hpp"

namespace slabtbc::cli {

enum class Scenario {
    PecEnergy,
    TbcReflection,
    OracleCompare,
    SymbolAudit,
    LemmaSuite,
    AprioriSweep,
};

struct RunConfig {
    Scenario scenario = Scenario::PecEnergy;
    nlohmann::json raw;           // canonical parsed document
    std::string hash;             // config hash of the canonical document

    // grid + medium (validated, present for field scenarios)
    std::optional<LateralGrid> grid;
    std::optional<stepper::SlabMedium> medium;
    std::optional<stepper::SourceTerm> source;

    double dt = 0.0;              // resolved from dt or cfl_fraction
    int steps = 0;                // resolved from steps or horizon_t
    cq::Generator generator = cq::Generator::BDF2;
    int energy_stride = 1;
    int snapshot_stride = 0;      // 0 disables snapshots
    std::uint64_t seed = 20240601;
    std::uint64_t audit_samples = 10000;
    std::string output_dir = ".";
    spectral::TraceWeight weight = spectral::TraceWeight::Standard;
    bool quick = false;
    int threads = 0;              // 0 = library default
};

// Strict parse: unknown keys are errors, every module precondition is
// validated up front with a diagnostic naming the violated invariant.
RunConfig parse(const std::string& config_text);

// Runs the scenario and writes the artifact set (energy CSV, snapshots,
// summary JSON, timing JSON) into the output directory.  Returns the
// process exit status (nonzero when any check fails).
int execute(RunConfig& config);

}  // namespace slabtbc::cli
