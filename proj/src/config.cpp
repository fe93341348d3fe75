#include "slabtbc/config.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>

#include "slabtbc/io.hpp"

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace slabtbc::cli {

namespace {

using nlohmann::json;

void reject_unknown(const json& j, const std::vector<std::string>& allowed,
                    const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
            throw ConfigurationError("config: unknown key '" + it.key() + "' in " + where);
    }
}

Scenario parse_scenario(const std::string& s) {
    if (s == "pec-energy") return Scenario::PecEnergy;
    if (s == "tbc-reflection") return Scenario::TbcReflection;
    if (s == "oracle-compare") return Scenario::OracleCompare;
    if (s == "symbol-audit") return Scenario::SymbolAudit;
    if (s == "lemma-suite") return Scenario::LemmaSuite;
    if (s == "apriori-sweep") return Scenario::AprioriSweep;
    throw ConfigurationError("config: unknown scenario '" + s + "'");
}

LateralGrid parse_grid(const json& j) {
    reject_unknown(j, {"period_x", "period_y", "modes_x", "modes_y", "h1", "h2", "nz"}, "grid");
    return LateralGrid(j.at("period_x").get<double>(), j.at("period_y").get<double>(),
                       j.at("modes_x").get<int>(), j.at("modes_y").get<int>(),
                       j.at("h1").get<double>(), j.at("h2").get<double>(),
                       j.at("nz").get<int>());
}

stepper::SlabMedium parse_medium(const json& j, const LateralGrid& g) {
    reject_unknown(j, {"layered"}, "medium");
    const json& lay = j.at("layered");
    reject_unknown(lay, {"breakpoints", "eps", "mu"}, "medium.layered");
    sdomain::LayeredProfile profile(lay.at("breakpoints").get<std::vector<double>>(),
                                    lay.at("eps").get<std::vector<double>>(),
                                    lay.at("mu").get<std::vector<double>>());
    return stepper::SlabMedium::from_profile(g, profile);
}

stepper::SourceTerm parse_source(const json& j, const stepper::SlabMedium& med,
                                 bool require_h1) {
    reject_unknown(j,
                   {"type", "center", "width", "polarization", "amplitude", "pair_upward",
                    "temporal"},
                   "source");
    const std::string type = j.at("type").get<std::string>();
    scenarios::PulseSpec pulse;
    if (j.contains("center")) pulse.center = j.at("center").get<std::array<double, 3>>();
    if (j.contains("width")) pulse.width = j.at("width").get<std::array<double, 3>>();
    if (j.contains("polarization"))
        pulse.polarization = j.at("polarization").get<std::array<double, 3>>();
    if (j.contains("amplitude")) pulse.amplitude = j.at("amplitude").get<double>();

    const LateralGrid& g = med.grid();
    for (int d = 0; d < 3; ++d)
        if (!(pulse.width[d] > 0.0))
            throw ConfigurationError("config: source.width must be positive");
    if (pulse.center[2] - pulse.width[2] < g.h2() || pulse.center[2] + pulse.width[2] > g.h1())
        throw ConfigurationError(
            "config: source support violates the compact-support invariant (outside the slab)");

    if (type == "pulse-initial")
        return scenarios::make_pulse_initial(med, pulse, j.value("pair_upward", false));
    if (type == "solenoidal-initial") return scenarios::make_solenoidal_initial(med, pulse);
    if (type == "h0-initial") return scenarios::make_h0_initial(med, pulse);
    if (type == "current") {
        scenarios::CurrentSpec cs;
        cs.pulse = pulse;
        if (j.contains("temporal")) {
            const json& t = j.at("temporal");
            reject_unknown(t, {"frequency", "ramp_time", "phase"}, "source.temporal");
            cs.frequency = t.value("frequency", 1.0);
            cs.ramp_time = t.value("ramp_time", 0.5);
            const double phase = t.value("phase", 0.0);
            // (H1) requires J(.,0) = 0: without a ramp a phase-shifted
            // carrier starts hot.
            if (require_h1 && cs.ramp_time <= 0.0 && std::sin(phase) != 0.0)
                throw ConfigurationError(
                    "config: (H1) violation: temporal profile has J(.,0) != 0 on a TBC "
                    "scenario");
            if (cs.ramp_time <= 0.0 && std::sin(phase) != 0.0)
                throw ConfigurationError("config: temporal profile must vanish at t = 0");
        }
        return scenarios::make_current_source(med, cs);
    }
    throw ConfigurationError("config: unknown source.type '" + type + "'");
}

}  // namespace

RunConfig parse(const std::string& config_text) {
    json j;
    try {
        j = json::parse(config_text);
    } catch (const json::parse_error& e) {
        throw ConfigurationError(std::string("config: JSON syntax error: ") + e.what());
    }
    reject_unknown(j,
                   {"scenario", "grid", "medium", "source", "dt", "cfl_fraction", "steps",
                    "horizon_t", "generator", "energy_stride", "snapshot_stride", "seed",
                    "samples", "output_dir", "preset", "quick", "threads"},
                   "top level");
    RunConfig cfg;
    cfg.raw = j;
    cfg.hash = io::config_hash(j);
    cfg.scenario = parse_scenario(j.at("scenario").get<std::string>());
    cfg.seed = j.value("seed", std::uint64_t{20240601});
    cfg.audit_samples = j.value("samples", std::uint64_t{10000});
    cfg.output_dir = j.value("output_dir", std::string("."));
    cfg.quick = j.value("quick", false);
    cfg.threads = j.value("threads", 0);
    if (j.contains("generator")) {
        const std::string gen = j.at("generator").get<std::string>();
        if (gen == "BDF1")
            cfg.generator = cq::Generator::BDF1;
        else if (gen == "BDF2")
            cfg.generator = cq::Generator::BDF2;
        else
            throw ConfigurationError("config: generator must be BDF1 or BDF2");
    }
    if (j.contains("preset")) {
        const std::string p = j.at("preset").get<std::string>();
        if (p == "standard-weight")
            cfg.weight = spectral::TraceWeight::Standard;
        else if (p == "as-printed-weight")
            cfg.weight = spectral::TraceWeight::AsPrinted;
        else
            throw ConfigurationError("config: preset must be standard-weight or as-printed-weight");
    }
    cfg.energy_stride = j.value("energy_stride", 1);
    cfg.snapshot_stride = j.value("snapshot_stride", 0);
    if (cfg.energy_stride < 1 || cfg.snapshot_stride < 0)
        throw ConfigurationError("config: strides must be positive");

    const bool needs_fields =
        cfg.scenario == Scenario::PecEnergy || cfg.scenario == Scenario::TbcReflection;
    if (needs_fields) {
        cfg.grid = parse_grid(j.at("grid"));
        cfg.medium = parse_medium(j.at("medium"), *cfg.grid);
        const bool tbc = cfg.scenario != Scenario::PecEnergy;
        cfg.source = parse_source(j.at("source"), *cfg.medium, tbc);

        const double limit = cfg.medium->cfl_limit();
        if (j.contains("dt") && j.contains("cfl_fraction"))
            throw ConfigurationError("config: give either dt or cfl_fraction, not both");
        if (j.contains("dt"))
            cfg.dt = j.at("dt").get<double>();
        else
            cfg.dt = j.value("cfl_fraction", 0.5) * limit;
        if (!(cfg.dt > 0.0) || cfg.dt > limit)
            throw ConfigurationError(
                "config: dt violates the leapfrog stability bound (CFL)");
        if (j.contains("steps") && j.contains("horizon_t"))
            throw ConfigurationError("config: give either steps or horizon_t, not both");
        if (j.contains("steps"))
            cfg.steps = j.at("steps").get<int>();
        else if (j.contains("horizon_t"))
            cfg.steps = static_cast<int>(std::ceil(j.at("horizon_t").get<double>() / cfg.dt));
        if (cfg.steps < 0) throw ConfigurationError("config: steps must be >= 0");
    }
    return cfg;
}

namespace {

json base_summary(const RunConfig& cfg) {
    json s;
    s["config_hash"] = cfg.hash;
    s["scenario"] = cfg.raw.at("scenario");
    s["seed"] = cfg.seed;
    return s;
}

void write_outputs(const RunConfig& cfg, const json& summary, double wall_seconds,
                   const std::vector<verify::CheckResult>* results = nullptr) {
    namespace fs = std::filesystem;
    fs::create_directories(cfg.output_dir);
    io::write_text(cfg.output_dir + "/summary.json", summary.dump(2) + "\n");
    json timing;
    timing["wall_clock_seconds"] = wall_seconds;
    io::write_text(cfg.output_dir + "/timing.json", timing.dump(2) + "\n");
    if (results) {
        json arr = json::array();
        for (const auto& r : *results) arr.push_back(r.to_json());
        io::write_text(cfg.output_dir + "/checks.json", arr.dump(2) + "\n");
        io::write_text(cfg.output_dir + "/checks.txt", verify::summary_table(*results));
    }
}

int run_field_scenario(RunConfig& cfg, json& summary) {
    stepper::RunSpec spec;
    spec.closure = cfg.scenario == Scenario::PecEnergy ? stepper::BoundaryClosure::PEC
                                                       : stepper::BoundaryClosure::TBC;
    spec.dt = cfg.dt;
    spec.steps = cfg.steps;
    spec.generator = cfg.generator;
    spec.energy_stride = cfg.energy_stride;
    auto result = stepper::run(*cfg.medium, *cfg.source, spec);
    io::write_energy_csv(cfg.output_dir + "/energy.csv", result.report, cfg.hash);
    if (cfg.snapshot_stride > 0) {
        // Re-run with snapshot output (the run itself is deterministic).
        auto st = stepper::init(*cfg.medium, *cfg.source, cfg.dt, true);
        std::optional<stepper::TbcKernels> kernels;
        if (spec.closure == stepper::BoundaryClosure::TBC)
            kernels = stepper::make_boundary_kernels(*cfg.medium, cfg.dt, cfg.steps + 1,
                                                     cfg.generator);
        io::write_snapshot(cfg.output_dir + "/snapshot_000000.bin", st, *cfg.medium, cfg.hash);
        for (int n = 0; n < cfg.steps; ++n) {
            if (spec.closure == stepper::BoundaryClosure::PEC)
                stepper::step_pec(st, *cfg.medium, *cfg.source);
            else
                stepper::step_tbc(st, *cfg.medium, *cfg.source, *kernels);
            if ((n + 1) % cfg.snapshot_stride == 0) {
                char name[64];
                std::snprintf(name, sizeof(name), "/snapshot_%06d.bin", n + 1);
                io::write_snapshot(cfg.output_dir + name, st, *cfg.medium, cfg.hash);
            }
        }
    }
    summary["steps"] = cfg.steps;
    summary["dt"] = cfg.dt;
    summary["max_e1"] = result.max_e1;
    summary["final_e1"] = result.report.back().e1;
    summary["final_discrete_energy"] = result.report.back().discrete_energy;
    summary["boundary_work"] = result.report.back().boundary_work;
    summary["divergence_residual"] =
        stepper::divergence_residual(result.state, *cfg.medium);
    summary["medium_hash"] = io::medium_hash(*cfg.medium);
    summary["artifact"] = "energy.csv";
    return 0;
}

}  // namespace

int execute(RunConfig& cfg) {
#if defined(_OPENMP)
    if (cfg.threads > 0) omp_set_num_threads(cfg.threads);
#endif
    const auto t0 = std::chrono::steady_clock::now();
    int status = 0;
    json summary = base_summary(cfg);
    std::vector<verify::CheckResult> results;
    switch (cfg.scenario) {
        case Scenario::PecEnergy:
        case Scenario::TbcReflection: {
            status = run_field_scenario(cfg, summary);
            break;
        }
        case Scenario::SymbolAudit: {
            const symbols::ExteriorMedium med(1.0, 1.0, 1);
            auto audit = symbols::symbol_bound_audit(cfg.audit_samples, cfg.seed, med);
            io::write_text(cfg.output_dir + "/symbol_audit.json", audit.to_json() + "\n");
            summary["min_positivity_margin"] = audit.min_positivity_margin;
            summary["max_continuity_ratio"] = audit.max_continuity_ratio;
            status = (audit.min_positivity_margin >= -1e-12 &&
                      audit.max_continuity_ratio <= 1.0 + 1e-9)
                         ? 0
                         : 1;
            break;
        }
        case Scenario::LemmaSuite: {
            verify::SuiteOptions opt;
            opt.seed = cfg.seed;
            opt.weight = cfg.weight;
            opt.quick = cfg.quick;
            results = verify::run_suite(opt);
            for (const auto& r : results)
                if (!r.passed()) status = 1;
            summary["checks_passed"] = status == 0;
            break;
        }
        case Scenario::OracleCompare: {
            results.push_back(verify::check_oracle_agreement());
            if (!results.back().passed()) status = 1;
            break;
        }
        case Scenario::AprioriSweep: {
            results.push_back(verify::check_apriori(!cfg.quick));
            if (!results.back().passed()) status = 1;
            break;
        }
    }
    const auto dt = std::chrono::steady_clock::now() - t0;
    write_outputs(cfg, summary, std::chrono::duration<double>(dt).count(),
                  results.empty() ? nullptr : &results);
    return status;
}

}  // namespace slabtbc::cli
