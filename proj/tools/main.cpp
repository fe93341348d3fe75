// Scenario runner and data emitter for the slab Maxwell solver.
//
//   slabtbc run <config.json> [--out DIR] [--seed N] [--threads N] [--preset P]
//   slabtbc check <suite|check_id> [...]
//   slabtbc audit-symbols [--samples N] [...]

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "slabtbc/config.hpp"
#include "slabtbc/io.hpp"

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace {

struct CommonFlags {
    std::string out_dir;
    std::uint64_t seed = 0;
    int threads = 0;
    std::string preset = "standard-weight";
    bool quick = false;
};

void add_common(CLI::App* app, CommonFlags& f) {
    app->add_option("--out", f.out_dir, "output directory");
    app->add_option("--seed", f.seed, "override the RNG seed");
    app->add_option("--threads", f.threads, "cap the number of worker threads");
    app->add_option("--preset", f.preset, "trace-norm weight preset")
        ->check(CLI::IsMember({"standard-weight", "as-printed-weight"}));
    app->add_flag("--quick", f.quick, "reduced sample counts for smoke runs");
}

void apply_common(slabtbc::cli::RunConfig& cfg, const CommonFlags& f) {
    if (!f.out_dir.empty()) cfg.output_dir = f.out_dir;
    if (f.seed != 0) cfg.seed = f.seed;
    if (f.threads > 0) cfg.threads = f.threads;
    if (f.preset == "as-printed-weight") cfg.weight = slabtbc::spectral::TraceWeight::AsPrinted;
    if (f.quick) cfg.quick = true;
}

int cmd_run(const std::string& path, const CommonFlags& flags) {
    std::ifstream in(path);
    if (!in) {
        std::cerr << "error: cannot open config " << path << "\n";
        return 2;
    }
    std::stringstream ss;
    ss << in.rdbuf();
    auto cfg = slabtbc::cli::parse(ss.str());
    apply_common(cfg, flags);
    const int status = slabtbc::cli::execute(cfg);
    std::cout << "scenario " << cfg.raw.at("scenario").get<std::string>()
              << (status == 0 ? " completed" : " FAILED") << "; artifacts in "
              << cfg.output_dir << "\n";
    return status;
}

int cmd_check(const std::string& what, const CommonFlags& flags) {
    slabtbc::verify::SuiteOptions opt;
    if (flags.seed != 0) opt.seed = flags.seed;
    opt.quick = flags.quick;
    if (flags.preset == "as-printed-weight")
        opt.weight = slabtbc::spectral::TraceWeight::AsPrinted;
#if defined(_OPENMP)
    if (flags.threads > 0) omp_set_num_threads(flags.threads);
#endif
    std::vector<slabtbc::verify::CheckResult> results;
    if (what == "suite" || what == "lemma-suite") {
        results = slabtbc::verify::run_suite(opt);
    } else {
        results.push_back(slabtbc::verify::run_check(what, opt));
    }
    const std::string table = slabtbc::verify::summary_table(results);
    std::cout << table;
    if (!flags.out_dir.empty()) {
        std::filesystem::create_directories(flags.out_dir);
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& r : results) arr.push_back(r.to_json());
        slabtbc::io::write_text(flags.out_dir + "/checks.json", arr.dump(2) + "\n");
        slabtbc::io::write_text(flags.out_dir + "/checks.txt", table);
    }
    for (const auto& r : results)
        if (!r.passed()) return 1;
    return 0;
}

int cmd_audit(std::uint64_t samples, const CommonFlags& flags) {
    const slabtbc::symbols::ExteriorMedium med(1.0, 1.0, 1);
    const std::uint64_t seed = flags.seed != 0 ? flags.seed : 20240601;
    auto audit = slabtbc::symbols::symbol_bound_audit(samples, seed, med);
    const std::string out = audit.to_json() + "\n";
    if (!flags.out_dir.empty()) {
        std::filesystem::create_directories(flags.out_dir);
        slabtbc::io::write_text(flags.out_dir + "/symbol_audit.json", out);
    }
    std::cout << out;
    return (audit.min_positivity_margin >= -1e-12 && audit.max_continuity_ratio <= 1.0 + 1e-9)
               ? 0
               : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"spectral time-domain Maxwell slab solver with transparent boundaries"};
    app.require_subcommand(1);

    CommonFlags flags;
    std::string config_path, check_id;
    std::uint64_t samples = 10000;

    auto* run = app.add_subcommand("run", "run a scenario from a JSON config");
    run->add_option("config", config_path, "config JSON path")->required();
    add_common(run, flags);

    auto* check = app.add_subcommand("check", "run the verification suite or one check");
    check->add_option("id", check_id, "'suite' or a check id")->required();
    add_common(check, flags);

    auto* audit = app.add_subcommand("audit-symbols", "randomized capacity-symbol audit");
    audit->add_option("--samples", samples, "number of (xi, s) samples");
    add_common(audit, flags);

    CLI11_PARSE(app, argc, argv);
    try {
        if (run->parsed()) return cmd_run(config_path, flags);
        if (check->parsed()) return cmd_check(check_id, flags);
        if (audit->parsed()) return cmd_audit(samples, flags);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
