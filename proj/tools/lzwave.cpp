#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "lzwave/pipeline.hpp"

using namespace lzwave;

namespace {

ExperimentConfig load_config(const std::string& config_path, const std::string& out_dir,
                             std::uint64_t seed_override, int threads) {
    json j = json::object();
    if (!config_path.empty()) {
        std::ifstream f(config_path);
        if (!f) throw std::runtime_error("cannot open config file " + config_path);
        f >> j;
    }
    ExperimentConfig cfg = config_from_json(j);
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (seed_override != 0) cfg.data_seed = seed_override;
    if (threads > 0) cfg.threads = threads;
    return cfg;
}

int report(const StageResult& r) {
    std::printf("%-20s %s  (%.2f s)\n", r.name.c_str(), r.pass ? "PASS" : "FAIL", r.elapsed_s);
    if (!r.note.empty()) std::printf("  note: %s\n", r.note.c_str());
    std::printf("  %s\n", r.metrics.dump().c_str());
    return r.pass ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"numerical verification toolkit for a 1D hyperbolic energy estimate with "
                 "log-Zygmund / log-Lipschitz principal coefficient"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    std::uint64_t seed = 0;
    int threads = 0;
    app.add_option("--config", config_path, "JSON config file");
    app.add_option("--out", out_dir, "report output directory");
    app.add_option("--seed", seed, "override the data seed");
    app.add_option("--threads", threads, "worker threads for table assembly");

    const std::vector<std::string> stages = {"analyze-coefficient", "verify-mollifier", "verify-lp",
                                             "verify-commutator",   "verify-schur",     "run-energy",
                                             "verify-theorem",      "run-pipeline"};
    for (const auto& s : stages) app.add_subcommand(s);

    CLI11_PARSE(app, argc, argv);

    try {
        ExperimentConfig cfg = load_config(config_path, out_dir, seed, threads);
        Pipeline pipe(cfg);
        const std::string cmd = app.get_subcommands().front()->get_name();
        if (cmd == "analyze-coefficient") return report(pipe.analyze_coefficient());
        if (cmd == "verify-mollifier") return report(pipe.verify_mollifier());
        if (cmd == "verify-lp") return report(pipe.verify_lp());
        if (cmd == "verify-commutator") return report(pipe.verify_commutator());
        if (cmd == "verify-schur") return report(pipe.verify_schur());
        if (cmd == "run-energy") return report(pipe.run_energy());
        if (cmd == "verify-theorem") return report(pipe.verify_theorem());
        if (cmd == "run-pipeline") {
            const json summary = pipe.run_all();
            for (const auto& s : summary.at("stages"))
                std::printf("%-20s %s  (%.2f s)\n", s.at("stage").get<std::string>().c_str(),
                            s.at("status").get<std::string>().c_str(), s.at("elapsed_s").get<double>());
            const bool ok = summary.at("all_pass").get<bool>();
            std::printf("pipeline: %s  (summary at %s/summary.json)\n", ok ? "PASS" : "FAIL",
                        cfg.out_dir.c_str());
            return ok ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 2;
}
