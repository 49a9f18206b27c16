// Command-line front end: ensemble runs for the three processes plus the
// deterministic verification suites.
//
// Exit codes: 0 success, 1 envelope-violation frequency above threshold,
// 2 parameter/config error, 3 I/O error.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "demlab/harness.hpp"

namespace {

using demlab::harness::EnsembleReport;
using demlab::harness::ExperimentConfig;
using demlab::harness::Process;

int finish(const EnsembleReport& report) {
    std::printf("replicas: %d  violation_frequency: %.4f  wall_clock: %.2fs\n",
                report.config.replicas, report.violation_frequency, report.wall_clock_sec);
    for (const auto& [var, mean] : report.mean_finals) {
        if (var.find("_plus") != std::string::npos || var.find("_minus") != std::string::npos)
            continue;
        std::printf("  mean %s = %.6g (stddev %.6g)\n", var.c_str(), mean,
                    report.stddev_finals.at(var));
    }
    return report.violation_frequency > report.config.max_violation_rate ? 1 : 0;
}

void add_common(CLI::App* cmd, ExperimentConfig& cfg) {
    cmd->add_option("--n", cfg.n, "scale parameter n")->required();
    cmd->add_option("--seeds", cfg.replicas, "number of replicas");
    cmd->add_option("--base-seed", cfg.base_seed, "base seed for the ensemble");
    cmd->add_option("--out", cfg.out_dir, "output directory");
    cmd->add_option("--stride", cfg.stride, "record every stride-th step (0 = auto)");
    cmd->add_option("--workers", cfg.workers, "worker threads (0 = hardware)");
    cmd->add_option("--max-violation-rate", cfg.max_violation_rate,
                    "violation frequency above which the exit code is 1");
    cmd->add_option("--plot-var", cfg.plot_var, "variable for plotdata.csv");
    // consumed before parsing (see expand_config); registered here for --help
    static std::string config_stub;
    cmd->add_option("--config", config_stub, "flat key=value config file; explicit flags win");
}

std::string trimmed(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

// Expands "--config FILE" into "--key=value" flags for every key in the file
// that is not already present on the command line, so explicit flags win.
// The file format is flat key=value with "#" comments.
std::vector<std::string> expand_config(std::vector<std::string> args) {
    std::string path;
    std::vector<std::string> out;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            path = args[++i];
        } else if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
        } else {
            out.push_back(args[i]);
        }
    }
    if (path.empty()) return out;

    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file " + path);
    std::string line;
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trimmed(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config file: expected key=value, got \"" + line + "\"");
        std::string key = trimmed(line.substr(0, eq));
        std::string value = trimmed(line.substr(eq + 1));
        if (key.empty()) throw std::invalid_argument("config file: empty key");
        std::string flag = "--" + key;
        bool overridden = std::any_of(out.begin(), out.end(), [&](const std::string& a) {
            return a == flag || a.rfind(flag + "=", 0) == 0;
        });
        if (!overridden) out.push_back(flag + "=" + value);
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"differential equation method laboratory"};
    app.require_subcommand(1);

    ExperimentConfig cfg;

    auto* bb_cmd = app.add_subcommand("balls-bins", "balls into bins occupancy process");
    std::string envelope = "selfcorrect";
    add_common(bb_cmd, cfg);
    bb_cmd->add_option("--m", cfg.m, "number of balls")->required();
    bb_cmd->add_option("--kappa", cfg.kappa, "track X_0..X_kappa");
    bb_cmd->add_option("--envelope", envelope, "basic|selfcorrect");
    bb_cmd->add_option("--alpha", cfg.alpha, "self-correct envelope parameter");

    auto* er_cmd = app.add_subcommand("er-components", "Erdos-Renyi component process");
    add_common(er_cmd, cfg);
    er_cmd->add_option("--c", cfg.c, "edge density: m = floor(c*n)")->required();
    er_cmd->add_option("--kappa", cfg.kappa, "track Y_1..Y_kappa");

    auto* gm_cmd = app.add_subcommand("matching", "random greedy matching on a d-regular graph");
    add_common(gm_cmd, cfg);
    gm_cmd->add_option("--d", cfg.d, "vertex degree")->required();
    gm_cmd->add_option("--gen", cfg.generator, "circulant|pairing");
    gm_cmd->add_option("--K", cfg.K, "envelope constant in s = K*sqrt(d log n)");
    gm_cmd->add_option("--graph", cfg.graph_file, "graph fixture file instead of a generator");

    auto* verify_cmd = app.add_subcommand("verify", "deterministic verification suites");
    std::string kind;
    int kmax = 12;
    std::uint64_t vseed = 1;
    verify_cmd->add_option("kind", kind, "identities|ode|drift-oracles")->required();
    verify_cmd->add_option("--kmax", kmax, "max k for the identity check");
    verify_cmd->add_option("--seed", vseed, "seed for randomized oracles");

    try {
        std::vector<std::string> args(argv + 1, argv + argc);
        args = expand_config(std::move(args));
        std::reverse(args.begin(), args.end());  // CLI11 consumes from the back
        app.parse(std::move(args));
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    }

    try {
        if (verify_cmd->parsed()) {
            auto summary = demlab::harness::verify_suite(kind, kmax, vseed);
            for (const auto& c : summary.cases)
                std::printf("%-40s %s  (err %.3g)\n", c.name.c_str(),
                            c.pass ? "PASS" : "FAIL", c.measured_error);
            return summary.all_pass() ? 0 : 1;
        }
        if (bb_cmd->parsed()) {
            cfg.process = Process::BallsBins;
            if (envelope == "basic")
                cfg.bb_variant = demlab::bb::EnvelopeVariant::Basic;
            else if (envelope == "selfcorrect")
                cfg.bb_variant = demlab::bb::EnvelopeVariant::SelfCorrect;
            else
                throw std::invalid_argument("unknown envelope " + envelope);
        } else if (er_cmd->parsed()) {
            cfg.process = Process::ErComponents;
        } else {
            cfg.process = Process::Matching;
        }
        return finish(demlab::harness::run_ensemble(cfg));
    } catch (const demlab::harness::IoError& e) {
        std::fprintf(stderr, "io error: %s\n", e.what());
        return 3;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
